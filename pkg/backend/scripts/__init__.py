"""Maintenance scripts: dataset download and full experiment reproduction."""
