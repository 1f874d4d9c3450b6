"""Entry-point for the repmix command line (``python main.py serve`` runs the API with Uvicorn)."""

from __future__ import annotations

import sys

from repmix.cli import main


if __name__ == "__main__":
    sys.exit(main())
