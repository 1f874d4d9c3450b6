"""Bayesian finite mixtures with repulsive priors on the component parameters."""

__version__ = "0.1.0"

__all__ = [
    "settings",
    "schemas",
    "model",
    "repulsion",
    "calibration",
    "intervals",
    "sampler",
    "postprocess",
    "synthdata",
    "harness",
    "validator",
]
