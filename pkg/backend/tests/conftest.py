"""Shared fixtures; progress bars are silenced and outputs go to a temporary tree."""

from __future__ import annotations

import os
import tempfile

os.environ.setdefault("REPMIX_PROGRESS", "0")
os.environ.setdefault("REPMIX_OUT_DIR", tempfile.mkdtemp(prefix="repmix-runs-"))
os.environ.setdefault("REPMIX_DATA_DIR", tempfile.mkdtemp(prefix="repmix-data-"))

from typing import Callable, Optional, Sequence

import numpy as np
import pytest

from repmix.model import PosteriorDraws
from repmix.schemas import BasePrior, McmcConfig


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def standard_prior() -> BasePrior:
    return BasePrior.standard(1)


@pytest.fixture
def short_mcmc() -> McmcConfig:
    return McmcConfig(iterations=60, burn_in=20, thin=2, seed=7)


@pytest.fixture
def make_draws() -> Callable[..., PosteriorDraws]:
    """Build PosteriorDraws from (T, k) weights and (T, k, m) means/variances."""

    def build(
        weights: Sequence,
        means: Sequence,
        variances: Sequence,
        allocations: Optional[Sequence] = None,
    ) -> PosteriorDraws:
        weights = np.asarray(weights, dtype=float)
        means = np.asarray(means, dtype=float)
        variances = np.asarray(variances, dtype=float)
        if means.ndim == 2:
            means, variances = means[..., None], variances[..., None]
        t = weights.shape[0]
        alloc = np.zeros((t, 0), dtype=int) if allocations is None else np.asarray(allocations, dtype=int)
        return PosteriorDraws(
            iterations=np.arange(1, t + 1),
            weights=weights,
            means=means,
            variances=variances,
            allocations=alloc,
            log_h=np.zeros(t),
        )

    return build


@pytest.fixture
def two_clusters(rng) -> np.ndarray:
    """200 points around -10 and 200 around +10, unit spread."""

    return np.concatenate([rng.normal(-10.0, 1.0, 200), rng.normal(10.0, 1.0, 200)])[:, None]
