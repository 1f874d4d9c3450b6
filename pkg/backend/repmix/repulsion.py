"""Pairwise distances, the repulsion function g and the combiners h.

Everything is evaluated on the log scale: ``log g(d) = -tau * d**-nu`` with
``log g(0) = -inf``. The normalizing constant of the repulsive prior is never
needed; consumers only use ratios and thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence, Tuple

import numpy as np
from scipy import stats

from .errors import InputError
from .model import Component
from .schemas import BasePrior, Combiner, RepulsionCase, RepulsionSpec


@dataclass(frozen=True)
class PairSet:
    """Index set A = {(s, j): j < s} of a k-component configuration."""

    k: int

    def __len__(self) -> int:
        return self.k * (self.k - 1) // 2

    def __iter__(self) -> Iterator[Tuple[int, int]]:
        rows, cols = self.indices()
        return iter(zip(rows.tolist(), cols.tolist()))

    def indices(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.tril_indices(self.k, -1)


def _case(spec_or_case: RepulsionSpec | RepulsionCase | str) -> RepulsionCase:
    if isinstance(spec_or_case, RepulsionSpec):
        return spec_or_case.case
    return RepulsionCase(spec_or_case)


def kernel_distance(mean1: np.ndarray, var1: np.ndarray, mean2: np.ndarray, var2: np.ndarray) -> np.ndarray:
    """Symmetric Kullback-Leibler distance of diagonal Gaussians, reduced over the last axis."""

    diff2 = (mean1 - mean2) ** 2
    return np.sum(var1 / var2 + var2 / var1 - 2.0 + diff2 * (1.0 / var1 + 1.0 / var2), axis=-1)


def location_distance(mean1: np.ndarray, mean2: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum((mean1 - mean2) ** 2, axis=-1))


def distance(spec: RepulsionSpec | RepulsionCase | str, c1: Component, c2: Component) -> float:
    if c1.dim != c2.dim:
        raise InputError(f"components have dimensions {c1.dim} and {c2.dim}")
    if _case(spec) is RepulsionCase.FULL:
        return float(kernel_distance(c1.mean, c1.var, c2.mean, c2.var))
    return float(location_distance(c1.mean, c2.mean))


def pairwise_distances(spec: RepulsionSpec | RepulsionCase | str, means: np.ndarray, variances: np.ndarray) -> np.ndarray:
    """Distances for every pair in A; accepts (k, m) or batched (B, k, m) arrays.

    Returns shape (|A|,) or (B, |A|), pairs ordered as ``PairSet.indices``.
    """

    k = means.shape[-2]
    rows, cols = PairSet(k).indices()
    mean_s, mean_j = means[..., rows, :], means[..., cols, :]
    if _case(spec) is RepulsionCase.FULL:
        return kernel_distance(mean_s, variances[..., rows, :], mean_j, variances[..., cols, :])
    return location_distance(mean_s, mean_j)


def distance_matrix(spec: RepulsionSpec | RepulsionCase | str, means: np.ndarray, variances: np.ndarray) -> np.ndarray:
    k = means.shape[0]
    rows, cols = PairSet(k).indices()
    matrix = np.zeros((k, k))
    values = pairwise_distances(spec, means, variances)
    matrix[rows, cols] = values
    matrix[cols, rows] = values
    return matrix


def log_g(spec: RepulsionSpec, d: np.ndarray | float) -> np.ndarray | float:
    d = np.asarray(d, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        out = np.where(d > 0, -spec.tau * np.power(np.where(d > 0, d, 1.0), -float(spec.nu)), -np.inf)
    return float(out) if out.ndim == 0 else out


def g_repulsion(spec: RepulsionSpec, d: np.ndarray | float) -> np.ndarray | float:
    """g(d) = exp(-tau d^-nu), with the limit value g(0) = 0."""

    if np.any(np.asarray(d) < 0):
        raise InputError("distances must be non-negative")
    return np.exp(log_g(spec, d))


def g_inverse_log(spec: RepulsionSpec, log_u: np.ndarray | float) -> np.ndarray | float:
    """The distance d with log g(d) = log_u; 0 for log_u = -inf, +inf for log_u = 0."""

    log_u = np.asarray(log_u, dtype=float)
    if np.any(log_u > 0):
        raise InputError("log u must be non-positive")
    with np.errstate(divide="ignore"):
        out = np.power(spec.tau / np.abs(log_u), 1.0 / spec.nu)
    return float(out) if out.ndim == 0 else out


def g_inverse(spec: RepulsionSpec, u: np.ndarray | float) -> np.ndarray | float:
    """d = (tau / -ln u)^(1/nu), the unique d with g(d) = u, for u in (0, 1)."""

    u_arr = np.asarray(u, dtype=float)
    if np.any(~(u_arr > 0) | ~(u_arr < 1)):
        raise InputError(f"g_inverse needs u in (0, 1), got {u!r}")
    return g_inverse_log(spec, np.log(u_arr))


def combine_log(combiner: Combiner, log_terms: np.ndarray) -> np.ndarray | float:
    """Aggregate per-pair log g over the last axis; an empty pair set gives log 1 = 0."""

    if log_terms.shape[-1] == 0:
        out = np.zeros(log_terms.shape[:-1])
    elif Combiner(combiner) is Combiner.PRODUCT:
        out = np.sum(log_terms, axis=-1)
    else:
        out = np.min(log_terms, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def log_h(spec: RepulsionSpec, means: np.ndarray, variances: np.ndarray) -> np.ndarray | float:
    return combine_log(spec.combiner, log_g(spec, pairwise_distances(spec, means, variances)))


def h_combine(spec: RepulsionSpec, components: Sequence[Component]) -> float:
    """Product or minimum of g over all pairs; 1 for a single component."""

    if not components:
        raise InputError("h needs at least one component")
    means = np.stack([c.mean for c in components])
    variances = np.stack([c.var for c in components])
    return float(np.exp(log_h(spec, means, variances)))


def log_base_density(prior: BasePrior, means: np.ndarray, variances: np.ndarray) -> np.ndarray | float:
    """sum_j log g0(gamma_j): normal locations, inverse-gamma variances per dimension."""

    log_xi = stats.norm.logpdf(means, loc=prior.m0_array, scale=np.sqrt(prior.v0_array))
    log_psi = stats.invgamma.logpdf(variances, prior.a0, scale=prior.b0_array)
    out = np.sum(log_xi + log_psi, axis=(-2, -1))
    return float(out) if np.ndim(out) == 0 else out


def log_prior_unnormalized(spec: RepulsionSpec, prior: BasePrior, components: Sequence[Component]) -> float:
    """sum_j log g0(gamma_j) + log h(gamma), -inf when h = 0."""

    means = np.stack([c.mean for c in components])
    variances = np.stack([c.var for c in components])
    value = log_base_density(prior, means, variances) + log_h(spec, means, variances)
    return float(value)


def prior_surface(spec: RepulsionSpec, prior: BasePrior, grid: np.ndarray) -> np.ndarray:
    """Unnormalized log prior of two 1-D locations over ``grid x grid``.

    Only locations enter, so the variance factor is the constant psi evaluated at b0.
    """

    if prior.dim != 1:
        raise InputError("prior surfaces are defined for one-dimensional locations")
    grid = np.asarray(grid, dtype=float)
    mu1, mu2 = np.meshgrid(grid, grid, indexing="ij")
    means = np.stack([mu1, mu2], axis=-1)[..., None]
    variances = np.broadcast_to(prior.b0_array, means.shape)
    location_spec = spec.model_copy(update={"case": RepulsionCase.LOCATION})
    return log_base_density(prior, means, variances) + log_h(location_spec, means, variances)


__all__ = [
    "PairSet",
    "distance",
    "pairwise_distances",
    "distance_matrix",
    "kernel_distance",
    "location_distance",
    "log_g",
    "g_repulsion",
    "g_inverse",
    "g_inverse_log",
    "combine_log",
    "log_h",
    "h_combine",
    "log_base_density",
    "log_prior_unnormalized",
    "prior_surface",
]
