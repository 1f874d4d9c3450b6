"""Relabeling, clustering summaries and the density-recovery metrics."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Protocol, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid
from scipy.optimize import linear_sum_assignment
from scipy.special import logsumexp, xlogy

from . import settings
from .errors import InputError, NumericalError
from .model import Dataset, MixtureState, PosteriorDraws, component_log_densities, mixture_log_density
from .schemas import ComponentSummary, SummaryReport

logger = logging.getLogger(__name__)


class DensityOracle(Protocol):
    """A density that can be evaluated pointwise, with a box holding nearly all its mass."""

    dim: int

    def logpdf(self, points: np.ndarray) -> np.ndarray: ...

    def box(self, width: float = settings.KL_BOX_SD) -> List[Tuple[float, float]]: ...


@dataclass
class RelabeledDraws:
    """Draws after label permutation; ``permutations[t, h]`` is the new label of old label h."""

    draws: PosteriorDraws
    permutations: np.ndarray
    classification: np.ndarray
    cost_history: List[float] = field(default_factory=list)

    @property
    def sweeps(self) -> int:
        return len(self.cost_history)


def _points(data: Dataset | np.ndarray | None) -> np.ndarray:
    if data is None:
        return np.zeros((0, 1))
    values = data.values if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    return values[:, None] if values.ndim == 1 else values


def classification_probabilities(draws: PosteriorDraws, data: Dataset | np.ndarray) -> np.ndarray:
    """P(t)[i, h] for every retained draw, shape (T, n, k)."""

    points = _points(data)
    out = np.zeros((len(draws), points.shape[0], draws.k))
    if points.shape[0] == 0:
        return out
    with np.errstate(divide="ignore"):
        log_w = np.log(draws.weights)
    for t in range(len(draws)):
        log_p = component_log_densities(draws.means[t], draws.variances[t], points) + log_w[t][None, :]
        out[t] = np.exp(log_p - logsumexp(log_p, axis=1, keepdims=True))
    return out


def apply_permutations(draws: PosteriorDraws, permutations: np.ndarray) -> PosteriorDraws:
    """Move old label h of draw t to ``permutations[t, h]`` in every per-component field."""

    t_index = np.arange(len(draws))[:, None]
    weights = np.empty_like(draws.weights)
    means = np.empty_like(draws.means)
    variances = np.empty_like(draws.variances)
    weights[t_index, permutations] = draws.weights
    means[t_index, permutations] = draws.means
    variances[t_index, permutations] = draws.variances
    allocations = np.take_along_axis(permutations, draws.allocations, axis=1) if draws.n else draws.allocations.copy()
    return PosteriorDraws(
        iterations=draws.iterations.copy(),
        weights=weights,
        means=means,
        variances=variances,
        allocations=allocations,
        log_h=draws.log_h.copy(),
        chains=draws.chains.copy(),
    )


def _permute_probabilities(probs: np.ndarray, permutations: np.ndarray) -> np.ndarray:
    out = np.empty_like(probs)
    t_index = np.arange(probs.shape[0])[:, None]
    out.transpose(0, 2, 1)[t_index, permutations] = probs.transpose(0, 2, 1)
    return out


def _assignment_costs(probs: np.ndarray, q: np.ndarray) -> np.ndarray:
    """cost[t, h, l] = sum_i P(t)[i, h] * (log P(t)[i, h] - log Q[i, l])."""

    log_q = np.log(np.maximum(q, settings.DENSITY_FLOOR))
    entropy_term = xlogy(probs, probs).sum(axis=1)
    return entropy_term[:, :, None] - np.einsum("tih,il->thl", probs, log_q)


def relabel_stephens(
    draws: PosteriorDraws,
    data: Dataset | np.ndarray,
    max_sweeps: int = settings.RELABEL_MAX_SWEEPS,
    tol: float = settings.RELABEL_TOL,
) -> RelabeledDraws:
    """Stephens' Kullback-Leibler relabeling.

    Alternates one optimal label assignment per draw with the average
    classification matrix Q of the permuted draws, until no permutation
    changes or the total cost drops by less than ``tol``.
    """

    probs = classification_probabilities(draws, data)
    t, n, k = probs.shape
    permutations = np.tile(np.arange(k), (t, 1))
    if n == 0 or t == 0:
        return RelabeledDraws(draws, permutations, np.zeros((n, k)), [])

    history: List[float] = []
    # the first draw is the initial reference
    q = probs[0]
    for sweep in range(1, max_sweeps + 1):
        costs = _assignment_costs(probs, q)
        before = float(np.take_along_axis(costs, permutations[:, :, None], axis=2).sum())
        updated = np.empty_like(permutations)
        for index in range(t):
            rows, cols = linear_sum_assignment(costs[index])
            updated[index, rows] = cols
        after = float(np.take_along_axis(costs, updated[:, :, None], axis=2).sum())
        history.append(after)
        changed = not np.array_equal(updated, permutations)
        permutations = updated
        q = _permute_probabilities(probs, permutations).mean(axis=0)
        logger.debug("relabel sweep %d: cost %.6g -> %.6g", sweep, before, after)
        if not changed or before - after < tol:
            break
    logger.info("relabeling converged after %d sweeps (cost %.6g)", len(history), history[-1])
    return RelabeledDraws(apply_permutations(draws, permutations), permutations, q, history)


# ---------------------------------------------------------------------------
# clustering summaries
# ---------------------------------------------------------------------------


def posterior_similarity(allocations: np.ndarray, k: Optional[int] = None) -> np.ndarray:
    """S[i, j] = fraction of draws with z_i = z_j."""

    allocations = np.atleast_2d(np.asarray(allocations, dtype=int))
    t, n = allocations.shape
    k = int(allocations.max()) + 1 if k is None else k
    one_hot = np.zeros((n, t * k))
    one_hot[np.repeat(np.arange(n), t), (np.tile(np.arange(t), n) * k + allocations.T.reshape(-1))] = 1.0
    return one_hot @ one_hot.T / t


def similarity_misclassification(relabeled: RelabeledDraws | PosteriorDraws, truth_labels: Optional[Sequence[int]]) -> float:
    """Mean over pairs i < j of |S_ij - T_ij|, T the true co-membership matrix."""

    if truth_labels is None:
        raise InputError("misclassification needs the true labels of the data")
    draws = relabeled.draws if isinstance(relabeled, RelabeledDraws) else relabeled
    labels = np.asarray(truth_labels)
    if labels.shape != (draws.n,):
        raise InputError(f"got {labels.shape[0]} labels for {draws.n} observations")
    if draws.n < 2:
        return 0.0
    similarity = posterior_similarity(draws.allocations, draws.k)
    truth = (labels[:, None] == labels[None, :]).astype(float)
    rows, cols = np.triu_indices(draws.n, 1)
    return float(np.mean(np.abs(similarity[rows, cols] - truth[rows, cols])))


def point_allocation(relabeled: RelabeledDraws) -> np.ndarray:
    """Modal relabeled component of each observation (0-based)."""

    draws = relabeled.draws
    if draws.n == 0:
        return np.zeros(0, dtype=int)
    counts = (draws.allocations[:, :, None] == np.arange(draws.k)[None, None, :]).sum(axis=0)
    return np.argmax(counts, axis=1)


def sum_extra_weights(weights: np.ndarray | Sequence[float], k0: int) -> np.ndarray | float:
    """Sum of the k - k0 smallest weights, per row for a (T, k) array."""

    weights = np.asarray(weights, dtype=float)
    k = weights.shape[-1]
    if not 1 <= k0 <= k:
        raise InputError(f"k0 must lie in [1, {k}], got {k0}")
    out = np.sort(weights, axis=-1)[..., : k - k0].sum(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# density recovery
# ---------------------------------------------------------------------------


def _axes(box: Sequence[Tuple[float, float]], nodes: int) -> List[np.ndarray]:
    return [np.linspace(lo, hi, nodes + 1) for lo, hi in box]


def _mesh(axes: Sequence[np.ndarray]) -> np.ndarray:
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1)


def _integrate(values: np.ndarray, axes: Sequence[np.ndarray]) -> float:
    out = values.reshape([a.size for a in axes])
    for axis in reversed(axes):
        out = trapezoid(out, axis, axis=-1)
    return float(out)


def _default_nodes(dim: int) -> int:
    if dim == 1:
        return settings.KL_NODES_1D
    if dim == 2:
        return settings.KL_NODES_2D
    raise InputError(f"quadrature is implemented for one and two dimensions, got {dim}")


def _kl_on_grid(log_f0: np.ndarray, log_fhat: np.ndarray, axes: Sequence[np.ndarray]) -> Tuple[float, float]:
    """KL on the full grid and on every second node, for the Richardson check."""

    f0 = np.exp(log_f0)
    integrand = f0 * (log_f0 - np.maximum(log_fhat, np.log(settings.DENSITY_FLOOR)))
    integrand = np.where(f0 > 0, integrand, 0.0)
    if not np.all(np.isfinite(integrand)):
        raise NumericalError(
            "non-finite KL integrand",
            details={"bad_nodes": int(np.sum(~np.isfinite(integrand))), "grid": [[a[0], a[-1], a.size] for a in axes]},
        )
    fine = _integrate(integrand, axes)
    shape = [a.size for a in axes]
    coarse_values = integrand.reshape(shape)[tuple(slice(None, None, 2) for _ in axes)]
    coarse = _integrate(coarse_values, [a[::2] for a in axes])
    return fine, coarse


def kl_divergence(
    truth: DensityOracle,
    log_density,
    nodes: Optional[int] = None,
    rtol: float = settings.KL_RTOL,
) -> float:
    """KL(f0, f) for one log-density callable, refining the grid until the Richardson check passes."""

    nodes = nodes or _default_nodes(truth.dim)
    max_refine = 3 if truth.dim == 1 else 1
    box = truth.box()
    for attempt in range(max_refine + 1):
        axes = _axes(box, nodes)
        points = _mesh(axes)
        fine, coarse = _kl_on_grid(truth.logpdf(points), log_density(points), axes)
        # trapezoid error is O(h^2): extrapolate and compare against the fine value
        extrapolated = fine + (fine - coarse) / 3.0
        if abs(extrapolated - fine) <= rtol * max(abs(fine), 1e-12):
            return max(fine, 0.0)
        nodes *= 2
    logger.warning("KL quadrature did not reach rtol=%g (last estimate %.6g)", rtol, fine)
    return max(fine, 0.0)


def kl_to_truth(
    draws: PosteriorDraws | MixtureState,
    truth: DensityOracle,
    nodes: Optional[int] = None,
) -> np.ndarray:
    """KL(f0, f_t) for every retained draw (or a single state)."""

    if isinstance(draws, MixtureState):
        weights, means, variances = draws.weights[None], draws.means[None], draws.variances[None]
    else:
        weights, means, variances = draws.weights, draws.means, draws.variances
    if means.shape[2] != truth.dim:
        raise InputError(f"draws have dimension {means.shape[2]}, truth has {truth.dim}")
    return np.array(
        [
            kl_divergence(truth, lambda x, t=t: mixture_log_density(weights[t], means[t], variances[t], x), nodes)
            for t in range(weights.shape[0])
        ]
    )


def _mean_log_density(draws: PosteriorDraws, points: np.ndarray) -> np.ndarray:
    per_draw = np.stack(
        [mixture_log_density(draws.weights[t], draws.means[t], draws.variances[t], points) for t in range(len(draws))]
    )
    return logsumexp(per_draw, axis=0) - np.log(len(draws))


def kl_of_mean_density(draws: PosteriorDraws, truth: DensityOracle, nodes: Optional[int] = None) -> float:
    """KL(f0, posterior-mean density), as opposed to the mean of per-draw KLs."""

    return kl_divergence(truth, lambda x: _mean_log_density(draws, x), nodes)


def density_grid(
    draws: PosteriorDraws,
    box: Sequence[Tuple[float, float]],
    nodes: int = 200,
    truth: Optional[DensityOracle] = None,
) -> pd.DataFrame:
    """Posterior-mean density with 5% / 95% pointwise bands on a regular grid."""

    if len(box) != draws.m:
        raise InputError(f"box has {len(box)} dimensions, draws have {draws.m}")
    points = _mesh([np.linspace(lo, hi, nodes) for lo, hi in box])
    per_draw = np.exp(
        np.stack([mixture_log_density(draws.weights[t], draws.means[t], draws.variances[t], points) for t in range(len(draws))])
    )
    frame = pd.DataFrame({f"y{d + 1}": points[:, d] for d in range(draws.m)})
    frame["density"] = per_draw.mean(axis=0)
    frame["lower"] = np.quantile(per_draw, 0.05, axis=0)
    frame["upper"] = np.quantile(per_draw, 0.95, axis=0)
    if truth is not None:
        frame["truth"] = np.exp(truth.logpdf(points))
    return frame


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


def summarize(
    relabeled: RelabeledDraws,
    truth: Optional[DensityOracle] = None,
    k0: Optional[int] = None,
    labels: Optional[Sequence[int]] = None,
) -> SummaryReport:
    """Posterior means and sds per component, ordered by decreasing mean weight."""

    draws = relabeled.draws
    if len(draws) == 0:
        raise InputError("no retained draws to summarize")
    sigmas = np.sqrt(draws.variances)
    weight_mean = draws.weights.mean(axis=0)
    order = np.argsort(-weight_mean, kind="stable")
    components = [
        ComponentSummary(
            label=int(h) + 1,
            weight_mean=float(weight_mean[h]),
            weight_sd=float(draws.weights[:, h].std()),
            mean_mean=draws.means[:, h].mean(axis=0).tolist(),
            mean_sd=draws.means[:, h].std(axis=0).tolist(),
            sigma_mean=sigmas[:, h].mean(axis=0).tolist(),
            sigma_sd=sigmas[:, h].std(axis=0).tolist(),
        )
        for h in order
    ]
    report = SummaryReport(
        draws=len(draws),
        k=draws.k,
        m=draws.m,
        components=components,
        relabel_sweeps=relabeled.sweeps,
        relabel_cost=relabeled.cost_history,
    )
    updates = {}
    if truth is not None:
        kl = kl_to_truth(draws, truth)
        updates.update(kl_mean=float(kl.mean()), kl_sd=float(kl.std()), kl_of_mean_density=kl_of_mean_density(draws, truth))
    if labels is not None and draws.n:
        updates["misclass"] = similarity_misclassification(relabeled, labels)
    if k0 is not None:
        extra = np.clip(sum_extra_weights(draws.weights, k0), 0.0, 1.0)
        updates.update(k0=k0, extra_weight_mean=float(np.mean(extra)), extra_weight_sd=float(np.std(extra)))
    return report.model_copy(update=updates)


__all__ = [
    "DensityOracle",
    "RelabeledDraws",
    "classification_probabilities",
    "apply_permutations",
    "relabel_stephens",
    "posterior_similarity",
    "similarity_misclassification",
    "point_allocation",
    "sum_extra_weights",
    "kl_divergence",
    "kl_to_truth",
    "kl_of_mean_density",
    "density_grid",
    "summarize",
]
