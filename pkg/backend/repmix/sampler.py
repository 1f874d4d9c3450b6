"""Slice-sampling Gibbs sampler for over-fitted mixtures under a repulsive prior.

One iteration updates, in this order: the slice levels, the allocations, the
weights, then every component coordinate by coordinate (location first, then
scale). Each coordinate is drawn exactly from its conjugate conditional
restricted to the region where all pairwise repulsion terms stay above their
slice levels.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import logsumexp
from tenacity import retry, retry_if_exception_type, stop_after_attempt
from tqdm import tqdm

from . import settings
from .calibration import BATCH, sample_repulsive_configurations
from .errors import CalibrationError, InitializationError, InputError, InvariantViolation
from .intervals import AllowedSet, InverseGammaLaw, NormalLaw, sample_truncated
from .model import Dataset, MixtureState, PosteriorDraws, SliceVariables, component_log_densities, sample_base
from .repulsion import PairSet, g_inverse_log, log_g, log_h, pairwise_distances
from .schemas import BasePrior, Combiner, McmcConfig, MixtureConfig, RepulsionCase, RepulsionSpec

logger = logging.getLogger(__name__)


def _as_points(data: Dataset | np.ndarray | None, m: int) -> np.ndarray:
    if data is None:
        return np.zeros((0, m))
    values = data.values if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if values.shape[1] != m:
        raise InputError(f"data has dimension {values.shape[1]}, prior has {m}")
    return values


# ---------------------------------------------------------------------------
# slice levels
# ---------------------------------------------------------------------------


def update_slice(state: MixtureState, spec: RepulsionSpec, rng: np.random.Generator) -> SliceVariables:
    """Fresh slice levels given the current components.

    Min combiner: log u = log h - E, one level shared by all pairs. Product
    combiner: log u_sj = log g(d_sj) - E_sj per pair. E ~ Exp(1), so u is
    uniform below its bound.
    """

    k = state.k
    levels = np.full((k, k), -np.inf)
    rows, cols = PairSet(k).indices()
    log_terms = np.atleast_1d(log_g(spec, pairwise_distances(spec, state.means, state.variances)))
    if rows.size and not np.all(np.isfinite(log_terms)) and spec.combiner is Combiner.PRODUCT:
        raise InvariantViolation("h(gamma) = 0 at slice update", details={"log_g": log_terms.tolist()})
    if spec.combiner is Combiner.MIN:
        current = float(log_terms.min()) if rows.size else 0.0
        if not math.isfinite(current):
            raise InvariantViolation("h(gamma) = 0 at slice update", details={"log_h": current})
        shared = current - float(rng.standard_exponential())
        levels[rows, cols] = shared
        levels[cols, rows] = shared
    else:
        pair_levels = log_terms - rng.standard_exponential(rows.size)
        levels[rows, cols] = pair_levels
        levels[cols, rows] = pair_levels
    return SliceVariables(spec.combiner, levels)


def slice_satisfied(state: MixtureState, spec: RepulsionSpec) -> bool:
    """True when every pair term lies strictly above its slice level."""

    rows, cols = PairSet(state.k).indices()
    if not rows.size:
        return True
    log_terms = np.atleast_1d(log_g(spec, pairwise_distances(spec, state.means, state.variances)))
    levels = state.slice.log_levels[rows, cols]
    active = np.isfinite(levels)
    return bool(np.all(log_terms[active] > levels[active]) and np.all(np.isfinite(log_terms)))


# ---------------------------------------------------------------------------
# allocations and weights
# ---------------------------------------------------------------------------


def allocation_probabilities(state: MixtureState, data: np.ndarray) -> np.ndarray:
    """P(z_i = h | y_i, p, gamma) for every observation, shape (n, k)."""

    with np.errstate(divide="ignore"):
        log_w = np.log(state.weights)
    log_p = component_log_densities(state.means, state.variances, data) + log_w[None, :]
    return np.exp(log_p - logsumexp(log_p, axis=1, keepdims=True))


def update_allocations(state: MixtureState, data: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = data.shape[0]
    if n == 0:
        return np.zeros(0, dtype=int)
    probs = allocation_probabilities(state, data)
    draws = (np.cumsum(probs, axis=1) < rng.random(n)[:, None]).sum(axis=1)
    last_positive = state.k - 1 - np.argmax(probs[:, ::-1] > 0, axis=1)
    return np.minimum(draws, last_positive).astype(int)


def update_weights(state: MixtureState, cfg: MixtureConfig, rng: np.random.Generator) -> np.ndarray:
    """p ~ Dirichlet(alpha + counts)."""

    concentration = cfg.alpha_array + np.bincount(state.allocations, minlength=state.k)
    weights = rng.dirichlet(concentration)
    if not np.all(np.isfinite(weights)) or weights.sum() <= 0:
        # tiny concentrations: Gamma(a) = Gamma(a + 1) * U^(1/a), kept in log space
        log_gamma = np.log(rng.gamma(concentration + 1.0)) + np.log(rng.random(state.k)) / concentration
        weights = np.exp(log_gamma - logsumexp(log_gamma))
    return weights / weights.sum()


# ---------------------------------------------------------------------------
# allowed sets
# ---------------------------------------------------------------------------


def _kernel_terms(mean_j, var_j, mean_s, var_s) -> np.ndarray:
    """Per-dimension summands of the symmetric Kullback-Leibler distance."""

    diff2 = (mean_j - mean_s) ** 2
    return var_j / var_s + var_s / var_j - 2.0 + diff2 * (1.0 / var_j + 1.0 / var_s)


def _thresholds(state: MixtureState, spec: RepulsionSpec, j: int, slice_vars: Optional[SliceVariables]) -> np.ndarray:
    levels = (slice_vars or state.slice).log_levels[j]
    return np.atleast_1d(g_inverse_log(spec, levels))


def allowed_set_location(
    state: MixtureState,
    spec: RepulsionSpec,
    j: int,
    dim: int,
    slice_vars: Optional[SliceVariables] = None,
) -> AllowedSet:
    """Values of mu_j[dim] keeping d(gamma_s, gamma_j) above its threshold for every s != j."""

    radii = _thresholds(state, spec, j, slice_vars)
    mean_j, var_j = state.means[j], state.variances[j]
    excluded: List[Tuple[float, float]] = []
    for s in range(state.k):
        r = float(radii[s])
        if s == j or r <= 0:
            continue
        mean_s, var_s = state.means[s], state.variances[s]
        centre = float(mean_s[dim])
        if spec.case is RepulsionCase.LOCATION:
            others = np.delete((mean_j - mean_s) ** 2, dim).sum()
            half_width2 = r * r - others
            if half_width2 > 0:
                w = math.sqrt(half_width2)
                excluded.append((centre - w, centre + w))
        else:
            terms = _kernel_terms(mean_j, var_j, mean_s, var_s)
            base = np.delete(terms, dim).sum() + var_j[dim] / var_s[dim] + var_s[dim] / var_j[dim] - 2.0
            curvature = 1.0 / var_j[dim] + 1.0 / var_s[dim]
            if r > base:
                w = math.sqrt((r - base) / curvature)
                excluded.append((centre - w, centre + w))
    return AllowedSet.complement(excluded)


def allowed_set_scale(
    state: MixtureState,
    spec: RepulsionSpec,
    j: int,
    dim: int,
    slice_vars: Optional[SliceVariables] = None,
) -> AllowedSet:
    """Values of sigma2_j[dim] keeping the kernel distance above threshold; full-kernel case only.

    With x the variance, each pair constraint reads a x + b / x + c > r, i.e.
    a x^2 + (c - r) x + b > 0 on x > 0.
    """

    if spec.case is not RepulsionCase.FULL:
        raise InputError("scale constraints exist only for the full-kernel distance")
    radii = _thresholds(state, spec, j, slice_vars)
    mean_j, var_j = state.means[j], state.variances[j]
    excluded: List[Tuple[float, float]] = []
    for s in range(state.k):
        r = float(radii[s])
        if s == j or r <= 0:
            continue
        mean_s, var_s = state.means[s], state.variances[s]
        v_s = float(var_s[dim])
        delta2 = float((mean_j[dim] - mean_s[dim]) ** 2)
        a = 1.0 / v_s
        b = v_s + delta2
        c = float(np.delete(_kernel_terms(mean_j, var_j, mean_s, var_s), dim).sum()) - 2.0 + delta2 / v_s
        gap = r - c
        discriminant = gap * gap - 4.0 * a * b
        if gap > 0 and discriminant > 0:
            q = 0.5 * (gap + math.sqrt(discriminant))
            excluded.append((b / q, q / a))
    return AllowedSet.complement(excluded, lower=0.0)


# ---------------------------------------------------------------------------
# conjugate conditionals
# ---------------------------------------------------------------------------


def conditional_base_location(
    state: MixtureState, data: np.ndarray, prior: BasePrior, j: int, dim: int
) -> Tuple[float, float]:
    """Normal conditional (mean, variance) of mu_j[dim] before truncation."""

    m0, v0 = float(prior.m0[dim]), float(prior.v0[dim])
    members = data[state.allocations == j, dim] if data.shape[0] else np.zeros(0)
    if members.size == 0:
        return m0, v0
    sigma2 = float(state.variances[j, dim])
    variance = 1.0 / (1.0 / v0 + members.size / sigma2)
    mean = variance * (m0 / v0 + float(members.sum()) / sigma2)
    return mean, variance


def conditional_base_scale(
    state: MixtureState, data: np.ndarray, prior: BasePrior, j: int, dim: int
) -> Tuple[float, float]:
    """Inverse-gamma conditional (shape, scale) of sigma2_j[dim] before truncation."""

    b0 = float(prior.b0[dim])
    members = data[state.allocations == j, dim] if data.shape[0] else np.zeros(0)
    if members.size == 0:
        return float(prior.a0), b0
    residual2 = float(np.sum((members - state.means[j, dim]) ** 2))
    return float(prior.a0) + 0.5 * members.size, b0 + 0.5 * residual2


# ---------------------------------------------------------------------------
# initialization
# ---------------------------------------------------------------------------


def _farthest_point_centres(points: np.ndarray, k: int) -> np.ndarray:
    first = int(np.argmin(np.sum((points - points.mean(axis=0)) ** 2, axis=1)))
    chosen = [first]
    nearest = np.sum((points - points[first]) ** 2, axis=1)
    while len(chosen) < min(k, points.shape[0]):
        nxt = int(np.argmax(nearest))
        if nearest[nxt] <= 0:
            break
        chosen.append(nxt)
        nearest = np.minimum(nearest, np.sum((points - points[nxt]) ** 2, axis=1))
    return points[chosen]


def _clustered_start(
    points: np.ndarray, mix_cfg: MixtureConfig, prior: BasePrior, rng: np.random.Generator
) -> MixtureState:
    k, m = mix_cfg.k, prior.dim
    centres = _farthest_point_centres(points, k)
    allocations = np.argmin(np.sum((points[:, None, :] - centres[None, :, :]) ** 2, axis=2), axis=1)
    spread = points.std(axis=0) if points.shape[0] > 1 else np.sqrt(prior.v0_array)
    spread = np.where(spread > 0, spread, 1.0)
    pooled = points.var(axis=0) if points.shape[0] > 1 else prior.b0_array
    pooled = np.maximum(pooled, settings.VARIANCE_FLOOR)
    fill_means, fill_vars = sample_base(prior, k, rng)
    means, variances = fill_means.copy(), fill_vars.copy()
    counts = np.bincount(allocations, minlength=k)
    for h in range(k):
        members = points[allocations == h]
        if members.shape[0] == 0:
            continue
        means[h] = members.mean(axis=0)
        variances[h] = members.var(axis=0) if members.shape[0] > 1 else pooled
    variances = np.maximum(variances, settings.VARIANCE_FLOOR)
    means = means + settings.INIT_JITTER * spread * rng.standard_normal((k, m))
    weights = counts / counts.sum()
    return MixtureState(weights, means, variances, allocations.astype(int), SliceVariables.inactive(k))


def _prior_start(
    mix_cfg: MixtureConfig, prior: BasePrior, spec: Optional[RepulsionSpec], rng: np.random.Generator
) -> MixtureState:
    k = mix_cfg.k
    means, variances = sample_base(prior, k, rng)
    if spec is not None and k > 1:
        try:
            # one rejection batch; any configuration with h > 0 is a valid start
            exact_means, exact_vars, _ = sample_repulsive_configurations(
                prior, spec, k, 1, rng, budget=BATCH, min_acceptance=1.0 / BATCH
            )
            means, variances = exact_means[0], exact_vars[0]
        except CalibrationError:
            logger.debug("no exact prior start at tau=%.4g, starting from g0", spec.tau)
    weights = update_weights(
        MixtureState(np.full(k, 1.0 / k), means, variances, np.zeros(0, dtype=int), SliceVariables.inactive(k)),
        mix_cfg,
        rng,
    )
    return MixtureState(weights, means, variances, np.zeros(0, dtype=int), SliceVariables.inactive(k))


def initial_state(
    data: Dataset | np.ndarray | None,
    mix_cfg: MixtureConfig,
    prior: BasePrior,
    spec: Optional[RepulsionSpec],
    rng: np.random.Generator,
) -> MixtureState:
    """Starting point inside the support of the prior.

    With data: farthest-point clustering, cluster moments, jittered means,
    retried while h(gamma) = 0. Without data: one exact draw from the prior.
    """

    points = _as_points(data, prior.dim)
    if points.shape[0] == 0:
        state = _prior_start(mix_cfg, prior, spec, rng)
    else:
        state = _retrying_start(points, mix_cfg, prior, spec, rng)
    if spec is not None:
        state.slice = SliceVariables.inactive(state.k, spec.combiner)
    return state


@retry(
    stop=stop_after_attempt(settings.INIT_ATTEMPTS),
    retry=retry_if_exception_type(InitializationError),
    reraise=True,
)
def _retrying_start(
    points: np.ndarray,
    mix_cfg: MixtureConfig,
    prior: BasePrior,
    spec: Optional[RepulsionSpec],
    rng: np.random.Generator,
) -> MixtureState:
    state = _clustered_start(points, mix_cfg, prior, rng)
    if spec is not None and not math.isfinite(log_h(spec, state.means, state.variances)):
        logger.debug("initial components coincide, jittering again")
        raise InitializationError("h(gamma) = 0 at initialization", details={"means": state.means.tolist()})
    return state


# ---------------------------------------------------------------------------
# chains
# ---------------------------------------------------------------------------


def _check_inputs(mix_cfg: MixtureConfig, prior: BasePrior, spec: Optional[RepulsionSpec], repulsive: bool) -> None:
    if mix_cfg.m != prior.dim:
        raise InputError(f"mixture dimension m={mix_cfg.m} does not match prior dimension {prior.dim}")
    if repulsive and spec is None:
        raise InputError("a repulsive chain needs a repulsion spec")


def sweep(
    state: MixtureState,
    points: np.ndarray,
    mix_cfg: MixtureConfig,
    prior: BasePrior,
    spec: Optional[RepulsionSpec],
    rng: np.random.Generator,
    debug: bool = False,
) -> MixtureState:
    """One full scan; ``spec=None`` runs the plain mixture Gibbs sampler."""

    if spec is not None:
        state.slice = update_slice(state, spec, rng)
    state.allocations = update_allocations(state, points, rng)
    state.weights = update_weights(state, mix_cfg, rng)
    for j in range(state.k):
        for dim in range(state.m):
            mean, var = conditional_base_location(state, points, prior, j, dim)
            allowed = AllowedSet.whole_line() if spec is None else allowed_set_location(state, spec, j, dim)
            if debug and not allowed.contains(float(state.means[j, dim])):
                raise InvariantViolation("current location outside its allowed set", details={"j": j, "dim": dim})
            state.means[j, dim] = sample_truncated(NormalLaw(mean, var), allowed, rng)

            shape, scale = conditional_base_scale(state, points, prior, j, dim)
            if spec is not None and spec.case is RepulsionCase.FULL:
                allowed = allowed_set_scale(state, spec, j, dim)
                if debug and not allowed.contains(float(state.variances[j, dim])):
                    raise InvariantViolation("current scale outside its allowed set", details={"j": j, "dim": dim})
            else:
                allowed = AllowedSet.positive()
            state.variances[j, dim] = sample_truncated(InverseGammaLaw(shape, scale), allowed, rng)
    return state


def run_chain(
    data: Dataset | np.ndarray | None,
    cfg: McmcConfig,
    mix_cfg: MixtureConfig,
    prior: BasePrior,
    spec: Optional[RepulsionSpec],
    rng: Optional[np.random.Generator] = None,
    chain: int = 0,
) -> PosteriorDraws:
    """Run one chain and keep the post burn-in, thinned states."""

    active = spec if cfg.repulsive else None
    _check_inputs(mix_cfg, prior, active, cfg.repulsive)
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    points = _as_points(data, prior.dim)
    state = initial_state(points, mix_cfg, prior, active, rng)

    kept = cfg.retained
    k, m, n = mix_cfg.k, prior.dim, points.shape[0]
    iterations = np.zeros(kept, dtype=int)
    weights = np.zeros((kept, k))
    means = np.zeros((kept, k, m))
    variances = np.zeros((kept, k, m))
    allocations = np.zeros((kept, n), dtype=int)
    log_hs = np.zeros(kept)

    slot = 0
    for it in tqdm(
        range(1, cfg.iterations + 1),
        desc=f"chain {chain}",
        disable=not settings.PROGRESS,
        leave=False,
    ):
        state = sweep(state, points, mix_cfg, prior, active, rng, debug=cfg.debug)
        current_log_h = float(log_h(spec, state.means, state.variances)) if spec is not None else 0.0
        if active is not None:
            if not math.isfinite(current_log_h):
                raise InvariantViolation("h(gamma) = 0 after iteration", details={"iteration": it})
            if cfg.debug and not slice_satisfied(state, active):
                raise InvariantViolation("slice constraint broken", details={"iteration": it})
        if cfg.is_retained(it) and slot < kept:
            iterations[slot] = it
            weights[slot] = state.weights
            means[slot] = state.means
            variances[slot] = state.variances
            allocations[slot] = state.allocations
            log_hs[slot] = current_log_h
            slot += 1

    logger.info("chain %d finished: %d iterations, %d draws kept", chain, cfg.iterations, slot)
    return PosteriorDraws(
        iterations=iterations,
        weights=weights,
        means=means,
        variances=variances,
        allocations=allocations,
        log_h=log_hs,
        chains=np.full(kept, chain, dtype=int),
    )


def sample_prior_configurations(
    prior: BasePrior,
    spec: RepulsionSpec,
    k: int,
    count: int,
    rng: np.random.Generator,
    burn_in: int = settings.PRIOR_CHAIN_BURN_IN,
    thin: int = settings.PRIOR_CHAIN_THIN,
) -> Tuple[np.ndarray, np.ndarray]:
    """``count`` (means, variances) configurations from the repulsive prior via a data-free chain."""

    cfg = McmcConfig(iterations=burn_in + count * thin, burn_in=burn_in, thin=thin)
    draws = run_chain(None, cfg, MixtureConfig.symmetric(k, prior.dim), prior, spec, rng=rng)
    return draws.means, draws.variances


def chain_seeds(seed: int, chains: int) -> List[int]:
    """Independent per-chain integer seeds spawned from the run seed."""

    children = np.random.SeedSequence(seed).spawn(chains)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


def _chain_job(args) -> PosteriorDraws:
    data, cfg, mix_cfg, prior, spec, chain = args
    return run_chain(data, cfg, mix_cfg, prior, spec, chain=chain)


def run_chains(
    data: Dataset | np.ndarray | None,
    cfg: McmcConfig,
    mix_cfg: MixtureConfig,
    prior: BasePrior,
    spec: Optional[RepulsionSpec],
    chains: int = 1,
    jobs: int = 1,
) -> PosteriorDraws:
    """Independent chains, concatenated in chain order whatever the worker count."""

    if chains < 1:
        raise InputError(f"chains must be positive, got {chains}")
    points = _as_points(data, prior.dim)
    jobs_args = [
        (points, cfg.model_copy(update={"seed": chain_seed}), mix_cfg, prior, spec, index)
        for index, chain_seed in enumerate(chain_seeds(cfg.seed, chains))
    ]
    if jobs > 1 and chains > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, chains)) as pool:
            parts = list(pool.map(_chain_job, jobs_args))
    else:
        parts = [_chain_job(args) for args in jobs_args]
    return PosteriorDraws.concat(parts)


__all__ = [
    "update_slice",
    "slice_satisfied",
    "allocation_probabilities",
    "update_allocations",
    "update_weights",
    "allowed_set_location",
    "allowed_set_scale",
    "conditional_base_location",
    "conditional_base_scale",
    "initial_state",
    "sweep",
    "run_chain",
    "run_chains",
    "chain_seeds",
    "sample_prior_configurations",
]
