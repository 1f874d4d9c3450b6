"""Default elicitation of tau by c-separation of the prior laws of the mean pairwise distance."""

from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np
from tqdm import tqdm

from . import settings
from .errors import CalibrationError, InputError
from .model import sample_base
from .repulsion import log_h, pairwise_distances
from .schemas import (
    BasePrior,
    CalibrationResult,
    CalibrationStep,
    Combiner,
    RepulsionCase,
    RepulsionSpec,
    default_nu,
)

logger = logging.getLogger(__name__)

# Proposals evaluated per vectorized rejection batch.
BATCH = 20_000


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent, deterministically derived generator for one MC lane."""

    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=tuple(keys)))


def mean_pairwise_distance(
    spec: RepulsionSpec | RepulsionCase, means: np.ndarray, variances: np.ndarray
) -> np.ndarray:
    """d-bar per configuration for batched (B, k, m) arrays."""

    return pairwise_distances(spec, means, variances).mean(axis=-1)


def _check(k: int, n_mc: int) -> None:
    if k < 2:
        raise InputError(f"mean pairwise distance needs k >= 2 components, got k={k}")
    if n_mc < settings.MIN_CALIBRATION_MC:
        raise InputError(f"n_mc must be at least {settings.MIN_CALIBRATION_MC}, got {n_mc}")


def sample_dbar_nonrepulsive(
    prior: BasePrior, spec: RepulsionSpec | RepulsionCase, k: int, n_mc: int, rng: np.random.Generator
) -> np.ndarray:
    _check(k, n_mc)
    means, variances = sample_base(prior, k, rng, size=n_mc)
    return mean_pairwise_distance(spec, means, variances)


def sample_repulsive_configurations(
    prior: BasePrior,
    spec: RepulsionSpec,
    k: int,
    count: int,
    rng: np.random.Generator,
    budget: int = settings.REJECTION_BUDGET,
    min_acceptance: float = settings.MIN_ACCEPTANCE,
):
    """Exact draws from the repulsive prior by rejection: propose from g0, accept w.p. h.

    Returns ``(means, variances, acceptance_rate)``. Raises ``CalibrationError`` once the
    proposal budget is spent with an acceptance rate below ``min_acceptance``.
    """

    kept_means, kept_vars = [], []
    accepted = proposed = 0
    while accepted < count:
        means, variances = sample_base(prior, k, rng, size=BATCH)
        log_accept = np.asarray(log_h(spec, means, variances))
        keep = np.log(rng.random(BATCH)) < log_accept
        proposed += BATCH
        if keep.any():
            kept_means.append(means[keep])
            kept_vars.append(variances[keep])
            accepted += int(keep.sum())
        if accepted < count and proposed >= budget and accepted / proposed < min_acceptance:
            raise CalibrationError(
                "tau too large for rejection",
                details={"tau": spec.tau, "proposed": proposed, "accepted": accepted},
            )
    rate = accepted / proposed
    return np.concatenate(kept_means)[:count], np.concatenate(kept_vars)[:count], rate


def draw_repulsive(
    prior: BasePrior,
    spec: RepulsionSpec,
    k: int,
    count: int,
    rng: np.random.Generator,
    rejection: bool = True,
) -> Tuple[np.ndarray, np.ndarray, float, str]:
    """Configurations from the repulsive prior, by rejection while it is affordable.

    Once the rejection budget fails, the draws come from the slice sampler run
    without data, which targets the same prior. Returns ``(means, variances,
    acceptance_rate, sampler)``; the rate is 0 for slice draws.
    """

    if rejection:
        try:
            means, variances, rate = sample_repulsive_configurations(prior, spec, k, count, rng)
            return means, variances, rate, "rejection"
        except CalibrationError as exc:
            logger.info("%s at tau=%.4g, switching to the slice sampler", exc.message, spec.tau)
    from .sampler import sample_prior_configurations

    means, variances = sample_prior_configurations(prior, spec, k, count, rng)
    return means, variances, 0.0, "slice"


def sample_dbar_repulsive(
    prior: BasePrior, spec: RepulsionSpec, k: int, n_mc: int, rng: np.random.Generator
) -> np.ndarray:
    _check(k, n_mc)
    means, variances, _, _ = draw_repulsive(prior, spec, k, n_mc, rng)
    return mean_pairwise_distance(spec, means, variances)


def calibrate_tau(
    prior: BasePrior,
    case: RepulsionCase,
    k: int,
    c: float = settings.SEPARATION_C,
    nu: Optional[int] = None,
    seed: int = 0,
    *,
    combiner: Combiner = Combiner.MIN,
    n_mc: int = settings.CALIBRATION_MC,
    tau_start: float = settings.TAU_START,
    growth: float = settings.TAU_GROWTH,
    tau_max: float = settings.TAU_MAX,
) -> CalibrationResult:
    """Geometric search for the first tau whose d-bar laws are c-separated.

    The non-repulsive statistics do not depend on tau and are computed once. Each
    step draws fresh repulsive samples from its own seeded stream, so the whole
    search is reproducible from ``seed``. Steps past the point where rejection
    runs out of budget use slice-sampler draws instead.
    """

    if c < 0:
        raise InputError(f"separation constant c must be non-negative, got {c}")
    case = RepulsionCase(case)
    nu = nu if nu is not None else default_nu(case)
    _check(k, n_mc)

    base = sample_dbar_nonrepulsive(prior, case, k, n_mc, stream(seed, 0))
    rho2, sigma2 = float(base.mean()), float(base.std(ddof=1))

    path = []
    tau = tau_start
    # acceptance only falls as tau grows
    sampler = "rejection"
    step = 0
    progress = tqdm(desc="calibrating tau", disable=not settings.PROGRESS, leave=False)
    try:
        while tau <= tau_max:
            step += 1
            spec = RepulsionSpec(case=case, combiner=combiner, tau=tau, nu=nu)
            means, variances, rate, sampler = draw_repulsive(
                prior, spec, k, n_mc, stream(seed, step), rejection=sampler == "rejection"
            )
            dbar = mean_pairwise_distance(spec, means, variances)
            rho1, sigma1 = float(dbar.mean()), float(dbar.std(ddof=1))
            separation = rho1 - rho2
            path.append(
                CalibrationStep(
                    tau=tau, rho1=rho1, sigma1=sigma1, separation=separation, acceptance_rate=rate, sampler=sampler
                )
            )
            progress.update(1)
            logger.debug("tau=%.4g rho1=%.4g sigma1=%.4g rate=%.3g (%s)", tau, rho1, sigma1, rate, sampler)
            if separation >= c * max(sigma1, sigma2):
                logger.info("calibrated tau=%.4g (rho1=%.4g, rho2=%.4g) after %d steps", tau, rho1, rho2, step)
                return CalibrationResult(
                    tau_star=tau,
                    nu=nu,
                    c=c,
                    rho1=rho1,
                    rho2=rho2,
                    sigma1=sigma1,
                    sigma2=sigma2,
                    mc_samples=n_mc,
                    seed=seed,
                    case=case,
                    combiner=combiner,
                    k=k,
                    acceptance_rate=rate,
                    path=path,
                )
            tau *= growth
    finally:
        progress.close()
    raise CalibrationError(
        f"no c-separated tau found below {tau_max:g}",
        details={"c": c, "rho2": rho2, "sigma2": sigma2, "steps": step},
    )


def verify_separation(
    prior: BasePrior, result: CalibrationResult, seed: int, n_mc: Optional[int] = None
) -> bool:
    """Re-check the separation inequality at tau* with an independent Monte Carlo run."""

    n_mc = n_mc or 10 * result.mc_samples
    spec = result.to_spec()
    base = sample_dbar_nonrepulsive(prior, spec, result.k, n_mc, stream(seed, 0))
    repulsive = sample_dbar_repulsive(prior, spec, result.k, n_mc, stream(seed, 1))
    return float(repulsive.mean() - base.mean()) >= result.c * max(float(repulsive.std(ddof=1)), float(base.std(ddof=1)))


__all__ = [
    "stream",
    "mean_pairwise_distance",
    "sample_dbar_nonrepulsive",
    "sample_dbar_repulsive",
    "sample_repulsive_configurations",
    "draw_repulsive",
    "calibrate_tau",
    "verify_separation",
]
