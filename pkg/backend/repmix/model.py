"""Finite location-scale Gaussian mixtures with diagonal covariances."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats
from scipy.special import logsumexp

from . import settings
from .errors import DatasetNotFoundError, InputError
from .schemas import BasePrior, Combiner, MixtureConfig, Violation

LABEL_COLUMN = "label"


@dataclass(frozen=True)
class Component:
    """One kernel: location vector and diagonal variances (variance units)."""

    mean: np.ndarray
    var: np.ndarray

    def __post_init__(self) -> None:
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        var = np.atleast_1d(np.asarray(self.var, dtype=float))
        if mean.ndim != 1 or mean.shape != var.shape:
            raise InputError(f"component mean {mean.shape} and var {var.shape} must be equal-length vectors")
        if not np.all(np.isfinite(mean)):
            raise InputError("component mean must be finite")
        if not np.all(np.isfinite(var) & (var > 0)):
            raise InputError("component variances must be positive and finite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "var", var)

    @property
    def dim(self) -> int:
        return int(self.mean.shape[0])


@dataclass
class SliceVariables:
    """Slice levels stored as log u in a symmetric k x k matrix.

    Entry (s, j) is the level the pair must stay above. The min combiner uses one
    shared level for every pair; the product combiner one level per pair. ``-inf``
    means no constraint (u = 0), which is also the state of a non-repulsive chain.
    """

    combiner: Combiner
    log_levels: np.ndarray

    @classmethod
    def inactive(cls, k: int, combiner: Combiner = Combiner.MIN) -> "SliceVariables":
        return cls(combiner=Combiner(combiner), log_levels=np.full((k, k), -np.inf))

    @property
    def values(self) -> np.ndarray:
        """u on the linear scale: one value (min) or one per pair j < s (product)."""

        k = self.log_levels.shape[0]
        rows, cols = np.tril_indices(k, -1)
        levels = np.exp(self.log_levels[rows, cols])
        if self.combiner is Combiner.MIN:
            return levels[:1] if levels.size else np.zeros(1)
        return levels

    def copy(self) -> "SliceVariables":
        return SliceVariables(self.combiner, self.log_levels.copy())


@dataclass
class MixtureState:
    """Full MCMC state; owned and mutated by exactly one chain."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    allocations: np.ndarray
    slice: SliceVariables

    @classmethod
    def from_components(
        cls,
        weights: Sequence[float],
        components: Sequence[Component],
        allocations: Optional[Sequence[int]] = None,
        combiner: Combiner = Combiner.MIN,
    ) -> "MixtureState":
        means = np.stack([c.mean for c in components])
        variances = np.stack([c.var for c in components])
        alloc = np.zeros(0, dtype=int) if allocations is None else np.asarray(allocations, dtype=int)
        return cls(
            weights=np.asarray(weights, dtype=float),
            means=means,
            variances=variances,
            allocations=alloc,
            slice=SliceVariables.inactive(len(components), combiner),
        )

    @property
    def k(self) -> int:
        return int(self.weights.shape[0])

    @property
    def m(self) -> int:
        return int(self.means.shape[1])

    @property
    def n(self) -> int:
        return int(self.allocations.shape[0])

    @property
    def components(self) -> List[Component]:
        return [Component(self.means[h], self.variances[h]) for h in range(self.k)]

    def counts(self) -> np.ndarray:
        return np.bincount(self.allocations, minlength=self.k)

    def copy(self) -> "MixtureState":
        return MixtureState(
            weights=self.weights.copy(),
            means=self.means.copy(),
            variances=self.variances.copy(),
            allocations=self.allocations.copy(),
            slice=self.slice.copy(),
        )

    def check(self) -> None:
        """Raise ``InputError`` when the state breaks a structural invariant."""

        if self.means.shape != (self.k, self.variances.shape[1]) or self.variances.shape[0] != self.k:
            raise InputError("weights, means and variances disagree on k or m")
        if np.any(self.weights < 0) or abs(float(self.weights.sum()) - 1.0) > settings.WEIGHT_TOL:
            raise InputError(f"weights must lie on the simplex (sum={self.weights.sum()!r})")
        if not np.all(np.isfinite(self.means)):
            raise InputError("component means must be finite")
        if not np.all(np.isfinite(self.variances) & (self.variances > 0)):
            raise InputError("component variances must be positive and finite")
        if np.any(self.slice.log_levels > 0):
            raise InputError("slice values must lie in [0, 1]")
        if self.n and (self.allocations.min() < 0 or self.allocations.max() >= self.k):
            raise InputError("allocations must index components")


@dataclass(frozen=True)
class Dataset:
    values: np.ndarray
    labels: Optional[np.ndarray] = None
    name: str = "data"

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise InputError(f"dataset must be a non-empty n x m matrix, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InputError("dataset entries must be finite (no missing values)")
        object.__setattr__(self, "values", values)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=int)
            if labels.shape != (values.shape[0],):
                raise InputError(f"labels must have length n={values.shape[0]}, got {labels.shape}")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def m(self) -> int:
        return int(self.values.shape[1])

    @classmethod
    def from_csv(cls, path: Path | str, name: Optional[str] = None) -> "Dataset":
        """Load one observation per row; a header may declare a final ``label`` column."""

        path = Path(path)
        if not path.exists():
            raise DatasetNotFoundError(
                f"No dataset found at {path}",
                details={"expected": "CSV, one row per observation, numeric columns, optional final 'label'"},
            )
        with path.open("r", encoding="utf-8") as handle:
            first = handle.readline()
        has_header = any(not _is_number(token) for token in first.strip().split(",") if token.strip())
        frame = pd.read_csv(path, header=0 if has_header else None)
        if frame.empty:
            raise InputError(f"dataset {path} has no rows")
        if frame.isna().any().any():
            raise InputError(f"dataset {path} has missing values")
        labels = None
        if has_header and str(frame.columns[-1]).strip().lower() == LABEL_COLUMN:
            try:
                numeric = pd.to_numeric(frame.iloc[:, -1])
            except (TypeError, ValueError) as exc:
                raise InputError(f"dataset {path} has a non-numeric label column") from exc
            if not np.all(np.mod(numeric, 1) == 0):
                raise InputError(f"dataset {path} has non-integer labels")
            labels = numeric.to_numpy(dtype=int)
            frame = frame.iloc[:, :-1]
        try:
            values = frame.to_numpy(dtype=float)
        except ValueError as exc:
            raise InputError(f"dataset {path} has non-numeric columns") from exc
        return cls(values=values, labels=labels, name=name or path.stem)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.values, columns=[f"y{d + 1}" for d in range(self.m)])
        if self.labels is not None:
            frame[LABEL_COLUMN] = self.labels
        return frame


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


@dataclass
class PosteriorDraws:
    """Retained (post burn-in, thinned) states of one or more chains."""

    iterations: np.ndarray
    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    allocations: np.ndarray
    log_h: np.ndarray
    chains: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    def __post_init__(self) -> None:
        if self.chains.shape[0] != self.iterations.shape[0]:
            self.chains = np.zeros(self.iterations.shape[0], dtype=int)

    def __len__(self) -> int:
        return int(self.weights.shape[0])

    @property
    def k(self) -> int:
        return int(self.weights.shape[1])

    @property
    def m(self) -> int:
        return int(self.means.shape[2])

    @property
    def n(self) -> int:
        return int(self.allocations.shape[1])

    @property
    def h(self) -> np.ndarray:
        return np.exp(self.log_h)

    @classmethod
    def concat(cls, parts: Sequence["PosteriorDraws"]) -> "PosteriorDraws":
        return cls(
            iterations=np.concatenate([p.iterations for p in parts]),
            weights=np.concatenate([p.weights for p in parts]),
            means=np.concatenate([p.means for p in parts]),
            variances=np.concatenate([p.variances for p in parts]),
            allocations=np.concatenate([p.allocations for p in parts]),
            log_h=np.concatenate([p.log_h for p in parts]),
            chains=np.concatenate([p.chains for p in parts]),
        )

    def to_frame(self) -> pd.DataFrame:
        """Long format: one row per (draw, component)."""

        t, k, m = len(self), self.k, self.m
        columns = {
            "chain": np.repeat(self.chains, k),
            "iter": np.repeat(self.iterations, k),
            "component": np.tile(np.arange(1, k + 1), t),
            "h": np.repeat(self.h, k),
            "log_h": np.repeat(self.log_h, k),
            "weight": self.weights.reshape(-1),
        }
        flat_means = self.means.reshape(t * k, m)
        flat_vars = self.variances.reshape(t * k, m)
        for d in range(m):
            columns[f"mean_{d + 1}"] = flat_means[:, d]
        for d in range(m):
            columns[f"var_{d + 1}"] = flat_vars[:, d]
        return pd.DataFrame(columns)


def component_log_densities(means: np.ndarray, variances: np.ndarray, points: np.ndarray) -> np.ndarray:
    """log phi(y_i; gamma_h) for every point and component, shape (N, k)."""

    points = np.atleast_2d(points)
    logpdf = stats.norm.logpdf(points[:, None, :], loc=means[None, :, :], scale=np.sqrt(variances)[None, :, :])
    return logpdf.sum(axis=2)


def mixture_log_density(weights: np.ndarray, means: np.ndarray, variances: np.ndarray, points: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        log_w = np.log(weights)
    return logsumexp(component_log_densities(means, variances, points) + log_w[None, :], axis=1)


def eval_mixture_density(state: MixtureState, y: Sequence[float] | np.ndarray) -> float:
    """f(y) = sum_h p_h prod_d N(y_d; mu_hd, sigma2_hd)."""

    point = np.atleast_1d(np.asarray(y, dtype=float))
    if point.shape != (state.m,):
        raise InputError(f"point has shape {point.shape}, mixture dimension is {state.m}")
    return float(np.exp(mixture_log_density(state.weights, state.means, state.variances, point[None, :])[0]))


def sample_base(prior: BasePrior, k: int, rng: np.random.Generator, size: Optional[int] = None):
    """Draw k components i.i.d. from g0; returns (means, variances) of shape ([size,] k, m)."""

    shape = (k, prior.dim) if size is None else (size, k, prior.dim)
    means = prior.m0_array + np.sqrt(prior.v0_array) * rng.standard_normal(shape)
    variances = prior.b0_array / rng.gamma(prior.a0, 1.0, size=shape)
    return means, variances


def validate_config(cfg: MixtureConfig, prior: BasePrior) -> List[Violation]:
    """Report every violated configuration invariant; an empty list means ok."""

    violations: List[Violation] = []
    if prior.dim != cfg.m:
        violations.append(
            Violation(code="dimension", message=f"prior dimension {prior.dim} does not match m={cfg.m}")
        )
    alpha_max = max(cfg.alpha)
    if not alpha_max < cfg.m / 2:
        violations.append(
            Violation(
                code="alpha_bound",
                message=f"alpha exceeds m/2 (max alpha={alpha_max:g}, m/2={cfg.m / 2:g}); extra components may not empty",
                severity="warning",
            )
        )
    if not prior.a0 > 1:
        violations.append(
            Violation(code="variance_shape", message=f"variance prior shape ≤ 1 (a0={prior.a0:g}); prior mean of variances is infinite")
        )
    if any(v <= 0 for v in prior.v0):
        violations.append(Violation(code="mean_variance", message="mean-prior variance v0 must be positive"))
    if any(b <= 0 for b in prior.b0):
        violations.append(Violation(code="variance_scale", message="variance-prior scale b0 must be positive"))
    return violations


__all__ = [
    "Component",
    "SliceVariables",
    "MixtureState",
    "Dataset",
    "PosteriorDraws",
    "component_log_densities",
    "mixture_log_density",
    "eval_mixture_density",
    "sample_base",
    "validate_config",
]
