"""Seeded synthetic scenarios and their exact generative densities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from . import settings
from .model import Dataset
from .schemas import ScenarioId, ScenarioMetadata, ScenarioSpec

# Offsets of the second component: poorly vs well separated.
CLOSE_OFFSET = 2.5
FAR_OFFSET = 6.0
T_DF = 4
SKEW_SHAPE = 3.0

RHO_1 = 0.9 * math.sqrt(2.0)
SIGMA_IV_1 = np.array([[2.0, RHO_1], [RHO_1, 1.0]])
SIGMA_IV_2 = np.array([[1.0, -0.8], [-0.8, 1.0]])


@dataclass(frozen=True)
class ScenarioTruth:
    """Finite mixture of frozen scipy distributions; evaluates the exact density."""

    weights: Tuple[float, ...]
    components: Tuple[Any, ...]
    dim: int = 1

    def logpdf(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        if self.dim == 1:
            terms = [comp.logpdf(points[:, 0]) for comp in self.components]
        else:
            terms = [np.atleast_1d(comp.logpdf(points)) for comp in self.components]
        with np.errstate(divide="ignore"):
            log_w = np.log(np.asarray(self.weights))
        return logsumexp(np.stack(terms, axis=1) + log_w[None, :], axis=1)

    def pdf(self, points: np.ndarray) -> np.ndarray:
        return np.exp(self.logpdf(points))

    def moments(self) -> Tuple[np.ndarray, np.ndarray]:
        """Mixture mean vector and per-dimension variance."""

        weights = np.asarray(self.weights)
        if self.dim == 1:
            means = np.array([[float(c.mean())] for c in self.components])
            variances = np.array([[float(c.var())] for c in self.components])
        else:
            means = np.array([c.mean for c in self.components])
            variances = np.array([np.diag(c.cov) for c in self.components])
        mean = weights @ means
        var = weights @ (variances + means**2) - mean**2
        return mean, var

    def box(self, width: float = settings.KL_BOX_SD) -> List[Tuple[float, float]]:
        mean, var = self.moments()
        sd = np.sqrt(var)
        return [(float(mu - width * s), float(mu + width * s)) for mu, s in zip(mean, sd)]

    def sample(self, n: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        labels = rng.choice(len(self.weights), size=n, p=np.asarray(self.weights))
        values = np.zeros((n, self.dim))
        for h, comp in enumerate(self.components):
            mask = labels == h
            count = int(mask.sum())
            if count:
                draws = comp.rvs(size=count, random_state=rng)
                values[mask] = np.reshape(draws, (count, self.dim))
        return values, labels


def _skewed(offset: float):
    # gamma(3, 1) shifted to mean zero, then moved by the offset
    return stats.gamma(SKEW_SHAPE, loc=offset - SKEW_SHAPE, scale=1.0)


_SCENARIOS: Dict[ScenarioId, Tuple[ScenarioTruth, int, str, Dict[str, Any]]] = {
    ScenarioId.IA: (
        ScenarioTruth((1.0,), (stats.norm(0.0, 1.0),)),
        1,
        "standard normal",
        {"components": [{"weight": 1.0, "law": "normal", "mean": 0.0, "sd": 1.0}]},
    ),
    ScenarioId.IB: (
        ScenarioTruth((0.7, 0.3), (stats.norm(0.0, 0.2), stats.norm(0.0, 2.0))),
        2,
        "scale mixture of two centred normals",
        {
            "components": [
                {"weight": 0.7, "law": "normal", "mean": 0.0, "sd": 0.2},
                {"weight": 0.3, "law": "normal", "mean": 0.0, "sd": 2.0},
            ]
        },
    ),
    ScenarioId.IC: (
        ScenarioTruth((1.0,), (stats.t(T_DF, loc=0.0, scale=1.0),)),
        1,
        "Student t",
        {"components": [{"weight": 1.0, "law": "t", "df": T_DF, "loc": 0.0, "scale": 1.0}]},
    ),
    ScenarioId.IIA: (
        ScenarioTruth((0.5, 0.5), (stats.norm(0.0, 1.0), stats.norm(CLOSE_OFFSET, 1.0))),
        2,
        "two poorly separated normals",
        {"offset": CLOSE_OFFSET},
    ),
    ScenarioId.IIB: (
        ScenarioTruth((0.5, 0.5), (stats.norm(0.0, 1.0), stats.norm(FAR_OFFSET, 1.0))),
        2,
        "two well separated normals",
        {"offset": FAR_OFFSET},
    ),
    ScenarioId.IIIA: (
        ScenarioTruth((0.5, 0.5), (stats.norm(0.0, 1.0), _skewed(CLOSE_OFFSET))),
        2,
        "normal and skewed component, poorly separated",
        {"offset": CLOSE_OFFSET, "skew": {"law": "shifted gamma", "shape": SKEW_SHAPE, "scale": 1.0}},
    ),
    ScenarioId.IIIB: (
        ScenarioTruth((0.5, 0.5), (stats.norm(0.0, 1.0), _skewed(FAR_OFFSET))),
        2,
        "normal and skewed component, well separated",
        {"offset": FAR_OFFSET, "skew": {"law": "shifted gamma", "shape": SKEW_SHAPE, "scale": 1.0}},
    ),
    ScenarioId.IV: (
        ScenarioTruth(
            (0.5, 0.5),
            (
                stats.multivariate_normal(np.zeros(2), SIGMA_IV_1),
                stats.multivariate_normal(np.array([4.0, 4.0]), SIGMA_IV_2),
            ),
            dim=2,
        ),
        2,
        "two correlated bivariate normals",
        {"means": [[0.0, 0.0], [4.0, 4.0]], "covariances": [SIGMA_IV_1.tolist(), SIGMA_IV_2.tolist()]},
    ),
}


def truth_for(scenario: ScenarioId | str) -> ScenarioTruth:
    return _SCENARIOS[ScenarioId(scenario)][0]


def true_k(scenario: ScenarioId | str) -> int:
    return _SCENARIOS[ScenarioId(scenario)][1]


def describe(spec: ScenarioSpec) -> ScenarioMetadata:
    truth, k0, description, parameters = _SCENARIOS[spec.id]
    return ScenarioMetadata(
        scenario=spec,
        dim=truth.dim,
        k0=k0,
        description=description,
        parameters={"weights": list(truth.weights), **parameters},
    )


def generate(spec: ScenarioSpec, rng: Optional[np.random.Generator] = None) -> Tuple[Dataset, ScenarioTruth]:
    """Draw ``spec.n`` labeled observations; the same seed gives the same bytes."""

    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    truth = truth_for(spec.id)
    values, labels = truth.sample(spec.n, rng)
    return Dataset(values=values, labels=labels, name=f"{spec.id.value}-n{spec.n}-s{spec.seed}"), truth


def scenario_ids(names: Optional[Sequence[str]] = None) -> List[ScenarioId]:
    return [ScenarioId(name) for name in names] if names else list(ScenarioId)


__all__ = [
    "ScenarioTruth",
    "truth_for",
    "true_k",
    "describe",
    "generate",
    "scenario_ids",
]
