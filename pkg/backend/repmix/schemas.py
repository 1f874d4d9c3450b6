"""Pydantic configuration, report and request/response models."""

from __future__ import annotations

import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator

from . import settings
from .errors import InputError


class RepulsionCase(str, Enum):
    FULL = "full"
    LOCATION = "location"


class Combiner(str, Enum):
    PRODUCT = "product"
    MIN = "min"


class ScenarioId(str, Enum):
    IA = "Ia"
    IB = "Ib"
    IC = "Ic"
    IIA = "IIa"
    IIB = "IIb"
    IIIA = "IIIa"
    IIIB = "IIIb"
    IV = "IV"


def default_nu(case: RepulsionCase) -> int:
    """Default repulsion rate: 2 for full-kernel distances, 1 for location distances."""

    return 2 if RepulsionCase(case) is RepulsionCase.FULL else 1


def _finite(values: Tuple[float, ...], name: str) -> Tuple[float, ...]:
    if not all(math.isfinite(v) for v in values):
        raise ValueError(f"{name} must contain finite values only")
    return values


class RepulsionSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    case: RepulsionCase = Field(default=RepulsionCase.LOCATION, description="Distance used between components.")
    combiner: Combiner = Field(default=Combiner.MIN, description="How pairwise repulsion terms are aggregated.")
    tau: float = Field(..., gt=0, allow_inf_nan=False, description="Scale of the repulsion function.")
    nu: int = Field(default=1, ge=1, description="Rate at which g vanishes as distances shrink.")

    def with_tau(self, tau: float) -> "RepulsionSpec":
        return self.model_copy(update={"tau": float(tau)})


class MixtureConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int = Field(..., ge=1, description="Upper bound on the number of components.")
    m: int = Field(..., ge=1, description="Observation dimension.")
    alpha: Tuple[float, ...] = Field(..., description="Dirichlet concentration per component.")

    @model_validator(mode="after")
    def _check_alpha(self) -> "MixtureConfig":
        if len(self.alpha) != self.k:
            raise ValueError(f"alpha has {len(self.alpha)} entries, expected k={self.k}")
        if not all(math.isfinite(a) and a > 0 for a in self.alpha):
            raise ValueError("alpha entries must be positive and finite")
        return self

    @classmethod
    def symmetric(cls, k: int, m: int, c: float = settings.DIRICHLET_C) -> "MixtureConfig":
        """Over-fitted mixture convention alpha_h = c / k."""

        return cls(k=k, m=m, alpha=tuple([c / k] * k))

    @property
    def alpha_array(self) -> np.ndarray:
        return np.asarray(self.alpha, dtype=float)


class BasePrior(BaseModel):
    """Per-dimension normal prior on locations times inverse-gamma prior on variances.

    Positivity of ``v0``/``b0`` and ``a0 > 1`` are checked by ``model.validate_config``
    rather than here, so that violations can be reported instead of raised.
    """

    model_config = ConfigDict(frozen=True)

    m0: Tuple[float, ...]
    v0: Tuple[float, ...]
    a0: float
    b0: Tuple[float, ...]

    @model_validator(mode="after")
    def _check_shapes(self) -> "BasePrior":
        lengths = {len(self.m0), len(self.v0), len(self.b0)}
        if len(lengths) != 1 or not self.m0:
            raise ValueError("m0, v0 and b0 must share one non-zero length")
        _finite(self.m0, "m0")
        _finite(self.v0, "v0")
        _finite(self.b0, "b0")
        if not math.isfinite(self.a0):
            raise ValueError("a0 must be finite")
        return self

    @property
    def dim(self) -> int:
        return len(self.m0)

    @property
    def m0_array(self) -> np.ndarray:
        return np.asarray(self.m0, dtype=float)

    @property
    def v0_array(self) -> np.ndarray:
        return np.asarray(self.v0, dtype=float)

    @property
    def b0_array(self) -> np.ndarray:
        return np.asarray(self.b0, dtype=float)

    @classmethod
    def standard(cls, m: int = 1, a0: float = settings.PRIOR_SHAPE, b0: float = 1.0) -> "BasePrior":
        """Standard-normal locations with IG(a0, b0) variances in every dimension."""

        return cls(m0=(0.0,) * m, v0=(1.0,) * m, a0=a0, b0=(b0,) * m)

    @classmethod
    def empirical(cls, values: np.ndarray) -> "BasePrior":
        """Empirical-Bayes defaults: m0 = mean, v0 = 3 var, a0 = 2, b0 = var."""

        data = np.atleast_2d(np.asarray(values, dtype=float))
        mean = data.mean(axis=0)
        var = data.var(axis=0, ddof=1) if data.shape[0] > 1 else np.ones(data.shape[1])
        var = np.where(var > 0, var, 1.0)
        return cls(
            m0=tuple(float(v) for v in mean),
            v0=tuple(float(v) for v in settings.PRIOR_VAR_INFLATION * var),
            a0=settings.PRIOR_SHAPE,
            b0=tuple(float(v) for v in var),
        )

    def with_overrides(self, overrides: "PriorOverrides") -> "BasePrior":
        update: Dict[str, Any] = {}
        for name in ("m0", "v0", "b0"):
            value = getattr(overrides, name)
            if value is None:
                continue
            if len(value) == self.dim:
                update[name] = tuple(value)
            elif len(value) == 1:
                update[name] = tuple(value) * self.dim
            else:
                raise InputError(f"prior override {name} has {len(value)} entries for dimension {self.dim}")
        if overrides.a0 is not None:
            update["a0"] = overrides.a0
        if not update:
            return self
        return BasePrior(**{**self.model_dump(), **update})


class PriorOverrides(BaseModel):
    """Optional replacements for the empirical-Bayes prior; scalars broadcast over dimensions."""

    m0: Optional[Tuple[float, ...]] = None
    v0: Optional[Tuple[float, ...]] = None
    a0: Optional[float] = None
    b0: Optional[Tuple[float, ...]] = None


class McmcConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    iterations: int = Field(default=settings.ITERATIONS, ge=1)
    burn_in: int = Field(default=settings.BURN_IN, ge=0)
    thin: int = Field(default=settings.THIN, ge=1)
    seed: int = Field(default=0, ge=0)
    repulsive: bool = Field(default=True, description="False runs the plain g0 (non-repulsive) comparator.")
    debug: bool = Field(default=False, description="Assert slice validity after every iteration.")

    @model_validator(mode="after")
    def _check_burn_in(self) -> "McmcConfig":
        if self.burn_in >= self.iterations:
            raise ValueError(f"burn_in ({self.burn_in}) must be smaller than iterations ({self.iterations})")
        return self

    def is_retained(self, iteration: int) -> bool:
        """Iterations are 1-based; keep every ``thin``-th draw after burn-in."""

        return iteration > self.burn_in and (iteration - self.burn_in) % self.thin == 0

    @property
    def retained(self) -> int:
        return (self.iterations - self.burn_in) // self.thin


class CalibrationStep(BaseModel):
    tau: float
    rho1: float
    sigma1: float
    separation: float
    acceptance_rate: float
    sampler: Literal["rejection", "slice"] = "rejection"


class CalibrationResult(BaseModel):
    tau_star: float = Field(..., gt=0)
    nu: int = Field(..., ge=1)
    c: float = Field(..., ge=0)
    rho1: float
    rho2: float
    sigma1: float = Field(..., ge=0)
    sigma2: float = Field(..., ge=0)
    mc_samples: int = Field(..., ge=1)
    seed: int
    case: RepulsionCase
    combiner: Combiner
    k: int = Field(..., ge=2)
    acceptance_rate: float = Field(..., ge=0, le=1)
    path: List[CalibrationStep] = Field(default_factory=list)

    @computed_field
    @property
    def separated(self) -> bool:
        return self.rho1 - self.rho2 >= self.c * max(self.sigma1, self.sigma2)

    def to_spec(self) -> RepulsionSpec:
        return RepulsionSpec(case=self.case, combiner=self.combiner, tau=self.tau_star, nu=self.nu)


class ScenarioSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: ScenarioId
    n: int = Field(..., ge=1)
    seed: int = Field(default=0, ge=0)


class ScenarioMetadata(BaseModel):
    scenario: ScenarioSpec
    dim: int
    k0: int
    description: str
    parameters: Dict[str, Any]


class Violation(BaseModel):
    code: str
    message: str
    severity: Literal["error", "warning"] = "error"


class RunConfig(BaseModel):
    input: Optional[Path] = Field(default=None, description="CSV dataset; exclusive with scenario.")
    scenario: Optional[ScenarioSpec] = None
    k: int = Field(default=6, ge=1)
    dirichlet_c: float = Field(default=settings.DIRICHLET_C, gt=0)
    case: RepulsionCase = RepulsionCase.LOCATION
    combiner: Combiner = Combiner.MIN
    tau: Union[Literal["auto"], float] = "auto"
    nu: Optional[int] = Field(default=None, ge=1)
    separation_c: float = Field(default=settings.SEPARATION_C, ge=0)
    calibration_mc: int = Field(default=settings.CALIBRATION_MC, ge=settings.MIN_CALIBRATION_MC)
    prior: PriorOverrides = Field(default_factory=PriorOverrides)
    mcmc: McmcConfig = Field(default_factory=McmcConfig)
    chains: int = Field(default=1, ge=1)
    jobs: int = Field(default=settings.JOBS, ge=1)
    out_dir: Path = settings.OUT_DIR
    k0: Optional[int] = Field(default=None, ge=1, description="True component count for extra weights.")
    dump_similarity: bool = False

    @field_validator("tau")
    @classmethod
    def _check_tau(cls, value: Union[str, float]) -> Union[str, float]:
        if value != "auto" and not (math.isfinite(float(value)) and float(value) > 0):
            raise ValueError("tau must be 'auto' or a positive number")
        return value

    @model_validator(mode="after")
    def _check_source(self) -> "RunConfig":
        if (self.input is None) == (self.scenario is None):
            raise ValueError("exactly one of input or scenario must be given")
        if self.input is not None and not Path(self.input).exists():
            raise ValueError(f"input file does not exist: {self.input}")
        return self

    @property
    def resolved_nu(self) -> int:
        return self.nu if self.nu is not None else default_nu(self.case)


class ComponentSummary(BaseModel):
    label: int
    weight_mean: float
    weight_sd: float
    mean_mean: List[float]
    mean_sd: List[float]
    sigma_mean: List[float]
    sigma_sd: List[float]


class SummaryReport(BaseModel):
    draws: int = Field(..., ge=1)
    k: int
    m: int
    components: List[ComponentSummary]
    kl_mean: Optional[float] = None
    kl_sd: Optional[float] = None
    kl_of_mean_density: Optional[float] = Field(
        default=None, description="KL(f0, posterior-mean density); not the per-draw summary."
    )
    misclass: Optional[float] = Field(default=None, ge=0, le=1)
    k0: Optional[int] = None
    extra_weight_mean: Optional[float] = Field(default=None, ge=0, le=1)
    extra_weight_sd: Optional[float] = Field(default=None, ge=0)
    relabel_sweeps: int = 0
    relabel_cost: List[float] = Field(default_factory=list)

    def top_weights(self, count: int) -> List[float]:
        return [component.weight_mean for component in self.components[:count]]


class Manifest(BaseModel):
    run: RunConfig
    run_hash: str
    repulsive: bool
    data: Dict[str, Any]
    prior: BasePrior
    mixture: MixtureConfig
    repulsion: Optional[RepulsionSpec] = None
    calibration: Optional[CalibrationResult] = None
    chain_seeds: List[int]
    violations: List[Violation] = Field(default_factory=list)
    files: Dict[str, str] = Field(default_factory=dict)
    versions: Dict[str, str] = Field(default_factory=dict)
    wall_time_s: float = 0.0
    created_at: str = ""


# HTTP service payloads


class StateReq(BaseModel):
    weights: List[float] = Field(..., min_length=1)
    means: List[List[float]] = Field(..., description="k x m component locations.")
    variances: List[List[float]] = Field(..., description="k x m diagonal variances.")


class DensityReq(StateReq):
    points: List[List[float]] = Field(..., min_length=1, description="Evaluation points, one row each.")


class RepulsionReq(BaseModel):
    spec: RepulsionSpec
    means: List[List[float]]
    variances: List[List[float]]
    prior: Optional[BasePrior] = None


class CalibrateReq(BaseModel):
    prior: BasePrior
    case: RepulsionCase = RepulsionCase.LOCATION
    combiner: Combiner = Combiner.MIN
    k: int = Field(default=6, ge=2, le=20)
    c: float = Field(default=settings.SEPARATION_C, ge=0)
    nu: Optional[int] = Field(default=None, ge=1)
    n_mc: int = Field(default=settings.MIN_CALIBRATION_MC, ge=settings.MIN_CALIBRATION_MC, le=settings.CALIBRATION_MC)
    seed: int = Field(default=0, ge=0)


class FitReq(BaseModel):
    values: List[List[float]] = Field(..., min_length=1, description="n x m observations.")
    k: int = Field(default=6, ge=1, le=20)
    case: RepulsionCase = RepulsionCase.LOCATION
    combiner: Combiner = Combiner.MIN
    tau: Union[Literal["auto"], float] = "auto"
    nu: Optional[int] = Field(default=None, ge=1)
    iterations: int = Field(default=2_000, ge=2, le=settings.ITERATIONS)
    burn_in: int = Field(default=1_000, ge=0)
    thin: int = Field(default=5, ge=1)
    seed: int = Field(default=0, ge=0)
    repulsive: bool = True
    k0: Optional[int] = Field(default=None, ge=1)


class FitResp(BaseModel):
    run_id: str
    summary: SummaryReport
    calibration: Optional[CalibrationResult] = None


class RunRecord(BaseModel):
    id: str
    created_at: str
    request: FitReq
    response: FitResp


class RunListing(BaseModel):
    id: str
    created_at: str
    n: int
    k: int
    repulsive: bool


class ValidateReq(BaseModel):
    kind: str = Field(..., description="Artifact kind: manifest, summary, calibration or scenario.")
    payload: Dict[str, Any]


__all__ = [
    "RepulsionCase",
    "Combiner",
    "ScenarioId",
    "default_nu",
    "RepulsionSpec",
    "MixtureConfig",
    "BasePrior",
    "PriorOverrides",
    "McmcConfig",
    "CalibrationStep",
    "CalibrationResult",
    "ScenarioSpec",
    "ScenarioMetadata",
    "Violation",
    "RunConfig",
    "ComponentSummary",
    "SummaryReport",
    "Manifest",
    "StateReq",
    "DensityReq",
    "RepulsionReq",
    "CalibrateReq",
    "FitReq",
    "FitResp",
    "RunRecord",
    "RunListing",
    "ValidateReq",
]
