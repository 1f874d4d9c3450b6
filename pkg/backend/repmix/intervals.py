"""Unions of open intervals and exact truncated draws by CDF inversion."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Protocol, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammainc, gammaincc, gammainccinv, gammaincinv, ndtr, ndtri

from . import settings
from .errors import InputError, SamplerError

Interval = Tuple[float, float]


@dataclass(frozen=True)
class AllowedSet:
    """Sorted, disjoint open intervals; their union is where a coordinate may move."""

    intervals: Tuple[Interval, ...]

    def __post_init__(self) -> None:
        previous = -math.inf
        for lo, hi in self.intervals:
            if not lo < hi or lo < previous:
                raise InputError(f"intervals must be sorted, disjoint and non-empty: {self.intervals}")
            previous = hi
        if not self.intervals:
            raise InputError("allowed set is empty")

    @classmethod
    def whole_line(cls) -> "AllowedSet":
        return cls(((-math.inf, math.inf),))

    @classmethod
    def positive(cls) -> "AllowedSet":
        return cls(((0.0, math.inf),))

    @classmethod
    def complement(cls, excluded: Iterable[Interval], lower: float = -math.inf, upper: float = math.inf) -> "AllowedSet":
        """(lower, upper) minus the union of the excluded intervals."""

        merged: List[List[float]] = []
        for lo, hi in sorted((lo, hi) for lo, hi in excluded if hi > lo):
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        pieces: List[Interval] = []
        cursor = lower
        for lo, hi in merged:
            if lo > cursor:
                pieces.append((cursor, min(lo, upper)))
            cursor = max(cursor, hi)
            if cursor >= upper:
                break
        if cursor < upper:
            pieces.append((cursor, upper))
        return cls(tuple((lo, hi) for lo, hi in pieces if hi > lo))

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def contains(self, x: float) -> bool:
        return any(lo < x < hi for lo, hi in self.intervals)


class UnivariateLaw(Protocol):
    def cdf(self, x: float) -> float: ...

    def sf(self, x: float) -> float: ...

    def ppf(self, p: float) -> float: ...

    def isf(self, p: float) -> float: ...

    def sample(self, rng: np.random.Generator) -> float: ...


@dataclass(frozen=True)
class NormalLaw:
    mean: float
    var: float

    @property
    def sd(self) -> float:
        return math.sqrt(self.var)

    def cdf(self, x: float) -> float:
        return float(ndtr((x - self.mean) / self.sd))

    def sf(self, x: float) -> float:
        return float(ndtr((self.mean - x) / self.sd))

    def ppf(self, p: float) -> float:
        return self.mean + self.sd * float(ndtri(p))

    def isf(self, p: float) -> float:
        return self.mean - self.sd * float(ndtri(p))

    def sample(self, rng: np.random.Generator) -> float:
        return self.mean + self.sd * float(rng.standard_normal())


@dataclass(frozen=True)
class InverseGammaLaw:
    """IG(shape, scale) on a variance; CDFs through the regularized incomplete gamma."""

    shape: float
    scale: float

    def cdf(self, x: float) -> float:
        if x <= 0:
            return 0.0
        return float(gammaincc(self.shape, self.scale / x)) if math.isfinite(x) else 1.0

    def sf(self, x: float) -> float:
        if x <= 0:
            return 1.0
        return float(gammainc(self.shape, self.scale / x)) if math.isfinite(x) else 0.0

    def ppf(self, p: float) -> float:
        with np.errstate(divide="ignore"):
            return float(self.scale / gammainccinv(self.shape, p))

    def isf(self, p: float) -> float:
        with np.errstate(divide="ignore"):
            return float(self.scale / gammaincinv(self.shape, p))

    def sample(self, rng: np.random.Generator) -> float:
        return self.scale / float(rng.gamma(self.shape, 1.0))


def _interval_mass(law: UnivariateLaw, lo: float, hi: float) -> Tuple[float, bool]:
    """Mass of (lo, hi), computed on the tail where it is not lost to rounding.

    The flag tells whether the upper tail (survival function) was used.
    """

    lower_lo, lower_hi = law.cdf(lo), law.cdf(hi)
    if lower_hi <= 0.5:
        return max(lower_hi - lower_lo, 0.0), False
    upper_lo, upper_hi = law.sf(lo), law.sf(hi)
    if upper_lo <= 0.5:
        return max(upper_lo - upper_hi, 0.0), True
    return max(lower_hi - lower_lo, 0.0), False


def _invert(law: UnivariateLaw, lo: float, hi: float, upper_tail: bool, rng: np.random.Generator) -> float:
    if upper_tail:
        a, b = law.sf(hi), law.sf(lo)
        target = a + (b - a) * float(rng.random())
        x = law.isf(target)
        residual = lambda t: law.sf(t) - target  # noqa: E731
    else:
        a, b = law.cdf(lo), law.cdf(hi)
        target = a + (b - a) * float(rng.random())
        x = law.ppf(target)
        residual = lambda t: law.cdf(t) - target  # noqa: E731
    if not math.isfinite(x) or not lo < x < hi:
        x = min(max(x, lo), hi) if math.isfinite(x) else (lo if math.isfinite(lo) else hi)
    if abs(residual(x)) > settings.CDF_TOL and math.isfinite(lo) and math.isfinite(hi):
        f_lo, f_hi = residual(lo), residual(hi)
        if f_lo * f_hi < 0:
            x = brentq(residual, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return float(min(max(x, np.nextafter(lo, hi)), np.nextafter(hi, lo)))


def sample_truncated(base: UnivariateLaw, allowed: AllowedSet, rng: np.random.Generator) -> float:
    """Exact draw from ``base`` restricted to ``allowed``.

    Picks an interval with probability proportional to its base mass, then inverts
    the CDF inside it.
    """

    pieces: Sequence[Interval] = allowed.intervals
    if len(pieces) == 1 and pieces[0] == (-math.inf, math.inf):
        return base.sample(rng)
    masses, tails = zip(*(_interval_mass(base, lo, hi) for lo, hi in pieces))
    weights = np.asarray(masses)
    total = float(weights.sum())
    if not total >= settings.MIN_SLICE_MASS:
        raise SamplerError(
            "slice region numerically empty",
            details={"intervals": [list(p) for p in pieces], "law": repr(base), "mass": total},
        )
    index = int(np.searchsorted(np.cumsum(weights) / total, rng.random(), side="right"))
    index = min(index, len(pieces) - 1)
    while weights[index] == 0:
        index -= 1
    lo, hi = pieces[index]
    return _invert(base, lo, hi, tails[index], rng)


__all__ = [
    "AllowedSet",
    "NormalLaw",
    "InverseGammaLaw",
    "sample_truncated",
]
