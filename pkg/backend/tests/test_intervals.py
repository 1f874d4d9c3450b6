import math

import numpy as np
import pytest
from scipy import stats

from repmix.errors import InputError, SamplerError
from repmix.intervals import AllowedSet, InverseGammaLaw, NormalLaw, sample_truncated


def test_complement_merges_overlaps():
    allowed = AllowedSet.complement([(-1.0, 1.0), (0.5, 2.0), (5.0, 6.0)])
    assert allowed.intervals == ((-math.inf, -1.0), (2.0, 5.0), (6.0, math.inf))


def test_complement_respects_lower_bound():
    allowed = AllowedSet.complement([(-1.0, 0.5)], lower=0.0)
    assert allowed.intervals == ((0.5, math.inf),)
    assert AllowedSet.complement([], lower=0.0) == AllowedSet.positive()


def test_complement_without_room_raises():
    with pytest.raises(InputError):
        AllowedSet.complement([(-math.inf, math.inf)])


@pytest.mark.parametrize("intervals", [((1.0, 0.0),), ((0.0, 2.0), (1.0, 3.0)), ()])
def test_invalid_sets(intervals):
    with pytest.raises(InputError):
        AllowedSet(intervals)


def test_contains_is_open():
    allowed = AllowedSet(((0.0, 1.0), (2.0, 3.0)))
    assert allowed.contains(0.5) and allowed.contains(2.5)
    assert not allowed.contains(1.0)
    assert not allowed.contains(1.5)
    assert len(allowed) == 2


def test_split_line_matches_untruncated_law(rng):
    law = NormalLaw(1.0, 4.0)
    allowed = AllowedSet(((-math.inf, 0.0), (0.0, math.inf)))
    draws = np.array([sample_truncated(law, allowed, rng) for _ in range(3000)])
    assert stats.kstest(draws, stats.norm(1.0, 2.0).cdf).pvalue > 1e-3


def test_half_normal_mean(rng):
    draws = np.array([sample_truncated(NormalLaw(0.0, 1.0), AllowedSet.positive(), rng) for _ in range(20_000)])
    assert np.all(draws > 0)
    se = draws.std(ddof=1) / math.sqrt(draws.size)
    assert abs(draws.mean() - math.sqrt(2 / math.pi)) < 4 * se


def test_sliver_confinement(rng):
    lo, hi = 0.1, 0.1 + 1e-9
    allowed = AllowedSet(((lo, hi),))
    for _ in range(200):
        x = sample_truncated(NormalLaw(3.0, 0.5), allowed, rng)
        assert lo < x < hi


def test_far_tail(rng):
    draws = np.array([sample_truncated(NormalLaw(0.0, 1.0), AllowedSet(((8.0, math.inf),)), rng) for _ in range(2000)])
    assert np.all(draws > 8.0)
    # E[X | X > 8] = phi(8) / Q(8), about 8.12
    assert 8.0 < draws.mean() < 9.0
    assert draws.mean() == pytest.approx(stats.norm.pdf(8.0) / stats.norm.sf(8.0), abs=0.02)


def test_numerically_empty_region(rng):
    with pytest.raises(SamplerError) as info:
        sample_truncated(NormalLaw(0.0, 1.0), AllowedSet(((40.0, 41.0),)), rng)
    assert info.value.message == "slice region numerically empty"
    assert info.value.exit_code == 3


def test_inverse_gamma_law_matches_scipy():
    law = InverseGammaLaw(3.0, 2.0)
    reference = stats.invgamma(3.0, scale=2.0)
    for x in (0.05, 0.4, 1.0, 2.5, 30.0):
        assert law.cdf(x) == pytest.approx(reference.cdf(x), rel=1e-10, abs=1e-300)
        assert law.sf(x) == pytest.approx(reference.sf(x), rel=1e-10, abs=1e-300)
    for p in (0.01, 0.3, 0.5, 0.9):
        assert law.ppf(p) == pytest.approx(reference.ppf(p), rel=1e-9)
        assert law.isf(p) == pytest.approx(reference.isf(p), rel=1e-9)
    assert law.cdf(0.0) == 0.0 and law.cdf(math.inf) == 1.0


def test_truncated_inverse_gamma_distribution(rng):
    law = InverseGammaLaw(3.0, 2.0)
    reference = stats.invgamma(3.0, scale=2.0)
    allowed = AllowedSet(((0.5, 2.0), (3.0, math.inf)))
    total = (reference.cdf(2.0) - reference.cdf(0.5)) + reference.sf(3.0)

    def truncated_cdf(x):
        x = np.asarray(x)
        inside_first = reference.cdf(np.clip(x, 0.5, 2.0)) - reference.cdf(0.5)
        inside_second = np.where(x > 3.0, reference.cdf(np.maximum(x, 3.0)) - reference.cdf(3.0), 0.0)
        return (inside_first + inside_second) / total

    draws = np.array([sample_truncated(law, allowed, rng) for _ in range(20_000)])
    assert all(allowed.contains(x) for x in draws)
    assert stats.kstest(draws, truncated_cdf).pvalue > 1e-3


def test_interval_choice_follows_mass(rng):
    allowed = AllowedSet(((-math.inf, -1.0), (2.0, math.inf)))
    draws = np.array([sample_truncated(NormalLaw(0.0, 1.0), allowed, rng) for _ in range(4000)])
    left, right = stats.norm.cdf(-1.0), stats.norm.sf(2.0)
    assert np.mean(draws < 0) == pytest.approx(left / (left + right), abs=0.025)
