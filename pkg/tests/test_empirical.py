import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from randtheil.empirical import EmpiricalDistribution, cdf, fit_family, histogram_rows, quantile
from randtheil.errors import EmptyCommunity
from randtheil.model import AttributeObservations, validate_trajectories


def two_bins():
    return EmpiricalDistribution(1.0, [1, 1])


def test_hand_binning():
    d = EmpiricalDistribution.from_values([1.0, 2.0], 1.0)
    np.testing.assert_array_equal(d.bin_counts, [0, 1, 1])
    assert histogram_rows(d) == [(0.0, 1.0, 0), (1.0, 2.0, 1), (2.0, 3.0, 1)]
    assert d.total == 2


def test_quarter_bins():
    d = EmpiricalDistribution.from_values([0.1, 0.3, 0.3, 1.0], 0.25)
    np.testing.assert_array_equal(d.bin_counts, [1, 2, 0, 0, 1])


def test_degenerate_distribution_is_constant():
    d = EmpiricalDistribution.from_values([2.3] * 5, 0.25)
    assert np.count_nonzero(d.bin_counts) == 1
    np.testing.assert_array_equal(quantile(d, [0.0, 0.2, 0.9, 1.0]), 2.3)


def test_quantile_examples():
    assert quantile(EmpiricalDistribution(1.0, [5]), 0.5) == 0.5
    assert quantile(two_bins(), 0.75) == 1.5
    assert quantile(two_bins(), 0.0) == 0.0
    assert quantile(two_bins(), 1.0) == 2.0
    d = EmpiricalDistribution.from_values([1.0, 2.0], 1.0)
    assert quantile(d, 0.0) == 1.0
    assert quantile(d, 1.0) == 3.0


def test_cdf_examples():
    d = two_bins()
    assert cdf(d, -1.0) == 0.0
    assert cdf(d, 5.0) == 1.0
    assert cdf(d, 1.5) == 0.75


def test_step_mode_uses_midpoints():
    d = EmpiricalDistribution(1.0, [0, 3, 0, 1], step=True)
    np.testing.assert_array_equal(quantile(d, [0.1, 0.75, 0.76, 1.0]), [1.5, 1.5, 3.5, 3.5])
    assert cdf(d, 1.49) == 0.0 and cdf(d, 1.5) == 0.75 and cdf(d, 3.6) == 1.0


counts_strategy = st.lists(st.integers(1, 20), min_size=1, max_size=8)


@given(counts_strategy, st.floats(0.01, 5.0), st.lists(st.floats(0.0, 1.0), min_size=2, max_size=20))
@settings(max_examples=100, deadline=None)
def test_monotone(counts, w, us):
    d = EmpiricalDistribution(w, counts)
    us = np.sort(us)
    q = quantile(d, us)
    assert np.all(np.diff(q) >= 0)
    assert np.all(np.diff(cdf(d, q)) >= 0)


@given(counts_strategy, st.floats(0.01, 5.0), st.floats(1e-9, 1 - 1e-9))
@settings(max_examples=200, deadline=None)
def test_cdf_quantile_round_trip(counts, w, u):
    d = EmpiricalDistribution(w, counts)
    assert cdf(d, quantile(d, u)) == pytest.approx(u, abs=1e-12)


def test_inverse_transform_reproduces_histogram():
    counts = np.array([3, 0, 7, 5, 1, 4])
    d = EmpiricalDistribution(0.5, counts)
    r = np.random.default_rng(0)
    samples = quantile(d, r.random(10**5))
    observed = np.bincount(np.floor(samples / 0.5).astype(int), minlength=counts.size)
    nz = counts > 0
    assert observed[~nz].sum() == 0
    chi = stats.chisquare(observed[nz], counts[nz] / counts.sum() * samples.size)
    assert chi.pvalue > 0.001


def test_fit_family_pools_by_community():
    traj = validate_trajectories([[1, 1, 2], [2, 2, 1]], 3)
    attrs = AttributeObservations([[1.0, 1.2, 5.0], [5.5, 6.0, 1.1]])
    fam = fit_family(traj, attrs, 1.0)
    assert fam.per_community[0].total == 3
    assert fam.per_community[1].total == 3
    assert fam.empty_communities == (2,)
    with pytest.raises(EmptyCommunity):
        fam.get(2)
    assert fam.with_fallback().get(2) is fam.pooled
    assert fam.pooled.total == 6
