import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import two_state_phmc
from oracles import brute_force_change_points
from randtheil.changepoint import (
    ChangePointQuery,
    detect_change_points,
    lambda_statistic,
    segment_loglik,
)
from randtheil.errors import InvalidRange, NoAdmissiblePosition
from randtheil.model import CommunityTrajectories, SegmentedChain
from randtheil.markov import simulate_phmc


def test_segment_loglik_examples():
    assert segment_loglik(np.array([[2, 2], [0, 0]])) == pytest.approx(4 * math.log(0.5), abs=1e-12)
    assert segment_loglik(np.array([[5, 0], [0, 3]])) == 0.0
    assert segment_loglik(np.zeros((3, 3), dtype=int)) == 0.0


@given(st.lists(st.integers(0, 50), min_size=9, max_size=9))
def test_segment_loglik_non_positive(cells):
    assert segment_loglik(np.array(cells).reshape(3, 3)) <= 0.0


def test_lambda_statistic():
    assert lambda_statistic(-100, -100) == 0
    assert lambda_statistic(-90, -100) == 20
    assert lambda_statistic(-100 - 1e-12, -100) == 0


def test_recovers_change_point():
    res = detect_change_points(two_state_phmc(30, 200, 120, seed=1), 1)
    assert abs(res.positions[0] - 120) <= 5
    assert res.lambda_stat > 100
    assert res.p_value < 1e-10
    assert len(res.segment_matrices) == 2
    np.testing.assert_allclose(res.segment_matrices[0].p, [[0.95, 0.05], [0.05, 0.95]], atol=0.03)
    assert res.likelihood_profile[res.positions[0]] == pytest.approx(res.loglik_piecewise)
    assert set(res.likelihood_profile) == set(range(1, 199))


def test_homogeneous_lambda_small_relative_to_alternative():
    p = [[0.95, 0.05], [0.05, 0.95]]
    null, alt = [], []
    for seed in range(20):
        r = np.random.default_rng(seed)
        traj = simulate_phmc(SegmentedChain.homogeneous(p), r.integers(0, 2, 30), 199, r)
        null.append(detect_change_points(traj, 1).lambda_stat)
        alt.append(detect_change_points(two_state_phmc(30, 200, 120, seed), 1).lambda_stat)
    assert max(null) < min(alt) / 10


def test_ranges_restrict_positions():
    traj = two_state_phmc(30, 200, 120, seed=2)
    res = detect_change_points(traj, ChangePointQuery(1, ((70, 100),)))
    assert 70 <= res.positions[0] <= 100
    assert set(res.likelihood_profile) == set(range(70, 101))


def test_delta_spacing():
    traj = two_state_phmc(10, 60, 30, seed=3)
    res = detect_change_points(traj, ChangePointQuery(3, delta=10))
    p = res.positions
    assert all(b - a >= 10 for a, b in zip(p, p[1:]))


def test_no_admissible_position():
    traj = two_state_phmc(5, 20, 10, seed=0)
    with pytest.raises(NoAdmissiblePosition):
        detect_change_points(traj, ChangePointQuery(2, ((5, 6), (5, 6)), delta=3))


@pytest.mark.parametrize("query", [dict(k=0), dict(k=4), dict(k=1, delta=0), dict(k=1, ranges=((5, 2),))])
def test_invalid_queries(query):
    with pytest.raises(InvalidRange):
        ChangePointQuery(**query)


def test_range_outside_series():
    traj = two_state_phmc(5, 20, 10, seed=0)
    with pytest.raises(InvalidRange):
        detect_change_points(traj, ChangePointQuery(1, ((0, 5),)))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_partitioning_does_not_change_result(k):
    traj = two_state_phmc(12, 45, 25, seed=k)
    base = detect_change_points(traj, k, workers=1)
    for workers in (2, 3, 8):
        other = detect_change_points(traj, k, workers=workers)
        assert other.positions == base.positions
        assert other.loglik_piecewise == base.loglik_piecewise
        assert other.likelihood_profile == base.likelihood_profile


def test_matches_brute_force_k3():
    r = np.random.default_rng(9)
    x = r.integers(0, 3, (4, 14))
    traj = CommunityTrajectories.from_zero_based(x, 3)
    pos, ll = brute_force_change_points(x, 3, 3)
    res = detect_change_points(traj, 3)
    assert res.positions == pos
    assert res.loglik_piecewise == pytest.approx(ll, abs=1e-10)


def test_ties_resolved_to_earliest():
    # every individual constant: every configuration has log-likelihood 0
    traj = CommunityTrajectories.from_zero_based(np.array([[0] * 10, [1] * 10]), 2)
    assert detect_change_points(traj, 1).positions == (1,)
    assert detect_change_points(traj, 2).positions == (1, 2)


@given(st.integers(0, 10_000), st.integers(6, 30))
@settings(max_examples=30, deadline=None)
def test_more_change_points_never_lower_likelihood(seed, t):
    r = np.random.default_rng(seed)
    traj = CommunityTrajectories.from_zero_based(r.integers(0, 3, (4, t)), 3)
    lls = [detect_change_points(traj, k).loglik_piecewise for k in (1, 2, 3)]
    assert lls[0] <= lls[1] + 1e-9 and lls[1] <= lls[2] + 1e-9
    res = detect_change_points(traj, 1)
    assert res.loglik_piecewise >= res.loglik_homogeneous - 1e-9
