import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from randtheil.errors import (
    EmptyMatrix,
    InvalidAttributes,
    InvalidCommunityCount,
    LabelOutOfRange,
    RandTheilError,
    TooFewTimeSteps,
)
from randtheil.io import format_matrix, parse_blocks
from randtheil.model import (
    AttributeObservations,
    CommunityTrajectories,
    EntropyTrajectory,
    SegmentedChain,
    TransitionMatrix,
    validate_trajectories,
)


def test_minimal_valid():
    traj = validate_trajectories([[1, 2], [2, 1]], 2)
    assert (traj.n_individuals, traj.n_times, traj.n_communities) == (2, 2, 2)
    np.testing.assert_array_equal(traj.data, [[0, 1], [1, 0]])
    np.testing.assert_array_equal(traj.labels(), [[1, 2], [2, 1]])


@pytest.mark.parametrize(
    "raw, d, exc",
    [
        ([[1, 3]], 2, LabelOutOfRange),
        ([[1], [1]], 2, TooFewTimeSteps),
        ([[0, 1]], 2, LabelOutOfRange),
        ([[1.5, 1]], 2, LabelOutOfRange),
        ([], 2, EmptyMatrix),
        ([[1, 1]], 1, InvalidCommunityCount),
    ],
)
def test_validation_errors(raw, d, exc):
    with pytest.raises(exc):
        validate_trajectories(raw, d)


def test_containers_are_immutable():
    traj = validate_trajectories([[1, 2, 2]], 2)
    with pytest.raises(ValueError):
        traj.data[0, 0] = 1


@given(
    arrays(np.int64, st.tuples(st.integers(1, 5), st.integers(1, 6)), elements=st.integers(-2, 6)),
    st.integers(1, 5),
)
@settings(max_examples=200, deadline=None)
def test_validation_is_total(raw, d):
    try:
        traj = validate_trajectories(raw, d)
    except RandTheilError as exc:
        # exactly one typed error, never a bare exception
        assert type(exc) in {LabelOutOfRange, TooFewTimeSteps, EmptyMatrix, InvalidCommunityCount}
    else:
        assert traj.data.min() >= 0 and traj.data.max() < d


@given(arrays(np.int64, st.tuples(st.integers(1, 6), st.integers(2, 8)), elements=st.integers(1, 4)))
@settings(max_examples=100, deadline=None)
def test_serialize_parse_round_trip(raw):
    traj = validate_trajectories(raw, 4)
    parsed = parse_blocks(format_matrix(traj.labels()))[None]
    again = validate_trajectories(parsed, 4)
    np.testing.assert_array_equal(again.data, traj.data)


def test_attribute_validation():
    AttributeObservations([[0.0, 1.5]])
    with pytest.raises(InvalidAttributes):
        AttributeObservations([[-1.0, 1.0]])
    with pytest.raises(InvalidAttributes):
        AttributeObservations([[np.nan, 1.0]])


def test_transition_matrix_rejects_bad_rows():
    TransitionMatrix([[0.3, 0.7], [1.0, 0.0]])
    with pytest.raises(ValueError):
        TransitionMatrix([[0.3, 0.6], [1.0, 0.0]])
    with pytest.raises(ValueError):
        TransitionMatrix([[1.2, -0.2], [0.5, 0.5]])


def test_segmented_chain_segments():
    eye = np.eye(2)
    chain = SegmentedChain((2, 5), (eye, eye, eye))
    assert [chain.segment_at(t) for t in range(7)] == [0, 0, 1, 1, 1, 2, 2]
    with pytest.raises(ValueError):
        SegmentedChain((3, 3), (eye, eye, eye))
    with pytest.raises(ValueError):
        SegmentedChain((3,), (eye,))


def test_entropy_trajectory_shape():
    tr = EntropyTrajectory([0.1, 0.2], [0.0, 0.1], 4)
    assert tr.horizon == 2
    np.testing.assert_allclose(tr.standard_error(), [0.0, 0.05])


def test_from_zero_based_bounds():
    CommunityTrajectories.from_zero_based([[0, 1]], 2)
    with pytest.raises(LabelOutOfRange):
        CommunityTrajectories.from_zero_based([[0, 2]], 2)
