"""Core containers shared across the package.

Community labels are 1-based in files and on the command line and 0-based
everywhere inside the library. The conversion happens in
:func:`validate_trajectories` (inbound) and :meth:`CommunityTrajectories.labels`
(outbound).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import (
    EmptyMatrix,
    InvalidAttributes,
    InvalidCommunityCount,
    LabelOutOfRange,
    TooFewTimeSteps,
)

ROW_SUM_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CommunityTrajectories:
    """Community occupied by each individual at each time.

    ``data[c, t]`` is the 0-based community of individual ``c`` at time ``t``.
    """

    data: NDArray[np.int64]
    n_communities: int

    def __post_init__(self):
        object.__setattr__(self, "data", _frozen(np.asarray(self.data, dtype=np.int64)))

    @classmethod
    def from_zero_based(cls, data: ArrayLike, n_communities: int) -> CommunityTrajectories:
        """Wrap an already 0-based label matrix, checking bounds only."""
        arr = np.asarray(data, dtype=np.int64)
        if arr.ndim != 2 or arr.size == 0:
            raise EmptyMatrix("trajectory matrix must be a non-empty 2-D array")
        if arr.min() < 0 or arr.max() >= n_communities:
            raise LabelOutOfRange(f"labels must lie in 0..{n_communities - 1}")
        return cls(arr, int(n_communities))

    @property
    def n_individuals(self) -> int:
        return self.data.shape[0]

    @property
    def n_times(self) -> int:
        return self.data.shape[1]

    def labels(self) -> NDArray[np.int64]:
        """1-based copy of the label matrix, for export."""
        return self.data + 1

    def last_observed(self) -> NDArray[np.int64]:
        return self.data[:, -1].copy()


@dataclass(frozen=True, eq=False)
class AttributeObservations:
    """Non-negative attribute values aligned with a trajectory matrix."""

    data: NDArray[np.float64]

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2 or arr.size == 0:
            raise EmptyMatrix("attribute matrix must be a non-empty 2-D array")
        if not np.all(np.isfinite(arr)):
            raise InvalidAttributes("attribute values must be finite")
        if np.any(arr < 0):
            raise InvalidAttributes("attribute values must be non-negative")
        object.__setattr__(self, "data", _frozen(arr))

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Row-stochastic matrix; ``p[i, j]`` is the probability of moving i -> j."""

    p: NDArray[np.float64]

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        if p.ndim != 2 or p.shape[0] != p.shape[1] or p.shape[0] == 0:
            raise ValueError(f"transition matrix must be square, got shape {p.shape}")
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("transition probabilities must lie in [0, 1]")
        if np.max(np.abs(p.sum(axis=1) - 1.0)) > ROW_SUM_TOL:
            raise ValueError(f"rows must sum to 1, got {p.sum(axis=1)}")
        object.__setattr__(self, "p", _frozen(p))

    @property
    def n_states(self) -> int:
        return self.p.shape[0]


@dataclass(frozen=True, eq=False)
class SegmentedChain:
    """Piecewise homogeneous chain.

    ``matrices[l]`` drives every transition ``t -> t+1`` with
    ``change_points[l-1] <= t < change_points[l]`` (the first segment starts at 0,
    the last one never ends).
    """

    change_points: tuple[int, ...]
    matrices: tuple[TransitionMatrix, ...]

    def __post_init__(self):
        cps = tuple(int(c) for c in self.change_points)
        mats = tuple(
            m if isinstance(m, TransitionMatrix) else TransitionMatrix(m) for m in self.matrices
        )
        if len(mats) != len(cps) + 1:
            raise ValueError("need exactly one more matrix than change points")
        if any(c <= 0 for c in cps) or any(b <= a for a, b in zip(cps, cps[1:])):
            raise ValueError("change points must be positive and strictly increasing")
        if len({m.n_states for m in mats}) != 1:
            raise ValueError("all segment matrices must have the same size")
        object.__setattr__(self, "change_points", cps)
        object.__setattr__(self, "matrices", mats)

    @classmethod
    def homogeneous(cls, p) -> SegmentedChain:
        return cls((), (p,))

    @property
    def n_states(self) -> int:
        return self.matrices[0].n_states

    def segment_at(self, t: int) -> int:
        """Index of the segment governing the transition out of time ``t``."""
        return int(np.searchsorted(self.change_points, t, side="right"))

    def matrix_at(self, t: int) -> TransitionMatrix:
        return self.matrices[self.segment_at(t)]


@dataclass(frozen=True, eq=False)
class EntropyTrajectory:
    """Monte Carlo estimate of the expected Theil index over a forecast horizon.

    ``mean[h - 1]`` and ``sigma[h - 1]`` refer to step ``h`` after the start.
    """

    mean: NDArray[np.float64]
    sigma: NDArray[np.float64]
    n_replications: int
    seed: int | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "mean", _frozen(np.asarray(self.mean, dtype=np.float64)))
        object.__setattr__(self, "sigma", _frozen(np.asarray(self.sigma, dtype=np.float64)))
        if self.mean.shape != self.sigma.shape or self.mean.ndim != 1:
            raise ValueError("mean and sigma must be 1-D vectors of equal length")

    @property
    def horizon(self) -> int:
        return self.mean.shape[0]

    def standard_error(self) -> NDArray[np.float64]:
        return self.sigma / np.sqrt(self.n_replications)


def validate_trajectories(raw: ArrayLike, n_communities: int) -> CommunityTrajectories:
    """Validate a 1-based label matrix (rows individuals, columns times).

    Parameters
    ----------
    raw : array_like
        Rectangular matrix of community labels in ``1..n_communities``.
    n_communities : int
        Declared number of communities ``D``; larger labels are rejected.

    Returns
    -------
    CommunityTrajectories
        Container holding 0-based labels.

    Raises
    ------
    EmptyMatrix, TooFewTimeSteps, LabelOutOfRange, InvalidCommunityCount
    """
    if int(n_communities) < 2:
        raise InvalidCommunityCount(f"need at least 2 communities, got {n_communities}")
    arr = np.asarray(raw, dtype=np.float64)
    if arr.ndim == 1 and arr.size:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.size == 0:
        raise EmptyMatrix("trajectory matrix is empty")
    if arr.shape[1] < 2:
        raise TooFewTimeSteps(f"need at least 2 time steps, got {arr.shape[1]}")
    bad = ~np.isfinite(arr) | (arr != np.round(arr)) | (arr < 1) | (arr > n_communities)
    if bad.any():
        c, t = map(int, np.argwhere(bad)[0])
        raise LabelOutOfRange(
            f"label {arr[c, t]!r} at individual {c + 1}, time {t} is not in 1..{n_communities}"
        )
    return CommunityTrajectories(arr.astype(np.int64) - 1, int(n_communities))
