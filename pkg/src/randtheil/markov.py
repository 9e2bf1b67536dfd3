"""Transition-count MLE, stationary distribution and chain simulation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InvalidRange, SolveFailed
from .model import CommunityTrajectories, SegmentedChain, TransitionMatrix


@dataclass(frozen=True, eq=False)
class TransitionCounts:
    n: NDArray[np.int64]

    @property
    def row_totals(self) -> NDArray[np.int64]:
        return self.n.sum(axis=1)

    def __add__(self, other: TransitionCounts) -> TransitionCounts:
        return TransitionCounts(self.n + other.n)


@dataclass(frozen=True, eq=False)
class StationaryDistribution:
    pi: NDArray[np.float64]
    residual: float
    unique: bool


def transition_prefix_counts(traj: CommunityTrajectories) -> NDArray[np.int64]:
    """Cumulative count table of shape ``(T, D, D)``.

    ``prefix[t]`` holds the counts of all transitions ``s -> s+1`` with ``s < t``,
    so counts over ``[a, b)`` are ``prefix[b] - prefix[a]``.
    """
    d = traj.n_communities
    x = traj.data
    steps = x.shape[1] - 1
    flat = x[:, :-1] * d + x[:, 1:]
    per_step = np.zeros((steps, d * d), dtype=np.int64)
    for t in range(steps):
        per_step[t] = np.bincount(flat[:, t], minlength=d * d)
    prefix = np.zeros((steps + 1, d, d), dtype=np.int64)
    np.cumsum(per_step.reshape(steps, d, d), axis=0, out=prefix[1:])
    return prefix


def count_transitions(
    traj: CommunityTrajectories, t_start: int = 0, t_end: int | None = None
) -> TransitionCounts:
    """Pooled counts of transitions ``t -> t+1`` for ``t_start <= t < t_end``."""
    last = traj.n_times - 1
    if t_end is None:
        t_end = last
    if not (0 <= t_start < t_end <= last):
        raise InvalidRange(f"need 0 <= t_start < t_end <= {last}, got [{t_start}, {t_end})")
    d = traj.n_communities
    src = traj.data[:, t_start:t_end].ravel()
    dst = traj.data[:, t_start + 1 : t_end + 1].ravel()
    n = np.bincount(src * d + dst, minlength=d * d).reshape(d, d)
    return TransitionCounts(n.astype(np.int64))


def estimate_transition_matrix(counts: TransitionCounts | ArrayLike) -> TransitionMatrix:
    """Row-normalised counts. Rows that were never left become self-loops."""
    n = counts.n if isinstance(counts, TransitionCounts) else np.asarray(counts)
    n = n.astype(np.float64)
    totals = n.sum(axis=1)
    p = np.eye(n.shape[0])
    seen = totals > 0
    p[seen] = n[seen] / totals[seen, None]
    return TransitionMatrix(p)


def stationary_distribution(p: TransitionMatrix | ArrayLike) -> StationaryDistribution:
    """Stationary law as the least-squares solution of ``pi (P - I) = 0, sum(pi) = 1``.

    For reducible chains the system is rank deficient; the minimal-norm solution
    is returned with ``unique=False``.
    """
    mat = p.p if isinstance(p, TransitionMatrix) else np.asarray(p, dtype=np.float64)
    d = mat.shape[0]
    a = np.vstack([mat.T - np.eye(d), np.ones((1, d))])
    b = np.zeros(d + 1)
    b[-1] = 1.0
    pi, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if not np.all(np.isfinite(pi)) or np.any(pi < -1e-8):
        raise SolveFailed(f"least-squares solve returned an invalid distribution: {pi}")
    pi = np.clip(pi, 0.0, None)
    total = pi.sum()
    if total <= 0:
        raise SolveFailed("stationary solve returned an all-zero vector")
    pi = pi / total
    residual = float(np.max(np.abs(pi @ mat - pi)))
    return StationaryDistribution(pi, residual, unique=bool(rank == d))


def simulate_step(p: TransitionMatrix | ArrayLike, current: int, u: float) -> int:
    """Inverse-CDF draw: smallest ``j`` whose cumulative row mass exceeds ``u``."""
    mat = p.p if isinstance(p, TransitionMatrix) else np.asarray(p, dtype=np.float64)
    cum = np.cumsum(mat[current])
    return int(min(np.searchsorted(cum, u, side="right"), cum.size - 1))


def step_many(cum: NDArray[np.float64], current: NDArray[np.int64], u: NDArray[np.float64]):
    """Vectorised :func:`simulate_step` given a precomputed cumulative matrix."""
    rows = cum[current]
    nxt = (rows <= u[:, None]).sum(axis=1)
    return np.minimum(nxt, cum.shape[1] - 1)


def draw_initial(pi: ArrayLike, n: int, rng: np.random.Generator) -> NDArray[np.int64]:
    """Draw ``n`` i.i.d. 0-based communities from ``pi``."""
    cum = np.cumsum(np.asarray(pi, dtype=np.float64))[None, :]
    u = rng.random(n)
    return step_many(cum, np.zeros(n, dtype=np.int64), u)


def simulate_path(
    chain: SegmentedChain,
    initial: ArrayLike,
    horizon: int,
    u: NDArray[np.float64],
) -> NDArray[np.int64]:
    """Label matrix ``(N, horizon + 1)`` from given uniforms ``u`` of shape ``(horizon, N)``."""
    x0 = np.asarray(initial, dtype=np.int64)
    out = np.empty((x0.size, horizon + 1), dtype=np.int64)
    out[:, 0] = x0
    cums = [np.cumsum(m.p, axis=1) for m in chain.matrices]
    for h in range(1, horizon + 1):
        cum = cums[chain.segment_at(h - 1)]
        out[:, h] = step_many(cum, out[:, h - 1], u[h - 1])
    return out


def simulate_phmc(
    chain: SegmentedChain,
    initial: ArrayLike,
    horizon: int,
    rng: np.random.Generator,
) -> CommunityTrajectories:
    """Simulate ``N`` independent individuals over ``horizon`` steps.

    Column 0 is ``initial`` (0-based labels); the transition into column ``h``
    uses the segment active at time ``h - 1``.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    x0 = np.asarray(initial, dtype=np.int64)
    u = rng.random((horizon, x0.size))
    return CommunityTrajectories.from_zero_based(
        simulate_path(chain, x0, horizon, u), chain.n_states
    )
