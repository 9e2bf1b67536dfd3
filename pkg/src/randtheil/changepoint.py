"""Change-point detection for piecewise homogeneous Markov chains.

Positions are found by exhaustive maximisation of the pooled multinomial
log-likelihood. A change point ``tau`` splits the transitions so that the
transition out of time ``t`` belongs to the later segment iff ``t >= tau``.
Counts over any window come from a prefix-sum table, so each candidate costs
``O(D^2)``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import stats

from .errors import InvalidRange, NoAdmissiblePosition
from .markov import TransitionCounts, estimate_transition_matrix, transition_prefix_counts
from .model import CommunityTrajectories, TransitionMatrix

MAX_CHANGE_POINTS = 3
THREADS_ENV = "RANDENTROPY_THREADS"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def tie_tolerance(best: float) -> float:
    """Log-likelihoods closer than this to the maximum count as ties."""
    return 1e-9 * max(1.0, abs(best))


@dataclass(frozen=True, eq=False)
class ChangePointQuery:
    k: int = 1
    ranges: tuple[tuple[int, int] | None, ...] | None = None
    delta: int | None = None

    def __post_init__(self):
        if not 1 <= self.k <= MAX_CHANGE_POINTS:
            raise InvalidRange(f"number of change points must be 1..{MAX_CHANGE_POINTS}, got {self.k}")
        if self.ranges is not None:
            if len(self.ranges) != self.k:
                raise InvalidRange(f"expected {self.k} ranges, got {len(self.ranges)}")
            for r in self.ranges:
                if r is not None and r[0] > r[1]:
                    raise InvalidRange(f"empty range {r[0]}:{r[1]}")
        if self.delta is not None and self.delta < 1:
            raise InvalidRange("delta must be >= 1")

    def bounds(self, n_times: int) -> list[tuple[int, int]]:
        """Closed search interval of each change point for a series of ``n_times``."""
        last = n_times - 1
        out = []
        for i in range(self.k):
            r = None if self.ranges is None else self.ranges[i]
            if r is None:
                out.append((1, last - 1))
                continue
            lo, hi = int(r[0]), int(r[1])
            if lo < 1 or hi > last:
                raise InvalidRange(f"range {lo}:{hi} for change point {i + 1} is outside [1, {last}]")
            out.append((lo, hi))
        return out


@dataclass(frozen=True, eq=False)
class ChangePointResult:
    positions: tuple[int, ...]
    segment_matrices: tuple[TransitionMatrix, ...]
    loglik_piecewise: float
    loglik_homogeneous: float
    lambda_stat: float
    df: int
    p_value: float
    likelihood_profile: dict[int, float] = field(repr=False)


def segment_loglik(counts: TransitionCounts | ArrayLike) -> float:
    """Log-likelihood of a count matrix at its own MLE: ``sum n_ij ln(n_ij / n_i)``."""
    n = counts.n if isinstance(counts, TransitionCounts) else np.asarray(counts)
    return float(_loglik(np.asarray(n, dtype=np.float64)))


def _loglik(n: NDArray[np.float64]) -> NDArray[np.float64]:
    # vectorised over any leading axes; trailing two axes are (D, D)
    rows = n.sum(axis=-1, keepdims=True)
    pos = n > 0
    ratio = np.divide(n, rows, out=np.ones_like(n), where=pos)
    return np.sum(np.where(pos, n * np.log(ratio), 0.0), axis=(-2, -1))


def lambda_statistic(loglik_piecewise: float, loglik_homogeneous: float) -> float:
    """Deviance ``2 (l_piecewise - l_homogeneous)``, clamped at zero."""
    return max(0.0, 2.0 * (loglik_piecewise - loglik_homogeneous))


def lambda_p_value(lam: float, k: int, n_states: int) -> tuple[int, float]:
    """Approximate chi-square tail probability of the Lambda statistic.

    Uses ``df = k * D * (D - 1)``. This is an asymptotic reference only.
    """
    df = k * n_states * (n_states - 1)
    return df, float(stats.chi2.sf(lam, df))


class _LoglikTable:
    """Lazily filled table ``ll[a, b]`` of segment log-likelihoods over ``[a, b)``."""

    def __init__(self, prefix: NDArray[np.int64], full: bool):
        self.prefix = prefix.astype(np.float64)
        self.last = prefix.shape[0] - 1
        size = self.last + 1
        if full:
            self.table = np.zeros((size, size))
            for a in range(size):
                self.table[a, a + 1 :] = _loglik(self.prefix[a + 1 :] - self.prefix[a])
            self.from_start = self.table[0]
            self.to_end = self.table[:, self.last]
        else:
            self.table = None
            self.from_start = _loglik(self.prefix - self.prefix[0])
            self.to_end = _loglik(self.prefix[self.last] - self.prefix)


def _row_values(tab: _LoglikTable, bounds, delta: int, t1: int) -> NDArray[np.float64]:
    """Objective for all admissible completions given the first change point ``t1``.

    Returns an array of dimension ``k - 1`` (a 0-d array for ``k = 1``); inadmissible
    entries are ``-inf``. Axis ``i`` indexes change point ``i + 2`` over ``bounds[i + 1]``.
    """
    k = len(bounds)
    head = tab.from_start[t1]
    if k == 1:
        return np.asarray(head + tab.to_end[t1])
    lo2, hi2 = bounds[1]
    t2 = np.arange(lo2, hi2 + 1)
    ok2 = t2 >= t1 + delta
    if k == 2:
        vals = head + tab.table[t1, t2] + tab.to_end[t2]
        return np.where(ok2, vals, -np.inf)
    lo3, hi3 = bounds[2]
    t3 = np.arange(lo3, hi3 + 1)
    ok = ok2[:, None] & (t3[None, :] >= t2[:, None] + delta)
    vals = (
        head
        + tab.table[t1, t2][:, None]
        + tab.table[np.ix_(t2, t3)]
        + tab.to_end[t3][None, :]
    )
    return np.where(ok, vals, -np.inf)


def _row_maxima(tab, bounds, delta, firsts) -> NDArray[np.float64]:
    return np.array([np.max(_row_values(tab, bounds, delta, t1), initial=-np.inf) for t1 in firsts])


def detect_change_points(
    traj: CommunityTrajectories,
    query: ChangePointQuery | int = 1,
    workers: int | None = None,
) -> ChangePointResult:
    """Maximum-likelihood positions of ``query.k`` change points.

    Parameters
    ----------
    traj : CommunityTrajectories
        Observed trajectories; all individuals are pooled.
    query : ChangePointQuery or int
        Number of change points, optional per-point search ranges and minimum
        spacing ``delta`` between consecutive points.
    workers : int, optional
        Threads used to scan the first change point. The result does not depend
        on this value. Defaults to ``$RANDENTROPY_THREADS`` or 1.

    Returns
    -------
    ChangePointResult
        Positions (lexicographically earliest maximiser), per-segment MLE
        matrices, both log-likelihoods, the Lambda deviance and the profile
        log-likelihood of the first change point.

    Raises
    ------
    NoAdmissiblePosition
        If ranges and spacing leave nothing to search.
    """
    if isinstance(query, int):
        query = ChangePointQuery(query)
    workers = default_workers() if workers is None else max(1, int(workers))
    bounds = query.bounds(traj.n_times)
    delta = query.delta or 1
    prefix = transition_prefix_counts(traj)
    tab = _LoglikTable(prefix, full=query.k > 1)

    firsts = np.arange(bounds[0][0], bounds[0][1] + 1)
    if firsts.size == 0:
        raise NoAdmissiblePosition("search range of the first change point is empty")
    chunks = [c for c in np.array_split(firsts, min(workers, firsts.size)) if c.size]
    if len(chunks) == 1:
        maxima = _row_maxima(tab, bounds, delta, chunks[0])
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = pool.map(lambda c: _row_maxima(tab, bounds, delta, c), chunks)
            maxima = np.concatenate(list(parts))

    best = float(np.max(maxima))
    if not np.isfinite(best):
        raise NoAdmissiblePosition("no admissible change-point configuration for these ranges/delta")
    tol = tie_tolerance(best)
    i1 = int(np.flatnonzero(maxima >= best - tol)[0])
    t1 = int(firsts[i1])
    row = _row_values(tab, bounds, delta, t1)
    positions = [t1]
    if query.k > 1:
        flat = int(np.flatnonzero(row.ravel() >= best - tol)[0])
        idx = np.unravel_index(flat, row.shape)
        positions += [bounds[i + 1][0] + int(j) for i, j in enumerate(idx)]
    loglik_pw = float(row[tuple(idx)]) if query.k > 1 else float(row)

    edges = [0, *positions, tab.last]
    matrices = tuple(
        estimate_transition_matrix(TransitionCounts((prefix[b] - prefix[a]).astype(np.int64)))
        for a, b in zip(edges, edges[1:])
    )
    loglik_h = float(tab.from_start[tab.last])
    lam = lambda_statistic(loglik_pw, loglik_h)
    df, pval = lambda_p_value(lam, query.k, traj.n_communities)
    profile = {int(t): float(v) for t, v in zip(firsts, maxima) if np.isfinite(v)}
    return ChangePointResult(
        positions=tuple(positions),
        segment_matrices=matrices,
        loglik_piecewise=loglik_pw,
        loglik_homogeneous=loglik_h,
        lambda_stat=lam,
        df=df,
        p_value=pval,
        likelihood_profile=profile,
    )
