"""Per-community histograms of the attribute, with CDF and quantile evaluation.

Bins are ``[m w, (m + 1) w)`` starting at zero. By default the mass of each bin
is spread uniformly across it, giving a continuous piecewise-linear CDF and
quantile function. ``step=True`` instead puts each bin's mass on its midpoint.
A sample whose values are all identical is kept as a point mass at that value.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import EmptyCommunity, InvalidAttributes
from .model import AttributeObservations, CommunityTrajectories

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    bin_width: float
    bin_counts: NDArray[np.int64]
    origin: float = 0.0
    step: bool = False
    atom: float | None = None

    def __post_init__(self):
        if not self.bin_width > 0:
            raise ValueError("bin_width must be positive")
        counts = np.array(self.bin_counts, dtype=np.int64)
        if counts.ndim != 1 or counts.size == 0 or np.any(counts < 0) or counts.sum() == 0:
            raise ValueError("bin_counts must be a non-empty vector of non-negative counts with positive total")
        counts.setflags(write=False)
        cum = np.cumsum(counts)
        cum.setflags(write=False)
        object.__setattr__(self, "bin_counts", counts)
        object.__setattr__(self, "_cum", cum)

    @classmethod
    def from_values(cls, values: ArrayLike, bin_width: float, step: bool = False) -> EmpiricalDistribution:
        s = np.asarray(values, dtype=np.float64).ravel()
        if s.size == 0:
            raise EmptyCommunity("no observations to build a distribution from")
        if np.any(s < 0) or not np.all(np.isfinite(s)):
            raise InvalidAttributes("attribute values must be finite and non-negative")
        idx = np.floor(s / bin_width).astype(np.int64)
        counts = np.bincount(idx)
        atom = float(s[0]) if np.all(s == s[0]) else None
        return cls(float(bin_width), counts, 0.0, step, atom)

    @property
    def total(self) -> int:
        return int(self._cum[-1])

    @property
    def edges(self) -> NDArray[np.float64]:
        return self.origin + self.bin_width * np.arange(self.bin_counts.size + 1)

    def support(self) -> tuple[float, float]:
        if self.atom is not None:
            return self.atom, self.atom
        nz = np.flatnonzero(self.bin_counts)
        e = self.edges
        return float(e[nz[0]]), float(e[nz[-1] + 1])

    def quantile(self, u: ArrayLike) -> NDArray[np.float64] | float:
        return quantile(self, u)

    def cdf(self, s: ArrayLike) -> NDArray[np.float64] | float:
        return cdf(self, s)


def quantile(dist: EmpiricalDistribution, u: ArrayLike):
    """Generalised inverse ``inf{s : F(s) >= u}``; accepts scalars or arrays."""
    u_arr = np.asarray(u, dtype=np.float64)
    scalar = u_arr.ndim == 0
    u_arr = np.atleast_1d(u_arr)
    if dist.atom is not None:
        out = np.full(u_arr.shape, dist.atom)
        return float(out[0]) if scalar else out

    counts = dist.bin_counts
    cum = dist._cum
    w = dist.bin_width
    target = np.clip(u_arr, 0.0, 1.0) * dist.total
    # first bin whose cumulative count reaches the target; u=0 lands on the
    # first non-empty bin via the strict side for zero targets
    m = np.searchsorted(cum, target, side="left")
    zero = target <= 0
    m[zero] = np.flatnonzero(counts)[0]
    m = np.minimum(m, counts.size - 1)
    left = dist.origin + w * m
    if dist.step:
        out = left + 0.5 * w
    else:
        before = cum[m] - counts[m]
        out = left + w * (target - before) / counts[m]
        out[zero] = left[zero]
    return float(out[0]) if scalar else out


def cdf(dist: EmpiricalDistribution, s: ArrayLike):
    """Distribution function matching :func:`quantile`."""
    s_arr = np.asarray(s, dtype=np.float64)
    scalar = s_arr.ndim == 0
    s_arr = np.atleast_1d(s_arr)
    if dist.atom is not None:
        out = (s_arr >= dist.atom).astype(np.float64)
        return float(out[0]) if scalar else out

    counts = dist.bin_counts
    cum = dist._cum
    w = dist.bin_width
    pos = (s_arr - dist.origin) / w
    m = np.floor(pos).astype(np.int64)
    inside = (m >= 0) & (m < counts.size)
    mc = np.clip(m, 0, counts.size - 1)
    before = (cum[mc] - counts[mc]).astype(np.float64)
    if dist.step:
        frac = (pos - mc >= 0.5).astype(np.float64)
    else:
        frac = pos - mc
    mass = np.where(inside, before + counts[mc] * frac, np.where(m < 0, 0.0, dist.total))
    out = mass / dist.total
    return float(out[0]) if scalar else out


@dataclass(frozen=True, eq=False)
class DistributionFamily:
    """One distribution per community; ``None`` marks a community with no data."""

    per_community: tuple[EmpiricalDistribution | None, ...]
    pooled: EmpiricalDistribution
    use_pooled_fallback: bool = False

    @property
    def empty_communities(self) -> tuple[int, ...]:
        return tuple(i for i, d in enumerate(self.per_community) if d is None)

    def get(self, community: int) -> EmpiricalDistribution:
        dist = self.per_community[community]
        if dist is not None:
            return dist
        if not self.use_pooled_fallback:
            raise EmptyCommunity(f"community {community + 1} has no attribute observations")
        log.warning("community %d has no observations; using the pooled distribution", community + 1)
        return self.pooled

    def with_fallback(self, enabled: bool = True) -> DistributionFamily:
        return DistributionFamily(self.per_community, self.pooled, enabled)


def fit_family(
    traj: CommunityTrajectories,
    attrs: AttributeObservations,
    bin_width: float,
    step: bool = False,
) -> DistributionFamily:
    """Pool each community's attribute observations over all individuals and times.

    Communities never visited get ``None`` and are listed in
    ``empty_communities``; a warning is logged.
    """
    if attrs.shape != traj.data.shape:
        raise InvalidAttributes(
            f"attribute matrix shape {attrs.shape} differs from trajectory shape {traj.data.shape}"
        )
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    dists = []
    for x in range(traj.n_communities):
        vals = attrs.data[traj.data == x]
        dists.append(EmpiricalDistribution.from_values(vals, bin_width, step) if vals.size else None)
    family = DistributionFamily(
        tuple(dists), EmpiricalDistribution.from_values(attrs.data, bin_width, step)
    )
    if family.empty_communities:
        log.warning(
            "communities without attribute observations: %s",
            ", ".join(str(i + 1) for i in family.empty_communities),
        )
    return family


def histogram_rows(dist: EmpiricalDistribution) -> list[tuple[float, float, int]]:
    """``(bin_left, bin_right, count)`` for every bin up to the last non-empty one."""
    e = dist.edges
    return [(float(e[i]), float(e[i + 1]), int(c)) for i, c in enumerate(dist.bin_counts)]
