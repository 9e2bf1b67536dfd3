"""Monte Carlo estimation of the expected Theil entropy of attribute shares.

One replication advances all individuals through the chain for ``horizon``
steps, draws copula-dependent uniforms for every step, maps them through the
community-conditional quantile functions, and evaluates the Theil index of the
resulting share vector at each step.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .changepoint import default_workers
from .copula import CopulaSpec, _open_uniform, transform_uniforms
from .empirical import DistributionFamily, EmpiricalDistribution
from .errors import AllZeroAttributes, EmptyCommunity, InvalidAttributes
from .markov import draw_initial, simulate_path, stationary_distribution
from .model import EntropyTrajectory, SegmentedChain

log = logging.getLogger(__name__)

INITIAL_MODES = ("last_observed", "stationary")


@dataclass(frozen=True)
class SimulationConfig:
    horizon: int = 1
    replications: int = 1
    seed: int | None = None
    initial_mode: str = "last_observed"
    copula: CopulaSpec = field(default_factory=CopulaSpec)
    bin_width: float | None = None

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.initial_mode not in INITIAL_MODES:
            raise ValueError(f"initial_mode must be one of {INITIAL_MODES}")


def shares_from_attributes(attrs: ArrayLike) -> NDArray[np.float64]:
    """Attribute shares; the last axis indexes individuals.

    The first share is set to one minus the others so every vector sums to 1.
    """
    s = np.asarray(attrs, dtype=np.float64)
    if np.any(s < 0) or not np.all(np.isfinite(s)):
        raise InvalidAttributes("attributes must be finite and non-negative")
    total = s.sum(axis=-1, keepdims=True)
    if np.any(total <= 0):
        raise AllZeroAttributes("every individual holds zero attribute; shares are undefined")
    sh = s / total
    sh[..., 0] = np.maximum(1.0 - sh[..., 1:].sum(axis=-1), 0.0)
    return sh


def theil_entropy(shares: ArrayLike) -> float | NDArray[np.float64]:
    """Theil index ``sum_c s_c ln(N s_c)`` along the last axis (``0 ln 0 = 0``).

    Results are clipped to the attainable range ``[0, ln N]``.
    """
    sh = np.asarray(shares, dtype=np.float64)
    n = sh.shape[-1]
    pos = sh > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(pos, sh * np.log(np.where(pos, n * sh, 1.0)), 0.0)
    t = np.clip(terms.sum(axis=-1), 0.0, np.log(n))
    return float(t) if t.ndim == 0 else t


def _resolve(family: DistributionFamily) -> list[EmpiricalDistribution | None]:
    out = list(family.per_community)
    if family.use_pooled_fallback and family.empty_communities:
        log.warning(
            "communities %s have no observations; substituting the pooled distribution",
            ", ".join(str(i + 1) for i in family.empty_communities),
        )
        out = [family.pooled if d is None else d for d in out]
    return out


def _replication(chain, dists, cfg, initial, rng) -> NDArray[np.float64]:
    m = cfg.horizon
    if cfg.initial_mode == "stationary":
        n = initial if isinstance(initial, (int, np.integer)) else len(initial)
        x0 = draw_initial(stationary_distribution(chain.matrices[0]).pi, int(n), rng)
    else:
        x0 = np.asarray(initial, dtype=np.int64)
    n = x0.size
    path = simulate_path(chain, x0, m, rng.random((m, n)))[:, 1:].T  # (M, N)
    u = transform_uniforms(cfg.copula, _open_uniform(rng, (m, n)))
    attrs = np.empty((m, n))
    for x in np.unique(path):
        dist = dists[x]
        if dist is None:
            raise EmptyCommunity(f"community {x + 1} has no attribute observations")
        mask = path == x
        attrs[mask] = dist.quantile(u[mask])
    return theil_entropy(shares_from_attributes(attrs))


def run_replication(
    chain: SegmentedChain,
    family: DistributionFamily,
    cfg: SimulationConfig,
    initial: ArrayLike | int,
    rng: np.random.Generator,
) -> NDArray[np.float64]:
    """One Monte Carlo path of the entropy, ``DT(1..M)``.

    ``initial`` holds 0-based communities at step 0. In stationary mode only its
    length matters (an int is accepted) and the start is drawn from the
    stationary law of the first segment.
    """
    return _replication(chain, _resolve(family), cfg, initial, rng)


def replication_rng(entropy: int, index: int) -> np.random.Generator:
    """Independent stream for replication ``index``; identical whatever the scheduling."""
    return np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=(index,)))


def estimate_entropy(
    chain: SegmentedChain,
    family: DistributionFamily,
    cfg: SimulationConfig,
    initial: ArrayLike | int,
    workers: int | None = None,
) -> EntropyTrajectory:
    """Average ``cfg.replications`` independent replications.

    Parameters
    ----------
    chain : SegmentedChain
        Community dynamics over the simulated horizon.
    family : DistributionFamily
        Attribute law of each community.
    cfg : SimulationConfig
        Horizon, replication count, seed, copula and start mode.
    initial : array_like or int
        0-based starting communities (or the population size in stationary mode).
    workers : int, optional
        Threads. Output is bit-identical for any value.

    Returns
    -------
    EntropyTrajectory
        Per-step mean and sample standard deviation (``ddof=1``; zero when
        there is a single replication). ``seed`` records the entropy used.
    """
    workers = default_workers() if workers is None else max(1, int(workers))
    entropy = cfg.seed if cfg.seed is not None else np.random.SeedSequence().entropy
    dists = _resolve(family)
    if cfg.initial_mode == "last_observed" and isinstance(initial, (int, np.integer)):
        raise ValueError("last_observed mode needs an explicit initial configuration")
    n = initial if isinstance(initial, (int, np.integer)) else len(initial)
    cfg.copula.check_dimension(int(n))

    samples = np.empty((cfg.replications, cfg.horizon))

    def work(indices):
        for i in indices:
            samples[i] = _replication(chain, dists, cfg, initial, replication_rng(entropy, int(i)))

    chunks = [c for c in np.array_split(np.arange(cfg.replications), workers) if c.size]
    if len(chunks) == 1:
        work(chunks[0])
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            for fut in [pool.submit(work, c) for c in chunks]:
                fut.result()

    mean = samples.mean(axis=0)
    sigma = samples.std(axis=0, ddof=1) if cfg.replications > 1 else np.zeros(cfg.horizon)
    return EntropyTrajectory(mean, sigma, cfg.replications, seed=int(entropy))

