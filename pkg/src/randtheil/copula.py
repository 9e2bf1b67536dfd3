"""Dependent uniforms by sequential conditional inversion.

Given independent uniforms ``v_1..v_n``, set ``u_1 = v_1`` and
``u_b = C^{-1}(v_b | u_1..u_{b-1})`` for ``b >= 2``. Three families:

* ``independence``: ``u_b = v_b``.
* ``clayton`` (``theta > 0``): closed-form conditional inverse.
* ``gaussian_exchangeable`` (``-1/(n-1) < theta < 1``): conditional normal
  recursion under a common pairwise correlation ``theta``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import ndtr, ndtri

from .errors import InvalidTheta, NumericUnderflow

FAMILIES = ("independence", "clayton", "gaussian_exchangeable")
_ALIASES = {"gaussian": "gaussian_exchangeable", "none": "independence", "indep": "independence"}


@dataclass(frozen=True)
class CopulaSpec:
    family: str = "independence"
    theta: float | None = None

    def __post_init__(self):
        fam = _ALIASES.get(self.family, self.family)
        if fam not in FAMILIES:
            raise InvalidTheta(f"unknown copula family {self.family!r}; choose from {FAMILIES}")
        object.__setattr__(self, "family", fam)
        if fam == "independence":
            return
        if self.theta is None or not np.isfinite(self.theta):
            raise InvalidTheta(f"{fam} copula needs a finite theta")
        if fam == "clayton" and not self.theta > 0:
            raise InvalidTheta(f"clayton theta must be > 0, got {self.theta}")
        if fam == "gaussian_exchangeable" and not -1.0 < self.theta < 1.0:
            raise InvalidTheta(f"gaussian correlation must lie in (-1, 1), got {self.theta}")

    def check_dimension(self, n: int) -> None:
        """An exchangeable correlation matrix of size ``n`` needs ``theta > -1/(n-1)``."""
        if self.family == "gaussian_exchangeable" and n > 1 and not self.theta > -1.0 / (n - 1):
            raise InvalidTheta(
                f"correlation {self.theta} is not a valid exchangeable correlation for n={n}"
            )


def _clayton_step(v, acc, b: int, theta: float):
    """Clayton conditional inverse given ``acc = sum_{j<b} (u_j^-theta - 1)``.

    Written with expm1/log1p so it stays accurate as theta -> 0.
    """
    a = 1.0 + acc
    c = theta / (1.0 + (b - 1) * theta)
    with np.errstate(over="ignore", invalid="ignore"):
        inner = a * np.expm1(-c * np.log(v))
        u = np.exp(-np.log1p(inner) / theta)
    bad = ~np.isfinite(inner) | ~(u > 0) | ~np.isfinite(u)
    if np.any(bad):
        raise NumericUnderflow(
            f"clayton conditional inverse under/overflowed (theta={theta}, b={b})"
        )
    return np.minimum(u, 1.0)


def _clayton_term(u, theta: float):
    with np.errstate(over="ignore"):
        t = np.expm1(-theta * np.log(u))
    if not np.all(np.isfinite(t)):
        raise NumericUnderflow(f"u^-theta overflowed for theta={theta}")
    return t


def _gauss_params(m: int, rho: float) -> tuple[float, float]:
    """Conditional mean coefficient and std of Z_{m+1} given m exchangeable predecessors."""
    denom = 1.0 + (m - 1) * rho
    coef = rho / denom
    var = 1.0 - m * rho * rho / denom
    return coef, np.sqrt(max(var, 0.0))


def conditional_inverse(spec: CopulaSpec, v: ArrayLike, history: ArrayLike):
    """``u_b = C^{-1}(v | history)`` with ``b = len(history) + 1``.

    ``history`` has shape ``(..., b - 1)``; ``v`` broadcasts against its
    leading axes. Returns a float for scalar input.
    """
    v_arr = np.asarray(v, dtype=np.float64)
    hist = np.asarray(history, dtype=np.float64)
    if hist.ndim == 0:
        hist = hist[None]
    b = hist.shape[-1] + 1
    if spec.family == "independence" or b == 1:
        out = v_arr
    elif spec.family == "clayton":
        acc = _clayton_term(hist, spec.theta).sum(axis=-1)
        out = _clayton_step(v_arr, acc, b, spec.theta)
    else:
        spec.check_dimension(b)
        if spec.theta == 0:
            out = v_arr
        else:
            coef, sd = _gauss_params(b - 1, spec.theta)
            mu = coef * ndtri(hist).sum(axis=-1)
            out = ndtr(mu + sd * ndtri(v_arr))
    return float(out) if np.ndim(out) == 0 else np.asarray(out)


def transform_uniforms(spec: CopulaSpec, v: NDArray[np.float64]) -> NDArray[np.float64]:
    """Apply the conditional-inverse recursion along the last axis of ``v``."""
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[-1]
    spec.check_dimension(n)
    if spec.family == "independence" or n == 1:
        return v.copy()
    if spec.family == "gaussian_exchangeable" and spec.theta == 0:
        return v.copy()
    u = np.empty_like(v)
    u[..., 0] = v[..., 0]
    if spec.family == "clayton":
        acc = _clayton_term(u[..., 0], spec.theta)
        for b in range(2, n + 1):
            u[..., b - 1] = _clayton_step(v[..., b - 1], acc, b, spec.theta)
            acc = acc + _clayton_term(u[..., b - 1], spec.theta)
        return u
    z_sum = ndtri(u[..., 0])
    for b in range(2, n + 1):
        coef, sd = _gauss_params(b - 1, spec.theta)
        z = coef * z_sum + sd * ndtri(v[..., b - 1])
        u[..., b - 1] = ndtr(z)
        z_sum = z_sum + z
    return u


def sample_dependent_uniforms(
    spec: CopulaSpec, n: int, rng: np.random.Generator, size: int | None = None
) -> NDArray[np.float64]:
    """Draw ``n`` dependent uniforms (``size`` independent rows of them if given)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    shape = (n,) if size is None else (size, n)
    return transform_uniforms(spec, _open_uniform(rng, shape))


def _open_uniform(rng: np.random.Generator, shape) -> NDArray[np.float64]:
    # Generator.random is on [0, 1); the conditional inverses need (0, 1)
    v = rng.random(shape)
    v[v == 0.0] = np.nextafter(0.0, 1.0)
    return v
