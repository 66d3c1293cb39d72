"""Closed-form adoption curves, half-lives and the half-life ratio asymptote.

All curve functions accept a scalar or array ``t`` and return values clamped
to ``[0, 1]``; scalars come back as Python floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "BassParams",
    "HalfLifeResult",
    "f_bass",
    "f_two_node",
    "f_one_d",
    "f_external",
    "trivial_bounds",
    "half_life",
    "half_life_bass",
    "half_life_ratio_asymptotic",
    "TWO_NODE_SWITCH",
]

# relative |p - q| below which the p == q limit of the two-node formula is used
TWO_NODE_SWITCH = 1e-8


@dataclass(frozen=True)
class BassParams:
    p: float
    q: float

    def __post_init__(self):
        if not self.p > 0:
            raise ValueError(f"p must be positive, got {self.p}")
        if not self.q >= 0:
            raise ValueError(f"q must be non-negative, got {self.q}")

    @property
    def lam(self) -> float:
        """Ratio q/p of internal to external influence."""
        return self.q / self.p

    def scaled(self, c: float) -> "BassParams":
        return BassParams(self.p / c, self.q / c)


@dataclass(frozen=True)
class HalfLifeResult:
    t_half: float
    residual: float
    iterations: int


def _as_params(params, q=None) -> BassParams:
    if isinstance(params, BassParams):
        return params
    if isinstance(params, (tuple, list)):
        return BassParams(float(params[0]), float(params[1]))
    return BassParams(float(params), float(q))


def _prep_time(t):
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("time must be non-negative")
    return arr


def _finish(val, t):
    val = np.clip(val, 0.0, 1.0)
    return float(val) if np.ndim(t) == 0 else val


def f_bass(t, params, q=None):
    """Compartmental Bass curve ``(1 - e^{-(p+q)t}) / (1 + (q/p) e^{-(p+q)t})``.

    ``params`` may be a :class:`BassParams` or ``p`` with ``q`` given separately.
    """
    bp = _as_params(params, q)
    tt = _prep_time(t)
    e = np.exp(-(bp.p + bp.q) * tt)
    return _finish(-np.expm1(-(bp.p + bp.q) * tt) / (1.0 + bp.lam * e), t)


def f_two_node(t, params, q=None):
    """Expected adoption level of the homogeneous two-node network.

    For ``|p - q| <= 1e-8 max(p, q)`` the p == q limit ``1 - e^{-2pt}(1 + pt)``
    is used instead of the cancelling quotient.
    """
    bp = _as_params(params, q)
    p, q = bp.p, bp.q
    tt = _prep_time(t)
    if abs(p - q) <= TWO_NODE_SWITCH * max(p, q):
        s = np.exp(-2 * p * tt) * (1 + p * tt)
    else:
        s = np.exp(-p * tt) * (q * np.exp(-p * tt) - p * np.exp(-q * tt)) / (q - p)
    return _finish(1.0 - s, t)


def f_one_d(t, params, q=None):
    """Adoption level on the infinite circle, ``1 - exp(-(p+q)t + q(1 - e^{-pt})/p)``."""
    bp = _as_params(params, q)
    tt = _prep_time(t)
    expo = -(bp.p + bp.q) * tt - bp.q * np.expm1(-bp.p * tt) / bp.p
    return _finish(-np.expm1(expo), t)


def f_external(t, p):
    """Pure external adoption ``1 - e^{-pt}``."""
    tt = _prep_time(t)
    return _finish(-np.expm1(-p * tt), t)


def trivial_bounds(t, params, q=None):
    """``(1 - e^{-pt}, 1 - e^{-(p+q)t})``: no peers adopted vs. all peers adopted at 0+."""
    bp = _as_params(params, q)
    return f_external(t, bp.p), f_external(t, bp.p + bp.q)


def half_life(
    curve_eval: Callable[[float], float],
    t_hint: float = 1.0,
    tol: float = 1e-10,
    max_doublings: int = 200,
    max_iter: int = 400,
) -> HalfLifeResult:
    """Time at which a non-decreasing curve with ``curve(0) = 0`` reaches 1/2.

    The bracket ``[lo, hi]`` grows from ``t_hint`` by doubling, then bisection
    runs until ``|curve(T) - 1/2| <= tol`` (or the bracket stops shrinking in
    floating point).
    """
    if not t_hint > 0:
        raise ValueError("t_hint must be positive")
    lo, hi = 0.0, float(t_hint)
    doublings = 0
    while curve_eval(hi) < 0.5:
        lo = hi
        hi *= 2.0
        doublings += 1
        if doublings > max_doublings:
            raise RuntimeError(f"curve does not reach 1/2 within {max_doublings} doublings of t_hint")
    mid, res = hi, curve_eval(hi) - 0.5
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        res = curve_eval(mid) - 0.5
        if abs(res) <= tol or mid in (lo, hi):
            return HalfLifeResult(mid, abs(res), it)
        if res < 0:
            lo = mid
        else:
            hi = mid
    raise RuntimeError("bisection did not converge")


def half_life_bass(params, q=None) -> float:
    """Closed-form half-life of the Bass curve, ``log(2 + q/p) / (p + q)``."""
    bp = _as_params(params, q)
    return math.log(2 + bp.lam) / (bp.p + bp.q)


def half_life_ratio_asymptotic(lam: float) -> float:
    """Large-``q/p`` estimate of T_half(Bass) / T_half(two-node): (2/log 2) log(lam)/lam."""
    if not lam > 1:
        raise ValueError(f"asymptote requires lam > 1, got {lam}")
    return 2.0 / math.log(2.0) * math.log(lam) / lam
