"""Adaptive Dormand-Prince 5(4) integrator that lands exactly on output times."""

from __future__ import annotations

import numpy as np

__all__ = ["integrate", "StepUnderflow"]


class StepUnderflow(RuntimeError):
    pass


# Dormand-Prince tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B_LOW = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B - _B_LOW

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


def _error_norm(err, y, y_new, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.max(np.abs(err) / scale))


def _initial_step(fun, t0, y0, f0, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = np.max(np.abs(y0) / scale)
    d1 = np.max(np.abs(f0) / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = fun(t0 + h0, y1)
    d2 = np.max(np.abs(f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def integrate(fun, t_out, y0, rtol=1e-10, atol=1e-10, max_steps=10_000_000, observe=None):
    """Integrate ``y' = fun(t, y)`` from ``t_out[0]`` and return ``y`` at every ``t_out``.

    Steps are clipped so that every output time is hit exactly; the error
    test uses the max norm of the embedded 4th-order estimate. With
    ``observe``, ``observe(i, y)`` is called at each output instead of
    stacking the states, and ``None`` is returned.
    """
    t_out = np.asarray(t_out, dtype=float)
    if t_out.ndim != 1 or t_out.size == 0:
        raise ValueError("t_out must be a non-empty 1-D array")
    if np.any(np.diff(t_out) <= 0):
        raise ValueError("output times must be strictly increasing")
    y = np.array(y0, dtype=float)
    out = None
    if observe is None:
        out = np.empty((t_out.size,) + y.shape)

        def observe(i, y):
            out[i] = y

    observe(0, y)
    if t_out.size == 1:
        return out

    t = t_out[0]
    f = fun(t, y)
    h = _initial_step(fun, t, y, f, rtol, atol)
    k = [None] * 7
    steps = 0
    for i in range(1, t_out.size):
        t_end = t_out[i]
        while t < t_end:
            steps += 1
            if steps > max_steps:
                raise StepUnderflow("step budget exhausted")
            last = t + h >= t_end
            h_try = t_end - t if last else h
            if h_try <= 1e-15 * max(1.0, abs(t)):
                raise StepUnderflow(f"step size underflow at t={t}")
            k[0] = f
            for s in range(1, 7):
                dy = sum(a * k[m] for m, a in enumerate(_A[s]) if a != 0)
                k[s] = fun(t + _C[s] * h_try, y + h_try * dy)
            y_new = y + h_try * sum(b * k[m] for m, b in enumerate(_B) if b != 0)
            err = h_try * sum(e * k[m] for m, e in enumerate(_E))
            norm = _error_norm(err, y, y_new, rtol, atol)
            if norm <= 1.0:
                t = t_end if last else t + h_try
                y = y_new
                f = k[6]  # FSAL
                factor = _MAX_FACTOR if norm == 0 else min(_MAX_FACTOR, _SAFETY * norm ** -0.2)
                # keep the pre-clip step length when only clipped to hit an output
                h = max(h, h_try * factor) if last else h_try * factor
            else:
                h = h_try * max(_MIN_FACTOR, _SAFETY * norm ** -0.2)
        observe(i, y)
    return out
