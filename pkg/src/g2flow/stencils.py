"""Finite-difference operators on uniform 1-D grids.

Fields are arrays of shape ``(N,)`` or ``(N, C)`` sampled at ``s_n = n ds``.

Periodic grids use 4th-order centered stencils by default and 6th-order
ones on request (``order=6``). Two kinds of wrap are
supported: an additive ``shift`` (a helix obeys ``f(s + L) = f(s) + shift``)
and a multiplicative ``twist`` (Hasimoto fields obey
``f(s + L) = exp(1j*twist) f(s)``). Clamped grids use 4th-order centered
stencils in the interior, 2nd-order centered next to the ends and 2nd-order
one-sided at the ends, whatever ``order`` is requested.
"""
from __future__ import annotations

import numpy as np
from scipy.integrate import cumulative_trapezoid

from ._accel import njit, select
from .errors import InvalidInputError

PERIODIC = "periodic"
CLAMPED = "clamped"
BOUNDARIES = (PERIODIC, CLAMPED)
GHOST = 3
ORDERS = (4, 6)


def check_boundary(boundary: str) -> str:
    if boundary not in BOUNDARIES:
        raise InvalidInputError(f"unknown boundary {boundary!r}; expected one of {BOUNDARIES}")
    return boundary


def check_order(order: int) -> int:
    if order not in ORDERS:
        raise InvalidInputError(f"stencil order must be one of {ORDERS}")
    return order


def _as2d(f):
    f = np.asarray(f)
    return f.reshape(f.shape[0], -1), f.shape


def pad_periodic(f, shift=None, twist=None):
    """Add GHOST rows on each side using the (shifted/twisted) wrap rule."""
    f2, _ = _as2d(f)
    lo, hi = f2[-GHOST:], f2[:GHOST]
    if shift is not None:
        s = np.asarray(shift).reshape(1, -1)
        lo, hi = lo - s, hi + s
    if twist is not None:
        w = np.exp(1j * np.asarray(twist, dtype=float)).reshape(1, -1)
        lo, hi = lo / w, hi * w
    return np.concatenate([lo, f2, hi], axis=0)


# Padded kernels: ``g`` carries GHOST extra rows on each side of ``out``.


@njit
def _d1_padded_jit(g, h, out, order):
    n = out.shape[0]
    for i in range(n):
        k = i + 3
        for j in range(g.shape[1]):
            if order == 4:
                out[i, j] = (g[k - 2, j] - 8.0 * g[k - 1, j] + 8.0 * g[k + 1, j] - g[k + 2, j]) / (12.0 * h)
            else:
                out[i, j] = (
                    -g[k - 3, j] + 9.0 * g[k - 2, j] - 45.0 * g[k - 1, j]
                    + 45.0 * g[k + 1, j] - 9.0 * g[k + 2, j] + g[k + 3, j]
                ) / (60.0 * h)


@njit
def _d2_padded_jit(g, h, out, order):
    n = out.shape[0]
    for i in range(n):
        k = i + 3
        for j in range(g.shape[1]):
            if order == 4:
                out[i, j] = (
                    -g[k - 2, j] + 16.0 * g[k - 1, j] - 30.0 * g[k, j] + 16.0 * g[k + 1, j] - g[k + 2, j]
                ) / (12.0 * h * h)
            else:
                out[i, j] = (
                    2.0 * g[k - 3, j] - 27.0 * g[k - 2, j] + 270.0 * g[k - 1, j] - 490.0 * g[k, j]
                    + 270.0 * g[k + 1, j] - 27.0 * g[k + 2, j] + 2.0 * g[k + 3, j]
                ) / (180.0 * h * h)


def _shifted(g, n, k):
    return g[3 + k : 3 + k + n]


def _d1_padded_np(g, h, out, order):
    n = out.shape[0]
    f = lambda k: _shifted(g, n, k)  # noqa: E731
    if order == 4:
        out[:] = (f(-2) - 8.0 * f(-1) + 8.0 * f(1) - f(2)) / (12.0 * h)
    else:
        out[:] = (-f(-3) + 9.0 * f(-2) - 45.0 * f(-1) + 45.0 * f(1) - 9.0 * f(2) + f(3)) / (60.0 * h)


def _d2_padded_np(g, h, out, order):
    n = out.shape[0]
    f = lambda k: _shifted(g, n, k)  # noqa: E731
    if order == 4:
        out[:] = (-f(-2) + 16.0 * f(-1) - 30.0 * f(0) + 16.0 * f(1) - f(2)) / (12.0 * h * h)
    else:
        out[:] = (
            2.0 * f(-3) - 27.0 * f(-2) + 270.0 * f(-1) - 490.0 * f(0) + 270.0 * f(1) - 27.0 * f(2) + 2.0 * f(3)
        ) / (180.0 * h * h)


_d1_padded = select(_d1_padded_jit, _d1_padded_np)
_d2_padded = select(_d2_padded_jit, _d2_padded_np)


def _clamped(f2, h, order):
    n = f2.shape[0]
    if n < 5:
        raise InvalidInputError("clamped stencils need at least 5 samples")
    out = np.empty_like(f2)
    pad = np.zeros((GHOST, f2.shape[1]), f2.dtype)
    g = np.concatenate([pad, f2, pad])
    if order == 1:
        _d1_padded(g, h, out, 4)
        out[1] = (f2[2] - f2[0]) / (2 * h)
        out[-2] = (f2[-1] - f2[-3]) / (2 * h)
        out[0] = (-3 * f2[0] + 4 * f2[1] - f2[2]) / (2 * h)
        out[-1] = (3 * f2[-1] - 4 * f2[-2] + f2[-3]) / (2 * h)
    else:
        _d2_padded(g, h, out, 4)
        out[1] = (f2[2] - 2 * f2[1] + f2[0]) / h**2
        out[-2] = (f2[-1] - 2 * f2[-2] + f2[-3]) / h**2
        out[0] = (2 * f2[0] - 5 * f2[1] + 4 * f2[2] - f2[3]) / h**2
        out[-1] = (2 * f2[-1] - 5 * f2[-2] + 4 * f2[-3] - f2[-4]) / h**2
    return out


def _derivative(f, ds, boundary, shift, twist, order, accuracy):
    check_boundary(boundary)
    check_order(accuracy)
    f2, shape = _as2d(f)
    dtype = np.result_type(f2, np.float64, np.complex128 if twist is not None else np.float64)
    f2 = np.ascontiguousarray(f2, dtype=dtype)
    if boundary == CLAMPED:
        return _clamped(f2, ds, order).reshape(shape)
    if f2.shape[0] < 2 * GHOST + 1:
        raise InvalidInputError("periodic stencils need at least 7 samples")
    g = np.ascontiguousarray(pad_periodic(f2, shift, twist), dtype=dtype)
    out = np.empty_like(f2)
    (_d1_padded if order == 1 else _d2_padded)(g, ds, out, accuracy)
    return out.reshape(shape)


def d1(f, ds: float, boundary: str = PERIODIC, shift=None, twist=None, order: int = 4) -> np.ndarray:
    """First s-derivative; ``order`` is the accuracy order on periodic grids."""
    return _derivative(f, ds, boundary, shift, twist, 1, order)


def d2(f, ds: float, boundary: str = PERIODIC, shift=None, twist=None, order: int = 4) -> np.ndarray:
    """Second s-derivative; ``order`` is the accuracy order on periodic grids."""
    return _derivative(f, ds, boundary, shift, twist, 2, order)


def cumtrapz(f, ds: float) -> np.ndarray:
    """Cumulative trapezoid integral from sample 0; ``out[0] = 0``."""
    return cumulative_trapezoid(np.asarray(f), dx=ds, axis=0, initial=0)


def period_integral(f, ds: float) -> np.ndarray:
    """Trapezoid integral of a periodic integrand over one full period."""
    return np.sum(np.asarray(f), axis=0) * ds
