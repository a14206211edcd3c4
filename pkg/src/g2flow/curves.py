"""Sampled curves in Im(O) = R^7 and the analytic presets used by the CLI and tests."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline

from .errors import InvalidInputError, NonUnitSpeedError
from .octonion import IM_NAMES
from .stencils import CLAMPED, PERIODIC, check_boundary, d1

MIN_SAMPLES = 8
SPEED_TOL = 1e-3


@dataclass(frozen=True)
class CurveState:
    """Curve samples ``points[n] = gamma(n * ds)`` with ``points.shape == (N, 7)``.

    For periodic curves ``period_shift`` is the constant offset
    ``gamma(s + L) - gamma(s)``; it is zero for closed curves and the pitch
    vector for a helix.
    """

    points: np.ndarray
    ds: float
    boundary: str = PERIODIC
    time: float = 0.0
    period_shift: np.ndarray = field(default_factory=lambda: np.zeros(7))

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 7:
            raise InvalidInputError("curve points must have shape (N, 7)")
        if pts.shape[0] < MIN_SAMPLES:
            raise InvalidInputError(f"a curve needs at least {MIN_SAMPLES} samples")
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("curve points are not finite")
        if not self.ds > 0:
            raise InvalidInputError("ds must be positive")
        check_boundary(self.boundary)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "period_shift", np.asarray(self.period_shift, dtype=float).reshape(7))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def s(self) -> np.ndarray:
        return np.arange(self.n) * self.ds

    @property
    def shift(self):
        return self.period_shift if self.boundary == PERIODIC else None

    def tangent(self) -> np.ndarray:
        return d1(self.points, self.ds, self.boundary, shift=self.shift)

    def with_points(self, points, time=None) -> "CurveState":
        return replace(self, points=points, time=self.time if time is None else time)

    def speed_error(self) -> float:
        """max_n | |gamma_s| - 1 | from the finite-difference tangent."""
        return float(np.max(np.abs(np.linalg.norm(self.tangent(), axis=1) - 1.0)))

    def speed_tolerance(self, tol: float | None = None) -> float:
        """Default unit-speed tolerance: 1e-3 plus ds**2, since the check is itself a difference quotient."""
        return SPEED_TOL + self.ds**2 if tol is None else tol

    def check_unit_speed(self, tol: float | None = None) -> None:
        tol = self.speed_tolerance(tol)
        err = self.speed_error()
        if err > tol:
            raise NonUnitSpeedError(f"curve is not unit speed: max | |gamma_s| - 1 | = {err:.3e} > {tol:.1e}")

    def total_length(self) -> float:
        """Polygonal length (sum of chords, including the closing chord if periodic)."""
        pts = self.points
        if self.boundary == PERIODIC:
            pts = np.vstack([pts, pts[:1] + self.period_shift])
        return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


# --- arclength parameterisation of analytic periodic curves -----------------------


def unit_speed_samples(
    curve: Callable[[np.ndarray], np.ndarray],
    velocity: Callable[[np.ndarray], np.ndarray],
    n: int,
    fine: int = 8192,
    newton_steps: int = 30,
) -> tuple[np.ndarray, float]:
    """Sample a 2*pi-periodic parametric curve at ``n`` equal arclength steps.

    The speed is expanded in a Fourier series on ``fine`` points and
    integrated term by term, which is spectrally accurate for smooth curves;
    the arclength is then inverted by Newton iteration. Returns the samples
    and the total length.
    """
    sig = 2 * np.pi * np.arange(fine) / fine
    speed = np.linalg.norm(velocity(sig), axis=1)
    coef = np.fft.rfft(speed) / fine
    mean = coef[0].real
    length = 2 * np.pi * mean
    m = np.arange(1, len(coef))
    scale = np.where(m == fine // 2, 1.0, 2.0)

    def arclength(x):
        # integral_0^x of the Fourier series of the speed
        ph = np.outer(x, m)
        return mean * x + np.sum(scale * (coef[1:] * (np.exp(1j * ph) - 1) / (1j * m)).real, axis=1)

    target = length * np.arange(n) / n
    x = 2 * np.pi * np.arange(n) / n
    for _ in range(newton_steps):
        dx = (arclength(x) - target) / np.linalg.norm(velocity(x), axis=1)
        x -= dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    return curve(x), float(length)


def reparameterize(curve: CurveState, n: int | None = None) -> CurveState:
    """Resample a curve at uniform arclength by cubic-spline interpolation.

    Never called implicitly; invoke it between runs when speed drift matters.
    """
    n = curve.n if n is None else n
    pts = curve.points
    if curve.boundary == PERIODIC:
        closed = np.vstack([pts, pts[:1] + curve.period_shift])
        chords = np.linalg.norm(np.diff(closed, axis=0), axis=1)
        u = np.concatenate([[0.0], np.cumsum(chords)])
        # remove the linear drift so the spline is genuinely periodic
        drift = np.outer(u / u[-1], curve.period_shift)
        spline = CubicSpline(u, closed - drift, bc_type="periodic")
        # refine the arclength estimate with the spline itself
        fine = np.linspace(0, u[-1], 16 * n + 1)
        vel = spline(fine, 1) + curve.period_shift / u[-1]
        arc = cumulative_trapezoid(np.linalg.norm(vel, axis=1), fine, initial=0)
        length = arc[-1]
        u_new = np.interp(length * np.arange(n) / n, arc, fine)
        new = spline(u_new) + np.outer(u_new / u[-1], curve.period_shift)
        return CurveState(new, length / n, PERIODIC, curve.time, curve.period_shift)
    chords = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    u = np.concatenate([[0.0], np.cumsum(chords)])
    spline = CubicSpline(u, pts)
    length = u[-1]
    new = spline(np.linspace(0, length, n))
    return CurveState(new, length / (n - 1), CLAMPED, curve.time)


# --- presets ----------------------------------------------------------------------


def _coords(**named):
    v = np.zeros(7)
    for name, value in named.items():
        v[IM_NAMES.index(name)] = value
    return v


def line(n: int, ds: float = 0.01) -> CurveState:
    """Straight segment gamma(s) = s i (clamped); zero curvature."""
    s = np.arange(n) * ds
    return CurveState(np.outer(s, _coords(i=1.0)), ds, CLAMPED)


def circle(n: int, radius: float = 1.0, plane: tuple[str, str] = ("i", "j")) -> CurveState:
    """Unit-speed circle of the given radius in the plane of two basis directions."""
    length = 2 * np.pi * radius
    ds = length / n
    s = np.arange(n) * ds
    a, b = _coords(**{plane[0]: 1.0}), _coords(**{plane[1]: 1.0})
    pts = radius * (np.outer(np.cos(s / radius), a) + np.outer(np.sin(s / radius), b))
    return CurveState(pts, ds, PERIODIC)


def helix(n: int, a: float = 1.0, b: float = 1.0) -> CurveState:
    """Helix of radius ``a`` and pitch parameter ``b`` in span{i, j, k}, one period."""
    c = np.hypot(a, b)
    length = 2 * np.pi * c
    ds = length / n
    s = np.arange(n) * ds
    pts = np.zeros((n, 7))
    pts[:, 0] = a * np.cos(s / c)
    pts[:, 1] = a * np.sin(s / c)
    pts[:, 2] = b * s / c
    return CurveState(pts, ds, PERIODIC, period_shift=_coords(k=2 * np.pi * b))


def fourier_curve(base: Callable, dbase: Callable, coeffs: np.ndarray, phases: np.ndarray, modes: np.ndarray):
    """Parametric curve base(x) + sum_m coeffs[m, c] cos(modes[m] x + phases[m, c])."""

    def f(x):
        out = base(x)
        for k, m in enumerate(modes):
            out = out + coeffs[k] * np.cos(m * x[:, None] + phases[k])
        return out

    def df(x):
        out = dbase(x)
        for k, m in enumerate(modes):
            out = out - m * coeffs[k] * np.sin(m * x[:, None] + phases[k])
        return out

    return f, df


def perturbed_circle(
    n: int,
    amplitude: float = 0.04,
    modes: tuple[int, ...] = (1, 2),
    seed: int = 1,
    directions: tuple[str, ...] = IM_NAMES,
) -> CurveState:
    """Unit circle in span{i, j} plus seeded low-mode perturbations.

    By default every one of the seven coordinates is perturbed; pass
    ``directions=("i", "j", "k")`` to keep the curve inside Im(H). The result
    is resampled at uniform arclength, so it is unit speed to roundoff. The
    defaults keep k1 and kappa2 well away from zero.
    """
    rng = np.random.default_rng(seed)
    modes_arr = np.asarray(modes, dtype=float)
    mask = np.array([name in directions for name in IM_NAMES], dtype=float)
    if not mask.any():
        raise InvalidInputError("no perturbation directions selected")
    coeffs = amplitude * rng.uniform(0.5, 1.0, size=(len(modes_arr), 7)) * mask
    phases = rng.uniform(0, 2 * np.pi, size=(len(modes_arr), 7))
    ei, ej = _coords(i=1.0), _coords(j=1.0)

    def base(x):
        return np.outer(np.cos(x), ei) + np.outer(np.sin(x), ej)

    def dbase(x):
        return -np.outer(np.sin(x), ei) + np.outer(np.cos(x), ej)

    f, df = fourier_curve(base, dbase, coeffs, phases, modes_arr)
    pts, length = unit_speed_samples(f, df, n)
    return CurveState(pts, length / n, PERIODIC)


def random_curve(n: int, seed: int, amplitude: float = 0.3, modes: tuple[int, ...] = (1, 2, 3)) -> CurveState:
    """A generic smooth closed unit-speed curve, for equivalence and equivariance checks."""
    rng = np.random.default_rng(seed)
    frame = np.linalg.qr(rng.standard_normal((7, 7)))[0]
    ea, eb = frame[:, 0], frame[:, 1]
    modes_arr = np.asarray(modes, dtype=float)
    coeffs = amplitude * rng.standard_normal((len(modes_arr), 7)) / modes_arr[:, None]
    phases = rng.uniform(0, 2 * np.pi, size=(len(modes_arr), 7))

    def base(x):
        return np.outer(np.cos(x), ea) + np.outer(np.sin(x), eb)

    def dbase(x):
        return -np.outer(np.sin(x), ea) + np.outer(np.cos(x), eb)

    f, df = fourier_curve(base, dbase, coeffs, phases, modes_arr)
    pts, length = unit_speed_samples(f, df, n)
    return CurveState(pts, length / n, PERIODIC)


CURVE_PRESETS = {
    "line": line,
    "circle": circle,
    "helix": helix,
    "perturbed-circle": perturbed_circle,
}
