"""Time integration of the binormal curve flow, the Schroedinger flow into S^6 and the J^A variant."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence, Union

import numpy as np

from .curves import CurveState
from .errors import BlowUpError, InvalidInputError
from .octonion import cross
from .stencils import CLAMPED, PERIODIC, check_boundary, d1, d2

SCHEMES = ("rk4", "midpoint")
PROJECTIONS = ("none", "renormalize_tangent")
VARIANTS = ("standard", "modified")
DEFAULT_CFL = 0.2
BLOWUP_NORM = 1e6
ORTHOGONAL_TOL = 1e-10
SPHERE_TOL = 1e-9


@dataclass(frozen=True)
class SphereMapState:
    """Samples of a map u: R -> S^6, ``points.shape == (N, 7)`` with unit rows."""

    points: np.ndarray
    ds: float
    boundary: str = PERIODIC
    time: float = 0.0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 7 or pts.shape[0] < 8:
            raise InvalidInputError("sphere map samples must have shape (N, 7) with N >= 8")
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("sphere map samples are not finite")
        if not self.ds > 0:
            raise InvalidInputError("ds must be positive")
        check_boundary(self.boundary)
        err = np.max(np.abs(np.linalg.norm(pts, axis=1) - 1.0))
        if err > SPHERE_TOL:
            raise InvalidInputError(f"sphere map samples are not unit vectors (max error {err:.2e})")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def s(self) -> np.ndarray:
        return np.arange(self.n) * self.ds

    def with_points(self, points, time=None) -> "SphereMapState":
        return replace(self, points=points, time=self.time if time is None else time)

    @classmethod
    def from_curve(cls, curve: CurveState) -> "SphereMapState":
        """The unit tangent field of a curve."""
        t = curve.tangent()
        return cls(t / np.linalg.norm(t, axis=1, keepdims=True), curve.ds, curve.boundary, curve.time)


State = Union[CurveState, SphereMapState]


def check_orthogonal(a, tol: float = ORTHOGONAL_TOL) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape != (7, 7) or not np.all(np.isfinite(a)):
        raise InvalidInputError("A must be a finite 7x7 matrix")
    err = np.max(np.abs(a @ a.T - np.eye(7)))
    if err > tol:
        raise InvalidInputError(f"A is not orthogonal (max |A A^T - I| = {err:.2e})")
    return a


@dataclass(frozen=True)
class FlowConfig:
    dt: float
    t_end: float
    scheme: str = "rk4"
    projection: str = "renormalize_tangent"
    variant: str = "standard"
    A: np.ndarray | None = None
    cfl: float = DEFAULT_CFL
    n_outputs: int = 1
    blowup_norm: float = BLOWUP_NORM

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise InvalidInputError("dt must be positive")
        if not (self.t_end >= 0 and math.isfinite(self.t_end)):
            raise InvalidInputError("t_end must be non-negative")
        if self.scheme not in SCHEMES:
            raise InvalidInputError(f"unknown scheme {self.scheme!r}")
        if self.projection not in PROJECTIONS:
            raise InvalidInputError(f"unknown projection {self.projection!r}")
        if self.variant not in VARIANTS:
            raise InvalidInputError(f"unknown variant {self.variant!r}")
        if self.variant == "modified":
            if self.A is None:
                raise InvalidInputError("the modified variant needs a matrix A")
            object.__setattr__(self, "A", check_orthogonal(self.A))
        if self.n_outputs < 1:
            raise InvalidInputError("n_outputs must be at least 1")

    def check_cfl(self, ds: float) -> None:
        if self.dt > self.cfl * ds**2 * (1 + 1e-12):
            raise InvalidInputError(f"dt = {self.dt:g} violates dt <= {self.cfl:g} * ds^2 = {self.cfl * ds**2:g}")

    def as_dict(self) -> dict:
        return {
            "dt": self.dt,
            "t_end": self.t_end,
            "scheme": self.scheme,
            "projection": self.projection,
            "variant": self.variant,
            "A": None if self.A is None else np.asarray(self.A).tolist(),
            "cfl": self.cfl,
            "n_outputs": self.n_outputs,
            "blowup_norm": self.blowup_norm,
        }


# --- right-hand sides ---------------------------------------------------------------


def _curve_derivatives(curve: CurveState):
    shift = curve.shift
    return d1(curve.points, curve.ds, curve.boundary, shift=shift), d2(curve.points, curve.ds, curve.boundary, shift=shift)


def rhs_binormal(curve: CurveState) -> np.ndarray:
    """gamma_s x gamma_ss at every sample."""
    g1, g2 = _curve_derivatives(curve)
    return cross(g1, g2)


def rhs_schrodinger_s6(u: SphereMapState) -> np.ndarray:
    """u x u_ss at every sample; tangent to the sphere by construction."""
    return cross(u.points, d2(u.points, u.ds, u.boundary))


def _twisted_cross(x, y, a):
    # A^{-1}((A x) x (A y)) for row vectors and orthogonal A
    return cross(x @ a.T, y @ a.T) @ a


def rhs_modified(curve: CurveState, A) -> np.ndarray:
    """A^{-1}((A gamma_s) x (A gamma_ss)); A must be orthogonal."""
    a = check_orthogonal(A)
    g1, g2 = _curve_derivatives(curve)
    return _twisted_cross(g1, g2, a)


def rhs_modified_s6(u: SphereMapState, A) -> np.ndarray:
    """A^{-1}((A u) x (A u_ss)), the Schroedinger flow for the structure J^A."""
    a = check_orthogonal(A)
    return _twisted_cross(u.points, d2(u.points, u.ds, u.boundary), a)


def rhs_for(state: State, config: FlowConfig) -> Callable[[State], np.ndarray]:
    if isinstance(state, CurveState):
        if config.variant == "modified":
            return lambda st: rhs_modified(st, config.A)
        return rhs_binormal
    if config.variant == "modified":
        return lambda st: rhs_modified_s6(st, config.A)
    return rhs_schrodinger_s6


def equivalence_defect(curve: CurveState) -> float:
    """max |d/ds (gamma_s x gamma_ss) - u x u_ss| with u = gamma_s.

    Both sides are the time derivative of the tangent field, computed once by
    differentiating the curve velocity and once from the sphere-valued flow.
    """
    via_curve = d1(rhs_binormal(curve), curve.ds, curve.boundary)
    u = curve.tangent()
    via_sphere = cross(u, d2(u, curve.ds, curve.boundary))
    return float(np.max(np.linalg.norm(via_curve - via_sphere, axis=1)))


# --- time stepping ------------------------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: list
    config: FlowConfig
    steps: int = 0
    dt_used: float = 0.0

    def __len__(self) -> int:
        return len(self.states)

    @property
    def final(self):
        return self.states[-1]


def _normalize_rows(x):
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _step_plan(t_end: float, dt: float, n_outputs: int) -> tuple[int, float, list[int]]:
    steps = int(math.ceil(t_end / dt - 1e-9)) if t_end > 0 else 0
    h = t_end / steps if steps else dt
    marks = sorted({int(round(k * steps / n_outputs)) for k in range(1, n_outputs + 1)}) if steps else []
    return steps, h, marks


def runge_kutta(y, f, h, scheme, post=None):
    """One explicit step of y' = f(y); ``post`` is applied to every stage value and the result."""
    post = post or (lambda z: z)
    if scheme == "midpoint":
        k1 = f(y)
        return post(y + h * f(post(y + 0.5 * h * k1)))
    k1 = f(y)
    k2 = f(post(y + 0.5 * h * k1))
    k3 = f(post(y + 0.5 * h * k2))
    k4 = f(post(y + h * k3))
    return post(y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4))


def check_blowup(x, limit: float, t: float) -> None:
    if not np.all(np.isfinite(x)):
        raise BlowUpError(f"non-finite values at t = {t:g}")
    m = float(np.max(np.abs(x))) if x.size else 0.0
    if m > limit:
        raise BlowUpError(f"solution norm {m:.3e} exceeds {limit:g} at t = {t:g}")


def evolve(state: State, config: FlowConfig) -> Trajectory:
    """Fixed-step explicit integration from ``state.time`` to ``state.time + t_end``.

    The trajectory holds the initial state followed by ``config.n_outputs``
    equally spaced snapshots. Clamped curves keep their end samples fixed.
    Sphere maps are renormalised after every stage when projection is on.
    """
    config.check_cfl(state.ds)
    rhs = rhs_for(state, config)
    steps, h, marks = _step_plan(config.t_end, config.dt, config.n_outputs)
    sphere = isinstance(state, SphereMapState)
    post = _normalize_rows if sphere and config.projection == "renormalize_tangent" else None
    clamp = state.boundary == CLAMPED

    def f(x):
        v = rhs(state.with_points(x))
        if clamp:
            v[0] = 0.0
            v[-1] = 0.0
        return v

    x = state.points.copy()
    t0 = state.time
    times, states = [t0], [state]
    for n in range(1, steps + 1):
        x = runge_kutta(x, f, h, config.scheme, post)
        check_blowup(x, config.blowup_norm, t0 + n * h)
        if n in marks:
            times.append(t0 + n * h)
            states.append(state.with_points(x.copy(), time=t0 + n * h))
    return Trajectory(np.array(times), states, config, steps, h)


# --- diagnostics ---------------------------------------------------------------------


def discrete_energy(u: np.ndarray, ds: float, boundary: str = PERIODIC) -> float:
    """-(1/2) sum <u, D2 u> ds.

    Equal to (1/2) int |u_s|^2 in the continuum (integration by parts) and
    exactly conserved by the semi-discrete flow u_t = u x D2 u, so its drift
    isolates the time-stepping error. Clamped grids fall back to (1/2) sum |D1 u|^2 ds.
    """
    if boundary == PERIODIC:
        return -0.5 * float(np.sum(u * d2(u, ds, boundary))) * ds
    us = d1(u, ds, boundary)
    return 0.5 * float(np.sum(us * us)) * ds


@dataclass(frozen=True)
class ConservationReport:
    times: np.ndarray
    arclength_drift: np.ndarray
    speed_error: np.ndarray
    sphere_error: np.ndarray
    energy_drift: np.ndarray

    def maxima(self) -> dict[str, float]:
        return {
            "arclength_drift_max": float(np.max(np.abs(self.arclength_drift))),
            "speed_error_max": float(np.max(self.speed_error)),
            "sphere_error_max": float(np.max(self.sphere_error)),
            "energy_drift_max": float(np.max(np.abs(self.energy_drift))),
        }


def _rel(x, x0):
    return (x - x0) / x0 if x0 != 0 else x - x0


def conservation_report(trajectory: Trajectory) -> ConservationReport:
    """Relative drift of length and energy, plus speed and sphere-constraint errors, per snapshot.

    For curves the sphere-valued field is the finite-difference tangent.
    """
    if len(trajectory) == 0:
        raise InvalidInputError("empty trajectory")
    lengths, speeds, spheres, energies = [], [], [], []
    for st in trajectory.states:
        if isinstance(st, CurveState):
            u = st.tangent()
            lengths.append(st.total_length())
            speeds.append(st.speed_error())
        else:
            u = st.points
            closed = np.vstack([u, u[:1]]) if st.boundary == PERIODIC else u
            lengths.append(float(np.sum(np.linalg.norm(np.diff(closed, axis=0), axis=1))))
            speeds.append(0.0)
        spheres.append(float(np.max(np.abs(np.linalg.norm(u, axis=1) - 1.0))))
        energies.append(discrete_energy(u, st.ds, st.boundary))
    lengths, energies = np.array(lengths), np.array(energies)
    return ConservationReport(
        trajectory.times,
        _rel(lengths, lengths[0]),
        np.array(speeds),
        np.array(spheres),
        _rel(energies, energies[0]),
    )


def best_rigid_translation_error(traj: Trajectory, direction: Sequence[float], speed: float = 1.0) -> float:
    """max pointwise |gamma(t) - gamma(0) - speed t direction| over the trajectory."""
    d = np.asarray(direction, dtype=float)
    x0 = traj.states[0].points
    return float(
        max(np.max(np.linalg.norm(st.points - x0 - speed * (t - traj.times[0]) * d, axis=1)) for t, st in zip(traj.times, traj.states))
    )


# --- presets ------------------------------------------------------------------------


def great_circle(n: int, omega: float = 1.0) -> SphereMapState:
    """u(s) = cos(omega s) i + sin(omega s) j over one period; a fixed point of the flow."""
    ds = 2 * np.pi / (omega * n)
    s = np.arange(n) * ds
    pts = np.zeros((n, 7))
    pts[:, 0] = np.cos(omega * s)
    pts[:, 1] = np.sin(omega * s)
    return SphereMapState(pts, ds, PERIODIC)


def constant_map(n: int, ds: float = 0.05) -> SphereMapState:
    pts = np.zeros((n, 7))
    pts[:, 0] = 1.0
    return SphereMapState(pts, ds, PERIODIC)


SPHERE_PRESETS = {
    "great-circle": great_circle,
    "constant": constant_map,
}
