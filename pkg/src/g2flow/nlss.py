"""The three-field nonlinear Schroedinger-type system, its J^A variant and the reduced NLS.

Two normalisations of the complex triple are in use:

* frame normalisation (``HasimotoFields``): phi1 = k1 conj(r), |phi1| = k1/sqrt(2),
  the fields read directly off a curve's frame. The connection coefficients
  a1, a2, a3 and R1, R2, R3 are defined in this normalisation.
* NLSS normalisation (``NlssState``): phi1 is divided by sqrt(2) so that
  |phi1| = k1/2 and the first equation carries the focusing coefficient 2.
  phi2 and phi3 are unchanged.

Periodic states carry per-field twist phases (``phi(s + L) = exp(1j*twist) phi(s)``).
The nonlocal terms integrate from sample 0, so when their integrands have a
non-zero period mean the twists move in time; their rates are evolved with
the fields.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .curves import CurveState, reparameterize
from .errors import InvalidInputError, SingularDataError
from .flow import DEFAULT_CFL, BLOWUP_NORM, FlowConfig, check_blowup, evolve
from .frame import HasimotoFields, curve_to_fields
from .stencils import PERIODIC, check_boundary, check_order, cumtrapz, d1, d2, period_integral

SQRT2 = math.sqrt(2.0)
DIVISOR_FLOOR = 1e-8
NLSS_ORDER = 6
MEAN_WARN_TOL = 1e-8
SYSTEMS = ("nlst", "variant")


class NonPeriodicIntegrandWarning(UserWarning):
    """A nonlocal integrand has non-zero mean over a period."""


@dataclass(frozen=True)
class NlssState:
    """Fields in NLSS normalisation; gauge R10 = R20 = 0."""

    phi: np.ndarray  # (N, 3) complex
    ds: float
    boundary: str = PERIODIC
    twist: np.ndarray = None
    time: float = 0.0
    gauge: str = "R10=R20=0"

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=complex)
        if phi.ndim != 2 or phi.shape[1] != 3 or phi.shape[0] < 8:
            raise InvalidInputError("NLSS fields must have shape (N, 3) with N >= 8")
        if not np.all(np.isfinite(phi)):
            raise InvalidInputError("NLSS fields are not finite")
        if not self.ds > 0:
            raise InvalidInputError("ds must be positive")
        check_boundary(self.boundary)
        tw = np.zeros(3) if self.twist is None else np.asarray(self.twist, dtype=float).reshape(3)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "twist", tw)

    @property
    def n(self) -> int:
        return self.phi.shape[0]

    @property
    def s(self) -> np.ndarray:
        return np.arange(self.n) * self.ds

    def with_phi(self, phi, twist=None, time=None) -> "NlssState":
        return replace(
            self,
            phi=phi,
            twist=self.twist if twist is None else twist,
            time=self.time if time is None else time,
        )

    @classmethod
    def from_fields(cls, fields: HasimotoFields, time: float = 0.0) -> "NlssState":
        phi = fields.phi.copy()
        phi[:, 0] /= SQRT2
        return cls(phi, fields.ds, fields.boundary, fields.twist.copy(), time)

    def to_fields(self) -> HasimotoFields:
        phi = self.phi.copy()
        phi[:, 0] *= SQRT2
        return HasimotoFields(phi, self.ds, self.boundary, self.twist.copy())

    def mass(self) -> np.ndarray:
        """Discrete L2 masses sum |phi_i|^2 ds."""
        return np.sum(np.abs(self.phi) ** 2, axis=0) * self.ds


class _Ops:
    """Twist-aware s-derivatives of the fields and of products of them."""

    def __init__(self, ds, boundary, twist, order):
        self.ds, self.bc, self.order = ds, boundary, order
        self.tw = np.asarray(twist, dtype=float) if boundary == PERIODIC else None

    def _twist(self, weights):
        return None if self.tw is None else float(np.dot(weights, self.tw))

    def d1(self, f, weights=(0, 0, 0)):
        return d1(f, self.ds, self.bc, twist=self._twist(weights), order=self.order)

    def d2(self, f, weights=(0, 0, 0)):
        return d2(f, self.ds, self.bc, twist=self._twist(weights), order=self.order)

    def real_d1(self, f):
        return d1(f, self.ds, self.bc, order=self.order)


E1, E2, E3 = (1, 0, 0), (0, 1, 0), (0, 0, 1)
W_X = (-3, -1, 0)  # conj(phi1)^2 conj(phi2) / phi1
W_Y = (3, 1, 0)  # phi1^2 phi2 / conj(phi1)


def _check_divisors(p1, p2, floor, need_phi2=True):
    m1 = float(np.min(np.abs(p1)))
    if m1 < floor:
        raise SingularDataError(f"|phi1| = {m1:.3e} below divisor floor {floor:g}")
    if need_phi2:
        m2 = float(np.min(np.abs(p2)))
        if m2 < floor:
            raise SingularDataError(f"|phi2| = {m2:.3e} below divisor floor {floor:g}")


def is_reduced(phi2, floor: float = DIVISOR_FLOOR) -> bool:
    """True when phi2 vanishes identically (below the floor at every sample)."""
    return bool(np.max(np.abs(phi2)) < floor)


# --- connection coefficients -------------------------------------------------------------


@dataclass(frozen=True)
class ConnectionCoeffs:
    a1: np.ndarray
    a2: np.ndarray
    a3: np.ndarray
    R1: np.ndarray
    R2: np.ndarray
    R3: np.ndarray
    reduced: bool = False


def _as_frame_fields(fields) -> HasimotoFields:
    return fields.to_fields() if isinstance(fields, NlssState) else fields


def connection_coeffs(fields, divisor_floor: float = DIVISOR_FLOOR, order: int = NLSS_ORDER) -> ConnectionCoeffs:
    """a1, a2, a3, R1, R2, R3 in frame normalisation with R10 = R20 = 0.

    ``fields`` is a ``HasimotoFields``; an ``NlssState`` is converted first.
    When phi2 vanishes identically the reduced choice a1 = 0,
    a3 = -1j phi3_s is used (a2 then needs no division by phi2).
    """
    check_order(order)
    h = _as_frame_fields(fields)
    p1, p2, p3 = h.phi1, h.phi2, h.phi3
    ops = _Ops(h.ds, h.boundary, h.twist, order)
    m1, m2, m3 = np.abs(p1) ** 2, np.abs(p2) ** 2, np.abs(p3) ** 2
    reduced = is_reduced(p2, divisor_floor)
    _check_divisors(p1, p2, divisor_floor, need_phi2=not reduced)
    p1s, p3s = ops.d1(p1, E1), ops.d1(p3, E3)
    a2 = -(1j * p1 * p2 * p3 + SQRT2 * np.conj(p1) ** 2 * np.conj(p2)) / p1
    if reduced:
        zero = np.zeros_like(p1)
        a1, a3 = zero, -1j * p3s
        R1 = m1 - m2
        R2 = -0.5 * m1 + m2 - m3
    else:
        p2s = ops.d1(p2, E2)
        a1 = -1j / p1 * (2 * p1s * p2 + p1 * p2s)
        X = np.conj(p1) ** 2 * np.conj(p2) / p1
        Xs = ops.d1(X, W_X)
        a3 = -2j * p3 * (p1s / p1 + p2s / p2) - 1j * p3s - SQRT2 / p2 * Xs
        g1, g2 = _integrands_frame(ops, p1, p2, p3)
        R1 = m1 - m2 - 2 * cumtrapz(g1, h.ds)
        R2 = cumtrapz(g2, h.ds) - 0.5 * m1 + m2 - m3
    return ConnectionCoeffs(a1, a2, a3, R1, R2, -R1 - R2, reduced)


def _log_mod_s(ops, f):
    # (ln |f|^2)_s from magnitudes
    return ops.real_d1(2 * np.log(np.abs(f)))


def _im_term(ops, p1, p2, p3):
    # Im[ phi3 / conj(phi2) * (phi1^2 phi2 / conj(phi1))_s ]
    Y = p1**2 * p2 / np.conj(p1)
    return np.imag(p3 / np.conj(p2) * ops.d1(Y, W_Y))


def _integrands_frame(ops, p1, p2, p3):
    """Integrands of R1 (without the factor -2) and of R2, frame normalisation."""
    m2, m3 = np.abs(p2) ** 2, np.abs(p3) ** 2
    l1 = _log_mod_s(ops, p1)
    l12 = l1 + _log_mod_s(ops, p2)
    T = _im_term(ops, p1, p2, p3)
    # -sqrt(2) i [Z - conj(Z)] = 2 sqrt(2) Im Z
    return m2 * l1, 2 * m2 * l1 - 2 * m3 * l12 + 2 * SQRT2 * T


def r3_from_derivative(fields, coeffs: ConnectionCoeffs, order: int = NLSS_ORDER) -> np.ndarray:
    """R3 integrated from its own s-derivative relation, matched to -R1-R2 at s = 0."""
    h = _as_frame_fields(fields)
    m1 = np.abs(h.phi1) ** 2
    rate = -2 * np.imag(np.conj(h.phi3) * coeffs.a3)
    r3 = -0.5 * m1 + cumtrapz(rate, h.ds)
    return r3 - r3[0] + coeffs.R3[0]


def psi_rhs(fields, coeffs: ConnectionCoeffs | None = None, order: int = NLSS_ORDER) -> np.ndarray:
    """Time derivatives in frame normalisation from the connection coefficients.

    phi1_t = -i phi1_ss + i phi1 |phi2|^2 - i R1 phi1,
    phi2_t = a1_s - (3/2) i |phi1|^2 phi2 + i phi2 (R1 - R2) - a2 conj(phi3),
    phi3_t = a3_s + i phi3 (R2 - R3) + conj(phi2) a2.
    """
    h = _as_frame_fields(fields)
    c = connection_coeffs(h, order=order) if coeffs is None else coeffs
    ops = _Ops(h.ds, h.boundary, h.twist, order)
    p1, p2, p3 = h.phi1, h.phi2, h.phi3
    m1, m2 = np.abs(p1) ** 2, np.abs(p2) ** 2
    f1 = -1j * ops.d2(p1, E1) + 1j * p1 * m2 - 1j * c.R1 * p1
    f2 = ops.d1(c.a1, E2) - 1.5j * m1 * p2 + 1j * p2 * (c.R1 - c.R2) - c.a2 * np.conj(p3)
    f3 = ops.d1(c.a3, E3) + 1j * p3 * (c.R2 - c.R3) + np.conj(p2) * c.a2
    return np.stack([f1, f2, f3], axis=1)


# --- right-hand sides in NLSS normalisation ---------------------------------------------


def _reduced_rates(state: NlssState, ops):
    out = np.zeros_like(state.phi)
    for k, w in ((0, E1), (2, E3)):
        p = state.phi[:, k]
        out[:, k] = -1j * (ops.d2(p, w) + 2 * p * np.abs(p) ** 2)
    return out, np.zeros(3)


def _nlst_rates(state: NlssState, ops):
    p1, p2, p3 = state.phi.T
    m1, m2, m3 = np.abs(p1) ** 2, np.abs(p2) ** 2, np.abs(p3) ** 2
    p1s, p2s = ops.d1(p1, E1), ops.d1(p2, E2)
    l1 = _log_mod_s(ops, p1)
    l12 = l1 + _log_mod_s(ops, p2)
    T = _im_term(ops, p1, p2, p3)
    X = np.conj(p1) ** 2 * np.conj(p2) / p1
    g1 = m2 * l1
    g2 = 2 * m2 * l1 - m3 * l12 + 2 * T
    g3 = 2 * m3 * l12 - m2 * l1 - 4 * T
    ds = state.ds
    r1 = ops.d2(p1, E1) + 2 * p1 * m1 - 2 * p1 * m2 - 2 * p1 * cumtrapz(g1, ds)
    r2 = (
        ops.d2(p2, E2)
        + 2 * p2 * m2
        + 2 * ops.d1(p2 * p1s / p1, E2)
        - 2 * p2 * m3
        + 2j * X * np.conj(p3)
        + 2 * p2 * cumtrapz(g2, ds)
    )
    inner = p3 * (p1s / p1 + p2s / p2) - 1j / p2 * ops.d1(X, W_X)
    r3 = (
        ops.d2(p3, E3)
        + 2 * p3 * m3
        + 2 * ops.d1(inner, E3)
        - 2j * X * np.conj(p2)
        + 2 * p3 * cumtrapz(g3, ds)
    )
    # i phi_t = ... + c phi int_0^s g  =>  the twist moves at -c * int_0^L g
    rates = np.array([2.0, -2.0, -2.0]) * np.array([_pint(g1, ds), _pint(g2, ds), _pint(g3, ds)])
    return -1j * np.stack([r1, r2, r3], axis=1), rates, (g1, g2, g3)


def _variant_rates(state: NlssState, ops):
    p1, p2, p3 = state.phi.T
    m1, m2, m3 = np.abs(p1) ** 2, np.abs(p2) ** 2, np.abs(p3) ** 2
    p2s = ops.d1(p2, E2)
    l2 = _log_mod_s(ops, p2)
    T = _im_term(ops, p1, p2, p3)
    X = np.conj(p1) ** 2 * np.conj(p2) / p1
    g2 = m3 * l2 - 2 * T
    g3 = 2 * m3 * l2 - 2 * T
    ds = state.ds
    r1 = ops.d2(p1, E1) + 2 * p1 * m1 + 2 * p1 * m2
    r2 = (
        -ops.d2(p2, E2)
        - 2 * p2 * m2
        - 6 * p2 * m1
        + 2 * p2 * m3
        - 2j * X * np.conj(p3)
        + 2 * p2 * cumtrapz(g2, ds)
    )
    inner = p3 * p2s / p2 - 1j / p2 * ops.d1(X, W_X)
    r3 = (
        -ops.d2(p3, E3)
        - 2 * p3 * m3
        - 2 * ops.d1(inner, E3)
        + 2j * X * np.conj(p2)
        - 4 * p3 * cumtrapz(g3, ds)
    )
    rates = np.array([0.0, -2.0 * _pint(g2, ds), 4.0 * _pint(g3, ds)])
    return -1j * np.stack([r1, r2, r3], axis=1), rates, (g2, g3)


def _pint(g, ds):
    return float(period_integral(g, ds))


def nlss_rates(
    state: NlssState,
    system: str = "nlst",
    divisor_floor: float = DIVISOR_FLOOR,
    order: int = NLSS_ORDER,
) -> tuple[np.ndarray, np.ndarray, tuple]:
    """(d phi / dt, d twist / dt, nonlocal integrands) for the chosen system.

    With phi2 identically zero both systems reduce to uncoupled cubic
    equations for phi1 and phi3 (focusing for the standard system, and for the
    variant the first equation focusing and the third with both signs flipped).
    """
    if system not in SYSTEMS:
        raise InvalidInputError(f"unknown system {system!r}")
    check_order(order)
    ops = _Ops(state.ds, state.boundary, state.twist, order)
    p1, p2 = state.phi[:, 0], state.phi[:, 1]
    if is_reduced(p2, divisor_floor):
        dphi, rates = _reduced_rates(state, ops)
        if system == "variant":
            dphi[:, 2] *= -1
        return dphi, rates, ()
    _check_divisors(p1, p2, divisor_floor)
    if system == "nlst":
        return _nlst_rates(state, ops)
    return _variant_rates(state, ops)


def nlss_rhs(state: NlssState, divisor_floor: float = DIVISOR_FLOOR, order: int = NLSS_ORDER) -> np.ndarray:
    """(d phi1/dt, d phi2/dt, d phi3/dt) of the three-field system, shape (N, 3)."""
    return nlss_rates(state, "nlst", divisor_floor, order)[0]


def nlss_variant_rhs(state: NlssState, divisor_floor: float = DIVISOR_FLOOR, order: int = NLSS_ORDER) -> np.ndarray:
    """Time derivatives of the system attached to the structure J^A."""
    return nlss_rates(state, "variant", divisor_floor, order)[0]


def integrand_means(state: NlssState, system: str = "nlst", divisor_floor: float = DIVISOR_FLOOR) -> np.ndarray:
    """Period means of the nonlocal integrands (empty in the reduced regime)."""
    _, _, gs = nlss_rates(state, system, divisor_floor)
    if state.boundary != PERIODIC:
        return np.zeros(0)
    return np.array([np.mean(g) for g in gs])


# --- time stepping ----------------------------------------------------------------------


@dataclass(frozen=True)
class NlssConfig:
    dt: float
    t_end: float
    system: str = "nlst"
    cfl: float = DEFAULT_CFL
    n_outputs: int = 1
    divisor_floor: float = DIVISOR_FLOOR
    order: int = NLSS_ORDER
    blowup_norm: float = BLOWUP_NORM

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise InvalidInputError("dt must be positive")
        if not (self.t_end >= 0 and math.isfinite(self.t_end)):
            raise InvalidInputError("t_end must be non-negative")
        if self.system not in SYSTEMS:
            raise InvalidInputError(f"unknown system {self.system!r}")
        if self.n_outputs < 1:
            raise InvalidInputError("n_outputs must be at least 1")
        check_order(self.order)

    def check_cfl(self, ds: float) -> None:
        if self.dt > self.cfl * ds**2 * (1 + 1e-12):
            raise InvalidInputError(f"dt = {self.dt:g} violates dt <= {self.cfl:g} * ds^2 = {self.cfl * ds**2:g}")

    def as_dict(self) -> dict:
        return {
            "dt": self.dt,
            "t_end": self.t_end,
            "system": self.system,
            "cfl": self.cfl,
            "n_outputs": self.n_outputs,
            "divisor_floor": self.divisor_floor,
            "stencil_order": self.order,
            "blowup_norm": self.blowup_norm,
        }


@dataclass(frozen=True)
class NlssTrajectory:
    times: np.ndarray
    states: list
    config: NlssConfig
    steps: int = 0
    dt_used: float = 0.0
    max_integrand_mean: float = 0.0

    def __len__(self) -> int:
        return len(self.states)

    @property
    def final(self) -> NlssState:
        return self.states[-1]

    def mass_drift(self) -> np.ndarray:
        """Relative drift of sum |phi_i|^2 ds per field, maximised over snapshots."""
        m = np.array([st.mass() for st in self.states])
        ref = np.where(m[0] > 0, m[0], 1.0)
        return np.max(np.abs(m - m[0]) / ref, axis=0)


def evolve_nlss(state: NlssState, config: NlssConfig) -> NlssTrajectory:
    """Classical RK4 on the fields and their twists; deterministic."""
    config.check_cfl(state.ds)
    steps = int(math.ceil(config.t_end / config.dt - 1e-9)) if config.t_end > 0 else 0
    h = config.t_end / steps if steps else config.dt
    marks = {int(round(k * steps / config.n_outputs)) for k in range(1, config.n_outputs + 1)} if steps else set()

    means = integrand_means(state, config.system, config.divisor_floor)
    worst = float(np.max(np.abs(means))) if means.size else 0.0
    if worst > MEAN_WARN_TOL:
        warnings.warn(
            f"nonlocal integrand has period mean {worst:.3e}; the field twists will drift in time",
            NonPeriodicIntegrandWarning,
            stacklevel=2,
        )

    def f(phi, tw):
        dphi, rates, _ = nlss_rates(state.with_phi(phi, tw), config.system, config.divisor_floor, config.order)
        return dphi, rates

    phi, tw = state.phi.copy(), state.twist.copy()
    t0 = state.time
    times, states = [t0], [state]
    for n in range(1, steps + 1):
        k1 = f(phi, tw)
        k2 = f(phi + 0.5 * h * k1[0], tw + 0.5 * h * k1[1])
        k3 = f(phi + 0.5 * h * k2[0], tw + 0.5 * h * k2[1])
        k4 = f(phi + h * k3[0], tw + h * k3[1])
        phi = phi + (h / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        tw = tw + (h / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        check_blowup(phi, config.blowup_norm, t0 + n * h)
        if n in marks:
            times.append(t0 + n * h)
            states.append(state.with_phi(phi.copy(), tw.copy(), t0 + n * h))
    return NlssTrajectory(np.array(times), states, config, steps, h, worst)


# --- presets ------------------------------------------------------------------------------


def soliton(n: int = 1024, eta: float = 1.0, length: float = 40.0, t: float = 0.0) -> NlssState:
    """phi1 = eta sech(eta s) exp(-i eta^2 t) on [-L/2, L/2), phi2 = phi3 = 0.

    Stored on a periodic grid; s = 0 of the grid corresponds to -L/2.
    """
    ds = length / n
    s = -length / 2 + ds * np.arange(n)
    phi = np.zeros((n, 3), dtype=complex)
    phi[:, 0] = eta / np.cosh(eta * s) * np.exp(-1j * eta**2 * t)
    return NlssState(phi, ds, PERIODIC, time=t)


def soliton_exact(state: NlssState, eta: float = 1.0, length: float = 40.0) -> np.ndarray:
    return soliton(state.n, eta, length, state.time).phi[:, 0]


def soliton_residual(state: NlssState, eta: float = 1.0, system: str = "nlst", order: int = NLSS_ORDER) -> float:
    """max |d phi1/dt + i eta^2 phi1|: how far the discrete right-hand side is from the exact soliton rate."""
    rates = nlss_rates(state, system, DIVISOR_FLOOR, order)[0]
    return float(np.max(np.abs(rates[:, 0] + 1j * eta**2 * state.phi[:, 0])))


def plane_wave(n: int = 256, c: complex = 0.5, mu: float = 1.0, length: float = 2 * np.pi) -> NlssState:
    """phi1 = c exp(i mu s), phi2 = phi3 = 0; the twist absorbs mu * length."""
    ds = length / n
    s = ds * np.arange(n)
    phi = np.zeros((n, 3), dtype=complex)
    phi[:, 0] = c * np.exp(1j * mu * s)
    return NlssState(phi, ds, PERIODIC, twist=np.array([mu * length, 0.0, 0.0]))


def gaussian(n: int = 512, amplitude: float = 1.0, width: float = 1.0, k0: float = 0.0, length: float = 40.0) -> NlssState:
    """A Gaussian packet in phi1 on [-L/2, L/2), phi2 = phi3 = 0."""
    ds = length / n
    s = -length / 2 + ds * np.arange(n)
    phi = np.zeros((n, 3), dtype=complex)
    phi[:, 0] = amplitude * np.exp(-((s / width) ** 2)) * np.exp(1j * k0 * s)
    return NlssState(phi, ds, PERIODIC)


NLSS_PRESETS = {
    "soliton": soliton,
    "plane-wave": plane_wave,
    "gaussian": gaussian,
}


# --- curve flow vs NLSS ----------------------------------------------------------------


def phase_derivative(phi: np.ndarray, ds: float, boundary: str, twist, order: int = NLSS_ORDER) -> np.ndarray:
    """(arg phi_i)_s = Im(phi_s / phi), shape (N, 3); branch free."""
    out = np.empty(phi.shape)
    for k in range(phi.shape[1]):
        tw = None if boundary != PERIODIC else twist[k]
        out[:, k] = np.imag(d1(phi[:, k], ds, boundary, twist=tw, order=order) / phi[:, k])
    return out


@dataclass(frozen=True)
class GridComparison:
    n: int
    ds: float
    dt: float
    steps: int
    magnitude: np.ndarray  # (3,) max over time and space of | |phi_i|_curve - |phi_i|_nlss |
    phase_derivative: np.ndarray  # (3,) same for (arg phi_i)_s
    compared: tuple

    def as_dict(self) -> dict:
        return {
            "N": self.n,
            "ds": self.ds,
            "dt": self.dt,
            "steps": self.steps,
            "magnitude_discrepancy": self.magnitude.tolist(),
            "phase_derivative_discrepancy": self.phase_derivative.tolist(),
            "fields_compared": list(self.compared),
        }


@dataclass(frozen=True)
class CrossValidationReport:
    t_end: float
    grids: list
    orders: list  # observed order between consecutive grids (max over compared fields)
    reduced: bool

    @property
    def discrepancies(self) -> np.ndarray:
        return np.array([float(np.max(g.magnitude)) for g in self.grids])

    def as_dict(self) -> dict:
        return {
            "t_end": self.t_end,
            "reduced": self.reduced,
            "grids": [g.as_dict() for g in self.grids],
            "max_magnitude_discrepancy": self.discrepancies.tolist(),
            "observed_order": self.orders,
        }


def _curve_at(curve0, n):
    if callable(curve0):
        return curve0(n)
    if curve0.n == n:
        return curve0
    return reparameterize(curve0, n)


def compare_on_grid(
    curve: CurveState,
    t_end: float,
    cfl: float = DEFAULT_CFL,
    n_outputs: int = 5,
    divisor_floor: float = DIVISOR_FLOOR,
) -> GridComparison:
    """Evolve ``curve`` and its fields side by side and compare gauge-invariant quantities."""
    dt = cfl * curve.ds**2
    fields0 = curve_to_fields(curve)
    state0 = NlssState.from_fields(fields0)
    reduced = is_reduced(state0.phi[:, 1], divisor_floor)
    compared = (0,) if reduced else (0, 1, 2)
    if t_end == 0:
        z = np.zeros(3)
        return GridComparison(curve.n, curve.ds, dt, 0, z, z.copy(), compared)
    traj_c = evolve(curve, FlowConfig(dt=dt, t_end=t_end, cfl=cfl, n_outputs=n_outputs))
    traj_n = evolve_nlss(state0, NlssConfig(dt=dt, t_end=t_end, cfl=cfl, n_outputs=n_outputs, divisor_floor=divisor_floor))
    mag = np.zeros(3)
    phs = np.zeros(3)
    idx = list(compared)
    for st_c, st_n in zip(traj_c.states[1:], traj_n.states[1:]):
        f = NlssState.from_fields(curve_to_fields(st_c))
        mag[idx] = np.maximum(mag[idx], np.max(np.abs(np.abs(f.phi) - np.abs(st_n.phi)), axis=0)[idx])
        pc = phase_derivative(f.phi[:, idx], f.ds, f.boundary, f.twist[idx])
        pn = phase_derivative(st_n.phi[:, idx], st_n.ds, st_n.boundary, st_n.twist[idx])
        phs[idx] = np.maximum(phs[idx], np.max(np.abs(pc - pn), axis=0))
    return GridComparison(curve.n, curve.ds, traj_c.dt_used, traj_c.steps, mag, phs, compared)


def cross_validate(
    curve0: CurveState | Callable[[int], CurveState],
    t_end: float,
    grids=(128, 256),
    cfl: float = DEFAULT_CFL,
    n_outputs: int = 5,
    divisor_floor: float = DIVISOR_FLOOR,
) -> CrossValidationReport:
    """Curve flow versus NLSS on a sequence of grids.

    ``curve0`` is either a callable returning the initial curve sampled with N
    points, or a curve that is resampled to each N by ``reparameterize``.
    Time steps follow dt = cfl * ds^2, so space and time are refined together.
    When phi2 vanishes identically only |phi1| and (arg phi1)_s are compared.
    """
    comps = [compare_on_grid(_curve_at(curve0, n), t_end, cfl, n_outputs, divisor_floor) for n in grids]
    orders = []
    for a, b in zip(comps[:-1], comps[1:]):
        ea, eb = float(np.max(a.magnitude)), float(np.max(b.magnitude))
        orders.append(math.log(ea / eb) / math.log(a.ds / b.ds) if ea > 0 and eb > 0 else math.inf)
    return CrossValidationReport(t_end, comps, orders, comps[0].compared == (0,))
