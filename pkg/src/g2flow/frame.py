"""G2 frames along curves, their complexification and the Hasimoto-type fields.

Frame arrays have shape ``(N, 7, 7)``: ``frame[n, m]`` is the m-th frame vector
at sample n, in the order ``(I4, I1, I2, I3, I5, I6, I7)``. The complexified
frame uses the order ``(e4, e1, e2, e3, conj(e1), conj(e2), conj(e3))``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import CurveState
from .errors import InvalidInputError, VanishingCurvatureError
from .octonion import cross, embed, oct_mul
from .stencils import PERIODIC, cumtrapz, d1, period_integral

FRAME_ORDER = ("I4", "I1", "I2", "I3", "I5", "I6", "I7")
I4, I1, I2, I3, I5, I6, I7 = range(7)
INVARIANTS = ("k1", "kappa2", "rho1", "rho2", "rho3", "alpha", "beta1", "beta2")

K1_THRESHOLD = 1e-10
KAPPA2_THRESHOLD = 1e-7
SQRT2 = np.sqrt(2.0)


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def _unit(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


@dataclass(frozen=True)
class G2FrameField:
    s: np.ndarray
    ds: float
    boundary: str
    frame: np.ndarray  # (N, 7, 7)
    dframe: np.ndarray  # s-derivative of ``frame`` by finite differences
    k1: np.ndarray
    kappa2: np.ndarray
    rho1: np.ndarray
    rho2: np.ndarray
    rho3: np.ndarray
    alpha: np.ndarray
    beta1: np.ndarray
    beta2: np.ndarray
    degenerate: np.ndarray  # bool, kappa2 = 0 branch

    def vector(self, name: str) -> np.ndarray:
        return self.frame[:, FRAME_ORDER.index(name)]

    def invariants(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in INVARIANTS}

    def gram_error(self) -> float:
        g = np.einsum("nai,nbi->nab", self.frame, self.frame)
        return float(np.max(np.abs(g - np.eye(7))))

    def closure_error(self) -> float:
        f = self.frame
        errs = [
            f[:, I5] - cross(f[:, I1], f[:, I4]),
            f[:, I3] - cross(f[:, I1], f[:, I2]),
            f[:, I6] - cross(f[:, I2], f[:, I4]),
            f[:, I7] - cross(f[:, I3], f[:, I4]),
        ]
        return float(max(np.max(np.linalg.norm(e, axis=1)) for e in errs))

    def constraint_errors(self) -> tuple[float, float]:
        """max |rho1 + rho2 + rho3| and max |beta1 - beta2 + k1|."""
        return (
            float(np.max(np.abs(self.rho1 + self.rho2 + self.rho3))),
            float(np.max(np.abs(self.beta1 - self.beta2 + self.k1))),
        )


def _complement_projection(v, basis):
    for b in basis:
        v = v - np.dot(v, b) * b
    return v


def build_g2_frame(
    curve: CurveState,
    fallback_seed=None,
    k1_threshold: float = K1_THRESHOLD,
    kappa2_threshold: float = KAPPA2_THRESHOLD,
    speed_tol: float | None = None,
) -> G2FrameField:
    """Build the G2 frame and its invariants along a unit-speed curve.

    Where kappa2 <= ``kappa2_threshold`` the frame uses the degenerate branch:
    I2 is the previous sample's I2 (``fallback_seed`` at the first such
    sample, default ``l``) projected onto span{I4, I1, I5}^perp and
    renormalised, and kappa2 is reported as exactly 0.
    """
    curve.check_unit_speed(speed_tol)
    ds, bc = curve.ds, curve.boundary
    e4 = _unit(curve.tangent())
    de4 = d1(e4, ds, bc)
    v = de4 - _dot(de4, e4)[:, None] * e4
    k1 = np.linalg.norm(v, axis=1)
    if np.min(k1) < k1_threshold:
        raise VanishingCurvatureError(f"k1 = {np.min(k1):.3e} below threshold {k1_threshold:.1e}")
    e1 = v / k1[:, None]
    e5 = cross(e1, e4)
    de1 = d1(e1, ds, bc)
    w = de1 - sum(_dot(de1, b)[:, None] * b for b in (e4, e1, e5))
    kappa2 = np.linalg.norm(w, axis=1)
    degenerate = kappa2 <= kappa2_threshold

    e2 = np.empty_like(e1)
    e2[~degenerate] = w[~degenerate] / kappa2[~degenerate, None]
    if np.any(degenerate):
        seed = np.eye(7)[3] if fallback_seed is None else np.asarray(fallback_seed, dtype=float)
        if seed.shape != (7,) or not np.all(np.isfinite(seed)):
            raise InvalidInputError("fallback_seed must be a finite 7-vector")
        prev = None
        for n in range(curve.n):
            if not degenerate[n]:
                prev = e2[n]
                continue
            basis = (e4[n], e1[n], e5[n])
            cand = _complement_projection(seed if prev is None else prev, basis)
            if np.linalg.norm(cand) < 1e-8:
                # seed fell inside span{I4, I1, I5}; any basis vector not in it will do
                for alt in np.eye(7):
                    cand = _complement_projection(alt, basis)
                    if np.linalg.norm(cand) > 0.1:
                        break
            e2[n] = cand / np.linalg.norm(cand)
            prev = e2[n]
        kappa2 = np.where(degenerate, 0.0, kappa2)

    e3 = cross(e1, e2)
    e6 = cross(e2, e4)
    e7 = cross(e3, e4)
    frame = np.stack([e4, e1, e2, e3, e5, e6, e7], axis=1)
    dframe = d1(frame.reshape(curve.n, 49), ds, bc).reshape(curve.n, 7, 7)
    ip = lambda a, b: _dot(dframe[:, a], frame[:, b])  # noqa: E731
    return G2FrameField(
        s=curve.s,
        ds=ds,
        boundary=bc,
        frame=frame,
        dframe=dframe,
        k1=ip(I4, I1),
        kappa2=kappa2,
        rho1=ip(I1, I5),
        rho2=ip(I2, I6),
        rho3=ip(I3, I7),
        alpha=ip(I2, I3),
        beta1=ip(I2, I7),
        beta2=ip(I3, I6),
        degenerate=degenerate,
    )


def frenet_matrix(k1, kappa2, rho1, rho2, rho3, alpha, beta1, beta2) -> np.ndarray:
    """Coefficient matrices (N, 7, 7) of J_s = M J in the order (I4, I1, I2, I3, I5, I6, I7)."""
    n = np.shape(k1)[0]
    m = np.zeros((n, 7, 7))
    upper = [
        (I4, I1, k1),
        (I1, I2, kappa2),
        (I1, I5, rho1),
        (I2, I3, alpha),
        (I2, I6, rho2),
        (I2, I7, beta1),
        (I3, I6, beta2),
        (I3, I7, rho3),
        (I5, I6, kappa2),
        (I6, I7, alpha),
    ]
    for a, b, val in upper:
        m[:, a, b] = val
        m[:, b, a] = -np.asarray(val)
    return m


@dataclass(frozen=True)
class ResidualReport:
    max_residual: float
    antisymmetry: float
    per_row: np.ndarray

    def as_dict(self) -> dict:
        return {"max_residual": self.max_residual, "antisymmetry": self.antisymmetry}


def frenet_residual(frame: G2FrameField) -> ResidualReport:
    """max_n || J_s - M(invariants) J || for the real frame."""
    m = frenet_matrix(*(getattr(frame, k) for k in INVARIANTS))
    res = frame.dframe - np.einsum("nab,nbi->nai", m, frame.frame)
    rows = np.max(np.linalg.norm(res, axis=2), axis=0)
    anti = float(np.max(np.abs(m + np.transpose(m, (0, 2, 1)))))
    return ResidualReport(float(np.max(rows)), anti, rows)


# --- complexification ---------------------------------------------------------------


@dataclass(frozen=True)
class ComplexFrameField:
    s: np.ndarray
    ds: float
    boundary: str
    e: np.ndarray  # (N, 7, 7) complex: e4, e1, e2, e3, conj(e1), conj(e2), conj(e3)
    r: np.ndarray
    q: np.ndarray
    p: np.ndarray
    twists: np.ndarray  # phase gained by each frame vector over one period

    def relation_errors(self) -> dict[str, float]:
        """Deviations from the bilinear-product relations of a complexified G2 frame."""
        e = self.e
        f, fb = e[:, 1:4], e[:, 4:7]
        g = np.einsum("nai,nbi->nab", f, fb)
        ff = np.einsum("nai,nbi->nab", f, f)
        e4f = np.einsum("ni,nai->na", e[:, 0], f)
        cr = np.stack([cross(f[:, a], e[:, 0]) - 1j * f[:, a] for a in range(3)], axis=1)
        triple = _dot(cross(f[:, 0], f[:, 1]), f[:, 2])
        return {
            "e_ebar_delta": float(np.max(np.abs(g - np.eye(3)))),
            "e_e_zero": float(np.max(np.abs(ff))),
            "e4_e_zero": float(np.max(np.abs(e4f))),
            "cross_e4": float(np.max(np.abs(cr))),
            "triple": float(np.max(np.abs(triple + SQRT2))),
            "rqp": float(np.max(np.abs(self.p - SQRT2 * np.conj(self.q) * np.conj(self.r)))),
        }


def _phase(rho, ds, boundary, offset=0.0):
    theta = cumtrapz(rho, ds) + offset
    total = float(period_integral(rho, ds)) if boundary == PERIODIC else 0.0
    return np.exp(-1j * theta) / SQRT2, -total


def complexify_frame(frame: G2FrameField, start_index: int = 0) -> ComplexFrameField:
    """Complexified frame with phases r, q, p from integrals of rho1, rho2 starting at ``s[start_index]``."""
    ds, bc = frame.ds, frame.boundary
    off1 = -cumtrapz(frame.rho1, ds)[start_index]
    off2 = -cumtrapz(frame.rho2, ds)[start_index]
    r, tr = _phase(frame.rho1, ds, bc, off1)
    q, tq = _phase(frame.rho2, ds, bc, off2)
    p = SQRT2 * np.conj(q) * np.conj(r)
    tp = -tq - tr
    f = frame.frame
    e1 = r[:, None] * (f[:, I1] - 1j * f[:, I5])
    e2 = q[:, None] * (f[:, I2] - 1j * f[:, I6])
    e3 = -p[:, None] * (f[:, I3] - 1j * f[:, I7])
    e = np.stack([f[:, I4].astype(complex), e1, e2, e3, np.conj(e1), np.conj(e2), np.conj(e3)], axis=1)
    twists = np.array([0.0, tr, tq, tp, -tr, -tq, -tp])
    return ComplexFrameField(frame.s, ds, bc, e, r, q, p, twists)


@dataclass(frozen=True)
class HasimotoFields:
    """The complex triple (phi1, phi2, phi3) on the grid, ``phi.shape == (N, 3)``.

    ``twist[i]`` is the phase phi_i gains over one period (periodic grids).
    """

    phi: np.ndarray
    ds: float
    boundary: str
    twist: np.ndarray

    @property
    def n(self) -> int:
        return self.phi.shape[0]

    @property
    def s(self) -> np.ndarray:
        return np.arange(self.n) * self.ds

    @property
    def phi1(self) -> np.ndarray:
        return self.phi[:, 0]

    @property
    def phi2(self) -> np.ndarray:
        return self.phi[:, 1]

    @property
    def phi3(self) -> np.ndarray:
        return self.phi[:, 2]

    def twist_or_none(self):
        return self.twist if self.boundary == PERIODIC else None


def hasimoto_fields(frame: G2FrameField, cframe: ComplexFrameField) -> HasimotoFields:
    r, q = cframe.r, cframe.q
    phi1 = frame.k1 * np.conj(r)
    phi2 = 2 * frame.kappa2 * r * np.conj(q)
    phi3 = -SQRT2 * q**2 * r * (2 * frame.alpha + 1j * (frame.beta1 + frame.beta2))
    tr, tq = cframe.twists[1], cframe.twists[2]
    twist = np.array([-tr, tr - tq, 2 * tq + tr])
    return HasimotoFields(np.stack([phi1, phi2, phi3], axis=1), frame.ds, frame.boundary, twist)


def curve_to_fields(curve: CurveState, **kwargs) -> HasimotoFields:
    """Convenience: frame, complexification and Hasimoto fields in one call."""
    frame = build_g2_frame(curve, **kwargs)
    return hasimoto_fields(frame, complexify_frame(frame))


def complex_frenet_matrix(phi1, phi2, phi3) -> np.ndarray:
    """(N, 7, 7) coefficient matrices of the complexified Frenet system."""
    n = len(phi1)
    m = np.zeros((n, 7, 7), dtype=complex)
    c = 1j / SQRT2
    b1, b2, b3 = np.conj(phi1), np.conj(phi2), np.conj(phi3)
    m[:, 0, 1], m[:, 0, 4] = phi1, b1
    m[:, 1, 0], m[:, 1, 2] = -b1, phi2
    m[:, 2, 1], m[:, 2, 3], m[:, 2, 6] = -b2, phi3, -c * phi1
    m[:, 3, 2], m[:, 3, 5] = -b3, c * phi1
    m[:, 4, 0], m[:, 4, 5] = -phi1, b2
    m[:, 5, 3], m[:, 5, 4], m[:, 5, 6] = c * b1, -phi2, b3
    m[:, 6, 2], m[:, 6, 5] = -c * b1, -phi3
    return m


def g2_shape_error(m: np.ndarray) -> float:
    """Deviation of coefficient matrices from the block shape of a g2-valued form.

    theta is read off the first row; kappa must be skew-Hermitian and
    traceless and the off-diagonal blocks must be the bracket matrix [theta].
    """
    theta = m[:, 0, 1:4] / (-SQRT2 * 1j)
    kappa = m[:, 1:4, 1:4]
    t1, t2, t3 = theta[:, 0], theta[:, 1], theta[:, 2]
    z = np.zeros_like(t1)
    bracket = np.stack(
        [np.stack([z, -t3, t2], 1), np.stack([t3, z, -t1], 1), np.stack([-t2, t1, z], 1)],
        axis=1,
    )
    errs = [
        m[:, 0, 0],
        m[:, 0, 4:7] - SQRT2 * 1j * np.conj(theta),
        m[:, 1:4, 0] + SQRT2 * 1j * np.conj(theta),
        m[:, 4:7, 0] - SQRT2 * 1j * theta,
        kappa + np.conj(np.transpose(kappa, (0, 2, 1))),
        np.trace(kappa, axis1=1, axis2=2),
        m[:, 1:4, 4:7] - bracket,
        m[:, 4:7, 1:4] - np.conj(bracket),
        m[:, 4:7, 4:7] - np.conj(kappa),
    ]
    return float(max(np.max(np.abs(e)) for e in errs))


@dataclass(frozen=True)
class ComplexResidualReport:
    max_residual: float
    g2_shape: float
    per_row: np.ndarray

    def as_dict(self) -> dict:
        return {"max_residual": self.max_residual, "g2_shape": self.g2_shape}


def complex_frenet_residual(cframe: ComplexFrameField, fields: HasimotoFields) -> ComplexResidualReport:
    n = len(cframe.s)
    twist = np.repeat(cframe.twists, 7) if cframe.boundary == PERIODIC else None
    de = d1(cframe.e.reshape(n, 49), cframe.ds, cframe.boundary, twist=twist).reshape(n, 7, 7)
    m = complex_frenet_matrix(fields.phi1, fields.phi2, fields.phi3)
    res = de - np.einsum("nab,nbi->nai", m, cframe.e)
    rows = np.max(np.linalg.norm(res, axis=2), axis=0)
    return ComplexResidualReport(float(np.max(rows)), g2_shape_error(m), rows)


# --- multiplication and cross-product tables of the complexified frame -------------------

_R2 = SQRT2
_I = 1j
# entries: tuples of (coefficient, symbol); "1" is the unit, "e0" = -1 - sqrt(-1) e4
_E = ("e4", "e1", "e2", "e3", "e1b", "e2b", "e3b")
PRODUCT_TABLE = {
    "e4": [[(-1, "1")], [(-_I, "e1")], [(-_I, "e2")], [(-_I, "e3")], [(_I, "e1b")], [(_I, "e2b")], [(_I, "e3b")]],
    "e1": [[(_I, "e1")], [], [(-_R2, "e3b")], [(_R2, "e2b")], [(1, "e0")], [], []],
    "e2": [[(_I, "e2")], [(_R2, "e3b")], [], [(-_R2, "e1b")], [], [(1, "e0")], []],
    "e3": [[(_I, "e3")], [(-_R2, "e2b")], [(_R2, "e1b")], [], [], [], [(1, "e0")]],
    "e1b": [[(-_I, "e1b")], [(1, "e0b")], [], [], [], [(-_R2, "e3")], [(_R2, "e2")]],
    "e2b": [[(-_I, "e2b")], [], [(1, "e0b")], [], [(_R2, "e3")], [], [(-_R2, "e1")]],
    "e3b": [[(-_I, "e3b")], [], [], [(1, "e0b")], [(-_R2, "e2")], [(_R2, "e1")], []],
}
CROSS_TABLE = {
    "e4": [[], [(-_I, "e1")], [(-_I, "e2")], [(-_I, "e3")], [(_I, "e1b")], [(_I, "e2b")], [(_I, "e3b")]],
    "e1": [[(_I, "e1")], [], [(-_R2, "e3b")], [(_R2, "e2b")], [(-_I, "e4")], [], []],
    "e2": [[(_I, "e2")], [(_R2, "e3b")], [], [(-_R2, "e1b")], [], [(-_I, "e4")], []],
    "e3": [[(_I, "e3")], [(-_R2, "e2b")], [(_R2, "e1b")], [], [], [], [(-_I, "e4")]],
    "e1b": [[(-_I, "e1b")], [(_I, "e4")], [], [], [], [(-_R2, "e3")], [(_R2, "e2")]],
    "e2b": [[(-_I, "e2b")], [], [(_I, "e4")], [], [(_R2, "e3")], [], [(-_R2, "e1")]],
    "e3b": [[(-_I, "e3b")], [], [], [(_I, "e4")], [(-_R2, "e2")], [(_R2, "e1")], []],
}


def _symbol_values(e: np.ndarray) -> dict[str, np.ndarray]:
    """Per-sample 8-component octonion value of every table symbol."""
    n = e.shape[0]
    vals = {name: embed(e[:, k]) for k, name in enumerate(_E)}
    one = np.zeros((n, 8), dtype=complex)
    one[:, 0] = 1.0
    vals["1"] = one
    vals["e0"] = -one - 1j * vals["e4"]
    vals["e0b"] = -one + 1j * vals["e4"]
    return vals


def table_errors(cframe: ComplexFrameField) -> tuple[float, float]:
    """Max deviation of the frame's products and cross products from the expected tables."""
    vals = _symbol_values(cframe.e)
    worst_mul = worst_cross = 0.0
    for a in _E:
        for b, (want_mul, want_cross) in enumerate(zip(PRODUCT_TABLE[a], CROSS_TABLE[a])):
            x, y = vals[a], vals[_E[b]]
            got = oct_mul(x, y)
            exp = sum((c * vals[sym] for c, sym in want_mul), np.zeros_like(got))
            worst_mul = max(worst_mul, float(np.max(np.abs(got - exp))))
            got_c = cross(x[:, 1:], y[:, 1:])
            exp_c = sum((c * vals[sym][:, 1:] for c, sym in want_cross), np.zeros_like(got_c))
            worst_cross = max(worst_cross, float(np.max(np.abs(got_c - exp_c))))
    return worst_mul, worst_cross
