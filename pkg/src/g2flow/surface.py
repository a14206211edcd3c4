"""Fundamental forms of the surface swept by a flowing curve, and the associative-plane test.

The surface frame is E1 = I4, E2 = -I5 (tangent) and E3 = I1, E4 = I2, E5 = I6,
E6 = I3, E7 = I7 (normal). Second fundamental form coefficients are stored as
``h[n, a, i, j]`` with ``a = alpha - 3`` for alpha in 3..7 and i, j in {0, 1}
standing for the co-frame (ds, sqrt(2)|phi1| dt). All fields here are in frame
normalisation.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateRotationError, InvalidInputError, SingularDataError
from .frame import I1, I2, I3, I6, I7, G2FrameField, HasimotoFields
from .octonion import cross
from .stencils import PERIODIC, d1, d2

DIVISOR_FLOOR = 1e-8
ALPHAS = (3, 4, 5, 6, 7)
SQRT2 = np.sqrt(2.0)
# frame index of E_alpha, alpha = 3..7
NORMAL_FRAME_INDEX = (I1, I2, I6, I3, I7)
CSV_ENTRIES = ("h3_11", "h3_12", "h3_22", "h4_22", "h5_12", "h5_22", "h6_22", "h7_22")


@dataclass(frozen=True)
class SecondFundamentalForm:
    h: np.ndarray  # (N, 5, 2, 2)
    rotated: bool = False
    theta: np.ndarray | None = None
    limit_mask: np.ndarray | None = None  # True where |phi2| < floor and 1/|phi2| entries took their limit 0

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        if h.ndim != 4 or h.shape[1:] != (5, 2, 2):
            raise InvalidInputError("h must have shape (N, 5, 2, 2)")
        if not np.all(np.isfinite(h)):
            raise InvalidInputError("second fundamental form has non-finite entries")
        object.__setattr__(self, "h", h)

    def entry(self, alpha: int, i: int, j: int) -> np.ndarray:
        """h^alpha_ij with alpha in 3..7 and i, j in {1, 2}."""
        return self.h[:, alpha - 3, i - 1, j - 1]

    def symmetry_error(self) -> float:
        return float(np.max(np.abs(self.h - np.swapaxes(self.h, 2, 3))))

    def frobenius(self) -> np.ndarray:
        """Per-sample sqrt(sum_{alpha,i,j} h^2)."""
        return np.sqrt(np.sum(self.h**2, axis=(1, 2, 3)))

    def columns(self) -> dict[str, np.ndarray]:
        out = {}
        for name in CSV_ENTRIES:
            a, ij = int(name[1]), name[3:]
            out[name] = self.entry(a, int(ij[0]), int(ij[1]))
        return out


def first_fundamental_form(fields: HasimotoFields, divisor_floor: float = DIVISOR_FLOOR):
    """(g_ss, g_tt, degenerate) with g_ss = 1 and g_tt = 2|phi1|^2."""
    g_tt = 2 * np.abs(fields.phi1) ** 2
    return np.ones(fields.n), g_tt, np.abs(fields.phi1) < divisor_floor


def _deriv(fields: HasimotoFields, k: int, order: int):
    tw = fields.twist[k] if fields.boundary == PERIODIC else None
    f = fields.phi[:, k]
    return (
        d1(f, fields.ds, fields.boundary, twist=tw, order=order),
        d2(f, fields.ds, fields.boundary, twist=tw, order=order),
    )


def second_fundamental_form(
    fields: HasimotoFields,
    divisor_floor: float = DIVISOR_FLOOR,
    order: int = 4,
) -> SecondFundamentalForm:
    """Closed-form coefficients in terms of (phi1, phi2, phi3); unlisted entries are zero.

    Where |phi2| < divisor_floor the entries divided by |phi2| (h5_22, h6_22
    and the first part of h7_22) are set to their phi2 -> 0 limit, which is 0,
    and flagged in ``limit_mask``.
    """
    p1, p2, p3 = fields.phi1, fields.phi2, fields.phi3
    a1, a2 = np.abs(p1), np.abs(p2)
    if np.min(a1) < divisor_floor:
        raise SingularDataError(f"|phi1| = {np.min(a1):.3e} below divisor floor {divisor_floor:g}")
    p1s, p1ss = _deriv(fields, 0, order)
    p2s, _ = _deriv(fields, 1, order)
    small = a2 < divisor_floor
    safe2 = np.where(small, 1.0, a2)
    # (ln(conj(phi1)/phi1))_s = conj(phi1_s/phi1) - phi1_s/phi1
    lq = np.conj(p1s / p1) - p1s / p1
    log_a1_s = d1(np.log(a1), fields.ds, fields.boundary, order=order)
    a2_s = d1(a2, fields.ds, fields.boundary, order=order)
    W = p1**3 * p2**2 * p3

    h = np.zeros((fields.n, 5, 2, 2))
    h[:, 0, 0, 0] = SQRT2 * a1
    h12 = np.real(1j / SQRT2 * lq)
    h[:, 0, 0, 1] = h[:, 0, 1, 0] = h12
    h[:, 0, 1, 1] = -np.real(p1 * np.conj(p1ss) + np.conj(p1) * p1ss) / (2 * SQRT2 * a1**3) + a2**2 / (SQRT2 * a1)
    h[:, 1, 1, 1] = -(2 * log_a1_s * a2 + a2_s) / (SQRT2 * a1)
    h[:, 2, 0, 1] = h[:, 2, 1, 0] = -a2
    h5 = -np.real(1j * (2 * lq * a2**2 + p2 * np.conj(p2s) - np.conj(p2) * p2s)) / (2 * SQRT2 * a1 * safe2)
    h6 = np.real(W + np.conj(W)) / (2 * SQRT2 * a1**4 * safe2)
    h7 = np.real(1j * (np.conj(W) - W)) / (2 * SQRT2 * a1**4 * safe2)
    h[:, 2, 1, 1] = np.where(small, 0.0, h5)
    h[:, 3, 1, 1] = np.where(small, 0.0, h6)
    h[:, 4, 1, 1] = np.where(small, 0.0, h7) - 1.5 * a2
    return SecondFundamentalForm(h, limit_mask=small)


def rotation_angle(h: SecondFundamentalForm, fields: HasimotoFields, divisor_floor: float = DIVISOR_FLOOR) -> np.ndarray:
    """theta = arccos(h4_22 / sqrt(h4_22^2 + (9/4)|phi2|^2)), argument clamped to [-1, 1]."""
    h4 = h.entry(4, 2, 2)
    den = np.sqrt(h4**2 + 2.25 * np.abs(fields.phi2) ** 2)
    if np.min(den) < divisor_floor:
        raise DegenerateRotationError("h4_22 and |phi2| vanish together; the rotation angle is undefined")
    return np.arccos(np.clip(h4 / den, -1.0, 1.0))


def rotate_frame(h: SecondFundamentalForm, fields: HasimotoFields, divisor_floor: float = DIVISOR_FLOOR) -> SecondFundamentalForm:
    """Coefficients in the frame with E4 -> cos E4 - sin E7, E7 -> sin E4 + cos E7."""
    theta = rotation_angle(h, fields, divisor_floor)
    c, s = np.cos(theta)[:, None, None], np.sin(theta)[:, None, None]
    out = h.h.copy()
    h4, h7 = h.h[:, 1], h.h[:, 4]
    out[:, 1] = c * h4 - s * h7
    out[:, 4] = s * h4 + c * h7
    return replace(h, h=out, rotated=True, theta=theta)


def rotated_closed_form(h: SecondFundamentalForm, fields: HasimotoFields) -> tuple[np.ndarray, np.ndarray]:
    """(h~4_22, h~7_22) from the closed forms of the rotated frame."""
    h4, h7 = h.entry(4, 2, 2), h.entry(7, 2, 2)
    a2 = np.abs(fields.phi2)
    den = np.sqrt(h4**2 + 2.25 * a2**2)
    return den - 3 * a2 * (h7 + 1.5 * a2) / (2 * den), h4 * (h7 + 1.5 * a2) / den


# --- independent oracle from the embedding ------------------------------------------------


def embedding_second_fundamental_form(
    sigma: np.ndarray,
    dt: float,
    ds: float,
    frame: G2FrameField,
    boundary: str = PERIODIC,
    shift=None,
) -> SecondFundamentalForm:
    """Second fundamental form of a sampled surface by 2nd-order finite differences.

    ``sigma`` has shape (3, N, 7): the curve at times t - dt, t, t + dt. The
    coefficients at time t are <d_i d_j sigma, E_alpha> / (|d_i sigma| |d_j sigma|)
    with the normal vectors E_alpha taken from ``frame`` (built at time t).
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 3 or sigma.shape[0] != 3 or sigma.shape[2] != 7:
        raise InvalidInputError("sigma must have shape (3, N, 7)")
    mid = sigma[1]

    def ds1(x):
        if boundary == PERIODIC:
            sh = np.zeros(7) if shift is None else np.asarray(shift)
            return (np.roll(x, -1, axis=0) - np.roll(x, 1, axis=0) + _wrap_fix(x, sh)) / (2 * ds)
        return np.gradient(x, ds, axis=0)

    def _wrap_fix(x, sh):
        fix = np.zeros_like(x)
        fix[-1] += sh
        fix[0] += sh
        return fix

    def ds2(x):
        if boundary == PERIODIC:
            sh = np.zeros(7) if shift is None else np.asarray(shift)
            fix = np.zeros_like(x)
            fix[-1] += sh
            fix[0] -= sh
            return (np.roll(x, -1, axis=0) - 2 * x + np.roll(x, 1, axis=0) + fix) / ds**2
        return np.gradient(np.gradient(x, ds, axis=0), ds, axis=0)

    xs = ds1(mid)
    xt = (sigma[2] - sigma[0]) / (2 * dt)
    xss = ds2(mid)
    xtt = (sigma[2] - 2 * mid + sigma[0]) / dt**2
    xst = (ds1(sigma[2]) - ds1(sigma[0])) / (2 * dt)
    ns = np.linalg.norm(xs, axis=1)
    nt = np.linalg.norm(xt, axis=1)
    h = np.zeros((mid.shape[0], 5, 2, 2))
    for a, idx in enumerate(NORMAL_FRAME_INDEX):
        e = frame.frame[:, idx]
        h[:, a, 0, 0] = np.sum(xss * e, axis=1) / ns**2
        h[:, a, 0, 1] = h[:, a, 1, 0] = np.sum(xst * e, axis=1) / (ns * nt)
        h[:, a, 1, 1] = np.sum(xtt * e, axis=1) / nt**2
    return SecondFundamentalForm(h)


# --- associativity ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AssociativePlaneReport:
    residual: float  # max distance of the points from the best affine 3-plane
    associativity_defect: float  # |u x v - P(u x v)| for an orthonormal basis u, v of the plane
    associative: bool
    basis: np.ndarray  # (3, 7) orthonormal basis of the plane
    insufficient_data: bool = False

    def as_dict(self) -> dict:
        return {
            "residual": self.residual,
            "associativity_defect": self.associativity_defect,
            "associative": self.associative,
            "insufficient_data": self.insufficient_data,
        }


def associative_plane_check(trajectory, tol: float = 1e-8) -> AssociativePlaneReport:
    """Fit the best 3-plane through every point of a trajectory and test associativity.

    ``trajectory`` is anything with ``.states`` holding ``.points``, a list of
    such states, or an (M, 7) point array.
    """
    if hasattr(trajectory, "states"):
        pts = np.vstack([st.points for st in trajectory.states])
    elif isinstance(trajectory, (list, tuple)):
        pts = np.vstack([st.points for st in trajectory])
    else:
        pts = np.asarray(trajectory, dtype=float).reshape(-1, 7)
    centred = pts - pts.mean(axis=0)
    _, sv, vt = np.linalg.svd(centred, full_matrices=False)
    basis = vt[:3]
    scale = float(sv[0]) if sv.size else 0.0
    if pts.shape[0] < 4 or scale == 0.0 or sv[2] <= 1e-12 * scale:
        # fewer than three independent directions: any 3-plane through them fits
        return AssociativePlaneReport(0.0, 0.0, False, basis, insufficient_data=True)
    resid = centred - (centred @ basis.T) @ basis
    u, v = basis[0], basis[1]
    w = cross(u, v)
    defect = float(np.linalg.norm(w - (basis.T @ (basis @ w))))
    res = float(np.max(np.linalg.norm(resid, axis=1)))
    return AssociativePlaneReport(res, defect, bool(res <= tol and defect <= tol), basis)
