"""Octonion algebra on coefficient arrays.

Octonions are stored as arrays whose last axis has length 8, ordered against
the basis ``(1, i, j, k, l, il, jl, kl)``; imaginary octonions (points of R^7)
use the last 7 entries only. Complex coefficient arrays represent the
complexified algebra C (x) O; every product here is bilinear, so the same
functions serve both.

The multiplication table is produced once by iterated Cayley-Dickson doubling
of the reals and then frozen into a signed permutation table.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._accel import njit, select
from .errors import InvalidInputError

BASIS_NAMES = ("1", "i", "j", "k", "l", "il", "jl", "kl")
IM_NAMES = BASIS_NAMES[1:]

Mul = Callable[[np.ndarray, np.ndarray], np.ndarray]
Conj = Callable[[np.ndarray], np.ndarray]


def cd_double(mul: Mul, conj: Conj) -> tuple[Mul, Conj]:
    """Double an algebra given by its product and conjugation.

    Elements of the doubled algebra are arrays ``(a, b)`` split down the middle
    of the last axis, with

        (a, b)(c, d) = (ac - d conj(b), conj(a) d + cb),   conj(a, b) = (conj(a), -b).
    """

    def mul2(x, y):
        n = x.shape[-1] // 2
        a, b = x[..., :n], x[..., n:]
        c, d = y[..., :n], y[..., n:]
        return np.concatenate([mul(a, c) - mul(d, conj(b)), mul(conj(a), d) + mul(c, b)], axis=-1)

    def conj2(x):
        n = x.shape[-1] // 2
        return np.concatenate([conj(x[..., :n]), -x[..., n:]], axis=-1)

    return mul2, conj2


def real_algebra() -> tuple[Mul, Conj]:
    """The reals as a 1-dimensional algebra with trivial conjugation."""
    return (lambda x, y: x * y), (lambda x: x.copy())


def doubled_algebra(times: int) -> tuple[Mul, Conj]:
    mul, conj = real_algebra()
    for _ in range(times):
        mul, conj = cd_double(mul, conj)
    return mul, conj


def _labelled_basis(mul: Mul) -> np.ndarray:
    # k := ij, l := the third doubling unit, and xl := x*l; each one is a
    # signed raw Cayley-Dickson basis vector.
    e = np.eye(8)
    i, j, l = e[1], e[2], e[4]
    k = mul(i, j)
    return np.array([e[0], i, j, k, l, mul(i, l), mul(j, l), mul(k, l)])


def _build_tables() -> tuple[np.ndarray, np.ndarray]:
    mul, _ = doubled_algebra(3)
    basis = _labelled_basis(mul)
    to_labelled = np.linalg.inv(basis)
    index = np.zeros((8, 8), dtype=np.int64)
    sign = np.zeros((8, 8))
    for a in range(8):
        for b in range(8):
            p = mul(basis[a], basis[b]) @ to_labelled
            nz = np.flatnonzero(np.abs(p) > 0.5)
            if len(nz) != 1 or abs(abs(p[nz[0]]) - 1.0) > 1e-12:
                raise RuntimeError("Cayley-Dickson table is not a signed permutation")
            index[a, b] = nz[0]
            sign[a, b] = np.sign(p[nz[0]])
    return index, sign


MUL_INDEX, MUL_SIGN = _build_tables()

# structure constants: (e_a e_b) = sum_c MUL_TENSOR[a, b, c] e_c
MUL_TENSOR = np.zeros((8, 8, 8))
for _a in range(8):
    for _b in range(8):
        MUL_TENSOR[_a, _b, MUL_INDEX[_a, _b]] = MUL_SIGN[_a, _b]

_CONJ_SIGNS = np.array([1.0, -1, -1, -1, -1, -1, -1, -1])


def _cross_tensor() -> np.ndarray:
    # x cross y = (1/2)(conj(y) x - conj(x) y), evaluated on imaginary basis pairs
    t = np.zeros((7, 7, 7))
    e = np.eye(8)
    for a in range(7):
        for b in range(7):
            x, y = e[a + 1], e[b + 1]
            v = 0.5 * (_mul_numpy(_CONJ_SIGNS * y, x) - _mul_numpy(_CONJ_SIGNS * x, y))
            if abs(v[0]) > 0:
                raise RuntimeError("cross product left Im(O)")
            t[a, b] = v[1:]
    return t


def _mul_numpy(x, y):
    return np.einsum("...a,...b,abc->...c", x, y, MUL_TENSOR)


CROSS_TENSOR = _cross_tensor()
_CROSS_A, _CROSS_B = (np.ascontiguousarray(v, dtype=np.int64) for v in np.nonzero(np.abs(CROSS_TENSOR).sum(axis=2)))
_CROSS_C = np.array([np.flatnonzero(CROSS_TENSOR[a, b])[0] for a, b in zip(_CROSS_A, _CROSS_B)], dtype=np.int64)
_CROSS_S = np.array([CROSS_TENSOR[a, b, c] for a, b, c in zip(_CROSS_A, _CROSS_B, _CROSS_C)])


# --- kernels -----------------------------------------------------------------


@njit
def _mul_rows_jit(x, y, out, index, sign):
    for n in range(x.shape[0]):
        for a in range(8):
            xa = x[n, a]
            if xa == 0:
                continue
            for b in range(8):
                out[n, index[a, b]] += sign[a, b] * xa * y[n, b]


@njit
def _cross_rows_jit(x, y, out, ia, ib, ic, sgn):
    for n in range(x.shape[0]):
        for m in range(ia.shape[0]):
            out[n, ic[m]] += sgn[m] * x[n, ia[m]] * y[n, ib[m]]


def _mul_rows_np(x, y, out, index, sign):
    out += _mul_numpy(x, y)


def _cross_rows_np(x, y, out, ia, ib, ic, sgn):
    for a, b, c, s in zip(ia, ib, ic, sgn):
        out[:, c] += s * x[:, a] * y[:, b]


_mul_rows = select(_mul_rows_jit, _mul_rows_np)
_cross_rows = select(_cross_rows_jit, _cross_rows_np)


def _rowwise(kernel, x, y, width, *tables):
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape[-1] != width or y.shape[-1] != width:
        raise InvalidInputError(f"expected trailing axis of length {width}")
    dtype = np.result_type(x, y, np.float64)
    x, y = np.broadcast_arrays(x, y)
    shape = x.shape
    xr = np.ascontiguousarray(x.reshape(-1, width), dtype=dtype)
    yr = np.ascontiguousarray(y.reshape(-1, width), dtype=dtype)
    out = np.zeros_like(xr)
    kernel(xr, yr, out, *tables)
    return out.reshape(shape)


# --- public operations -------------------------------------------------------


def oct_mul(a, b) -> np.ndarray:
    """Octonion product of (broadcastable) arrays of shape ``(..., 8)``."""
    return _rowwise(_mul_rows, a, b, 8, MUL_INDEX, MUL_SIGN)


def oct_conj(a) -> np.ndarray:
    """Octonion conjugation: keeps the real part, negates the imaginary part."""
    return np.asarray(a) * _CONJ_SIGNS


def complex_conj(a) -> np.ndarray:
    """Complex conjugation on C (x) O, coefficientwise."""
    return np.conj(a)


def inner(x, y) -> np.ndarray:
    """Bilinear inner product; the Euclidean dot product of coefficients."""
    return np.sum(np.asarray(x) * np.asarray(y), axis=-1)


def norm(x) -> np.ndarray:
    return np.sqrt(np.sum(np.abs(np.asarray(x)) ** 2, axis=-1))


def cross(x, y) -> np.ndarray:
    """Seven-dimensional cross product of arrays of shape ``(..., 7)``."""
    return _rowwise(_cross_rows, x, y, 7, _CROSS_A, _CROSS_B, _CROSS_C, _CROSS_S)


def embed(x) -> np.ndarray:
    """Im(O) coordinates ``(..., 7)`` -> full octonion coordinates ``(..., 8)``."""
    x = np.asarray(x)
    out = np.zeros(x.shape[:-1] + (8,), dtype=np.result_type(x, np.float64))
    out[..., 1:] = x
    return out


def basis_element(name: str) -> np.ndarray:
    """Signed basis element from a symbol such as ``"-il"``."""
    sign = -1.0 if name.startswith("-") else 1.0
    e = np.zeros(8)
    e[BASIS_NAMES.index(name.lstrip("-+"))] = sign
    return e


def _symbol(v: np.ndarray) -> str:
    nz = np.flatnonzero(v)
    if len(nz) == 0:
        return "0"
    (c,) = nz
    return ("-" if v[c] < 0 else "") + BASIS_NAMES[c]


def multiplication_table() -> list[list[str]]:
    """7x7 table of products of imaginary basis symbols (row times column)."""
    return [[_symbol(MUL_SIGN[a, b] * np.eye(8)[MUL_INDEX[a, b]]) for b in range(1, 8)] for a in range(1, 8)]


def cross_table() -> list[list[str]]:
    return [[_symbol(np.concatenate([[0.0], CROSS_TENSOR[a, b]])) for b in range(7)] for a in range(7)]


# --- G2 ----------------------------------------------------------------------

# quarter turn in the (l, il) plane, identity elsewhere; a sample A for the J^A flow.
BLOCK_A = np.eye(7)
BLOCK_A[3, 3] = 0.0
BLOCK_A[4, 4] = 0.0
BLOCK_A[3, 4] = 1.0
BLOCK_A[4, 3] = -1.0


def is_g2_automorphism(m, tol: float = 1e-10) -> bool:
    """True iff the 7x7 matrix ``m`` (acting on Im(O), fixing 1) is a G2 element.

    Checks orthogonality and ``m(xy) = m(x) m(y)`` on all 49 ordered pairs of
    imaginary basis elements; by bilinearity that is exhaustive.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (7, 7):
        raise InvalidInputError("expected a 7x7 matrix")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError("matrix has non-finite entries")
    if np.max(np.abs(m.T @ m - np.eye(7))) > tol:
        return False
    full = np.eye(8)
    full[1:, 1:] = m
    e = np.eye(8)
    for a in range(1, 8):
        for b in range(1, 8):
            lhs = full @ oct_mul(e[a], e[b])
            rhs = oct_mul(full @ e[a], full @ e[b])
            if np.linalg.norm(lhs - rhs) > tol:
                return False
    return True


def g2_from_triple(u1, u2, u3) -> np.ndarray:
    """G2 element sending (i, j, l) to the given triple.

    ``u1, u2`` must be orthonormal and ``u3`` a unit vector orthogonal to
    ``u1, u2`` and ``u1 x u2``. Columns are images of (i, j, k, l, il, jl, kl).
    """
    u1, u2, u3 = (np.asarray(v, dtype=float) for v in (u1, u2, u3))
    u12 = oct_mul(embed(u1), embed(u2))[1:]
    cols = [
        u1,
        u2,
        u12,
        u3,
        oct_mul(embed(u1), embed(u3))[1:],
        oct_mul(embed(u2), embed(u3))[1:],
        oct_mul(embed(u12), embed(u3))[1:],
    ]
    return np.column_stack(cols)


def random_g2(rng: np.random.Generator) -> np.ndarray:
    """A random element of G2 as a 7x7 orthogonal matrix."""

    def unit_orthogonal_to(vs):
        v = rng.standard_normal(7)
        for w in vs:
            v -= np.dot(v, w) * w
        return v / np.linalg.norm(v)

    u1 = unit_orthogonal_to([])
    u2 = unit_orthogonal_to([u1])
    u3 = unit_orthogonal_to([u1, u2, cross(u1, u2)])
    return g2_from_triple(u1, u2, u3)


# --- scalar convenience type -------------------------------------------------


@dataclass(frozen=True)
class Octonion:
    """A single (possibly complexified) octonion.

    Thin value wrapper around a length-8 coefficient vector; use the array
    functions above for anything performance sensitive.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.result_type(np.asarray(self.coeffs), np.float64))
        if c.shape != (8,):
            raise InvalidInputError("an octonion has 8 coefficients")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_symbols(cls, **terms) -> "Octonion":
        """``Octonion.from_symbols(one=2, jl=3)`` == 2 + 3 jl."""
        c = np.zeros(8, dtype=complex if any(isinstance(v, complex) for v in terms.values()) else float)
        for name, value in terms.items():
            c[BASIS_NAMES.index("1" if name == "one" else name)] += value
        return cls(c)

    @classmethod
    def imaginary(cls, v) -> "Octonion":
        return cls(embed(v))

    @property
    def real(self):
        return self.coeffs[0]

    @property
    def imag(self) -> np.ndarray:
        return self.coeffs[1:]

    def __mul__(self, other):
        if isinstance(other, Octonion):
            return Octonion(oct_mul(self.coeffs, other.coeffs))
        return Octonion(self.coeffs * other)

    def __rmul__(self, other):
        return Octonion(self.coeffs * other)

    def __add__(self, other: "Octonion") -> "Octonion":
        return Octonion(self.coeffs + other.coeffs)

    def __sub__(self, other: "Octonion") -> "Octonion":
        return Octonion(self.coeffs - other.coeffs)

    def __neg__(self) -> "Octonion":
        return Octonion(-self.coeffs)

    def conj(self) -> "Octonion":
        return Octonion(oct_conj(self.coeffs))

    def complex_conj(self) -> "Octonion":
        return Octonion(np.conj(self.coeffs))

    def norm(self) -> float:
        return float(norm(self.coeffs))

    def isclose(self, other: "Octonion", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.coeffs, other.coeffs, rtol=0.0, atol=atol))
