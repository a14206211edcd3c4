import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from g2flow.errors import InvalidInputError
from g2flow.octonion import (
    CROSS_TENSOR,
    IM_NAMES,
    BLOCK_A,
    Octonion,
    basis_element,
    cross,
    cross_table,
    embed,
    g2_from_triple,
    inner,
    is_g2_automorphism,
    multiplication_table,
    norm,
    oct_conj,
    oct_mul,
    random_g2,
)

from oracles import EXPECTED_PRODUCTS, pair_cross, pair_mul

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
oct8 = arrays(np.float64, 8, elements=finite)
im7 = arrays(np.float64, 7, elements=finite)


def sym(name):
    return Octonion(basis_element(name))


def test_table_matches_expected_products():
    assert multiplication_table() == EXPECTED_PRODUCTS


def test_table_matches_quaternion_pair_oracle():
    rng = np.random.default_rng(0)
    x, y = rng.standard_normal((2, 200, 8))
    ref = np.array([pair_mul(a, b) for a, b in zip(x, y)])
    assert np.max(np.abs(oct_mul(x, y) - ref)) < 1e-13


@pytest.mark.parametrize(
    "a,b,expected",
    [("i", "j", "k"), ("il", "jl", "-k"), ("l", "i", "-il"), ("kl", "kl", "-1")],
)
def test_basis_products(a, b, expected):
    assert (sym(a) * sym(b)).isclose(sym(expected), atol=0)


def test_conjugation_examples():
    assert sym("1").conj().isclose(sym("1"))
    assert sym("i").conj().isclose(sym("-i"))
    x = Octonion.from_symbols(one=3, i=2, l=-1)
    assert x.conj().isclose(Octonion.from_symbols(one=3, i=-2, l=1))


def test_cross_examples():
    e = {n: basis_element(n)[1:] for n in IM_NAMES}
    np.testing.assert_array_equal(cross(e["i"], e["j"]), e["k"])
    np.testing.assert_array_equal(cross(e["l"], e["i"]), -e["il"])


def test_cross_table_antisymmetric_and_imaginary():
    t = cross_table()
    for a in range(7):
        assert t[a][a] == "0"
        for b in range(7):
            if a != b:
                assert t[a][b].lstrip("-") != "1"
                assert t[a][b] == (t[b][a][1:] if t[b][a].startswith("-") else "-" + t[b][a])
    assert np.array_equal(CROSS_TENSOR, -np.swapaxes(CROSS_TENSOR, 0, 1))


def test_inner_examples():
    assert inner(basis_element("i"), basis_element("i")) == 1
    assert inner(basis_element("i"), basis_element("j")) == 0
    assert inner(Octonion.from_symbols(one=3, i=1).coeffs, basis_element("1")) == 3


def test_non_associativity_witness():
    i, j, l = sym("i"), sym("j"), sym("l")
    assert ((i * j) * l).isclose(sym("kl"))
    assert (i * (j * l)).isclose(sym("-kl"))


@given(im7, im7)
def test_cross_against_oracle(x, y):
    assert np.allclose(cross(x, y), pair_cross(x, y), atol=1e-10)


@given(im7, im7)
def test_cross_orthogonal_and_antisymmetric(x, y):
    c = cross(x, y)
    scale = 1 + np.linalg.norm(x) * np.linalg.norm(y) * (1 + np.linalg.norm(x) + np.linalg.norm(y))
    assert abs(inner(c, x)) <= 1e-12 * scale
    assert abs(inner(c, y)) <= 1e-12 * scale
    np.testing.assert_allclose(cross(y, x), -c, atol=1e-12 * scale)


@given(arrays(np.float64, 3, elements=finite), arrays(np.float64, 3, elements=finite))
def test_cross_restricts_to_r3(a, b):
    x, y = np.zeros(7), np.zeros(7)
    x[:3], y[:3] = a, b
    c = cross(x, y)
    np.testing.assert_allclose(c[:3], np.cross(a, b), atol=1e-12 * (1 + np.abs(a).sum() * np.abs(b).sum()))
    assert np.all(c[3:] == 0)


@given(oct8, oct8)
def test_composition(x, y):
    assert abs(norm(oct_mul(x, y)) - norm(x) * norm(y)) <= 1e-12 * (norm(x) * norm(y) + 1e-300)


@given(oct8, oct8)
def test_conjugation_anti_automorphism(x, y):
    np.testing.assert_allclose(oct_conj(oct_mul(x, y)), oct_mul(oct_conj(y), oct_conj(x)), atol=1e-11)
    np.testing.assert_array_equal(oct_conj(oct_conj(x)), x)


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_complex_conjugation_distributes(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    y = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    np.testing.assert_allclose(np.conj(oct_mul(x, y)), oct_mul(np.conj(x), np.conj(y)), atol=1e-12)


def test_alternativity_bulk():
    rng = np.random.default_rng(1)
    x, y = rng.standard_normal((2, 10_000, 8))
    scale = norm(x) ** 2 * norm(y)
    left = oct_mul(x, oct_mul(x, y)) - oct_mul(oct_mul(x, x), y)
    right = oct_mul(oct_mul(y, x), x) - oct_mul(y, oct_mul(x, x))
    assert np.max(np.abs(left).max(axis=1) / scale) < 1e-12
    assert np.max(np.abs(right).max(axis=1) / scale) < 1e-12


def test_embed_and_imaginary_part():
    v = np.arange(1.0, 8.0)
    e = embed(v)
    assert e[0] == 0 and np.array_equal(e[1:], v)
    assert Octonion.imaginary(v).real == 0


def test_octonion_rejects_bad_shape():
    with pytest.raises(InvalidInputError):
        Octonion(np.zeros(7))


def test_g2_examples():
    assert is_g2_automorphism(np.eye(7))
    assert not is_g2_automorphism(BLOCK_A)
    assert not is_g2_automorphism(np.diag([-1.0, 1, 1, 1, 1, 1, 1]))
    with pytest.raises(InvalidInputError):
        is_g2_automorphism(np.full((7, 7), np.nan))


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1))
def test_random_g2_preserves_products(seed):
    g = random_g2(np.random.default_rng(seed))
    assert is_g2_automorphism(g)
    rng = np.random.default_rng(seed + 1)
    x, y = rng.standard_normal((2, 7))
    np.testing.assert_allclose(cross(g @ x, g @ y), g @ cross(x, y), atol=1e-12)


def test_g2_from_standard_triple_is_identity():
    e = np.eye(7)
    np.testing.assert_allclose(g2_from_triple(e[0], e[1], e[3]), np.eye(7), atol=0)
