import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from g2flow.curves import CurveState, circle, helix, line, perturbed_circle
from g2flow.errors import InvalidInputError, VanishingCurvatureError
from g2flow.frame import (
    FRAME_ORDER,
    I1,
    I2,
    I3,
    I4,
    I5,
    I6,
    I7,
    g2_shape_error,
    build_g2_frame,
    complex_frenet_matrix,
    complex_frenet_residual,
    complexify_frame,
    frenet_matrix,
    frenet_residual,
    hasimoto_fields,
    table_errors,
)
from g2flow.octonion import cross, random_g2

from oracles import helix_curvature, helix_torsion, lsq_order, r3_frenet


def _all(curve):
    fr = build_g2_frame(curve)
    cf = complexify_frame(fr)
    return fr, cf, hasimoto_fields(fr, cf)


@pytest.fixture(scope="module")
def helix512():
    return _all(helix(512))


@pytest.fixture(scope="module")
def bumpy():
    return _all(perturbed_circle(256))


def test_circle_example():
    fr, _, f = _all(circle(256))
    np.testing.assert_allclose(fr.k1, 1.0, atol=1e-7)
    np.testing.assert_allclose(fr.vector("I5"), np.tile(-np.eye(7)[2], (256, 1)), atol=1e-12)
    assert np.all(fr.degenerate) and np.all(fr.kappa2 == 0)
    np.testing.assert_allclose(fr.rho1, 0.0, atol=1e-12)
    assert np.all(f.phi2 == 0)


def test_helix_against_r3_frenet(helix512):
    fr, _, f = helix512
    np.testing.assert_allclose(fr.k1, helix_curvature(1, 1), atol=1e-9)
    np.testing.assert_allclose(fr.rho1, -helix_torsion(1, 1), atol=1e-9)
    np.testing.assert_allclose(np.abs(f.phi1), 0.5 / np.sqrt(2), atol=1e-9)
    slope = np.polyfit(f.s, np.unwrap(np.angle(f.phi1)), 1)[0]
    assert slope == pytest.approx(-0.5, abs=1e-8)


def test_imh_curve_torsion_matches_r3_oracle():
    c = perturbed_circle(256, directions=("i", "j", "k"))
    fr = build_g2_frame(c)
    kappa, tau = r3_frenet(c.points[:, :3], c.n * c.ds)
    assert np.all(fr.kappa2 == 0)
    np.testing.assert_allclose(fr.k1, kappa, atol=1e-5)
    np.testing.assert_allclose(fr.rho1, -tau, atol=1e-4)


@pytest.mark.parametrize("name", ["helix", "bumpy"])
def test_frame_orthonormal_and_closed(name, request):
    fr = request.getfixturevalue("helix512" if name == "helix" else "bumpy")[0]
    assert fr.gram_error() < 1e-8
    assert fr.closure_error() < 1e-10
    f = fr.frame
    for a, b, c in [(I1, I4, I5), (I1, I2, I3), (I2, I4, I6), (I3, I4, I7)]:
        assert np.max(np.abs(cross(f[:, a], f[:, b]) - f[:, c])) < 1e-10


def test_constraints_converge_on_generic_curve():
    errs, hs = [], []
    for n in (128, 256, 512):
        fr = build_g2_frame(perturbed_circle(n))
        errs.append(max(fr.constraint_errors()))
        hs.append(fr.ds)
    assert errs[-1] < 1e-6
    assert all(e0 / e1 > 3.5 for e0, e1 in zip(errs[:-1], errs[1:]))


def test_frenet_residual_converges_on_generic_curve():
    errs, cerrs, hs = [], [], []
    for n in (128, 256, 512):
        fr, cf, f = _all(perturbed_circle(n))
        errs.append(frenet_residual(fr).max_residual)
        cerrs.append(complex_frenet_residual(cf, f).max_residual)
        hs.append(fr.ds)
    assert lsq_order(errs, hs) > 1.8
    assert lsq_order(cerrs, hs) > 1.8


def test_frenet_matrix_antisymmetric(bumpy):
    fr = bumpy[0]
    assert frenet_residual(fr).antisymmetry == 0.0
    m = frenet_matrix(*(np.ones(3) * v for v in range(1, 9)))
    np.testing.assert_array_equal(m, -np.transpose(m, (0, 2, 1)))


def test_residual_is_g2_equivariant():
    c = perturbed_circle(128)
    g = random_g2(np.random.default_rng(5))
    moved = CurveState(c.points @ g.T, c.ds, c.boundary)
    a = build_g2_frame(c, fallback_seed=np.eye(7)[3])
    b = build_g2_frame(moved, fallback_seed=g @ np.eye(7)[3])
    assert frenet_residual(b).max_residual == pytest.approx(frenet_residual(a).max_residual, rel=1e-6)
    np.testing.assert_allclose(b.kappa2, a.kappa2, atol=1e-10)


def test_line_rejected():
    with pytest.raises(VanishingCurvatureError):
        build_g2_frame(line(64))


def test_fallback_seed_validated():
    with pytest.raises(InvalidInputError):
        build_g2_frame(circle(64), fallback_seed=1.0)


@pytest.mark.parametrize("name", ["helix", "bumpy"])
def test_complex_relations(name, request):
    fr, cf, f = request.getfixturevalue("helix512" if name == "helix" else "bumpy")
    errs = cf.relation_errors()
    assert max(errs.values()) < 1e-8, errs
    assert cf.r[0] == pytest.approx(1 / np.sqrt(2)) and cf.q[0] == pytest.approx(1 / np.sqrt(2))
    assert cf.p[0] == pytest.approx(1 / np.sqrt(2))
    np.testing.assert_allclose(np.abs(f.phi1), fr.k1 / np.sqrt(2), atol=1e-12)
    np.testing.assert_allclose(np.abs(f.phi2), fr.kappa2, atol=1e-12)


@pytest.mark.parametrize("name", ["helix", "bumpy"])
def test_complex_tables(name, request):
    _, cf, _ = request.getfixturevalue("helix512" if name == "helix" else "bumpy")
    mul, crs = table_errors(cf)
    assert mul < 1e-10 and crs < 1e-10


_GAUGE_FRAME = build_g2_frame(perturbed_circle(256))


@settings(max_examples=20)
@given(st.integers(0, 255))
def test_gauge_shift_changes_only_phase(start):
    fr = _GAUGE_FRAME
    f0 = hasimoto_fields(fr, complexify_frame(fr))
    f1 = hasimoto_fields(fr, complexify_frame(fr, start_index=start))
    np.testing.assert_allclose(np.abs(f1.phi), np.abs(f0.phi), atol=1e-13)
    ratio = f1.phi1 / f0.phi1
    assert np.ptp(ratio.real) < 1e-12 and np.ptp(ratio.imag) < 1e-12


@given(st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False), min_size=3, max_size=3))
def test_g2_shape_exact(phis):
    m = complex_frenet_matrix(*(np.array([p]) for p in phis))
    assert g2_shape_error(m) < 1e-14


def test_frame_order_labels():
    assert FRAME_ORDER[I4] == "I4" and FRAME_ORDER[I7] == "I7"
    assert (I1, I2, I3, I5, I6) == (1, 2, 3, 4, 5)


def test_frame_is_deterministic():
    a = build_g2_frame(perturbed_circle(128))
    b = build_g2_frame(perturbed_circle(128))
    assert np.array_equal(a.frame, b.frame) and np.array_equal(a.rho2, b.rho2)
