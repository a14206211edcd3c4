import numpy as np
import pytest

from g2flow.curves import circle, helix, perturbed_circle
from g2flow.errors import DegenerateRotationError, InvalidInputError, SingularDataError
from g2flow.flow import FlowConfig, evolve, rhs_binormal
from g2flow.frame import HasimotoFields, build_g2_frame, curve_to_fields
from g2flow.stencils import PERIODIC
from g2flow.surface import (
    SecondFundamentalForm,
    associative_plane_check,
    embedding_second_fundamental_form,
    first_fundamental_form,
    rotate_frame,
    rotated_closed_form,
    second_fundamental_form,
)

from oracles import helix_curvature, lsq_order, translating_circle_surface


def swept_surface(curve, dt):
    """The curve at -dt, 0, +dt under the binormal flow, by fine RK4 in both directions."""

    def run(sign):
        m = int(np.ceil(dt / (0.1 * curve.ds**2)))
        h = sign * dt / m
        y = curve.points.copy()

        def g(x):
            return rhs_binormal(curve.with_points(x))

        for _ in range(m):
            k1 = g(y)
            k2 = g(y + h / 2 * k1)
            k3 = g(y + h / 2 * k2)
            k4 = g(y + h * k3)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        return y

    return np.stack([run(-1), curve.points, run(1)])


def test_first_fundamental_form_helix():
    f = curve_to_fields(helix(256))
    g_ss, g_tt, deg = first_fundamental_form(f)
    assert np.all(g_ss == 1)
    np.testing.assert_allclose(g_tt, helix_curvature(1, 1) ** 2, atol=1e-8)
    assert not deg.any()


def test_closed_form_entries():
    f = curve_to_fields(perturbed_circle(128))
    h = second_fundamental_form(f)
    assert h.symmetry_error() == 0
    np.testing.assert_allclose(h.entry(3, 1, 1), np.sqrt(2) * np.abs(f.phi1), rtol=1e-14)
    np.testing.assert_array_equal(h.entry(5, 1, 2), -np.abs(f.phi2))
    for a in (4, 6, 7):
        assert np.all(h.entry(a, 1, 1) == 0) and np.all(h.entry(a, 1, 2) == 0)
    assert not h.limit_mask.any()
    assert set(h.columns()) == {"h3_11", "h3_12", "h3_22", "h4_22", "h5_12", "h5_22", "h6_22", "h7_22"}


def test_real_constant_phi1_has_no_mixed_term():
    n = 64
    phi = np.zeros((n, 3), dtype=complex)
    phi[:, 0] = 0.7
    f = HasimotoFields(phi, 0.1, PERIODIC, np.zeros(3))
    h = second_fundamental_form(f)
    assert np.max(np.abs(h.entry(3, 1, 2))) < 1e-14


@pytest.mark.parametrize(
    "curve", [circle(128), helix(128), perturbed_circle(128, directions=("i", "j", "k"))], ids=["circle", "helix", "quat"]
)
def test_quaternionic_data_has_no_higher_normal_components(curve):
    h = second_fundamental_form(curve_to_fields(curve))
    assert np.max(np.abs(h.h[:, 1:])) < 1e-8
    assert h.limit_mask.all()


def test_synthetic_phi3_zero_rotation():
    n = 128
    s = 2 * np.pi / n * np.arange(n)
    phi = np.zeros((n, 3), dtype=complex)
    phi[:, 0] = (1 + 0.2 * np.cos(s)) * np.exp(1j * 0.3 * np.sin(s))
    phi[:, 1] = 0.5 + 0.1 * np.sin(2 * s)
    f = HasimotoFields(phi, s[1], PERIODIC, np.zeros(3))
    h = second_fundamental_form(f)
    r = rotate_frame(h, f)
    assert np.max(np.abs(r.entry(6, 2, 2))) < 1e-10
    assert np.max(np.abs(r.entry(7, 2, 2))) < 1e-10


def test_rotation_matches_closed_form_and_is_orthogonal():
    f = curve_to_fields(perturbed_circle(128))
    h = second_fundamental_form(f)
    r = rotate_frame(h, f)
    assert r.rotated and r.theta.shape == (128,)
    t4, t7 = rotated_closed_form(h, f)
    np.testing.assert_allclose(r.entry(4, 2, 2), t4, atol=1e-12)
    np.testing.assert_allclose(r.entry(7, 2, 2), t7, atol=1e-12)
    np.testing.assert_allclose(r.frobenius(), h.frobenius(), rtol=1e-13)
    for a in (4, 7):
        assert np.all(r.entry(a, 1, 1) == 0) and np.all(r.entry(a, 1, 2) == 0)


def test_rotation_undefined_on_circle():
    f = curve_to_fields(circle(64))
    with pytest.raises(DegenerateRotationError):
        rotate_frame(second_fundamental_form(f), f)


def test_singular_phi1_rejected():
    phi = np.zeros((16, 3), dtype=complex)
    with pytest.raises(SingularDataError):
        second_fundamental_form(HasimotoFields(phi, 0.1, PERIODIC, np.zeros(3)))


def test_form_validated():
    with pytest.raises(InvalidInputError):
        SecondFundamentalForm(np.zeros((4, 5, 2)))
    with pytest.raises(InvalidInputError):
        SecondFundamentalForm(np.full((4, 5, 2, 2), np.nan))


def test_translating_circle_oracle_second_order():
    errs, hs = [], []
    for n in (32, 64, 128):
        sig, ds = translating_circle_surface(n, dt=2 * np.pi / n)
        fr = build_g2_frame(circle(n))
        o = embedding_second_fundamental_form(sig, ds, ds, fr)
        h = second_fundamental_form(curve_to_fields(circle(n)))
        errs.append(np.max(np.abs(o.entry(3, 1, 1) - h.entry(3, 1, 1))))
        hs.append(ds)
        assert np.max(np.abs(o.h[:, 1:])) < 1e-12
    assert lsq_order(errs, hs) > 1.8


def test_embedding_oracle_on_flowing_curve():
    errs, hs, mixed = [], [], []
    for n in (64, 128):
        c = perturbed_circle(n)
        sig = swept_surface(c, c.ds)
        o = embedding_second_fundamental_form(sig, c.ds, c.ds, build_g2_frame(c))
        h = second_fundamental_form(curve_to_fields(c))
        errs.append(np.max(np.abs(o.entry(3, 1, 1) - h.entry(3, 1, 1))))
        hs.append(c.ds)
        a, b = h.entry(3, 1, 2), o.entry(3, 1, 2)
        mixed.append((np.max(np.abs(a - np.sqrt(2) * b)), np.max(np.abs(a - b))))
    assert lsq_order(errs, hs) > 1.8
    # the closed-form mixed term converges to sqrt(2) times the geometric one (kept literal, see notes)
    assert mixed[1][0] < mixed[0][0] / 2
    assert min(mixed[0][1], mixed[1][1]) > 0.04


def test_associative_plane():
    for c in (circle(64), helix(64)):
        traj = evolve(c, FlowConfig(dt=0.2 * c.ds**2, t_end=0.05, n_outputs=3))
        rep = associative_plane_check(traj)
        assert rep.residual <= 1e-8 and rep.associativity_defect <= 1e-8 and rep.associative
    c = perturbed_circle(64)
    rep = associative_plane_check(evolve(c, FlowConfig(dt=0.2 * c.ds**2, t_end=0.01, n_outputs=2)))
    assert not rep.associative and rep.residual > 1e-3
    assert set(rep.as_dict()) == {"residual", "associativity_defect", "associative", "insufficient_data"}


def test_associative_plane_insufficient():
    assert associative_plane_check(np.ones((1, 7))).insufficient_data
    pts = np.zeros((10, 7))
    pts[:, 0] = np.arange(10)
    rep = associative_plane_check(pts)
    assert rep.insufficient_data and not rep.associative
