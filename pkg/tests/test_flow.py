import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from g2flow.curves import CurveState, circle, helix, line, perturbed_circle, random_curve
from g2flow.errors import BlowUpError, InvalidInputError
from g2flow.flow import (
    FlowConfig,
    SphereMapState,
    best_rigid_translation_error,
    check_orthogonal,
    conservation_report,
    constant_map,
    equivalence_defect,
    evolve,
    great_circle,
    rhs_binormal,
    rhs_modified,
    rhs_modified_s6,
    rhs_schrodinger_s6,
)
from g2flow.frame import build_g2_frame
from g2flow.octonion import BLOCK_A, random_g2

from oracles import circle_translation, helix_curvature, lsq_order

K = np.eye(7)[2]


def test_line_velocity_zero():
    assert np.max(np.abs(rhs_binormal(line(32)))) < 1e-12


def test_circle_moves_along_k():
    np.testing.assert_allclose(rhs_binormal(circle(256)), np.tile(K, (256, 1)), atol=1e-6)


def test_helix_velocity_is_minus_k1_i5():
    c = helix(256)
    v = rhs_binormal(c)
    fr = build_g2_frame(c)
    np.testing.assert_allclose(np.linalg.norm(v, axis=1), helix_curvature(1, 1), atol=1e-7)
    np.testing.assert_allclose(v, -fr.k1[:, None] * fr.vector("I5"), atol=1e-7)
    # screw motion: the axial component is constant
    assert np.ptp(v[:, 2]) < 1e-7


def test_sphere_fixed_points():
    assert np.max(np.abs(rhs_schrodinger_s6(constant_map(16)))) == 0
    u = great_circle(128, 2.0)
    # roundoff in the second difference is amplified by 1 / ds^2
    assert np.max(np.abs(rhs_schrodinger_s6(u))) < 1e-14 / u.ds**2


@settings(max_examples=20)
@given(st.integers(0, 10_000))
def test_tangency(seed):
    u = SphereMapState.from_curve(random_curve(64, seed))
    v = rhs_schrodinger_s6(u)
    assert np.max(np.abs(np.sum(v * u.points, axis=1))) < 1e-12 * (1 + np.max(np.abs(v)))


def test_sphere_state_validated():
    with pytest.raises(InvalidInputError):
        SphereMapState(np.ones((16, 7)), 0.1)


def test_modified_rhs():
    c = perturbed_circle(128)
    base = rhs_binormal(c)
    np.testing.assert_array_equal(rhs_modified(c, np.eye(7)), base)
    g = random_g2(np.random.default_rng(3))
    np.testing.assert_allclose(rhs_modified(c, g), base, atol=1e-12)
    # A only mixes l and il: circles in span{i, j} or span{i, l} do not see it, one in span{j, l} does
    circ = circle(128, plane=("j", "l"))
    assert np.max(np.abs(rhs_modified(circ, BLOCK_A) - rhs_binormal(circ))) > 0.5
    with pytest.raises(InvalidInputError):
        rhs_modified(c, 2 * np.eye(7))
    u = great_circle(64)
    np.testing.assert_allclose(rhs_modified_s6(u, g), rhs_schrodinger_s6(u), atol=1e-12)


def test_check_orthogonal_rejects():
    with pytest.raises(InvalidInputError):
        check_orthogonal(np.eye(6))
    with pytest.raises(InvalidInputError):
        check_orthogonal(np.full((7, 7), np.inf))


def test_circle_translation_short_run():
    c = circle(128)
    traj = evolve(c, FlowConfig(dt=2e-4, t_end=0.2, n_outputs=4))
    assert len(traj) == 5
    np.testing.assert_allclose(traj.final.points, circle_translation(c.points, 0.2), atol=1e-6)
    assert best_rigid_translation_error(traj, K) < 1e-6
    rep = conservation_report(traj).maxima()
    assert rep["arclength_drift_max"] < 1e-12


def test_great_circle_fixed_point():
    u = great_circle(128)
    traj = evolve(u, FlowConfig(dt=0.2 * u.ds**2, t_end=0.05))
    assert np.max(np.abs(traj.final.points - u.points)) < 1e-12
    assert conservation_report(traj).maxima()["energy_drift_max"] < 1e-12


def test_rk4_convergence_in_dt():
    c = perturbed_circle(48)
    base = 0.2 * c.ds**2
    t_end = 40 * base
    ref = evolve(c, FlowConfig(dt=base / 16, t_end=t_end)).final.points
    errs = [np.max(np.abs(evolve(c, FlowConfig(dt=h, t_end=t_end)).final.points - ref)) for h in (base, base / 2)]
    assert 10 < errs[0] / errs[1] < 20


def test_midpoint_is_second_order():
    c = perturbed_circle(48)
    base = 0.1 * c.ds**2
    t_end = 40 * base
    ref = evolve(c, FlowConfig(dt=base / 16, t_end=t_end)).final.points
    errs = [np.max(np.abs(evolve(c, FlowConfig(dt=h, t_end=t_end, scheme="midpoint")).final.points - ref)) for h in (base, base / 2)]
    assert 3 < errs[0] / errs[1] < 5


def test_g2_equivariance():
    c = perturbed_circle(64)
    g = random_g2(np.random.default_rng(11))
    cfg = FlowConfig(dt=0.2 * c.ds**2, t_end=0.01)
    a = evolve(c, cfg).final.points @ g.T
    b = evolve(CurveState(c.points @ g.T, c.ds), cfg).final.points
    assert np.max(np.abs(a - b)) < 1e-12


def test_equivalence_defect_converges():
    for seed in (3, 4):
        errs, hs = [], []
        for n in (64, 128, 256):
            c = random_curve(n, seed)
            errs.append(equivalence_defect(c))
            hs.append(c.ds)
        assert lsq_order(errs, hs) >= 1.8


def test_cfl_and_blowup_guards():
    c = circle(64)
    with pytest.raises(InvalidInputError):
        evolve(c, FlowConfig(dt=1.0, t_end=1.0))
    with pytest.raises(BlowUpError):
        evolve(c, FlowConfig(dt=0.2 * c.ds**2, t_end=0.01, blowup_norm=0.5))
    with pytest.raises(InvalidInputError):
        FlowConfig(dt=-1, t_end=1)
    with pytest.raises(InvalidInputError):
        FlowConfig(dt=1e-3, t_end=1, variant="modified")
    with pytest.raises(InvalidInputError):
        FlowConfig(dt=1e-3, t_end=1, scheme="euler")


def test_clamped_endpoints_frozen():
    s = np.linspace(0, 1, 41)
    pts = np.zeros((41, 7))
    pts[:, 0], pts[:, 1] = np.cos(s), np.sin(s)
    c = CurveState(pts, s[1], "clamped")
    traj = evolve(c, FlowConfig(dt=0.2 * c.ds**2, t_end=0.01))
    np.testing.assert_array_equal(traj.final.points[[0, -1]], pts[[0, -1]])


def test_u_flow_energy_drift_small():
    u = SphereMapState.from_curve(perturbed_circle(128))
    traj = evolve(u, FlowConfig(dt=0.2 * u.ds**2, t_end=0.05, n_outputs=5))
    rep = conservation_report(traj).maxima()
    assert rep["energy_drift_max"] < 1e-5
    assert rep["sphere_error_max"] < 1e-12


def test_speed_error_vanishes_under_refinement():
    errs = []
    for n in (64, 128):
        c = perturbed_circle(n)
        traj = evolve(c, FlowConfig(dt=0.2 * c.ds**2, t_end=0.02))
        errs.append(abs(traj.final.speed_error() - c.speed_error()))
    assert errs[1] < errs[0]


def test_deterministic():
    c = perturbed_circle(64)
    cfg = FlowConfig(dt=0.2 * c.ds**2, t_end=0.01)
    assert np.array_equal(evolve(c, cfg).final.points, evolve(c, cfg).final.points)
