import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from g2flow.curves import CurveState, circle, helix, line, perturbed_circle, reparameterize
from g2flow.errors import InvalidInputError, NonUnitSpeedError
from g2flow.stencils import CLAMPED


def test_state_validation():
    with pytest.raises(InvalidInputError):
        CurveState(np.zeros((4, 7)), 0.1)
    with pytest.raises(InvalidInputError):
        CurveState(np.zeros((16, 6)), 0.1)
    with pytest.raises(InvalidInputError):
        CurveState(np.full((16, 7), np.nan), 0.1)
    with pytest.raises(InvalidInputError):
        CurveState(np.zeros((16, 7)), 0.0)


def test_helix_pitch_and_speed():
    c = helix(256, 1.0, 1.0)
    assert c.speed_error() < 1e-8
    np.testing.assert_allclose(c.period_shift[2], 2 * np.pi)
    np.testing.assert_allclose(c.total_length(), 2 * np.pi * np.sqrt(2), rtol=1e-4)


def test_line_is_clamped():
    c = line(32)
    assert c.boundary == CLAMPED
    assert c.speed_error() < 1e-12


def test_non_unit_speed_detected():
    c = circle(128)
    stretched = CurveState(2 * c.points, c.ds)
    with pytest.raises(NonUnitSpeedError):
        stretched.check_unit_speed()


def test_default_speed_tolerance_scales_with_grid():
    c = circle(64)
    assert c.speed_tolerance() == pytest.approx(1e-3 + c.ds**2)
    assert c.speed_tolerance(1e-6) == 1e-6


@settings(max_examples=10)
@given(st.integers(0, 1000))
def test_perturbed_circle_unit_speed_and_seeded(seed):
    a = perturbed_circle(128, seed=seed)
    b = perturbed_circle(128, seed=seed)
    assert np.array_equal(a.points, b.points)
    a.check_unit_speed()
    chords = np.linalg.norm(np.diff(np.vstack([a.points, a.points[:1]]), axis=0), axis=1)
    # equal arclength steps give chords ds - k^2 ds^3 / 24 + ..., so only O(ds^3) spread
    assert np.ptp(chords) < a.ds**3


def test_quaternionic_perturbation_stays_in_imh():
    c = perturbed_circle(64, directions=("i", "j", "k"))
    assert np.all(c.points[:, 3:] == 0)
    with pytest.raises(InvalidInputError):
        perturbed_circle(64, directions=())


def test_reparameterize_restores_uniform_spacing():
    x = 2 * np.pi * np.arange(128) / 128
    theta = x + 0.3 * np.sin(x)
    pts = np.zeros((128, 7))
    pts[:, 0], pts[:, 1] = np.cos(theta), np.sin(theta)
    r = reparameterize(CurveState(pts, 2 * np.pi / 128), 256)
    assert r.n == 256
    np.testing.assert_allclose(r.ds, 2 * np.pi / 256, rtol=1e-5)
    assert np.max(np.abs(np.linalg.norm(r.points, axis=1) - 1)) < 1e-5
    ang = np.unwrap(np.arctan2(r.points[:, 1], r.points[:, 0]))
    assert np.ptp(np.diff(ang)) < 1e-4
