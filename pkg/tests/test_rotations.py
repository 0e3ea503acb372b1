import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blimpsim.rotations import (
    cross3,
    heading_pitch_of,
    quat_conjugate,
    quat_from_axis_angle,
    quat_from_euler_xyz,
    quat_multiply,
    quat_normalize,
    quat_rotate,
    quat_rotate_inverse,
    quat_to_euler_xyz,
    quat_to_matrix,
    wrap_angle,
)

finite = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)
vec3 = st.tuples(finite, finite, finite)
quat4 = st.tuples(finite, finite, finite, finite).filter(
    lambda q: np.linalg.norm(q) > 1e-3
)


def test_cross3_matches_numpy(rng):
    a = rng.normal(size=(50, 3))
    b = rng.normal(size=(50, 3))
    np.testing.assert_allclose(cross3(a, b), np.cross(a, b), atol=1e-14)


@settings(max_examples=200)
@given(quat4, vec3)
def test_rotate_preserves_norm(q, v):
    q = quat_normalize(np.array(q, dtype=float))
    v = np.array(v, dtype=float)
    rotated = quat_rotate(q, v)
    assert np.linalg.norm(rotated) == pytest.approx(np.linalg.norm(v),
                                                    abs=1e-9)


@settings(max_examples=200)
@given(quat4, vec3)
def test_rotate_inverse_round_trip(q, v):
    q = quat_normalize(np.array(q, dtype=float))
    v = np.array(v, dtype=float)
    np.testing.assert_allclose(
        quat_rotate_inverse(q, quat_rotate(q, v)), v, atol=1e-9
    )


@settings(max_examples=200)
@given(quat4, quat4, vec3)
def test_multiply_composes_rotations(q, r, v):
    q = quat_normalize(np.array(q, dtype=float))
    r = quat_normalize(np.array(r, dtype=float))
    v = np.array(v, dtype=float)
    np.testing.assert_allclose(
        quat_rotate(quat_multiply(q, r), v),
        quat_rotate(q, quat_rotate(r, v)),
        atol=1e-9,
    )


def test_matrix_agrees_with_rotate(rng):
    q = quat_normalize(rng.normal(size=(20, 4)))
    v = rng.normal(size=(20, 3))
    via_matrix = np.einsum("nij,nj->ni", quat_to_matrix(q), v)
    np.testing.assert_allclose(via_matrix, quat_rotate(q, v), atol=1e-12)


def test_conjugate_inverts_unit_rotation(rng):
    q = quat_normalize(rng.normal(size=4))
    v = rng.normal(size=3)
    np.testing.assert_allclose(
        quat_rotate(quat_conjugate(q), quat_rotate(q, v)), v, atol=1e-12
    )


def test_euler_round_trip(rng):
    angles = rng.uniform(-1.2, 1.2, size=(100, 3))
    recovered = quat_to_euler_xyz(quat_from_euler_xyz(angles))
    np.testing.assert_allclose(recovered, angles, atol=1e-9)


def test_axis_angle_matches_euler_single_axis():
    q_axis = quat_from_axis_angle(np.array([0.0, 0.0, 1.0]), 0.7)
    q_euler = quat_from_euler_xyz(np.array([0.0, 0.0, 0.7]))
    np.testing.assert_allclose(q_axis, q_euler, atol=1e-12)


def test_heading_pitch_of_known_poses():
    # yaw-only rotation
    q = quat_from_euler_xyz(np.array([0.0, 0.0, 0.5]))
    roll, pitch, yaw = heading_pitch_of(q)
    assert yaw == pytest.approx(0.5, abs=1e-9)
    assert pitch == pytest.approx(0.0, abs=1e-9)
    assert roll == pytest.approx(0.0, abs=1e-9)
    # nose-up pitch: forward axis gains +z
    q = quat_from_axis_angle(np.array([0.0, 1.0, 0.0]), -0.3)
    _, pitch, _ = heading_pitch_of(q)
    assert pitch == pytest.approx(0.3, abs=1e-9)


def test_wrap_angle_range():
    a = np.linspace(-25.0, 25.0, 2001)
    wrapped = wrap_angle(a)
    assert np.all(wrapped > -np.pi - 1e-12)
    assert np.all(wrapped <= np.pi + 1e-12)
    np.testing.assert_allclose(np.cos(wrapped), np.cos(a), atol=1e-9)
    np.testing.assert_allclose(np.sin(wrapped), np.sin(a), atol=1e-9)
