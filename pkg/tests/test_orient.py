import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symvmf import orient
from symvmf.exceptions import AngleOutOfRange, NearPiRotation

import oracles

R2 = math.sqrt(0.5)

finite = st.floats(-1.0, 1.0, allow_nan=False)
quat_strategy = st.tuples(finite, finite, finite, finite).filter(lambda v: np.linalg.norm(v) > 0.1).map(
    lambda v: np.array(v) / np.linalg.norm(v)
)


def same_rotation(a, b, tol=1e-10):
    return abs(abs(np.dot(a, b)) - 1.0) < tol


class TestEuler:
    def test_identity(self):
        np.testing.assert_allclose(orient.euler_to_quat([0, 0, 0]), [1, 0, 0, 0])

    def test_half_turn_about_z(self):
        q = orient.euler_to_quat([math.pi, 0, 0])
        assert same_rotation(q, [0, 0, 0, 1])

    def test_round_trip(self):
        e = np.array([0.7, 1.1, 2.3])
        np.testing.assert_allclose(orient.quat_to_euler(orient.euler_to_quat(e)), e, atol=1e-10)

    def test_matches_matrix_composition(self):
        e = (0.7, 1.1, 2.3)
        q = orient.euler_to_quat(e)
        np.testing.assert_allclose(oracles.rotation_matrix(q), oracles.zxz_matrix(*e), atol=1e-12)

    def test_half_quaternion_composes_back(self):
        q = np.array([0.5, 0.5, 0.5, 0.5])
        e = orient.quat_to_euler(q)
        assert 0 <= e[0] <= 2 * math.pi and 0 <= e[1] <= math.pi and 0 <= e[2] <= 2 * math.pi
        np.testing.assert_allclose(oracles.zxz_matrix(*e), oracles.rotation_matrix(q), atol=1e-12)

    def test_identity_to_euler(self):
        np.testing.assert_allclose(orient.quat_to_euler([1, 0, 0, 0]), [0, 0, 0], atol=0)

    @pytest.mark.parametrize("alpha,gamma", [(0.3, 1.2), (1.5, 0.0), (0.0, 1.5), (2.0, 2.5)])
    def test_gimbal_lock_collapses_into_alpha(self, alpha, gamma):
        e = orient.quat_to_euler(orient.euler_to_quat([alpha, 0.0, gamma]))
        np.testing.assert_allclose(e, [(alpha + gamma) % (2 * math.pi), 0, 0], atol=1e-12)

    def test_gimbal_lock_at_pi(self):
        e = orient.quat_to_euler(orient.euler_to_quat([0.4, math.pi, 0.1]))
        assert e[1] == pytest.approx(math.pi) and e[2] == 0.0
        np.testing.assert_allclose(oracles.zxz_matrix(*e), oracles.zxz_matrix(0.4, math.pi, 0.1), atol=1e-12)

    @pytest.mark.parametrize("bad", [[-0.1, 1, 1], [1, 3.2, 1], [1, 1, 6.3], [np.nan, 1, 1]])
    def test_out_of_range_rejected(self, bad):
        with pytest.raises(AngleOutOfRange):
            orient.euler_to_quat(bad)

    @settings(max_examples=200)
    @given(st.floats(0, 2 * math.pi), st.floats(0.01, math.pi - 0.01), st.floats(0, 2 * math.pi))
    def test_round_trip_property(self, a, b, g):
        q = orient.euler_to_quat([a, b, g])
        back = orient.quat_to_euler(q)
        assert same_rotation(orient.euler_to_quat(back), q)
        assert np.all(back >= 0) and back[0] <= 2 * math.pi and back[1] <= math.pi and back[2] <= 2 * math.pi


class TestRodrigues:
    @pytest.mark.parametrize(
        "d,q",
        [
            ([0, 0, 0], [1, 0, 0, 0]),
            ([1, 0, 0], [R2, R2, 0, 0]),
            ([1, 1, 1], [0.5, 0.5, 0.5, 0.5]),
        ],
    )
    def test_to_quat(self, d, q):
        np.testing.assert_allclose(orient.rodrigues_to_quat(d), q, atol=1e-15)

    def test_from_quat(self):
        np.testing.assert_allclose(orient.quat_to_rodrigues([1, 0, 0, 0]), [0, 0, 0])
        np.testing.assert_allclose(orient.quat_to_rodrigues([0.5, 0.5, 0.5, 0.5]), [1, 1, 1])

    def test_near_pi_raises(self):
        with pytest.raises(NearPiRotation):
            orient.quat_to_rodrigues([1e-12, 1, 0, 0])

    @given(quat_strategy.filter(lambda q: abs(q[0]) > 1e-3))
    def test_round_trip_gives_positive_representative(self, q):
        back = orient.rodrigues_to_quat(orient.quat_to_rodrigues(q))
        assert back[0] > 0
        np.testing.assert_allclose(back, q * np.sign(q[0]), atol=1e-10)


class TestCompose:
    def test_identity(self):
        q = orient.random_quaternions(1, 3)[0]
        np.testing.assert_allclose(orient.quat_compose(q, orient.IDENTITY), q, atol=1e-15)

    def test_two_quarter_turns(self):
        a = [R2, R2, 0, 0]
        np.testing.assert_allclose(orient.quat_compose(a, a), [0, 1, 0, 0], atol=1e-15)

    def test_inverse(self):
        q = orient.random_quaternions(1, 4)[0]
        assert same_rotation(orient.quat_compose(q, orient.quat_inverse(q)), orient.IDENTITY, 1e-14)

    def test_matches_hand_product(self):
        a, b = orient.random_quaternions(2, 8)
        np.testing.assert_allclose(orient.quat_compose(a, b), oracles.hamilton(a, b), atol=1e-15)

    def test_matches_matrix_product(self):
        a, b = orient.random_quaternions(2, 9)
        np.testing.assert_allclose(
            oracles.rotation_matrix(orient.quat_compose(a, b)),
            oracles.rotation_matrix(a) @ oracles.rotation_matrix(b),
            atol=1e-12,
        )

    def test_left_matrix(self):
        a, b = orient.random_quaternions(2, 10)
        np.testing.assert_allclose(orient.left_matrix(a) @ b, orient.quat_compose(a, b), atol=1e-15)

    @given(quat_strategy, quat_strategy, quat_strategy)
    def test_associative(self, a, b, c):
        lhs = orient.quat_compose(orient.quat_compose(a, b), c)
        rhs = orient.quat_compose(a, orient.quat_compose(b, c))
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_broadcasts(self):
        qs = orient.random_quaternions(5, 1)
        out = orient.quat_compose(qs[:, None, :], qs[None, :, :])
        assert out.shape == (5, 5, 4)
        np.testing.assert_allclose(np.linalg.norm(out, axis=-1), 1.0, atol=1e-12)


class TestAngle:
    def test_self_and_antipode(self):
        q = orient.random_quaternions(1, 2)[0]
        assert orient.rotation_angle_between(q, q) == pytest.approx(0.0, abs=1e-7)
        assert orient.rotation_angle_between(q, -q) == pytest.approx(0.0, abs=1e-7)

    def test_quarter_turn(self):
        assert orient.rotation_angle_between([1, 0, 0, 0], [R2, R2, 0, 0]) == pytest.approx(math.pi / 2)

    @given(quat_strategy, quat_strategy, quat_strategy)
    def test_triangle_inequality(self, a, b, c):
        ab = orient.rotation_angle_between(a, b)
        bc = orient.rotation_angle_between(b, c)
        ac = orient.rotation_angle_between(a, c)
        assert ac <= ab + bc + 1e-7  # arccos near 1 limits precision to ~sqrt(eps)
        assert orient.rotation_angle_between(a, b) == orient.rotation_angle_between(b, a)


def test_positive_handles_zero_scalar_part():
    q = orient.positive([[0, -R2, R2, 0], [-1, 0, 0, 0]])
    np.testing.assert_allclose(q, [[0, R2, -R2, 0], [1, 0, 0, 0]])


def test_axis_angle():
    angle, axis = orient.axis_angle([R2, 0, 0, R2])
    assert angle == pytest.approx(math.pi / 2)
    np.testing.assert_allclose(axis, [0, 0, 1])


def test_unit_cube_map_is_uniform():
    rng = np.random.default_rng(0)
    q = orient.quaternions_from_unit_cube(rng.uniform(size=(200000, 3)))
    np.testing.assert_allclose(np.linalg.norm(q, axis=1), 1.0, atol=1e-12)
    # uniform on S^3: E[q_i^2] = 1/4 and E[q_i] = 0
    np.testing.assert_allclose((q**2).mean(axis=0), 0.25, atol=3e-3)
    np.testing.assert_allclose(q.mean(axis=0), 0.0, atol=5e-3)
