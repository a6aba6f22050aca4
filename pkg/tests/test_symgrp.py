import math

import numpy as np
import pytest

from symvmf import orient, symgrp
from symvmf.exceptions import GroupAxiomViolation, NearPiRotation, ParseError, UnknownGroup

import oracles

R2 = math.sqrt(0.5)


@pytest.fixture(scope="module")
def cubic():
    return symgrp.builtin_group("cubic_m3m")


@pytest.fixture(scope="module")
def trivial():
    return symgrp.builtin_group("trivial")


class TestBuiltin:
    def test_trivial(self, trivial):
        assert len(trivial) == 1
        np.testing.assert_array_equal(trivial.elements, [[1, 0, 0, 0]])

    def test_cubic_size_and_closure(self, cubic):
        assert len(cubic) == 24
        assert oracles.closed_up_to_sign([tuple(g) for g in cubic.elements])

    def test_cubic_matches_signed_permutations(self, cubic):
        expected = oracles.cube_rotation_matrices()
        got = [oracles.rotation_matrix(g) for g in cubic.elements]
        for m in expected:
            assert sum(np.allclose(m, g, atol=1e-12) for g in got) == 1

    def test_matrices_are_orthogonal(self, cubic):
        for m in cubic.matrices:
            np.testing.assert_allclose(m @ m.T, np.eye(4), atol=1e-12)

    def test_antipodal_extension(self):
        g = symgrp.builtin_group("cubic_m3m", antipodal=True)
        assert len(g) == 48 and g.antipodal_extended

    def test_lift_gives_exact_closure(self, cubic, trivial):
        lifted = cubic.lift()
        assert len(lifted) == 48 and lifted.contains_negation
        assert len(trivial.lift()) == 1
        prods = orient.quat_compose(lifted.elements[:, None], lifted.elements[None, :]).reshape(-1, 4)
        # every product is an element exactly, sign included
        assert np.all(np.max(prods @ lifted.elements.T, axis=1) > 1 - 1e-12)

    def test_unknown(self):
        with pytest.raises(UnknownGroup):
            symgrp.builtin_group("hexagonal")


class TestLoadGroup:
    def write(self, tmp_path, rows, header=True):
        p = tmp_path / "g.csv"
        lines = (["q1,q2,q3,q4"] if header else []) + [",".join(map(repr, r)) for r in rows]
        p.write_text("\n".join(lines) + "\n")
        return p

    def test_single_identity_row(self, tmp_path):
        g = symgrp.load_group(self.write(tmp_path, [(1.0, 0.0, 0.0, 0.0)]))
        assert len(g) == 1

    def test_two_element_group(self, tmp_path):
        g = symgrp.load_group(self.write(tmp_path, [(1.0, 0.0, 0.0, 0.0), (0.0, 1.0, 0.0, 0.0)], header=False))
        assert len(g) == 2
        assert len(g.lift()) == 4

    def test_quarter_turn_alone_is_not_closed(self, tmp_path):
        with pytest.raises(GroupAxiomViolation) as err:
            symgrp.load_group(self.write(tmp_path, [(1.0, 0.0, 0.0, 0.0), (R2, R2, 0.0, 0.0)]))
        assert err.value.pair is not None

    def test_identity_moved_to_front(self, tmp_path):
        g = symgrp.load_group(self.write(tmp_path, [(0.0, 1.0, 0.0, 0.0), (1.0, 0.0, 0.0, 0.0)]))
        np.testing.assert_array_equal(g.elements[0], [1, 0, 0, 0])

    def test_missing_identity(self, tmp_path):
        with pytest.raises(GroupAxiomViolation):
            symgrp.load_group(self.write(tmp_path, [(0.0, 1.0, 0.0, 0.0)]))

    def test_bad_row(self, tmp_path):
        p = tmp_path / "g.csv"
        p.write_text("1,0,0,0\n0,1,0\n")
        with pytest.raises(ParseError) as err:
            symgrp.load_group(p)
        assert err.value.line == 2

    def test_non_unit_row(self, tmp_path):
        p = tmp_path / "g.csv"
        p.write_text("1,0,0,0\n0,2,0,0\n")
        with pytest.raises(ParseError):
            symgrp.load_group(p)

    def test_round_trip_of_cubic_table(self, tmp_path, cubic):
        g = symgrp.load_group(self.write(tmp_path, cubic.elements.tolist()))
        np.testing.assert_allclose(g.elements, cubic.elements)
        assert not g.antipodal_extended


class TestApply:
    def test_identity_cases(self, cubic):
        x = orient.random_quaternions(1, 0)[0]
        np.testing.assert_allclose(symgrp.apply(orient.IDENTITY, x), x)
        np.testing.assert_allclose(symgrp.apply(cubic.elements[5], orient.IDENTITY), cubic.elements[5])

    def test_preserves_inner_products(self, cubic):
        x, y = orient.random_quaternions(2, 1)
        gx, gy = cubic.apply(x), cubic.apply(y)
        np.testing.assert_allclose(np.sum(gx * gy, axis=-1), np.dot(x, y), atol=1e-12)

    def test_shape(self, cubic):
        x = orient.random_quaternions(7, 2)
        assert cubic.apply(x).shape == (24, 7, 4)


class TestFundamentalZone:
    def test_examples(self):
        assert symgrp.in_fundamental_zone_cubic([1, 0, 0, 0])
        assert not symgrp.in_fundamental_zone_cubic([R2, 0, 0, R2])
        q = orient.rodrigues_to_quat([0.1, 0.05, -0.08])
        assert symgrp.in_fundamental_zone_cubic(q)
        assert oracles.cubic_fz_by_hand(q)

    def test_near_pi(self, cubic):
        with pytest.raises(NearPiRotation):
            symgrp.in_fundamental_zone_cubic([0, 1, 0, 0])
        with pytest.raises(NearPiRotation):
            symgrp.in_fundamental_zone_general([1e-10, 0, 1, 0], cubic)

    def test_trivial_group_everything_inside(self, trivial):
        q = orient.positive(orient.random_quaternions(100, 3))
        assert symgrp.in_fundamental_zone_general(q, trivial).all()

    def test_identity_inside_any_group(self, cubic, trivial):
        for g in (cubic, trivial):
            assert symgrp.in_fundamental_zone_general([1, 0, 0, 0], g)

    def test_two_tests_agree_with_hand_oracle(self, cubic):
        q = orient.random_quaternions(100000, 11)
        q = q[np.abs(q[:, 0]) > 1e-6]
        closed = symgrp.in_fundamental_zone_cubic(q)
        general = symgrp.in_fundamental_zone_general(q, cubic)
        np.testing.assert_array_equal(closed, general)
        hand = np.array([oracles.cubic_fz_by_hand(v) for v in q[:3000]])
        np.testing.assert_array_equal(closed[:3000], hand)
        # the zone holds 1/24 of the uniform mass
        assert closed.mean() == pytest.approx(1 / 24, rel=0.05)

    def test_exactly_one_translate_inside(self, cubic):
        q = orient.random_quaternions(10000, 12)
        inside, _ = symgrp.fz_translates_inside(q, cubic)
        assert np.all(inside.sum(axis=1) == 1)

    def test_fz_point_has_largest_scalar_part(self, cubic):
        q = orient.random_quaternions(2000, 13)
        fz, _ = symgrp.map_to_fz(q, cubic)
        best = np.abs(cubic.apply(q)[..., 0]).max(axis=0)
        np.testing.assert_allclose(fz[:, 0], best, atol=1e-12)

    def test_map_fixed_point(self, cubic):
        q = orient.rodrigues_to_quat([0.1, 0.05, -0.08])
        fz, idx = symgrp.map_to_fz(q, cubic)
        np.testing.assert_allclose(fz, q)
        assert idx == 0

    def test_map_undoes_group_action(self, cubic):
        q = orient.rodrigues_to_quat([0.1, 0.05, -0.08])
        moved = symgrp.apply(cubic.elements[5], q)
        fz, _ = symgrp.map_to_fz(moved, cubic)
        np.testing.assert_allclose(fz, q, atol=1e-12)

    def test_map_output_is_inside_and_idempotent(self, cubic):
        q = orient.random_quaternions(500, 14)
        fz, idx = symgrp.map_to_fz(q, cubic)
        assert symgrp.in_fundamental_zone_cubic(fz).all()
        assert np.all(fz[:, 0] >= 0)
        again, idx2 = symgrp.map_to_fz(fz, cubic)
        np.testing.assert_allclose(again, fz, atol=1e-12)
        assert np.all(idx2 == 0)

    def test_single_input_shapes(self, cubic):
        fz, idx = symgrp.map_to_fz(orient.random_quaternions(1, 15)[0], cubic)
        assert fz.shape == (4,) and isinstance(idx, int)


class TestDisorientation:
    def test_zero_on_orbit(self, cubic):
        q = orient.random_quaternions(1, 20)[0]
        assert symgrp.disorientation(q, q, cubic) == pytest.approx(0, abs=1e-7)
        d = symgrp.disorientation(q, cubic.apply(q), cubic)
        np.testing.assert_allclose(d, 0, atol=1e-7)

    def test_bounded_by_plain_angle_and_max(self, cubic):
        a = orient.random_quaternions(5000, 21)
        b = orient.random_quaternions(5000, 22)
        d = symgrp.disorientation(a, b, cubic)
        plain = orient.rotation_angle_between(a, b)
        assert np.all(d <= plain + 1e-12)
        # largest cubic disorientation is 62.8 degrees
        assert d.max() <= math.radians(62.8)

    def test_symmetric(self, cubic):
        a, b = orient.random_quaternions(2, 23)
        assert symgrp.disorientation(a, b, cubic) == pytest.approx(symgrp.disorientation(b, a, cubic))

    def test_inner_product_matches_angle(self, cubic):
        a, b = orient.random_quaternions(2, 24)
        ip = symgrp.symmetric_inner_product(a, b, cubic)
        assert 2 * math.acos(ip) == pytest.approx(symgrp.disorientation(a, b, cubic))


def test_canonical_representative(cubic, trivial):
    q = orient.random_quaternions(1, 30)[0]
    np.testing.assert_allclose(symgrp.canonical_representative(q, cubic), symgrp.map_to_fz(q, cubic)[0])
    neg = -orient.positive(q)
    # without -1 in the group the sign is kept
    np.testing.assert_allclose(symgrp.canonical_representative(neg, trivial), neg)


def test_check_reports_failing_pair():
    bad = symgrp.SymmetryGroup("bad", np.array([[1.0, 0, 0, 0], [R2, R2, 0, 0]]))
    with pytest.raises(GroupAxiomViolation) as err:
        bad.check()
    assert err.value.pair is not None
