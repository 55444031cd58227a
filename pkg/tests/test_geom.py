import math

import numpy as np
import pytest

from axiflight import geom
from axiflight.errors import ContractViolation


def rand_vec(rng, scale=1.0):
    return tuple(rng.uniform(-scale, scale, 3))


def test_dot_basis_and_arithmetic():
    assert geom.dot((1, 0, 0), (0, 1, 0)) == 0.0
    assert geom.dot((1, 2, 3), (1, 2, 3)) == 14.0


def test_cross_basis_and_self():
    assert geom.cross((1, 0, 0), (0, 1, 0)) == (0, 0, 1)
    k = geom.unit((0.3, -0.2, 0.93))
    assert geom.norm(geom.cross(k, k)) == 0.0


def test_triple_product_identities():
    # scalar cyclic identity and the bac-cab expansion on unit-scale vectors
    rng = np.random.default_rng(7)
    for _ in range(200):
        a, b, c = (rand_vec(rng) for _ in range(3))
        lhs = geom.dot(a, geom.cross(b, c))
        rhs = geom.dot(b, geom.cross(c, a))
        assert abs(lhs - rhs) <= 1e-12
        expanded = geom.sub(
            geom.scale(b, geom.dot(a, c)), geom.scale(c, geom.dot(a, b))
        )
        direct = geom.cross(a, geom.cross(b, c))
        assert all(abs(x - y) <= 1e-12 for x, y in zip(direct, expanded))


def test_rotation_preserves_lengths_and_dots():
    rng = np.random.default_rng(3)
    for _ in range(50):
        R = geom.rot_exp(rand_vec(rng, 3.0))
        a, b = rand_vec(rng), rand_vec(rng)
        assert abs(geom.dot(geom.rot_apply(R, a), geom.rot_apply(R, b)) - geom.dot(a, b)) <= 1e-12
        out = geom.rot_apply(R, a)
        assert abs(geom.norm(out) - geom.norm(a)) <= 1e-12
        back = geom.rot_apply_t(R, out)
        assert all(abs(x - y) <= 1e-12 for x, y in zip(back, a))


def test_identity_and_quarter_turn():
    assert geom.rot_apply(geom.ROT_IDENTITY, (1.0, 2.0, 3.0)) == (1.0, 2.0, 3.0)
    quarter = geom.rot_from_axis_angle((0.0, 0.0, 1.0), math.pi / 2)
    out = geom.rot_apply(quarter, (1.0, 0.0, 0.0))
    assert all(abs(x - y) <= 1e-15 for x, y in zip(out, (0.0, 1.0, 0.0)))


def test_integrate_attitude_half_turn_and_identity():
    att = geom.rot_from_euler_zyx(0.2, -0.3, 0.4)
    half = geom.integrate_attitude(att, (0.0, 0.0, math.pi), 1.0)
    # half turn about the body axis leaves the thrust axis untouched
    assert all(abs(x - y) <= 1e-12 for x, y in zip(geom.body_axis(half), geom.body_axis(att)))
    same = geom.integrate_attitude(att, (0.0, 0.0, 0.0), 0.5)
    assert same == att


def test_integrate_attitude_composition():
    att = geom.ROT_IDENTITY
    w = (0.4, -1.1, 0.7)
    dt = 0.02
    one = geom.integrate_attitude(att, w, dt)
    two = geom.integrate_attitude(geom.integrate_attitude(att, w, dt / 2), w, dt / 2)
    assert all(abs(x - y) <= 1e-12 for x, y in zip(one, two))


def test_orthonormality_drift_long_run():
    rng = np.random.default_rng(11)
    att = geom.rot_from_euler_zyx(0.1, 0.2, 0.3)
    w = tuple(rng.uniform(-2 * math.pi, 2 * math.pi, 3))
    for _ in range(100_000):
        att = geom.integrate_attitude(att, w, 1e-3)
    defect, det_err = geom.orthonormality_defect(att)
    assert defect < 1e-9
    assert det_err < 1e-9


def test_euler_zyx_pitch_only():
    # pitch -40 deg: thrust axis tips toward -x by sin(40)
    att = geom.rot_from_euler_zyx(0.0, math.radians(-40.0), 0.0)
    k = geom.body_axis(att)
    assert abs(k[0] + math.sin(math.radians(40.0))) < 1e-15
    assert abs(k[1]) < 1e-15
    assert abs(k[2] - math.cos(math.radians(40.0))) < 1e-15


def test_renormalize_restores_rotation():
    att = geom.rot_from_euler_zyx(0.5, -0.2, 1.1)
    dirty = tuple(x + 1e-6 for x in att)
    clean = geom.renormalize(dirty)
    defect, det_err = geom.orthonormality_defect(clean)
    assert defect < 1e-12
    assert det_err < 1e-12


def test_non_finite_rejected_at_boundary():
    with pytest.raises(ContractViolation):
        geom.vec3(1.0, float("nan"), 0.0)
    with pytest.raises(ContractViolation):
        geom.as_vec3((math.inf, 0.0, 0.0))
    with pytest.raises(ContractViolation):
        geom.attitude((1.0,) * 9)
    with pytest.raises(ContractViolation):
        geom.unit((0.0, 0.0, 0.0))


def test_angle_between_extremes():
    assert geom.angle_between((0, 0, 1), (0, 0, 1)) == 0.0
    assert abs(geom.angle_between((0, 0, 1), (0, 0, -1)) - math.pi) < 1e-15
    assert abs(geom.angle_between((1, 0, 0), (0, 1, 0)) - math.pi / 2) < 1e-15
