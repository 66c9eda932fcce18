import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm, logm

from screwkin import liegroup as lg
from screwkin import oracle
from screwkin.screws import helical, prismatic, revolute

from conftest import poses, unit_vectors, vec3, vec6


def test_skew_matches_cross():
    a, b = np.array([1.0, -2.0, 0.5]), np.array([0.3, 0.7, -1.1])
    assert np.allclose(lg.skew(a) @ b, np.cross(a, b))
    assert np.array_equal(lg.unskew(lg.skew(a)), a)


def test_hat_vee_round_trip():
    x = np.arange(6.0)
    assert np.array_equal(lg.vee(lg.hat(x)), x)


def test_so3_exp_quarter_turn():
    assert np.allclose(lg.so3_exp([0, 0, math.pi / 2]), lg.rot_z(math.pi / 2), atol=1e-15)


@given(vec3)
def test_so3_exp_is_rotation(w):
    r = lg.so3_exp(w)
    assert np.allclose(r.T @ r, np.eye(3), atol=1e-13)
    assert abs(np.linalg.det(r) - 1.0) < 1e-13


@given(vec3)
def test_so3_exp_matches_expm(w):
    assert np.allclose(lg.so3_exp(w), expm(lg.skew(w)), atol=1e-12)


@given(unit_vectors(), st.floats(0.0, math.pi - 1e-3))
def test_so3_log_round_trip(e, t):
    w = e * t
    assert np.allclose(lg.so3_log(lg.so3_exp(w)), w, atol=1e-9)


def test_so3_log_at_pi_uses_positive_first_component():
    w = lg.so3_log(lg.rot_y(math.pi))
    assert np.allclose(w, [0.0, math.pi, 0.0], atol=1e-12)
    w = lg.so3_log(lg.so3_exp(np.array([-1.0, 1.0, 0.0]) / math.sqrt(2) * math.pi))
    assert np.allclose(np.abs(w), np.array([1.0, 1.0, 0.0]) / math.sqrt(2) * math.pi, atol=1e-7)
    assert w[0] > 0


def test_small_angle_branch_is_continuous():
    for t in (1e-5, 9.9e-5, 1e-4, 1.01e-4):
        w = np.array([0.0, 0.0, t])
        assert np.allclose(lg.so3_exp(w), lg.rot_z(t), atol=1e-16)


def test_se3_exp_revolute_about_offset_axis():
    x = revolute([0, 0, 1], [1.0, 0.0, 0.0])
    c = lg.se3_exp(x, math.pi)
    assert np.allclose(c.rot, lg.rot_z(math.pi), atol=1e-15)
    assert np.allclose(c.pos, [2.0, 0.0, 0.0], atol=1e-15)


def test_se3_exp_prismatic_is_translation():
    c = lg.se3_exp(prismatic([0, 1, 0]), 0.7)
    assert np.array_equal(c.rot, np.eye(3))
    assert np.array_equal(c.pos, [0.0, 0.7, 0.0])


def test_se3_exp_rejects_non_unit_screw():
    with pytest.raises(ValueError):
        lg.se3_exp([0, 0, 2, 0, 0, 0], 1.0)
    with pytest.raises(ValueError):
        lg.se3_exp([0, 0, 0, 0, 0, 2], 1.0)


@given(unit_vectors(), vec3, st.floats(-1.0, 1.0), st.floats(-4.0, 4.0))
def test_se3_exp_matches_matrix_exponential(e, p, h, phi):
    x = helical(e, p, h)
    assert np.allclose(lg.se3_exp(x, phi).matrix(), expm(lg.hat(x) * phi), atol=1e-11)


@given(vec6)
def test_se3_exp_vec_matches_matrix_exponential(v):
    assert np.allclose(lg.se3_exp_vec(v).matrix(), expm(lg.hat(v)), atol=1e-11)


def test_se3_exp_vec_agrees_with_unit_form():
    x = helical([0.0, 0.6, 0.8], [0.1, -0.2, 0.3], 0.5)
    assert np.allclose(lg.se3_exp_vec(x * 1.3).matrix(), lg.se3_exp(x, 1.3).matrix(), atol=1e-14)


@given(poses(), poses(), poses())
def test_group_associativity(a, b, c):
    left = lg.compose(lg.compose(a, b), c).matrix()
    right = lg.compose(a, lg.compose(b, c)).matrix()
    assert np.allclose(left, right, atol=1e-12)


@given(poses())
def test_inverse_and_identity(a):
    assert np.allclose(lg.compose(a, lg.inverse(a)).matrix(), np.eye(4), atol=1e-12)
    assert np.allclose(lg.compose(lg.Pose.identity(), a).matrix(), a.matrix(), atol=0)
    assert np.allclose(lg.relative(a, a).matrix(), np.eye(4), atol=1e-12)


@given(poses(), poses())
def test_adjoint_homomorphism(a, b):
    assert np.allclose(lg.adjoint(lg.compose(a, b)), lg.adjoint(a) @ lg.adjoint(b), atol=1e-11)


@given(poses(), vec6)
def test_adjoint_forms_agree(c, x):
    ad = lg.adjoint(c)
    assert np.allclose(lg.adjoint_pose_apply(c, x), ad @ x, atol=1e-12)
    assert np.allclose(lg.adjoint_inv_apply(c, x), np.linalg.solve(ad, x), atol=1e-10)
    assert np.allclose(ad, lg.adjoint_trans(c.pos) @ lg.adjoint_rot(c.rot), atol=1e-13)
    assert np.allclose(lg.adjoint(c) @ lg.adjoint_inv(c), np.eye(6), atol=1e-12)


@given(poses(), vec6)
def test_adjoint_is_conjugation(c, x):
    m = c.matrix()
    assert np.allclose(lg.hat(lg.adjoint_pose_apply(c, x)), m @ lg.hat(x) @ np.linalg.inv(m), atol=1e-11)


@given(poses(), unit_vectors(), vec3, st.floats(-3.0, 3.0))
def test_conjugated_exponential(s, e, p, phi):
    x = revolute(e, p)
    direct = s.matrix() @ lg.se3_exp(x, phi).matrix() @ np.linalg.inv(s.matrix())
    assert np.allclose(lg.conjugate_exp(s, x, phi).matrix(), direct, atol=1e-11)


@given(vec6.filter(lambda v: np.linalg.norm(v[:3]) <= math.pi - 1e-3))
def test_log_of_exp(v):
    c = lg.se3_exp_vec(v)
    assert np.allclose(lg.vee(np.real(logm(c.matrix()))), v, atol=1e-8)
    assert np.allclose(lg.so3_log(c.rot), v[:3], atol=1e-9)


def test_series_exponential_oracle_quarter_turn():
    m = oracle.series_exp([0, 0, math.pi / 2, 0, 0, 0], 30)
    assert np.allclose(m[:3, :3], lg.rot_z(math.pi / 2), atol=1e-12)


def test_series_exponential_of_zero_is_identity():
    for terms in (1, 2, 30):
        assert np.array_equal(oracle.series_exp(np.zeros(6), terms), np.eye(4))


@given(vec6.filter(lambda v: np.linalg.norm(v) <= 2 * math.pi))
def test_closed_form_matches_series(v):
    assert np.allclose(lg.se3_exp_vec(v).matrix(), oracle.series_exp(v, 30), atol=1e-10)


@given(unit_vectors(), vec3, st.floats(-1.0, 1.0), st.floats(-3.0, 3.0))
def test_exponential_derivative(e, p, h, t):
    x = helical(e, p, h)
    step = 1e-6
    d = (lg.se3_exp(x, t + step).matrix() - lg.se3_exp(x, t - step).matrix()) / (2 * step)
    e_t = lg.se3_exp(x, t).matrix()
    assert np.allclose(d, lg.hat(x) @ e_t, atol=1e-6)
    assert np.allclose(d, e_t @ lg.hat(x), atol=1e-6)
