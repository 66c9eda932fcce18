import numpy as np
import pytest

from screwkin import kinematics as kin
from screwkin import liegroup as lg
from screwkin import oracle
from screwkin.invkin import RateSolution, lstsq_gap, per_joint_rate, rates_from_twists
from screwkin.kinematics import BodyTwists, TwistRep
from screwkin.models import random_model
from screwkin.sysjac import (
    block,
    block_diag_adjoints,
    closed_form_inverse,
    nilpotency_index,
    nilpotent_expand,
    system_jacobian,
    system_twist,
)

REPS = list(TwistRep)
SEEDS = range(5)


def _sample(seed, n=6, chain=False):
    m = random_model(n, seed=seed, chain=chain)
    rng = np.random.default_rng(200 + seed)
    return m, rng.uniform(-np.pi, np.pi, n), rng.normal(size=n)


# -- system matrices ------------------------------------------------------------


@pytest.mark.parametrize("rep", [TwistRep.BODY, TwistRep.HYBRID, TwistRep.MIXED])
def test_single_body_transport_is_identity(rep):
    m, q, _ = _sample(0, 1)
    j, f = system_jacobian(m, q, rep)
    assert np.array_equal(f.A, np.eye(6))
    assert np.allclose(j[:, 0], kin.jacobian(m, q, 0, rep).cols[0], atol=0)


@pytest.mark.parametrize("seed", SEEDS)
@pytest.mark.parametrize("rep", REPS)
def test_row_blocks_equal_per_body_jacobians(seed, rep):
    m, q, qd = _sample(seed)
    j, _ = system_jacobian(m, q, rep)
    for i in range(m.n):
        assert np.allclose(j[6 * i:6 * i + 6], kin.jacobian(m, q, i, rep).dense(m.n), atol=1e-12)
    assert np.allclose(j @ qd, system_twist(m, q, qd, rep), atol=1e-12)


def test_chain_block_layout():
    m, q, _ = _sample(1, 3, chain=True)
    _, f = system_jacobian(m, q, TwistRep.BODY)
    st = kin.KinematicState(m, q)
    assert np.allclose(block(f.A, 2, 0), lg.adjoint(st.rel(2, 0)), atol=1e-12)
    assert not np.any(block(f.A, 0, 2))


@pytest.mark.parametrize("seed", SEEDS)
@pytest.mark.parametrize("rep", [TwistRep.BODY, TwistRep.HYBRID, TwistRep.MIXED])
def test_transport_inverse_identities(seed, rep):
    m, q, _ = _sample(seed, 7)
    _, f = system_jacobian(m, q, rep)
    eye = np.eye(6 * m.n)
    assert np.allclose(f.A @ (eye - f.D), eye, atol=1e-12)
    assert np.allclose(closed_form_inverse(f), eye - f.D, atol=0)
    assert np.allclose(f.A, np.linalg.solve(eye - f.D, eye), atol=1e-12)
    assert nilpotency_index(f.D) == m.depth


@pytest.mark.parametrize("seed", SEEDS)
def test_nonzero_pattern_follows_ancestry(seed):
    m, q, _ = _sample(seed, 7)
    _, f = system_jacobian(m, q, TwistRep.BODY)
    for i in range(m.n):
        for j in range(m.n):
            assert bool(np.any(block(f.A, i, j))) == m.is_ancestor(j, i)


def test_series_trivial_cases():
    assert np.array_equal(nilpotent_expand(np.zeros((12, 12))), np.eye(12))
    m, q, _ = _sample(2, 2, chain=True)
    _, f = system_jacobian(m, q, TwistRep.BODY)
    assert np.array_equal(f.A, np.eye(12) + f.D)


def test_series_matches_dense_solve_on_chain():
    m, q, _ = _sample(3, 6, chain=True)
    _, f = system_jacobian(m, q, TwistRep.BODY)
    eye = np.eye(36)
    assert np.allclose(nilpotent_expand(f.D), np.linalg.solve(eye - f.D, eye), atol=1e-12)
    assert np.array_equal(nilpotent_expand(f.D, m.depth), nilpotent_expand(f.D))


@pytest.mark.parametrize("seed", SEEDS)
def test_spatial_factorizations(seed):
    m, q, _ = _sample(seed, 7)
    st = kin.KinematicState(m, q)
    j, f = system_jacobian(m, q, TwistRep.SPATIAL, state=st)
    _, fb = system_jacobian(m, q, TwistRep.BODY, state=st)
    a_sb, x_b = f.alternatives["sb"]
    a_sh, x_h = f.alternatives["sh"]
    assert np.allclose(f.A @ f.X, j, atol=1e-12)
    assert np.allclose(a_sb @ x_b, j, atol=1e-12)
    assert np.allclose(a_sh @ x_h, j, atol=1e-12)
    assert np.allclose(a_sb, block_diag_adjoints(st.poses) @ fb.A, atol=1e-12)
    # identical nonzero blocks down every column
    for a in (f.A, a_sb, a_sh):
        for jj in range(m.n):
            rows = [i for i in range(m.n) if m.is_ancestor(jj, i)]
            for i in rows:
                assert np.array_equal(block(a, i, jj), block(a, rows[0], jj))


@pytest.mark.parametrize("seed", SEEDS)
def test_spatial_transport_inverse_pattern(seed):
    m, q, _ = _sample(seed, 6, chain=True)
    st = kin.KinematicState(m, q)
    _, f = system_jacobian(m, q, TwistRep.SPATIAL, state=st)
    inv = closed_form_inverse(f, st.poses)
    a_sb = f.alternatives["sb"][0]
    assert np.allclose(inv @ a_sb, np.eye(6 * m.n), atol=1e-12)
    for i in range(m.n):
        assert np.allclose(block(inv, i, i), lg.adjoint_inv(st.poses[i]), atol=1e-15)
        if i:
            assert np.allclose(block(inv, i, i - 1), -lg.adjoint_inv(st.poses[i]), atol=1e-15)
    with pytest.raises(ValueError):
        closed_form_inverse(f)


# -- joint rates from twists ----------------------------------------------------


@pytest.mark.parametrize("seed", SEEDS)
@pytest.mark.parametrize("rep", REPS)
def test_exact_recovery(seed, rep):
    m, q, qd = _sample(seed, 7)
    sol = rates_from_twists(m, q, kin.twists(m, q, qd, rep))
    assert isinstance(sol, RateSolution)
    assert np.allclose(sol.qdot, qd, atol=1e-10)
    assert sol.consistent and sol.residual_norm < 1e-12


def test_zero_twists():
    m, q, _ = _sample(0)
    sol = rates_from_twists(m, q, BodyTwists(TwistRep.BODY, np.zeros((m.n, 6))))
    assert not np.any(sol.qdot) and sol.residual_norm == 0.0


@pytest.mark.parametrize("seed", SEEDS)
def test_rates_independent_of_representation(seed):
    m, q, qd = _sample(seed)
    st = kin.KinematicState(m, q)
    vb = kin.twists(m, q, qd, TwistRep.BODY, state=st)
    ref = rates_from_twists(m, q, vb, state=st).qdot
    for rep in REPS:
        conv = kin.convert_twists(vb, rep, st.poses)
        assert np.allclose(rates_from_twists(m, q, conv, state=st).qdot, ref, atol=1e-10)


@pytest.mark.parametrize("seed", SEEDS)
@pytest.mark.parametrize("rep", REPS)
def test_per_joint_rate_matches_batch(seed, rep):
    m, q, _ = _sample(seed)
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(m.n, 6))
    st = kin.KinematicState(m, q)
    batch = rates_from_twists(m, q, BodyTwists(rep, v), state=st).qdot
    for i, p in enumerate(m.parent):
        single = per_joint_rate(m, q, i, v[i], v[p] if p >= 0 else None, rep, st)
        if rep is TwistRep.MIXED:
            assert single == pytest.approx(batch[i], abs=1e-12)
        else:
            assert single == batch[i]


def test_per_joint_rate_without_relative_motion():
    m, q, _ = _sample(1, 4, chain=True)
    assert per_joint_rate(m, q, 2, np.arange(6.0), np.arange(6.0), TwistRep.SPATIAL) == 0.0


def test_per_joint_rate_single_revolute():
    from screwkin.model import GROUND, Convention, MbsModel, SpatialJoint
    from screwkin.screws import revolute

    m = MbsModel([GROUND], [SpatialJoint(lg.Pose.identity(), revolute([0, 0, 1]))], Convention.SPATIAL)
    assert per_joint_rate(m, [0.2], 0, [0, 0, 1.5, 0, 0, 0], None) == pytest.approx(1.5, abs=1e-15)


@pytest.mark.parametrize("seed", SEEDS)
def test_sweep_minimises_transported_residual(seed):
    # the sweep solves min |(I - D) V - X qdot| exactly, joint by joint
    m, q, qd = _sample(seed, 6)
    rng = np.random.default_rng(seed)
    v = kin.twists(m, q, qd, TwistRep.BODY).twists + 1e-3 * rng.normal(size=(m.n, 6))
    _, f = system_jacobian(m, q, TwistRep.BODY)
    rhs = (np.eye(6 * m.n) - f.D) @ v.reshape(-1)
    ls = np.linalg.lstsq(f.X, rhs, rcond=None)[0]
    sweep = rates_from_twists(m, q, BodyTwists(TwistRep.BODY, v)).qdot
    assert np.allclose(sweep, ls, atol=1e-12)


@pytest.mark.parametrize("seed", SEEDS)
def test_sweep_vs_least_squares_on_noisy_twists(seed):
    m, q, qd = _sample(seed, 6)
    rng = np.random.default_rng(seed)
    v = kin.twists(m, q, qd, TwistRep.BODY).twists + 1e-3 * rng.normal(size=(m.n, 6))
    sweep = rates_from_twists(m, q, BodyTwists(TwistRep.BODY, v))
    ls = oracle.lstsq_rates(m, q, v)
    assert not sweep.consistent
    # the least-squares residual can never exceed the sweep residual
    j = oracle.conjugation_body_jacobian(m, q)
    assert np.linalg.norm(j @ ls - v.reshape(-1)) <= sweep.residual_norm + 1e-15
    assert lstsq_gap(sweep.qdot, ls) >= 0.0


def test_conjugation_jacobian_matches_system_jacobian():
    m, q, _ = _sample(4, 6)
    j, _ = system_jacobian(m, q, TwistRep.BODY)
    assert np.allclose(oracle.conjugation_body_jacobian(m, q), j, atol=1e-12)
