import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from screwkin import kinematics as kin
from screwkin import liegroup as lg
from screwkin.model import (
    GROUND,
    BodyFixedJoint,
    Convention,
    JointKind,
    MbsModel,
    SpatialJoint,
    from_jfr,
    to_bodyfixed,
    to_jfr,
    to_spatial,
    validate,
    xbar,
)
from screwkin.models import random_model
from screwkin.screws import (
    ScrewKind,
    coscrew_pairing,
    decompose_screw,
    helical,
    pitch_of,
    prismatic,
    revolute,
    screw_frame_transform,
    screw_kind,
)

from conftest import poses, unit_vectors, vec3


def test_revolute_through_origin():
    assert np.array_equal(revolute([0, 0, 1]), [0, 0, 1, 0, 0, 0])


def test_revolute_moment_is_point_cross_axis():
    assert np.allclose(revolute([0, 0, 1], [-0.4, 0, 0]), [0, 0, 1, 0, 0.4, 0])


def test_prismatic_and_pitch():
    x = prismatic([1, 0, 0])
    assert screw_kind(x) is ScrewKind.PRISMATIC
    assert pitch_of(x) == math.inf
    assert pitch_of(helical([0, 0, 1], [1, 2, 0], 0.5)) == pytest.approx(0.5)


def test_screw_kind_rejects_near_degenerate():
    with pytest.raises(ValueError):
        screw_kind([0, 0, 0.5, 0, 0, 0])
    with pytest.raises(ValueError):
        revolute([0, 0, 2])


@given(unit_vectors(), vec3, st.floats(-2.0, 2.0))
def test_decompose_round_trip(e, p, h):
    x = helical(e, p, h)
    g = decompose_screw(x)
    assert np.allclose(g.axis, e, atol=1e-12)
    assert g.pitch == pytest.approx(h, abs=1e-12)
    # the recovered point lies on the axis
    assert np.allclose(np.cross(g.point - p, e), 0.0, atol=1e-12)
    assert np.allclose(helical(g.axis, g.point, g.pitch), x, atol=1e-12)


@given(poses(), unit_vectors(), vec3)
def test_frame_transform_moves_axis(s, e, p):
    moved = screw_frame_transform(s, revolute(e, p))
    assert np.allclose(moved, revolute(s.rot @ e, lg.transform_point(s, p)), atol=1e-12)


def test_coscrew_pairing_is_plain_dot():
    assert coscrew_pairing(np.ones(6), np.arange(6.0)) == 15.0


def test_joint_kind_classification():
    assert JointKind.of_screw(revolute([1, 0, 0], [0, 1, 0])) is JointKind.REVOLUTE
    assert JointKind.of_screw(prismatic([1, 0, 0])) is JointKind.PRISMATIC
    assert JointKind.of_screw(helical([1, 0, 0], [0, 1, 0], 0.5)) is JointKind.HELICAL


def _chain_bf():
    j1 = BodyFixedJoint(lg.Pose(np.eye(3), [0, 0, 1.0]), revolute([0, 0, 1]))
    j2 = BodyFixedJoint(lg.Pose(lg.rot_x(0.3), [1.0, 0, 0]), helical([0, 1, 0], [0.2, 0, 0], 0.5))
    return MbsModel([GROUND, 0], [j1, j2], Convention.BODY_FIXED)


def test_spatial_view_composes_reference_poses():
    m = _chain_bf()
    a2 = m.spatial[1].a
    assert np.allclose(a2.matrix(), m.body_fixed[0].b.matrix() @ m.body_fixed[1].b.matrix())
    assert np.allclose(m.spatial[1].y, lg.adjoint_pose_apply(a2, m.body_fixed[1].x))


@pytest.mark.parametrize("seed", range(5))
def test_convention_round_trips(seed):
    m = random_model(7, seed=seed)
    bf = to_bodyfixed(to_spatial(m))
    for a, b in zip(m.body_fixed, bf.body_fixed):
        assert np.allclose(a.b.matrix(), b.b.matrix(), atol=1e-13)
        assert np.allclose(a.x, b.x, atol=1e-13)
    back = from_jfr(to_jfr(m))
    for a, b in zip(m.body_fixed, back.body_fixed):
        assert np.allclose(a.b.matrix(), b.b.matrix(), atol=1e-13)
        assert np.allclose(a.x, b.x, atol=1e-13)


@pytest.mark.parametrize("seed", range(3))
def test_synthesized_joint_frames_are_canonical(seed):
    m = to_jfr(random_model(6, seed=seed))
    for j, kind in zip(m.joints, m.joint_kinds()):
        if kind is JointKind.PRISMATIC:
            assert np.allclose(j.z, [0, 0, 0, 0, 0, 1], atol=1e-15)
        else:
            assert np.allclose(j.z[[0, 1, 3, 4]], 0.0, atol=1e-15) and j.z[2] == pytest.approx(1.0)


def test_fk_identical_across_conventions():
    m = random_model(6, seed=9)
    q = np.linspace(-1.0, 1.0, 6)
    ref = kin.fk(m, q, "body_poe")
    for other in (to_spatial(m), to_jfr(m)):
        for a, b in zip(ref, kin.fk(other, q, "body_poe")):
            assert np.allclose(a.matrix(), b.matrix(), atol=1e-12)


def test_xbar_is_screw_in_parent_frame():
    m = _chain_bf()
    assert np.allclose(xbar(m, 1), lg.adjoint_pose_apply(m.body_fixed[1].b, m.body_fixed[1].x))


def test_tree_topology_helpers():
    m = random_model(8, seed=1)
    for i, path in enumerate(m.paths):
        assert path[-1] == i
        assert all(m.parent[b] == a for a, b in zip(path, path[1:]))
        assert m.parent[path[0]] == GROUND
    assert m.depth == max(len(p) for p in m.paths)
    for i, kids in enumerate(m.children):
        assert all(m.parent[k] == i for k in kids)


def test_validate_reports_every_violation():
    bad_rot = lg.Pose(np.diag([1.0, 1.0, -1.0]), np.zeros(3))
    joints = [
        SpatialJoint(lg.Pose.identity(), [0, 0, 2, 0, 0, 0]),
        SpatialJoint(bad_rot, revolute([1, 0, 0])),
        BodyFixedJoint(lg.Pose.identity(), revolute([1, 0, 0])),
    ]
    report = validate(MbsModel([GROUND, 2, 0], joints, Convention.SPATIAL))
    codes = sorted((v.joint, v.code) for v in report.violations)
    assert codes == [(0, "unit-screw"), (1, "pose"), (1, "topology"), (2, "convention")]
    assert not report.ok


def test_validate_accepts_random_models():
    assert validate(random_model(10, seed=0)).ok
