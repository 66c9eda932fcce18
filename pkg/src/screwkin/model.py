"""Tree-topology mechanism model with joint data in one of three conventions.

Bodies are indexed ``0..n-1`` in topological order; ``parent[i] == -1``
denotes the ground.  Each body ``i`` carries exactly one 1-DOF joint that
connects it to ``parent[i]``.

Conventions
-----------
``jfr``
    Joint frames on both bodies: ``s_pred`` (joint frame on the parent,
    relative to the parent's body frame), ``s_succ`` (joint frame on body i,
    relative to its body frame) and the joint screw ``z`` in the parent-side
    joint frame.  Both joint frames coincide at ``q_i = 0``.
``body_fixed``
    Reference pose ``b`` of body i relative to its parent at ``q_i = 0`` and
    the joint screw ``x`` represented in the body frame of body i.
``spatial``
    Absolute reference pose ``a`` at ``q = 0`` and the joint screw ``y``
    represented in the inertial frame at ``q = 0``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import liegroup as lg
from .screws import ScrewKind, decompose_screw, screw_kind

GROUND = -1


class Convention(str, enum.Enum):
    JFR = "jfr"
    BODY_FIXED = "body_fixed"
    SPATIAL = "spatial"


class JointKind(enum.Enum):
    REVOLUTE = "revolute"
    PRISMATIC = "prismatic"
    HELICAL = "helical"

    @classmethod
    def of_screw(cls, x, tol: float = 1e-12) -> "JointKind":
        if screw_kind(x) is ScrewKind.PRISMATIC:
            return cls.PRISMATIC
        return cls.REVOLUTE if abs(float(x[:3] @ x[3:])) <= tol else cls.HELICAL


@dataclass(frozen=True, eq=False)
class JfrJoint:
    s_pred: lg.Pose
    s_succ: lg.Pose
    z: np.ndarray


@dataclass(frozen=True, eq=False)
class BodyFixedJoint:
    b: lg.Pose
    x: np.ndarray


@dataclass(frozen=True, eq=False)
class SpatialJoint:
    a: lg.Pose
    y: np.ndarray


_JOINT_TYPES = {
    Convention.JFR: JfrJoint,
    Convention.BODY_FIXED: BodyFixedJoint,
    Convention.SPATIAL: SpatialJoint,
}


@dataclass(frozen=True, eq=False)
class MbsModel:
    parent: tuple
    joints: tuple
    convention: Convention
    names: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "parent", tuple(int(p) for p in self.parent))
        object.__setattr__(self, "joints", tuple(self.joints))
        object.__setattr__(self, "convention", Convention(self.convention))
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))

    @property
    def n(self) -> int:
        return len(self.parent)

    def name(self, i: int) -> str:
        if i == GROUND:
            return "ground"
        return self.names[i] if self.names else f"body{i + 1}"

    # -- convention views (computed once per model) --------------------------

    @cached_property
    def spatial(self) -> tuple:
        if self.convention is Convention.SPATIAL:
            return self.joints
        return _bf_to_spatial(self.parent, self.body_fixed)

    @cached_property
    def body_fixed(self) -> tuple:
        if self.convention is Convention.BODY_FIXED:
            return self.joints
        if self.convention is Convention.JFR:
            return tuple(_jfr_to_bf(j) for j in self.joints)
        return _spatial_to_bf(self.parent, self.joints)

    @cached_property
    def jfr(self) -> tuple:
        if self.convention is Convention.JFR:
            return self.joints
        return tuple(_bf_to_jfr(j) for j in self.body_fixed)

    # -- topology -------------------------------------------------------------

    @cached_property
    def paths(self) -> tuple:
        """Root-first ancestor chain of each body, the body itself included."""
        out = []
        for i, p in enumerate(self.parent):
            out.append((out[p] if p != GROUND else ()) + (i,))
        return tuple(out)

    @cached_property
    def children(self) -> tuple:
        kids = [[] for _ in range(self.n)]
        for i, p in enumerate(self.parent):
            if p != GROUND:
                kids[p].append(i)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def depth(self) -> int:
        """Number of bodies on the longest ground-to-leaf path."""
        return max((len(p) for p in self.paths), default=0)

    def is_ancestor(self, j: int, i: int) -> bool:
        """True when ``j`` lies on the path from the ground to ``i`` (inclusive)."""
        return j in self.paths[i]

    def joint_kinds(self) -> list:
        return [JointKind.of_screw(j.x) for j in self.body_fixed]


# -- conversions ---------------------------------------------------------------


def _jfr_to_bf(j: JfrJoint) -> BodyFixedJoint:
    b = lg.compose(j.s_pred, lg.inverse(j.s_succ))
    return BodyFixedJoint(b, lg.adjoint_pose_apply(j.s_succ, j.z))


def _bf_to_spatial(parent, joints) -> tuple:
    out = []
    for i, j in enumerate(joints):
        a = j.b if parent[i] == GROUND else lg.compose(out[parent[i]].a, j.b)
        out.append(SpatialJoint(a, lg.adjoint_pose_apply(a, j.x)))
    return tuple(out)


def _spatial_to_bf(parent, joints) -> tuple:
    out = []
    for i, j in enumerate(joints):
        b = j.a if parent[i] == GROUND else lg.relative(joints[parent[i]].a, j.a)
        out.append(BodyFixedJoint(b, lg.adjoint_inv_apply(j.a, j.y)))
    return tuple(out)


def frame_along(axis, origin) -> lg.Pose:
    """A pose whose 3-axis points along ``axis`` and whose origin is ``origin``."""
    e = np.asarray(axis, dtype=float)
    helper = np.eye(3)[int(np.argmin(np.abs(e)))]
    u = np.cross(helper, e)
    u /= np.linalg.norm(u)
    return lg.Pose(np.column_stack([u, np.cross(e, u), e]), origin)


def _bf_to_jfr(j: BodyFixedJoint) -> JfrJoint:
    g = decompose_screw(j.x)
    s_succ = frame_along(g.axis, g.point)
    z = lg.adjoint_inv_apply(s_succ, j.x)
    # canonical form (0,0,1,0,0,h) or (0,0,0,0,0,1); drop round-off
    z = np.where(np.abs(z) < 1e-15, 0.0, z)
    return JfrJoint(lg.compose(j.b, s_succ), s_succ, z)


def _convert(model: MbsModel, target: Convention) -> MbsModel:
    joints = {
        Convention.SPATIAL: model.spatial,
        Convention.BODY_FIXED: model.body_fixed,
        Convention.JFR: model.jfr,
    }[target]
    return MbsModel(model.parent, joints, target, model.names)


def from_jfr(model: MbsModel) -> MbsModel:
    """Body-fixed model ``B_i = S_pred S_succ^-1``, ``X_i = Ad_{S_succ} Z_i``."""
    if model.convention is not Convention.JFR:
        raise ValueError("from_jfr expects a model in the jfr convention")
    return _convert(model, Convention.BODY_FIXED)


def to_spatial(model: MbsModel) -> MbsModel:
    return _convert(model, Convention.SPATIAL)


def to_bodyfixed(model: MbsModel) -> MbsModel:
    return _convert(model, Convention.BODY_FIXED)


def to_jfr(model: MbsModel) -> MbsModel:
    """Synthesise joint frames with the 3-axis along each joint axis."""
    return _convert(model, Convention.JFR)


def xbar(model: MbsModel, i: int) -> np.ndarray:
    """Joint screw of body ``i`` represented in the body frame of its parent."""
    j = model.body_fixed[i]
    return lg.adjoint_pose_apply(j.b, j.x)


# -- validation ----------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    joint: int
    code: str
    message: str


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, joint: int, code: str, message: str) -> None:
        self.violations.append(Violation(joint, code, message))

    def __str__(self) -> str:
        if self.ok:
            return "model valid"
        return "\n".join(f"joint {v.joint}: [{v.code}] {v.message}" for v in self.violations)


def _check_screw(report, i, name, x, tol):
    x = np.asarray(x, dtype=float)
    if x.shape != (6,) or not np.all(np.isfinite(x)):
        report.add(i, "screw", f"{name} must be 6 finite numbers")
        return
    try:
        screw_kind(x, tol)
    except ValueError as exc:
        report.add(i, "unit-screw", f"{name}: {exc}")


def _check_pose(report, i, name, pose, tol):
    if not pose.is_valid(tol):
        report.add(i, "pose", f"{name} rotation is not orthonormal with det +1")


def validate(model: MbsModel, tol: float = 1e-9) -> ValidationReport:
    """Collect every structural and numerical violation; never raises."""
    report = ValidationReport()
    if len(model.joints) != model.n:
        report.add(-1, "topology", f"{model.n} parents but {len(model.joints)} joints")
    if model.names is not None and len(model.names) != model.n:
        report.add(-1, "names", "names length differs from body count")
    for i, p in enumerate(model.parent):
        if not GROUND <= p < i:
            report.add(i, "topology", f"parent {p} of body {i} violates parent < child ordering")
    kind = _JOINT_TYPES[model.convention]
    for i, j in enumerate(model.joints):
        if not isinstance(j, kind):
            report.add(i, "convention", f"expected {kind.__name__}, got {type(j).__name__}")
            continue
        if isinstance(j, JfrJoint):
            _check_pose(report, i, "s_pred", j.s_pred, tol)
            _check_pose(report, i, "s_succ", j.s_succ, tol)
            _check_screw(report, i, "z", j.z, tol)
        elif isinstance(j, BodyFixedJoint):
            _check_pose(report, i, "b", j.b, tol)
            _check_screw(report, i, "x", j.x, tol)
        else:
            _check_pose(report, i, "a", j.a, tol)
            _check_screw(report, i, "y", j.y, tol)
    return report
