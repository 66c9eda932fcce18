"""Forward kinematics, per-body Jacobians and twists in four representations.

Representations (measurement point, resolving frame):

=========  ============================  ===========================
rep        twist                         relation to body-fixed
=========  ============================  ===========================
body       (w_b, R^T dr/dt)              identity
spatial    (w_s, dr/dt + r x w_s)        ``Ad_C``
hybrid     (w_s, dr/dt)                  ``Ad_R``
mixed      (w_b, dr/dt)                  ``diag(I, R)``
=========  ============================  ===========================

All recursions run once over the bodies in topological order with the ground
as implicit base case (identity pose, zero twist).
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass

import numpy as np

from . import liegroup as lg
from .model import GROUND, MbsModel

_ZERO6 = np.zeros(6)


class TwistRep(str, enum.Enum):
    BODY = "body"
    SPATIAL = "spatial"
    HYBRID = "hybrid"
    MIXED = "mixed"


FK_METHODS = ("body_poe", "spatial_poe", "jfr")


@dataclass(frozen=True, eq=False)
class BodyTwists:
    rep: TwistRep
    twists: np.ndarray  # (n, 6)

    def stacked(self) -> np.ndarray:
        return self.twists.reshape(-1)


@dataclass(frozen=True, eq=False)
class BodyJacobian:
    """Jacobian of one body; only columns on its ground path are stored."""

    rep: TwistRep
    body: int
    support: tuple
    cols: np.ndarray  # (len(support), 6)

    def column(self, j: int) -> np.ndarray:
        if j in self.support:
            return self.cols[self.support.index(j)]
        return _ZERO6.copy()

    def dense(self, n: int) -> np.ndarray:
        out = np.zeros((6, n))
        out[:, list(self.support)] = self.cols.T
        return out


def _check_q(model: MbsModel, q, name: str = "q") -> np.ndarray:
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.shape[0] != model.n:
        raise ValueError(f"{name} has length {q.shape[0]}, model has {model.n} joints")
    return q


# -- forward kinematics ---------------------------------------------------------


def fk(model: MbsModel, q, method: str = "spatial_poe") -> list:
    """Absolute poses ``C_i(q)`` of all bodies."""
    q = _check_q(model, q)
    parent = model.parent
    out = []
    if method == "body_poe":
        for i, j in enumerate(model.body_fixed):
            rel = lg.compose(j.b, lg.se3_exp(j.x, q[i]))
            out.append(rel if parent[i] == GROUND else lg.compose(out[parent[i]], rel))
    elif method == "spatial_poe":
        motion = []
        for i, j in enumerate(model.spatial):
            e = lg.se3_exp(j.y, q[i])
            if parent[i] != GROUND:
                e = lg.compose(motion[parent[i]], e)
            motion.append(e)
            out.append(lg.compose(e, j.a))
    elif method == "jfr":
        for i, j in enumerate(model.jfr):
            rel = lg.compose(lg.compose(j.s_pred, lg.se3_exp(j.z, q[i])), lg.inverse(j.s_succ))
            out.append(rel if parent[i] == GROUND else lg.compose(out[parent[i]], rel))
    else:
        raise ValueError(f"unknown fk method {method!r}; expected one of {FK_METHODS}")
    return out


class KinematicState:
    """Per-configuration workspace: poses plus lazily cached joint screws.

    One instance belongs to one evaluation; it is never shared or mutated
    after the caches are filled.
    """

    def __init__(self, model: MbsModel, q, method: str = "body_poe"):
        self.model = model
        self.q = _check_q(model, q)
        self.poses = fk(model, self.q, method)
        self._spatial = None
        self._hybrid = None

    def pose(self, i: int) -> lg.Pose:
        return lg.Pose.identity() if i == GROUND else self.poses[i]

    def rel(self, i: int, j: int) -> lg.Pose:
        """``C_{i,j} = C_i^-1 C_j`` (ground allowed on either side)."""
        return lg.relative(self.pose(i), self.pose(j))

    @property
    def spatial_screws(self) -> np.ndarray:
        """Instantaneous joint screws in spatial representation, ``Ad_{C_j} X_j``.

        Identical for every body whose path contains joint ``j``.
        """
        if self._spatial is None:
            self._spatial = np.array(
                [lg.adjoint_pose_apply(c, j.x) for c, j in zip(self.poses, self.model.body_fixed)]
            ).reshape(-1, 6)
        return self._spatial

    @property
    def hybrid_screws(self) -> np.ndarray:
        """Joint screws measured at their own body frame, resolved in the IFR."""
        if self._hybrid is None:
            self._hybrid = np.array(
                [
                    np.concatenate([c.rot @ j.x[:3], c.rot @ j.x[3:]])
                    for c, j in zip(self.poses, self.model.body_fixed)
                ]
            ).reshape(-1, 6)
        return self._hybrid


def _state(model, q, state) -> KinematicState:
    return state if state is not None else KinematicState(model, q)


# -- per-body Jacobians ---------------------------------------------------------


def body_jacobian(model, q, i: int, method: str = "recursive", state=None) -> BodyJacobian:
    """Columns ``Ad_{C_{i,j}} X_j`` for every joint ``j`` on the path to ``i``."""
    st = _state(model, q, state)
    path = model.paths[i]
    bf = model.body_fixed
    if method == "direct":
        cols = [lg.adjoint_pose_apply(st.rel(i, j), bf[j].x) for j in path]
    elif method == "alt":
        sp = model.spatial
        cols = [
            lg.adjoint_pose_apply(lg.compose(st.rel(i, j), lg.inverse(sp[j].a)), sp[j].y)
            for j in path
        ]
    elif method == "recursive":
        cols = []
        for k in path:
            c_pk = st.rel(model.parent[k], k)
            cols = [lg.adjoint_inv_apply(c_pk, col) for col in cols]
            cols.append(bf[k].x.copy())
    else:
        raise ValueError(f"unknown method {method!r}")
    return BodyJacobian(TwistRep.BODY, i, path, np.array(cols).reshape(-1, 6))


def spatial_jacobian(model, q, i: int, method: str = "cached", state=None) -> BodyJacobian:
    """Columns ``Ad_{C_j A_j^-1} Y_j``; column ``j`` is the same for all bodies."""
    st = _state(model, q, state)
    path = model.paths[i]
    if method == "cached":
        cols = st.spatial_screws[list(path)]
    elif method == "direct":
        sp = model.spatial
        cols = np.array(
            [lg.adjoint_pose_apply(lg.compose(st.poses[j], lg.inverse(sp[j].a)), sp[j].y) for j in path]
        )
    else:
        raise ValueError(f"unknown method {method!r}")
    return BodyJacobian(TwistRep.SPATIAL, i, path, np.asarray(cols).reshape(-1, 6))


def hybrid_jacobian(model, q, i: int, method: str = "recursive", state=None) -> BodyJacobian:
    """Columns ``Ad_{r_j - r_i} X^h_j`` (shift of reference point only)."""
    st = _state(model, q, state)
    path = model.paths[i]
    xh = st.hybrid_screws
    if method == "direct":
        ri = st.poses[i].pos
        cols = [lg.shift_apply(st.poses[j].pos - ri, xh[j]) for j in path]
    elif method == "recursive":
        cols = []
        for k in path:
            d = st.pose(model.parent[k]).pos - st.poses[k].pos
            cols = [lg.shift_apply(d, col) for col in cols]
            cols.append(xh[k].copy())
    else:
        raise ValueError(f"unknown method {method!r}")
    return BodyJacobian(TwistRep.HYBRID, i, path, np.array(cols).reshape(-1, 6))


def _mixed_step(r_kp: np.ndarray, p: lg.Pose, c: lg.Pose, x: np.ndarray) -> np.ndarray:
    """Propagate a mixed screw from parent ``p`` to child ``c``.

    ``[[R_{c,p}, 0], [skew(r_{c,p}) R_p, I]]`` applied to ``x``.
    """
    w_ifr = p.rot @ x[:3]
    return np.concatenate([c.rot.T @ w_ifr, x[3:] + np.cross(r_kp, w_ifr)])


def mixed_jacobian(model, q, i: int, method: str = "recursive", state=None) -> BodyJacobian:
    """Columns ``[[R_i^T, 0], [skew(r_{i,j}), I]] X^h_j``."""
    st = _state(model, q, state)
    path = model.paths[i]
    xh = st.hybrid_screws
    if method == "direct":
        ci = st.poses[i]
        cols = [
            np.concatenate([ci.rot.T @ xh[j][:3], xh[j][3:] + np.cross(st.poses[j].pos - ci.pos, xh[j][:3])])
            for j in path
        ]
    elif method == "recursive":
        cols = []
        for k in path:
            p, c = st.pose(model.parent[k]), st.poses[k]
            d = p.pos - c.pos
            cols = [_mixed_step(d, p, c, col) for col in cols]
            cols.append(np.concatenate([c.rot.T @ xh[k][:3], xh[k][3:]]))
    else:
        raise ValueError(f"unknown method {method!r}")
    return BodyJacobian(TwistRep.MIXED, i, path, np.array(cols).reshape(-1, 6))


_JACOBIANS = {
    TwistRep.BODY: body_jacobian,
    TwistRep.SPATIAL: spatial_jacobian,
    TwistRep.HYBRID: hybrid_jacobian,
    TwistRep.MIXED: mixed_jacobian,
}


def jacobian(model, q, i: int, rep, state=None) -> BodyJacobian:
    return _JACOBIANS[TwistRep(rep)](model, q, i, state=state)


# -- twist recursions -----------------------------------------------------------


def twists(model: MbsModel, q, qdot, rep=TwistRep.BODY, counter: Counter | None = None,
           state: KinematicState | None = None) -> BodyTwists:
    """Twists of all bodies from one topological sweep (no Jacobians formed).

    ``counter``, when given, accumulates the primitive operations of the
    sweep (``adjoint``, ``rotation``, ``cross``, ``scale``, ``add``) and of the
    per-joint screw preparation (``setup_*`` keys).
    """
    rep = TwistRep(rep)
    st = _state(model, q, state)
    qd = _check_q(model, qdot, "qdot")
    parent = model.parent
    poses = st.poses
    bf = model.body_fixed
    n = model.n
    out = np.empty((n, 6))
    cnt = counter if counter is not None else None

    if rep is TwistRep.BODY:
        for i in range(n):
            p = parent[i]
            vp = out[p] if p != GROUND else _ZERO6
            c_pi = lg.relative(poses[p], poses[i]) if p != GROUND else poses[i]
            out[i] = lg.adjoint_inv_apply(c_pi, vp) + bf[i].x * qd[i]
            if cnt is not None:
                cnt.update(adjoint=1, scale=1, add=1)
    elif rep is TwistRep.SPATIAL:
        js = st.spatial_screws
        if cnt is not None:
            cnt.update(setup_adjoint=n)
        for i in range(n):
            p = parent[i]
            out[i] = js[i] * qd[i] if p == GROUND else out[p] + js[i] * qd[i]
            if cnt is not None:
                cnt.update(scale=1, add=1)
    elif rep is TwistRep.HYBRID:
        xh = st.hybrid_screws
        if cnt is not None:
            cnt.update(setup_rotation=2 * n)
        for i in range(n):
            p = parent[i]
            vp = out[p] if p != GROUND else _ZERO6
            rp = poses[p].pos if p != GROUND else _ZERO6[:3]
            out[i] = lg.shift_apply(rp - poses[i].pos, vp) + xh[i] * qd[i]
            if cnt is not None:
                cnt.update(cross=1, scale=1, add=1)
    else:
        xh = st.hybrid_screws
        if cnt is not None:
            cnt.update(setup_rotation=2 * n + n)
        ground = lg.Pose.identity()
        for i in range(n):
            p = parent[i]
            pp = poses[p] if p != GROUND else ground
            vp = out[p] if p != GROUND else _ZERO6
            c = poses[i]
            jm = np.concatenate([c.rot.T @ xh[i][:3], xh[i][3:]])
            out[i] = _mixed_step(pp.pos - c.pos, pp, c, vp) + jm * qd[i]
            if cnt is not None:
                cnt.update(rotation=2, cross=1, scale=1, add=1)
    return BodyTwists(rep, out)


def op_counter(model: MbsModel, q, qdot) -> dict:
    """Primitive-operation counts of one twist sweep for every representation."""
    st = KinematicState(model, q)
    report = {}
    for rep in TwistRep:
        c = Counter()
        twists(model, q, qdot, rep, counter=c, state=st)
        report[rep.value] = dict(sorted(c.items()))
    return report


# -- conversions between representations ----------------------------------------


def _blocks(a, b, c, d) -> np.ndarray:
    return np.block([[a, b], [c, d]])


def conversion_matrix(rep_from, rep_to, pose: lg.Pose) -> np.ndarray:
    """6x6 map taking a twist of a body with absolute pose ``pose`` from one
    representation to another."""
    f, t = TwistRep(rep_from), TwistRep(rep_to)
    r, p = pose.rot, pose.pos
    z, i3 = np.zeros((3, 3)), np.eye(3)
    S, B, H, M = TwistRep.SPATIAL, TwistRep.BODY, TwistRep.HYBRID, TwistRep.MIXED
    if f is t:
        return np.eye(6)
    table = {
        (B, S): lambda: lg.adjoint(pose),
        (H, S): lambda: lg.adjoint_trans(p),
        (M, S): lambda: _blocks(r, z, lg.skew(p) @ r, i3),
        (S, B): lambda: lg.adjoint_inv(pose),
        (H, B): lambda: lg.adjoint_rot(r.T),
        (M, B): lambda: _blocks(i3, z, z, r.T),
        (S, H): lambda: lg.adjoint_trans(-p),
        (B, H): lambda: lg.adjoint_rot(r),
        (M, H): lambda: _blocks(r, z, z, i3),
        (S, M): lambda: _blocks(r.T, z, -lg.skew(p), i3),
        (B, M): lambda: _blocks(i3, z, z, r),
        (H, M): lambda: _blocks(r.T, z, z, i3),
    }
    return table[(f, t)]()


def convert_twist(v, rep_from, rep_to, pose: lg.Pose) -> np.ndarray:
    return conversion_matrix(rep_from, rep_to, pose) @ np.asarray(v, dtype=float)


def convert_twists(tw: BodyTwists, rep_to, poses) -> BodyTwists:
    rep_to = TwistRep(rep_to)
    out = np.array([convert_twist(v, tw.rep, rep_to, c) for v, c in zip(tw.twists, poses)])
    return BodyTwists(rep_to, out.reshape(-1, 6))


def relative_twist(model, q, qdot, i: int, j: int, state=None) -> np.ndarray:
    """Twist of body ``i`` relative to body ``j``, represented in the frame of ``j``.

    ``Ad_{C_j}^-1 (V_i^s - V_j^s)``; ``j == GROUND`` gives the spatial twist.
    """
    st = _state(model, q, state)
    vs = twists(model, q, qdot, TwistRep.SPATIAL, state=st).twists
    vi = vs[i] if i != GROUND else _ZERO6
    vj = vs[j] if j != GROUND else _ZERO6
    return lg.adjoint_inv_apply(st.pose(j), vi - vj)
