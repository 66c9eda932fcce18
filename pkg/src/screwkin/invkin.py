"""Joint rates from prescribed twists of all bodies (velocity-level IK).

Each rate is the projection of the relative twist of a body w.r.t. its
parent onto the joint screw, ``X_i . (V_i - Ad_{C_i,p} V_p) / |X_i|^2``,
evaluated in one sweep.  The 6-vector dot product used here is a co-screw
pairing that depends on the chosen body frames; it is not a frame-invariant
inner product on se(3).

For consistent twists the sweep recovers the rates exactly.  For
inconsistent twists it minimises ``|(I - D) V - X qdot|`` joint by joint,
which in general differs from the least-squares solution of
``min |J qdot - V|``; :func:`lstsq_gap` measures the difference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import liegroup as lg
from .kinematics import BodyTwists, KinematicState, TwistRep, convert_twist, twists
from .model import GROUND, MbsModel

CONSISTENCY_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class RateSolution:
    qdot: np.ndarray
    residual: np.ndarray  # 6n, body-fixed: V^b - J^b qdot
    residual_norm: float
    consistent: bool


def _to_body(v, rep: TwistRep, pose: lg.Pose) -> np.ndarray:
    return v if rep is TwistRep.BODY else convert_twist(v, rep, TwistRep.BODY, pose)


def per_joint_rate(model: MbsModel, q, i: int, v_i, v_parent, rep=TwistRep.BODY, state=None) -> float:
    """Rate of joint ``i`` from the twists of body ``i`` and its parent.

    ``v_parent`` is ignored (taken as zero) when the parent is the ground.
    """
    rep = TwistRep(rep)
    st = state if state is not None else KinematicState(model, q)
    p = model.parent[i]
    x = model.body_fixed[i].x
    v_i = np.asarray(v_i, dtype=float)
    vp = np.zeros(6) if p == GROUND else np.asarray(v_parent, dtype=float)
    if rep is TwistRep.SPATIAL:
        rel = lg.adjoint_inv_apply(st.poses[i], v_i - vp)
    else:
        vb_i = _to_body(v_i, rep, st.poses[i])
        if p == GROUND:
            rel = vb_i
        else:
            vb_p = _to_body(vp, rep, st.poses[p])
            rel = vb_i - lg.adjoint_inv_apply(st.rel(p, i), vb_p)
    return float(x @ rel) / float(x @ x)


def rates_from_twists(model: MbsModel, q, tw: BodyTwists, rtol: float = CONSISTENCY_RTOL,
                      state=None) -> RateSolution:
    """Joint rates from the twists of all bodies in any representation."""
    st = state if state is not None else KinematicState(model, q)
    v = np.asarray(tw.twists, dtype=float).reshape(model.n, 6)
    rep = TwistRep(tw.rep)
    if rep is TwistRep.MIXED:
        v = np.array([_to_body(x, rep, c) for x, c in zip(v, st.poses)])
        rep = TwistRep.BODY
    qdot = np.array(
        [per_joint_rate(model, q, i, v[i], v[p] if p != GROUND else None, rep, st)
         for i, p in enumerate(model.parent)]
    )
    vb = v if rep is TwistRep.BODY else np.array([_to_body(x, rep, c) for x, c in zip(v, st.poses)])
    residual = (vb - twists(model, q, qdot, TwistRep.BODY, state=st).twists).reshape(-1)
    norm = float(np.linalg.norm(residual))
    return RateSolution(qdot, residual, norm, norm <= rtol * (1.0 + float(np.linalg.norm(vb))))


def lstsq_gap(sweep_qdot, lstsq_qdot) -> float:
    """Largest componentwise difference between sweep and least-squares rates."""
    return float(np.max(np.abs(np.asarray(sweep_qdot) - np.asarray(lstsq_qdot)), initial=0.0))
