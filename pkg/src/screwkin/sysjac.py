"""Stacked system objects: system twist, system Jacobian factorizations and
the closed-form inverses of the block-triangular transport matrices.

Dense ``6n x 6n`` arrays are built on demand for analysis and verification
only; the recursive sweeps in :mod:`screwkin.kinematics` never form them.
Block ``(i, j)`` of every transport matrix is nonzero iff ``j`` lies on the
ground path of ``i``; structural zeros are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import liegroup as lg
from .kinematics import KinematicState, TwistRep, twists
from .model import GROUND, MbsModel


@dataclass(frozen=True, eq=False)
class SystemFactorization:
    """``J = A @ X`` with ``A = (I - D)^-1`` for body, hybrid and mixed reps.

    For the spatial rep ``A = A^s``, ``X = Y^s`` and ``D`` is the bare
    connectivity pattern (identity parent blocks); the two further
    factorizations ``A^sb X^b`` and ``A^sh X^h`` are kept in ``alternatives``.
    """

    rep: TwistRep
    A: np.ndarray
    X: np.ndarray
    D: np.ndarray
    depth: int
    alternatives: dict = field(default_factory=dict)

    @property
    def J(self) -> np.ndarray:
        return self.A @ self.X


def _blk(i: int) -> slice:
    return slice(6 * i, 6 * i + 6)


def block(m: np.ndarray, i: int, j: int) -> np.ndarray:
    """Block ``(i, j)`` of a ``6n``-row matrix (6x6, or 6x1 for screw matrices)."""
    if m.shape[1] == m.shape[0]:
        return m[_blk(i), _blk(j)]
    return m[_blk(i), j]


def _screw_diag(cols) -> np.ndarray:
    n = len(cols)
    out = np.zeros((6 * n, n))
    for i, c in enumerate(cols):
        out[_blk(i), i] = c
    return out


def _subdiag(model: MbsModel, blocks) -> np.ndarray:
    n = model.n
    out = np.zeros((6 * n, 6 * n))
    for i, p in enumerate(model.parent):
        if p != GROUND:
            out[_blk(i), _blk(p)] = blocks[i]
    return out


def _ancestor_blocks(model: MbsModel, fn) -> np.ndarray:
    n = model.n
    out = np.zeros((6 * n, 6 * n))
    for i, path in enumerate(model.paths):
        for j in path:
            out[_blk(i), _blk(j)] = fn(i, j)
    return out


def nilpotent_expand(d: np.ndarray, depth: int | None = None) -> np.ndarray:
    """``(I - D)^-1`` as the terminating series ``I + D + D^2 + ...``.

    Stops after ``depth - 1`` powers when ``depth`` is given, otherwise at the
    first power that is exactly zero.
    """
    a = np.eye(d.shape[0])
    term = a
    k = 0
    while True:
        k += 1
        if depth is not None and k >= depth:
            break
        term = term @ d
        if not np.any(term):
            break
        a = a + term
    return a


def nilpotency_index(d: np.ndarray) -> int:
    """Smallest ``k`` with ``D^k == 0`` exactly."""
    term = np.eye(d.shape[0])
    k = 0
    while np.any(term):
        term = term @ d
        k += 1
        if k > d.shape[0]:
            raise ValueError("matrix is not nilpotent")
    return k


def _mixed_transport(pp: lg.Pose, c: lg.Pose) -> np.ndarray:
    """Mixed-rep parent-to-child block ``[[R_c^T R_p, 0], [skew(r_p - r_c) R_p, I]]``."""
    out = np.eye(6)
    out[:3, :3] = c.rot.T @ pp.rot
    out[3:, :3] = lg.skew(pp.pos - c.pos) @ pp.rot
    return out


def system_jacobian(model: MbsModel, q, rep=TwistRep.BODY, state=None):
    """Dense system Jacobian ``(6n, n)`` and its factorization."""
    rep = TwistRep(rep)
    st = state if state is not None else KinematicState(model, q)
    poses = st.poses
    parent = model.parent
    bf = model.body_fixed
    ground = lg.Pose.identity()
    pp = [poses[p] if p != GROUND else ground for p in parent]

    if rep is TwistRep.BODY:
        d = _subdiag(model, [lg.adjoint_inv(st.rel(p, i)) for i, p in enumerate(parent)])
        fact = SystemFactorization(rep, nilpotent_expand(d), _screw_diag([j.x for j in bf]), d, model.depth)
    elif rep is TwistRep.HYBRID:
        t = _subdiag(model, [lg.adjoint_trans(pp[i].pos - poses[i].pos) for i in range(model.n)])
        fact = SystemFactorization(rep, nilpotent_expand(t), _screw_diag(st.hybrid_screws), t, model.depth)
    elif rep is TwistRep.MIXED:
        d = _subdiag(model, [_mixed_transport(pp[i], poses[i]) for i in range(model.n)])
        xm = [np.concatenate([c.rot.T @ x[:3], x[3:]]) for c, x in zip(poses, st.hybrid_screws)]
        fact = SystemFactorization(rep, nilpotent_expand(d), _screw_diag(xm), d, model.depth)
    else:
        sp = model.spatial
        motion = [lg.adjoint(lg.compose(poses[j], lg.inverse(sp[j].a))) for j in range(model.n)]
        ad_c = [lg.adjoint(c) for c in poses]
        a_s = _ancestor_blocks(model, lambda i, j: motion[j])
        a_sb = _ancestor_blocks(model, lambda i, j: ad_c[j])
        a_sh = _ancestor_blocks(model, lambda i, j: lg.adjoint_trans(poses[j].pos))
        conn = _subdiag(model, [np.eye(6)] * model.n)
        fact = SystemFactorization(
            rep, a_s, _screw_diag([j.y for j in sp]), conn, model.depth,
            alternatives={
                "sb": (a_sb, _screw_diag([j.x for j in bf])),
                "sh": (a_sh, _screw_diag(st.hybrid_screws)),
            },
        )
    return fact.J, fact


def block_diag_adjoints(poses, inverse: bool = False) -> np.ndarray:
    """``diag(Ad_{C_1}, ..., Ad_{C_n})`` (or of the inverses)."""
    n = len(poses)
    out = np.zeros((6 * n, 6 * n))
    for i, c in enumerate(poses):
        out[_blk(i), _blk(i)] = lg.adjoint_inv(c) if inverse else lg.adjoint(c)
    return out


def closed_form_inverse(fact: SystemFactorization, poses=None) -> np.ndarray:
    """Inverse of the transport matrix without a linear solve.

    Body, hybrid and mixed: ``I - D``.  Spatial: the inverse of ``A^sb``,
    ``(I - D^b) diag(Ad_{C_i}^-1)``, whose diagonal blocks are
    ``Ad_{C_i}^-1`` and whose parent blocks are ``-Ad_{C_i}^-1``; this needs
    the body poses.
    """
    if fact.rep is not TwistRep.SPATIAL:
        return np.eye(fact.D.shape[0]) - fact.D
    if poses is None:
        raise ValueError("spatial inverse needs the body poses")
    n = len(poses)
    out = np.zeros((6 * n, 6 * n))
    conn = fact.D
    for i, c in enumerate(poses):
        inv = lg.adjoint_inv(c)
        out[_blk(i), _blk(i)] = inv
        for p in np.flatnonzero(conn[6 * i, ::6]):
            out[_blk(i), _blk(int(p))] = -inv
    return out


def system_twist(model: MbsModel, q, qdot, rep=TwistRep.BODY) -> np.ndarray:
    """Stacked ``6n`` twist vector from the recursive sweep."""
    return twists(model, q, qdot, rep).stacked()
