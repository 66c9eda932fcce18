"""Brute-force reference implementations used only for verification.

Nothing here calls the recursive kinematics, the Jacobian code or the
closed-form exponential of :mod:`screwkin.liegroup`.  Poses are plain 4x4
matrices, exponentials come from ``scipy.linalg.expm`` and adjoint actions
are evaluated by matrix conjugation ``C hat(x) C^-1``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm

from .model import MbsModel

FD_STEP = 1e-6


def _hat(x) -> np.ndarray:
    w, v = x[:3], x[3:]
    return np.array(
        [
            [0.0, -w[2], w[1], v[0]],
            [w[2], 0.0, -w[0], v[1]],
            [-w[1], w[0], 0.0, v[2]],
            [0.0, 0.0, 0.0, 0.0],
        ]
    )


def _vee(m) -> np.ndarray:
    return np.array([m[2, 1], m[0, 2], m[1, 0], m[0, 3], m[1, 3], m[2, 3]])


def _vee_so3(m) -> np.ndarray:
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def _conj(c: np.ndarray, x) -> np.ndarray:
    return _vee(c @ _hat(x) @ np.linalg.inv(c))


def naive_fk(model: MbsModel, q) -> list:
    """4x4 poses from an independent matrix chain per body (no reuse)."""
    q = np.asarray(q, dtype=float)
    jfr = model.jfr
    out = []
    for path in model.paths:
        c = np.eye(4)
        for k in path:
            j = jfr[k]
            c = c @ j.s_pred.matrix() @ expm(_hat(j.z) * q[k]) @ np.linalg.inv(j.s_succ.matrix())
        out.append(c)
    return out


def _fd_column(rep: str, c: np.ndarray, c_inv: np.ndarray, dc: np.ndarray) -> np.ndarray:
    if rep == "body":
        return _vee(c_inv @ dc)
    if rep == "spatial":
        return _vee(dc @ c_inv)
    if rep == "hybrid":
        return np.concatenate([_vee_so3(dc[:3, :3] @ c[:3, :3].T), dc[:3, 3]])
    if rep == "mixed":
        return np.concatenate([_vee_so3(c[:3, :3].T @ dc[:3, :3]), dc[:3, 3]])
    raise ValueError(f"unknown representation {rep!r}")


def fd_jacobians(model: MbsModel, q, reps=("body", "spatial", "hybrid", "mixed"),
                 step: float = FD_STEP) -> dict:
    """Central-difference Jacobians of all bodies, ``rep -> (n_bodies, n, 6)``.

    Each perturbation evaluates the matrix chain once for every body, so this
    is the cheap way to check a whole model.
    """
    reps = [getattr(r, "value", r) for r in reps]
    q = np.asarray(q, dtype=float)
    n = model.n
    base = naive_fk(model, q)
    inv = [np.linalg.inv(c) for c in base]
    out = {r: np.zeros((n, n, 6)) for r in reps}
    for j in range(n):
        dq = np.zeros_like(q)
        dq[j] = step
        plus, minus = naive_fk(model, q + dq), naive_fk(model, q - dq)
        for i in range(n):
            dc = (plus[i] - minus[i]) / (2.0 * step)
            for r in reps:
                out[r][i, j] = _fd_column(r, base[i], inv[i], dc)
    return out


def fd_body_jacobian(model: MbsModel, q, i: int, rep: str, step: float = FD_STEP) -> np.ndarray:
    """Central-difference Jacobian of body ``i`` as ``(n, 6)`` columns.

    ``rep`` is one of ``body``, ``spatial``, ``hybrid``, ``mixed``.
    """
    rep = getattr(rep, "value", rep)
    q = np.asarray(q, dtype=float)
    c = naive_fk(model, q)[i]
    c_inv = np.linalg.inv(c)
    cols = np.zeros((model.n, 6))
    for j in range(model.n):
        dq = np.zeros_like(q)
        dq[j] = step
        dc = (naive_fk(model, q + dq)[i] - naive_fk(model, q - dq)[i]) / (2.0 * step)
        cols[j] = _fd_column(rep, c, c_inv, dc)
    return cols


def conjugation_body_jacobian(model: MbsModel, q) -> np.ndarray:
    """Dense ``(6n, n)`` body-fixed system Jacobian by matrix conjugation.

    Column block ``(i, j)`` is ``vee(C_i^-1 C_j hat(X_j) C_j^-1 C_i)`` for
    ancestors ``j`` of ``i``, zero otherwise.
    """
    poses = naive_fk(model, q)
    jfr = model.jfr
    n = model.n
    out = np.zeros((6 * n, n))
    for i, path in enumerate(model.paths):
        c_inv = np.linalg.inv(poses[i])
        for j in path:
            x_j = _conj(jfr[j].s_succ.matrix(), jfr[j].z)
            out[6 * i:6 * i + 6, j] = _conj(c_inv @ poses[j], x_j)
    return out


def lstsq_rates(model: MbsModel, q, vb) -> np.ndarray:
    """Least-squares rates ``min |J^b qdot - V^b|`` via the normal equations."""
    j = conjugation_body_jacobian(model, q)
    v = np.asarray(vb, dtype=float).reshape(-1)
    return np.linalg.solve(j.T @ j, j.T @ v)


def series_exp(v, terms: int = 30) -> np.ndarray:
    """Truncated power series of the 4x4 matrix exponential."""
    m = _hat(np.asarray(v, dtype=float))
    out = np.eye(4)
    term = np.eye(4)
    for k in range(1, terms):
        term = term @ m / k
        out = out + term
    return out


# -- closed forms of the RCM example mechanism ---------------------------------
# Derived by hand from the planar structure of joints 1-3 (rotations about z
# through (0,0), (-d2,0), (d3,0)) and the inclined joint 4.


def rcm_c3(p: dict, q) -> np.ndarray:
    q1, q2, q3 = q[0], q[1], q[2]
    c1, s1 = math.cos(q1), math.sin(q1)
    c12, s12 = math.cos(q1 + q2), math.sin(q1 + q2)
    c123, s123 = math.cos(q1 + q2 + q3), math.sin(q1 + q2 + q3)
    d2, d3, x3, z3 = p["d2"], p["d3"], p["x3"], p["z3"]
    return np.array(
        [
            [c123, -s123, 0.0, -d2 * c1 + (d2 + d3) * c12 + (x3 - d3) * c123],
            [s123, c123, 0.0, -d2 * s1 + (d2 + d3) * s12 + (x3 - d3) * s123],
            [0.0, 0.0, 1.0, z3],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def rcm_body_jacobian3(p: dict, q) -> np.ndarray:
    """``(6, 5)`` body-fixed Jacobian of body 3."""
    q2, q3 = q[1], q[2]
    s3, c3 = math.sin(q3), math.cos(q3)
    s23, c23 = math.sin(q2 + q3), math.cos(q2 + q3)
    d2, d3, x3 = p["d2"], p["d3"], p["x3"]
    out = np.zeros((6, 5))
    out[2, :3] = 1.0
    out[3, 0] = (d2 + d3) * s3 - d2 * s23
    out[4, 0] = (d2 + d3) * c3 + x3 - d3 - d2 * c23
    out[3, 1] = (d2 + d3) * s3
    out[4, 1] = (d2 + d3) * c3 + x3 - d3
    out[4, 2] = x3 - d3
    return out


def rcm_spatial_screws(p: dict, q) -> np.ndarray:
    """Rows: instantaneous spatial screws of joints 1..4."""
    q1, q2, q3 = q[0], q[1], q[2]
    c1, s1 = math.cos(q1), math.sin(q1)
    c12, s12 = math.cos(q1 + q2), math.sin(q1 + q2)
    c123, s123 = math.cos(q1 + q2 + q3), math.sin(q1 + q2 + q3)
    s3, s23 = math.sin(q3), math.sin(q2 + q3)
    d2, d3, l4 = p["d2"], p["d3"], p["d4"] + p["h4"]
    r = 1.0 / math.sqrt(2.0)
    return np.array(
        [
            [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, -d2 * s1, d2 * c1, 0.0],
            [0.0, 0.0, 1.0, (d2 + d3) * s12 - d2 * s1, d2 * c1 - (d2 + d3) * c12, 0.0],
            [
                -r * c123,
                -r * s123,
                r,
                r * ((d2 + d3) * s12 - d2 * s1 + (l4 - d3) * s123),
                r * (d2 * c1 - (d2 + d3) * c12 + (d3 - l4) * c123),
                r * (d2 * s23 - (d2 + d3) * s3),
            ],
        ]
    )
