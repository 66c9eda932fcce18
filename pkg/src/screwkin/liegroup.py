"""Rigid-motion group SE(3), its Lie algebra se(3), exponential maps and adjoints.

Conventions
-----------
* A pose is ``Pose(rot, pos)`` and acts on points as ``s = pos + rot @ b``.
* Screw coordinates are 6-vectors ``(angular; linear)``.
* ``Ad_C = [[R, 0], [skew(r) R, R]]`` maps screw coordinates represented in
  the moving frame to the reference frame.

Rotations are plain ``(3, 3)`` arrays, screws ``(6,)`` arrays and adjoint maps
``(6, 6)`` arrays.  Hot-path functions do not validate their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_I3 = np.eye(3)
_SMALL_ANGLE = 1e-4
_UNIT_TOL = 1e-9


def skew(v) -> np.ndarray:
    """Skew-symmetric matrix with ``skew(v) @ w == cross(v, w)``."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def unskew(m: np.ndarray) -> np.ndarray:
    """Inverse of :func:`skew` (antisymmetric part only)."""
    return 0.5 * np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])


def hat(x) -> np.ndarray:
    """4x4 matrix form of a screw ``(w, v)``."""
    out = np.zeros((4, 4))
    out[:3, :3] = skew(x[:3])
    out[:3, 3] = x[3:]
    return out


def vee(m: np.ndarray) -> np.ndarray:
    """Inverse of :func:`hat`."""
    return np.concatenate([unskew(m[:3, :3]), m[:3, 3]])


def _sinc(t: float) -> float:
    if t < _SMALL_ANGLE:
        return 1.0 - t * t / 6.0
    return math.sin(t) / t


def _half_sinc_sq(t: float) -> float:
    # 0.5 * sinc(t/2)**2 == (1 - cos t) / t**2
    if t < _SMALL_ANGLE:
        return 0.5 - t * t / 24.0
    s = math.sin(0.5 * t) / (0.5 * t)
    return 0.5 * s * s


def so3_exp(xi) -> np.ndarray:
    """Rotation matrix of the scaled axis ``xi`` (Euler-Rodrigues, sinc form)."""
    xi = np.asarray(xi, dtype=float)
    t = math.sqrt(float(xi @ xi))
    k = skew(xi)
    return _I3 + _sinc(t) * k + _half_sinc_sq(t) * (k @ k)


def so3_log(r: np.ndarray) -> np.ndarray:
    """Scaled rotation axis of ``r`` with angle in ``[0, pi]``.

    At angle pi the axis is taken from the largest diagonal entry of
    ``(R + I) / 2`` and its first nonzero component is made positive.
    """
    r = np.asarray(r, dtype=float)
    w = unskew(r)
    s = math.sqrt(float(w @ w))
    c = 0.5 * (r[0, 0] + r[1, 1] + r[2, 2] - 1.0)
    theta = math.atan2(s, c)
    if theta < 1e-12:
        return w
    if c > -0.9:
        return w * (theta / s)
    # near pi: e e^T = (sym(R) - cos I) / (1 - cos)
    m = (0.5 * (r + r.T) - c * _I3) / (1.0 - c)
    k = int(np.argmax(np.diag(m)))
    e = m[:, k] / math.sqrt(m[k, k])
    e /= np.linalg.norm(e)
    d = float(e @ w)
    if abs(d) > 1e-14:
        if d < 0:
            e = -e
    else:
        first = e[np.flatnonzero(np.abs(e) > 1e-12)[0]]
        if first < 0:
            e = -e
    return e * theta


@dataclass(frozen=True, eq=False)
class Pose:
    """Element of SE(3) stored as rotation matrix and position vector."""

    rot: np.ndarray
    pos: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rot", np.asarray(self.rot, dtype=float).reshape(3, 3))
        object.__setattr__(self, "pos", np.asarray(self.pos, dtype=float).reshape(3))

    @classmethod
    def identity(cls) -> "Pose":
        return cls(_I3, np.zeros(3))

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "Pose":
        m = np.asarray(m, dtype=float)
        return cls(m[:3, :3], m[:3, 3])

    def matrix(self) -> np.ndarray:
        out = np.eye(4)
        out[:3, :3] = self.rot
        out[:3, 3] = self.pos
        return out

    def __matmul__(self, other: "Pose") -> "Pose":
        return compose(self, other)

    def __repr__(self) -> str:
        return f"Pose(rot={self.rot.tolist()}, pos={self.pos.tolist()})"

    def is_valid(self, tol: float = 1e-12) -> bool:
        """Orthonormality and orientation check of the rotation block."""
        r = self.rot
        return bool(
            np.all(np.isfinite(r))
            and np.all(np.isfinite(self.pos))
            and np.max(np.abs(r.T @ r - _I3)) <= tol
            and abs(np.linalg.det(r) - 1.0) <= tol
        )


def compose(a: Pose, b: Pose) -> Pose:
    return Pose(a.rot @ b.rot, a.pos + a.rot @ b.pos)


def inverse(a: Pose) -> Pose:
    rt = a.rot.T
    return Pose(rt, -(rt @ a.pos))


def relative(a: Pose, b: Pose) -> Pose:
    """``inverse(a) * b`` without forming the inverse."""
    rt = a.rot.T
    return Pose(rt @ b.rot, rt @ (b.pos - a.pos))


def transform_point(a: Pose, p) -> np.ndarray:
    return a.pos + a.rot @ np.asarray(p, dtype=float)


def se3_exp(x, phi: float) -> Pose:
    """Finite screw motion by ``phi`` about the unit screw ``x``.

    ``x`` has either a unit angular part (finite pitch, ``phi`` is an angle)
    or a zero angular part and unit linear part (pure translation).
    """
    x = np.asarray(x, dtype=float)
    e = x[:3]
    ne = float(e @ e)
    if ne == 0.0:
        if abs(float(x[3:] @ x[3:]) - 1.0) > _UNIT_TOL:
            raise ValueError("pure-translation screw must have a unit linear part")
        return Pose(_I3, phi * x[3:])
    if abs(ne - 1.0) > _UNIT_TOL:
        raise ValueError(
            f"screw angular part has norm {math.sqrt(ne):.3g}; use se3_exp_vec for general twists"
        )
    v = x[3:]
    h = float(e @ v)
    p = np.cross(e, v)
    rot = so3_exp(phi * e)
    return Pose(rot, p - rot @ p + (phi * h) * e)


def se3_exp_vec(v) -> Pose:
    """Exponential of an arbitrary (non-normalised) twist ``v``.

    Same closed form as :func:`se3_exp` for ``v = x * phi`` written with
    sinc-type coefficients so it stays accurate as the rotation vanishes.
    """
    v = np.asarray(v, dtype=float)
    w = v[:3]
    t = math.sqrt(float(w @ w))
    k = skew(w)
    k2 = k @ k
    a = _sinc(t)
    b = _half_sinc_sq(t)
    if t < _SMALL_ANGLE:
        c = 1.0 / 6.0 - t * t / 120.0
    else:
        c = (t - math.sin(t)) / t**3
    rot = _I3 + a * k + b * k2
    left = _I3 + b * k + c * k2
    return Pose(rot, left @ v[3:])


def adjoint(c: Pose) -> np.ndarray:
    out = np.zeros((6, 6))
    out[:3, :3] = c.rot
    out[3:, 3:] = c.rot
    out[3:, :3] = skew(c.pos) @ c.rot
    return out


def adjoint_rot(r: np.ndarray) -> np.ndarray:
    out = np.zeros((6, 6))
    out[:3, :3] = r
    out[3:, 3:] = r
    return out


def adjoint_trans(r) -> np.ndarray:
    out = np.eye(6)
    out[3:, :3] = skew(r)
    return out


def adjoint_inv(c: Pose) -> np.ndarray:
    """``Ad_C^{-1} == Ad_{C^{-1}}``."""
    return adjoint(inverse(c))


def adjoint_apply(a: np.ndarray, x) -> np.ndarray:
    return a @ np.asarray(x, dtype=float)


def adjoint_pose_apply(c: Pose, x) -> np.ndarray:
    """``Ad_C x`` without forming the 6x6 matrix."""
    w = c.rot @ x[:3]
    return np.concatenate([w, np.cross(c.pos, w) + c.rot @ x[3:]])


def adjoint_inv_apply(c: Pose, x) -> np.ndarray:
    """``Ad_C^{-1} x`` without forming the 6x6 matrix."""
    rt = c.rot.T
    return np.concatenate([rt @ x[:3], rt @ (x[3:] - np.cross(c.pos, x[:3]))])


def shift_apply(r, x) -> np.ndarray:
    """``Ad_r x``: change of reference point by ``-r`` with no change of basis."""
    return np.concatenate([x[:3], x[3:] + np.cross(r, x[:3])])


def conjugate_exp(s: Pose, x, phi: float) -> Pose:
    """``S exp(x phi) S^-1`` evaluated as ``exp(Ad_S x phi)``."""
    return se3_exp(adjoint_pose_apply(s, np.asarray(x, dtype=float)), phi)


def rot_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
