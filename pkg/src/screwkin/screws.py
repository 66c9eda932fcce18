"""Joint screw coordinates: construction, decomposition, frame changes."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .liegroup import Pose, adjoint_pose_apply

UNIT_TOL = 1e-9


class ScrewKind(enum.Enum):
    FINITE = "finite"  # unit angular part, finite pitch (revolute or helical)
    PRISMATIC = "prismatic"  # zero angular part, unit linear part


@dataclass(frozen=True, eq=False)
class ScrewGeometry:
    """Axis direction, a point on the axis and the pitch.

    ``pitch is None`` encodes infinite pitch (pure translation along ``axis``);
    ``point`` is then irrelevant.
    """

    axis: np.ndarray
    point: np.ndarray
    pitch: float | None

    def __post_init__(self):
        object.__setattr__(self, "axis", np.asarray(self.axis, dtype=float).reshape(3))
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float).reshape(3))

    @property
    def infinite_pitch(self) -> bool:
        return self.pitch is None


def make_unit_screw(g: ScrewGeometry) -> np.ndarray:
    """Unit screw ``(e, p x e + h e)``, or ``(0, e)`` for infinite pitch."""
    e = g.axis
    if abs(float(np.linalg.norm(e)) - 1.0) > UNIT_TOL:
        raise ValueError(f"axis {e.tolist()} is not a unit vector")
    if g.pitch is None:
        return np.concatenate([np.zeros(3), e])
    return np.concatenate([e, np.cross(g.point, e) + g.pitch * e])


def revolute(axis, point=(0.0, 0.0, 0.0)) -> np.ndarray:
    return make_unit_screw(ScrewGeometry(axis, point, 0.0))


def helical(axis, point, pitch: float) -> np.ndarray:
    return make_unit_screw(ScrewGeometry(axis, point, pitch))


def prismatic(axis) -> np.ndarray:
    return make_unit_screw(ScrewGeometry(axis, np.zeros(3), None))


def screw_kind(x, tol: float = UNIT_TOL) -> ScrewKind:
    """Classify ``x`` as a unit screw; raises ``ValueError`` when it is not one.

    Near-degenerate angular parts are rejected, never reclassified.
    """
    x = np.asarray(x, dtype=float)
    nw = float(np.linalg.norm(x[:3]))
    if nw == 0.0:
        if abs(float(np.linalg.norm(x[3:])) - 1.0) > tol:
            raise ValueError("prismatic screw must have a unit linear part")
        return ScrewKind.PRISMATIC
    if abs(nw - 1.0) > tol:
        raise ValueError(f"angular part has norm {nw:.6g}, expected 0 or 1")
    return ScrewKind.FINITE


def decompose_screw(x) -> ScrewGeometry:
    """Recover axis, the axis point closest to the origin and the pitch."""
    x = np.asarray(x, dtype=float)
    if screw_kind(x) is ScrewKind.PRISMATIC:
        return ScrewGeometry(x[3:], np.zeros(3), None)
    e, v = x[:3], x[3:]
    return ScrewGeometry(e, np.cross(e, v), float(e @ v))


def screw_frame_transform(s: Pose, x) -> np.ndarray:
    """Screw coordinates of ``x`` after a change of frame by ``s``."""
    return adjoint_pose_apply(s, np.asarray(x, dtype=float))


def coscrew_pairing(w, x) -> float:
    """Plain 6-vector dot product of a co-screw ``w`` with a screw ``x``.

    This is the pairing used by the joint-rate projection; it is not a
    frame-invariant inner product on se(3).
    """
    return float(np.dot(np.asarray(w, dtype=float), np.asarray(x, dtype=float)))


def pitch_of(x) -> float:
    """Pitch of a screw, ``math.inf`` for pure translations."""
    x = np.asarray(x, dtype=float)
    nw2 = float(x[:3] @ x[:3])
    if nw2 == 0.0:
        return math.inf
    return float(x[:3] @ x[3:]) / nw2
