"""Bundled example mechanism and random model generators."""

from __future__ import annotations

import numpy as np

from . import liegroup as lg
from .model import GROUND, BodyFixedJoint, Convention, MbsModel
from .modelfile import parse_model
from .screws import helical, prismatic, revolute

# Numeric parameter set of the bundled remote-centre-of-motion (RCM) mechanism.
# d5 = d4 + h4 places joint 5 on the axis of joint 4 at the pivot point.
RCM_PARAMS = {
    "d2": 0.4, "d3": 0.3, "d4": 0.35, "h4": 0.2, "d5": 0.55,
    "x1": 0.15, "x2": 0.2, "x3": 0.25, "x4": 0.3, "x5": 0.45,
    "z1": 0.05, "z2": 0.12, "z3": 0.1, "z4": 0.3, "z5": 0.25,
}

RCM_DOCUMENT = """\
# Five-body remote-centre-of-motion mechanism (planar 3R base, inclined
# joint 4, instrument joint 5 through the pivot point).
format_version: 1
convention: spatial

{params}

body base_link
  parent: ground
  joint: revolute
  axis: 0, 0, 1
  point: 0, 0, 0
  ref_pos: -x1, 0, z1
end

body upper_link
  parent: base_link
  joint: revolute
  axis: 0, 0, 1
  point: -d2, 0, 0
  ref_pos: -x2, 0, -z2
end

body lower_link
  parent: upper_link
  joint: revolute
  axis: 0, 0, 1
  point: d3, 0, 0
  ref_pos: x3, 0, z3
end

body swivel
  parent: lower_link
  joint: revolute
  axis: -1/sqrt(2), 0, 1/sqrt(2)
  point: d4, 0, h4
  ref_rot: 1/sqrt(2), 0, -1/sqrt(2), 0, 1, 0, 1/sqrt(2), 0, 1/sqrt(2)
  ref_pos: x4, 0, z4
end

body instrument
  parent: swivel
  joint: revolute
  axis: 0, 0, 1
  point: d5, 0, 0
  ref_pos: x5, 0, z5
end
""".format(params="\n".join(f"param {k} = {v!r}" for k, v in RCM_PARAMS.items()))


def rcm_model(params: dict | None = None) -> MbsModel:
    res = parse_model(RCM_DOCUMENT, params)
    if not res.ok:
        raise RuntimeError("bundled RCM document failed to parse:\n" + "\n".join(map(str, res.diagnostics)))
    return res.model


def _random_rotation(rng) -> np.ndarray:
    return lg.so3_exp(rng.uniform(-np.pi, np.pi, 3) * rng.uniform(0.0, 1.0) / np.sqrt(3.0))


def _unit(rng) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_model(n: int, seed=None, chain: bool = False, kinds=("revolute", "prismatic", "helical"),
                 pitch: float = 0.5) -> MbsModel:
    """Random body-fixed model with mixed joint kinds.

    Parents are drawn uniformly among earlier bodies and the ground unless
    ``chain`` is set.  Helical joints use the given pitch.
    """
    rng = np.random.default_rng(seed)
    parent, joints = [], []
    for i in range(n):
        parent.append(i - 1 if chain else int(rng.integers(-1, i)) if i else GROUND)
        kind = kinds[int(rng.integers(len(kinds)))]
        axis, point = _unit(rng), rng.uniform(-1.0, 1.0, 3)
        if kind == "revolute":
            x = revolute(axis, point)
        elif kind == "prismatic":
            x = prismatic(axis)
        else:
            x = helical(axis, point, pitch)
        b = lg.Pose(_random_rotation(rng), rng.uniform(-1.0, 1.0, 3))
        joints.append(BodyFixedJoint(b, x))
    return MbsModel(parent, joints, Convention.BODY_FIXED)
