"""Line-structured mechanism description format.

Grammar (one statement per line, ``#`` starts a comment)::

    format_version: 1
    convention: spatial | body_fixed | jfr
    param NAME = EXPR
    body NAME
      parent: NAME | ground
      joint: revolute | prismatic | helical
      axis: EXPR, EXPR, EXPR
      point: EXPR, EXPR, EXPR          # not used by prismatic joints
      pitch: EXPR                      # helical joints only
      ref_rot: EXPR x 9                # row-major; spatial and body_fixed
      ref_pos: EXPR x 3
      pred_rot / pred_pos / succ_rot / succ_pos   # jfr only
    end

``EXPR`` is a literal, a declared parameter, ``pi``, ``sqrt(EXPR)``, unary
minus or a combination with ``+ - * /``.  Poses default to the identity.
Axis, point and pitch are given in the frame the convention prescribes: the
inertial frame at ``q = 0`` (spatial), the body frame (body_fixed) or the
predecessor joint frame (jfr).  Bodies may appear in any order; the model
uses a topological order that keeps file order among siblings.
"""

from __future__ import annotations

import ast
import math
import operator
import re
from dataclasses import dataclass, field

import numpy as np

from . import liegroup as lg
from .model import (
    GROUND,
    BodyFixedJoint,
    Convention,
    JfrJoint,
    MbsModel,
    SpatialJoint,
    validate,
)
from .screws import ScrewGeometry, decompose_screw, make_unit_screw

FORMAT_VERSION = "1"
JOINT_KINDS = ("revolute", "prismatic", "helical")
_VECTOR_FIELDS = {
    "axis": 3, "point": 3, "pitch": 1,
    "ref_rot": 9, "ref_pos": 3,
    "pred_rot": 9, "pred_pos": 3, "succ_rot": 9, "succ_pos": 3,
}
_POSE_FIELDS = {
    Convention.SPATIAL: ("ref_rot", "ref_pos"),
    Convention.BODY_FIXED: ("ref_rot", "ref_pos"),
    Convention.JFR: ("pred_rot", "pred_pos", "succ_rot", "succ_pos"),
}
_FIELD_ORDER = ("parent", "joint", "axis", "point", "pitch") + tuple(
    k for k in _VECTOR_FIELDS if k.endswith(("_rot", "_pos"))
)
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")
UNIT_TOL = 1e-9


@dataclass(frozen=True, order=True)
class Diagnostic:
    line: int
    col: int
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.code}: {self.message}"


@dataclass
class Entry:
    """A ``key: value`` line; positions are excluded from equality."""

    value: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass
class BodyDecl:
    name: str
    fields: dict = field(default_factory=dict)  # key -> Entry
    line: int = field(default=0, compare=False)


@dataclass
class ModelDocument:
    format_version: str | None = None
    convention: str | None = None
    params: list = field(default_factory=list)  # [(name, Entry)]
    bodies: list = field(default_factory=list)


@dataclass
class ParseResult:
    model: MbsModel | None
    diagnostics: list
    document: ModelDocument

    @property
    def ok(self) -> bool:
        return self.model is not None and not self.diagnostics


# -- expressions ----------------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}
_FUNCS = {"sqrt": math.sqrt}
_CONSTS = {"pi": math.pi}


class ExprError(ValueError):
    pass


def eval_expr(text: str, env: dict) -> float:
    """Evaluate an expression of the restricted grammar (no Python eval)."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ExprError(f"syntax error in {text.strip()!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and type(node.value) in (int, float):
            return float(node.value)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Div) and b == 0.0:
                raise ExprError("division by zero")
            return _BINOPS[type(node.op)](a, b)
        if isinstance(node, ast.Name):
            if node.id in env:
                return env[node.id]
            if node.id in _CONSTS:
                return _CONSTS[node.id]
            raise ExprError(f"undefined name {node.id!r}")
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and len(node.args) == 1
            and not node.keywords
        ):
            v = ev(node.args[0])
            if v < 0:
                raise ExprError("sqrt of a negative number")
            return _FUNCS[node.func.id](v)
        raise ExprError(f"unsupported construct in {text.strip()!r}")

    return ev(tree)


# -- text -> document -----------------------------------------------------------


def parse_document(text: str):
    """Split text into a :class:`ModelDocument`; returns ``(doc, diagnostics)``."""
    doc = ModelDocument()
    diags = []
    body = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.strip()
        if not stripped:
            continue
        col = len(line) - len(line.lstrip()) + 1
        if body is not None:
            if stripped == "end":
                doc.bodies.append(body)
                body = None
                continue
            if stripped.startswith("body ") or stripped in ("body",):
                diags.append(Diagnostic(lineno, col, "syntax", f"body {body.name!r} lacks 'end'"))
                doc.bodies.append(body)
                body = None
            else:
                key, sep, value = stripped.partition(":")
                key = key.strip()
                if not sep:
                    diags.append(Diagnostic(lineno, col, "syntax", "expected 'key: value'"))
                elif key not in _FIELD_ORDER:
                    diags.append(Diagnostic(lineno, col, "unknown-field", f"unknown field {key!r}"))
                elif key in body.fields:
                    diags.append(Diagnostic(lineno, col, "duplicate-field", f"field {key!r} repeated"))
                else:
                    vcol = col + line.lstrip().index(":") + 1
                    vcol += len(value) - len(value.lstrip())
                    body.fields[key] = Entry(value.strip(), lineno, vcol)
                continue
        if stripped.startswith("body"):
            name = stripped[4:].strip()
            if not _NAME.match(name):
                diags.append(Diagnostic(lineno, col, "syntax", f"invalid body name {name!r}"))
            body = BodyDecl(name, line=lineno)
        elif stripped.startswith("param"):
            lhs, sep, rhs = stripped[5:].partition("=")
            name = lhs.strip()
            if not sep or not _NAME.match(name):
                diags.append(Diagnostic(lineno, col, "syntax", "expected 'param NAME = EXPR'"))
            else:
                doc.params.append((name, Entry(rhs.strip(), lineno, col + stripped.index("=") + 2)))
        elif stripped.startswith("format_version:"):
            doc.format_version = stripped.partition(":")[2].strip()
        elif stripped.startswith("convention:"):
            doc.convention = stripped.partition(":")[2].strip()
        elif stripped == "end":
            diags.append(Diagnostic(lineno, col, "syntax", "'end' outside a body block"))
        else:
            diags.append(Diagnostic(lineno, col, "syntax", f"unrecognised statement {stripped.split()[0]!r}"))
    if body is not None:
        diags.append(Diagnostic(body.line, 1, "syntax", f"body {body.name!r} lacks 'end'"))
        doc.bodies.append(body)
    return doc, diags


def print_document(doc: ModelDocument) -> str:
    """Canonical text of a document; ``parse_document`` inverts it exactly."""
    out = []
    if doc.format_version is not None:
        out.append(f"format_version: {doc.format_version}")
    if doc.convention is not None:
        out.append(f"convention: {doc.convention}")
    if doc.params:
        out.append("")
    for name, e in doc.params:
        out.append(f"param {name} = {e.value}")
    for b in doc.bodies:
        out.append("")
        out.append(f"body {b.name}")
        for key in _FIELD_ORDER:
            if key in b.fields:
                out.append(f"  {key}: {b.fields[key].value}")
        out.append("end")
    return "\n".join(out) + "\n"


# -- document -> model ----------------------------------------------------------


def _eval_list(entry: Entry, count: int, env: dict, diags: list, key: str):
    parts = entry.value.split(",")
    if len(parts) != count:
        diags.append(Diagnostic(entry.line, entry.col, "arity", f"{key} needs {count} numbers, got {len(parts)}"))
        return None
    vals = []
    offset = 0
    for part in parts:
        try:
            vals.append(eval_expr(part, env))
        except ExprError as exc:
            diags.append(Diagnostic(entry.line, entry.col + offset, "expression", str(exc)))
            return None
        offset += len(part) + 1
    return np.array(vals)


def _topological(names: list, parents: list):
    """File-order-stable topological order; ``None`` entries mark cycle members."""
    index = {n: k for k, n in enumerate(names)}
    order, placed = [], set()
    remaining = list(range(len(names)))
    while remaining:
        progress = False
        rest = []
        for k in remaining:
            p = parents[k]
            if p is None or p == "ground" or index.get(p) in placed:
                order.append(k)
                placed.add(k)
                progress = True
            else:
                rest.append(k)
        remaining = rest
        if not progress:
            return order, remaining
    return order, []


def build_model(doc: ModelDocument, overrides: dict | None = None):
    """Evaluate a document; returns ``(model or None, diagnostics)``."""
    diags = []
    if doc.format_version is None:
        diags.append(Diagnostic(1, 1, "header", "missing 'format_version'"))
    elif doc.format_version != FORMAT_VERSION:
        diags.append(Diagnostic(1, 1, "header", f"unsupported format_version {doc.format_version!r}"))
    conv = None
    if doc.convention is None:
        diags.append(Diagnostic(1, 1, "header", "missing 'convention'"))
    else:
        try:
            conv = Convention(doc.convention)
        except ValueError:
            diags.append(Diagnostic(1, 1, "unknown-convention", f"unknown convention {doc.convention!r}"))

    env = {}
    for name, e in doc.params:
        if name in env:
            diags.append(Diagnostic(e.line, 1, "duplicate-param", f"parameter {name!r} repeated"))
            continue
        try:
            env[name] = eval_expr(e.value, env)
        except ExprError as exc:
            diags.append(Diagnostic(e.line, e.col, "expression", str(exc)))
    for name, value in (overrides or {}).items():
        env[name] = float(value)

    if not doc.bodies:
        diags.append(Diagnostic(1, 1, "no-bodies", "no bodies"))
        return None, sorted(diags)

    names = [b.name for b in doc.bodies]
    seen = {}
    for b in doc.bodies:
        if b.name in seen:
            diags.append(Diagnostic(b.line, 1, "duplicate-body", f"body {b.name!r} declared twice"))
        seen.setdefault(b.name, b)

    parents, joints, ok = [], [], True
    for b in doc.bodies:
        f = b.fields
        for key in ("parent", "joint", "axis"):
            if key not in f:
                diags.append(Diagnostic(b.line, 1, "missing-field", f"body {b.name!r} lacks {key!r}"))
        parent = f["parent"].value if "parent" in f else None
        if parent is not None and parent != "ground" and parent not in seen:
            diags.append(Diagnostic(f["parent"].line, f["parent"].col, "unknown-parent",
                                    f"parent {parent!r} is not a declared body"))
        if parent == b.name:
            diags.append(Diagnostic(f["parent"].line, f["parent"].col, "cyclic-parent",
                                    f"body {b.name!r} is its own parent"))
        parents.append(parent)
        joints.append(_build_joint(b, conv, env, diags))
        ok = ok and joints[-1] is not None

    order, cyclic = _topological(names, [p if p in seen or p in (None, "ground") else None for p in parents])
    for k in cyclic:
        b = doc.bodies[k]
        if parents[k] != b.name:
            e = b.fields["parent"]
            diags.append(Diagnostic(e.line, e.col, "cyclic-parent", f"body {b.name!r} is part of a parent cycle"))

    if diags or not ok or conv is None:
        return None, sorted(set(diags))

    pos = {k: t for t, k in enumerate(order)}
    parent_idx = [GROUND if parents[k] == "ground" else pos[names.index(parents[k])] for k in order]
    model = MbsModel(parent_idx, [joints[k] for k in order], conv, [names[k] for k in order])
    for v in validate(model).violations:
        b = doc.bodies[order[v.joint]] if v.joint >= 0 else doc.bodies[0]
        diags.append(Diagnostic(b.line, 1, v.code, v.message))
    if diags:
        return None, sorted(diags)
    return model, []


def _pose(b: BodyDecl, rot_key: str, pos_key: str, env, diags):
    rot = np.eye(3)
    pos = np.zeros(3)
    if rot_key in b.fields:
        r = _eval_list(b.fields[rot_key], 9, env, diags, rot_key)
        if r is None:
            return None
        rot = r.reshape(3, 3)
        pose = lg.Pose(rot, pos)
        if not pose.is_valid(UNIT_TOL):
            e = b.fields[rot_key]
            diags.append(Diagnostic(e.line, e.col, "rotation", f"{rot_key} is not a proper rotation"))
            return None
    if pos_key in b.fields:
        p = _eval_list(b.fields[pos_key], 3, env, diags, pos_key)
        if p is None:
            return None
        pos = p
    return lg.Pose(rot, pos)


def _build_joint(b: BodyDecl, conv, env, diags):
    f = b.fields
    kind = f["joint"].value if "joint" in f else None
    if kind is not None and kind not in JOINT_KINDS:
        diags.append(Diagnostic(f["joint"].line, f["joint"].col, "joint-kind", f"unknown joint kind {kind!r}"))
        return None
    if conv is not None:
        allowed = set(_POSE_FIELDS[conv])
        for key in f:
            if key.endswith(("_rot", "_pos")) and key not in allowed:
                diags.append(Diagnostic(f[key].line, f[key].col, "unknown-field",
                                        f"{key!r} is not used by convention {conv.value!r}"))
    if kind == "helical" and "pitch" not in f:
        diags.append(Diagnostic(b.line, 1, "missing-field", f"helical body {b.name!r} lacks 'pitch'"))
        return None
    if kind in ("revolute", "helical") and "point" not in f:
        diags.append(Diagnostic(b.line, 1, "missing-field", f"body {b.name!r} lacks 'point'"))
        return None
    if kind != "helical" and "pitch" in f:
        diags.append(Diagnostic(f["pitch"].line, f["pitch"].col, "pitch", "pitch is only allowed for helical joints"))
        return None
    if kind is None or "axis" not in f or conv is None:
        return None

    axis = _eval_list(f["axis"], 3, env, diags, "axis")
    if axis is None:
        return None
    if abs(float(np.linalg.norm(axis)) - 1.0) > UNIT_TOL:
        diags.append(Diagnostic(f["axis"].line, f["axis"].col, "non-unit-axis",
                                f"non-unit axis (norm {np.linalg.norm(axis):.6g})"))
        return None
    point = np.zeros(3)
    if kind != "prismatic":
        point = _eval_list(f["point"], 3, env, diags, "point")
        if point is None:
            return None
    pitch = 0.0
    if kind == "helical":
        v = _eval_list(f["pitch"], 1, env, diags, "pitch")
        if v is None:
            return None
        pitch = float(v[0])
    screw = make_unit_screw(ScrewGeometry(axis, point, None if kind == "prismatic" else pitch))

    if conv is Convention.JFR:
        sp = _pose(b, "pred_rot", "pred_pos", env, diags)
        ss = _pose(b, "succ_rot", "succ_pos", env, diags)
        return None if sp is None or ss is None else JfrJoint(sp, ss, screw)
    ref = _pose(b, "ref_rot", "ref_pos", env, diags)
    if ref is None:
        return None
    return SpatialJoint(ref, screw) if conv is Convention.SPATIAL else BodyFixedJoint(ref, screw)


def parse_model(text: str, params: dict | None = None) -> ParseResult:
    """Parse and evaluate a model file; diagnostics are sorted by position."""
    doc, diags = parse_document(text)
    model, more = build_model(doc, params)
    diags = sorted(set(diags) | set(more))
    return ParseResult(model if not diags else None, diags, doc)


def load_model(path, params: dict | None = None) -> ParseResult:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read(), params)


# -- model -> document ----------------------------------------------------------


def _fmt(values) -> str:
    return ", ".join(repr(float(v)) for v in np.ravel(values))


def model_to_document(model: MbsModel) -> ModelDocument:
    """Numeric document of a model (parameters fully substituted)."""
    doc = ModelDocument(FORMAT_VERSION, model.convention.value)
    names = [model.name(i) for i in range(model.n)]
    for i, j in enumerate(model.joints):
        screw = {Convention.SPATIAL: "y", Convention.BODY_FIXED: "x", Convention.JFR: "z"}[model.convention]
        g = decompose_screw(getattr(j, screw))
        f = {"parent": Entry("ground" if model.parent[i] == GROUND else names[model.parent[i]])}
        if g.pitch is None:
            f["joint"] = Entry("prismatic")
        else:
            f["joint"] = Entry("revolute" if g.pitch == 0.0 else "helical")
        f["axis"] = Entry(_fmt(g.axis))
        if g.pitch is not None:
            f["point"] = Entry(_fmt(g.point))
            if g.pitch != 0.0:
                f["pitch"] = Entry(repr(float(g.pitch)))
        if model.convention is Convention.JFR:
            poses = {"pred": j.s_pred, "succ": j.s_succ}
        else:
            poses = {"ref": j.a if model.convention is Convention.SPATIAL else j.b}
        for prefix, pose in poses.items():
            f[f"{prefix}_rot"] = Entry(_fmt(pose.rot))
            f[f"{prefix}_pos"] = Entry(_fmt(pose.pos))
        doc.bodies.append(BodyDecl(names[i], f))
    return doc
