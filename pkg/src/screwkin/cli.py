"""Command-line front end.

Exit codes: 0 success, 1 numerical verification failure, 2 model parse or
validation failure, 3 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from collections import Counter
from pathlib import Path

import numpy as np

from . import __version__
from . import kinematics as kin
from .bench import DEFAULT_SIZES, run_bench
from .invkin import rates_from_twists
from .kinematics import TwistRep
from .modelfile import ExprError, eval_expr, load_model, parse_document, parse_model, print_document
from .models import RCM_DOCUMENT, random_model
from .sysjac import system_jacobian
from .verify import run_suite, tolerance_from_env

EXIT_OK, EXIT_VERIFY, EXIT_MODEL, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class ModelError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str, what: str) -> np.ndarray:
    try:
        return np.array([eval_expr(t, {}) for t in text.split(",")])
    except ExprError as exc:
        raise UsageError(f"--{what}: {exc}") from exc


def _params(text: str | None) -> dict:
    if not text:
        return {}
    out = {}
    for item in text.split(","):
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--params: expected name=value, got {item!r}")
        try:
            out[name.strip()] = eval_expr(value, {})
        except ExprError as exc:
            raise UsageError(f"--params: {exc}") from exc
    return out


def resolve_model(args):
    if args.model == "random":
        return random_model(args.n, seed=args.seed)
    if args.model == "rcm":
        res = parse_model(RCM_DOCUMENT, _params(args.params))
    else:
        try:
            res = load_model(args.model, _params(args.params))
        except OSError as exc:
            raise ModelError(f"cannot read model file: {exc}") from exc
    if not res.ok:
        raise ModelError("\n".join(str(d) for d in res.diagnostics))
    return res.model


def _vector(args, model, attr: str, default: float) -> np.ndarray:
    text = getattr(args, attr, None)
    if text is None:
        return np.full(model.n, default)
    v = _floats(text, attr)
    if v.shape[0] != model.n:
        raise UsageError(f"--{attr} has {v.shape[0]} entries, model has {model.n} joints")
    return v


def _pose_dict(model, i, c) -> dict:
    return {"body": model.name(i), "rot": c.rot.tolist(), "pos": c.pos.tolist()}


def _document(command, model, inputs, results, started, extra_meta=None) -> dict:
    meta = {"tool": "screwkin", "version": __version__, "n": model.n}
    meta.update(extra_meta or {})
    meta["timing_s"] = time.perf_counter() - started
    return {"command": command, "inputs": inputs, "results": results, "metadata": meta}


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_json(doc: dict, out: str | None) -> None:
    _emit(json.dumps(doc, indent=2) + "\n", out)


def _bodies(args, model) -> list:
    if args.body is None:
        return list(range(model.n))
    if not 1 <= args.body <= model.n:
        raise UsageError(f"--body must lie in 1..{model.n}")
    return [args.body - 1]


# -- commands -------------------------------------------------------------------


def cmd_fk(args):
    t0 = time.perf_counter()
    model = resolve_model(args)
    q = _vector(args, model, "q", 0.0)
    poses = kin.fk(model, q, args.method)
    results = {"poses": [_pose_dict(model, i, c) for i, c in enumerate(poses)]}
    _emit_json(_document("fk", model, {"q": q.tolist(), "method": args.method}, results, t0), args.out)
    return EXIT_OK


def cmd_jacobian(args):
    t0 = time.perf_counter()
    model = resolve_model(args)
    q = _vector(args, model, "q", 0.0)
    st = kin.KinematicState(model, q)
    out = []
    for i in _bodies(args, model):
        bj = kin.jacobian(model, q, i, args.rep, state=st)
        out.append({
            "body": model.name(i),
            "support": [model.name(j) for j in bj.support],
            "columns": bj.dense(model.n).T.tolist(),
        })
    inputs = {"q": q.tolist(), "rep": args.rep}
    _emit_json(_document("jacobian", model, inputs, {"jacobians": out}, t0), args.out)
    return EXIT_OK


def cmd_twists(args):
    t0 = time.perf_counter()
    model = resolve_model(args)
    q = _vector(args, model, "q", 0.0)
    qd = _vector(args, model, "qdot", 0.0)
    c = Counter()
    tw = kin.twists(model, q, qd, args.rep, counter=c)
    ops = dict(sorted(c.items()))
    results = {"twists": [{"body": model.name(i), "twist": v.tolist()} for i, v in enumerate(tw.twists)]}
    inputs = {"q": q.tolist(), "qdot": qd.tolist(), "rep": args.rep}
    _emit_json(_document("twists", model, inputs, results, t0, {"op_counts": ops}), args.out)
    return EXIT_OK


def cmd_sysjac(args):
    t0 = time.perf_counter()
    model = resolve_model(args)
    q = _vector(args, model, "q", 0.0)
    j, fact = system_jacobian(model, q, args.rep)
    mats = {"J": j, "A": fact.A, "X": fact.X, "D": fact.D}
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for row in mats[args.matrix]:
            w.writerow([repr(float(x)) for x in row])
        _emit(buf.getvalue(), args.out)
        return EXIT_OK
    results = {k: v.tolist() for k, v in mats.items()}
    for key, (a, x) in fact.alternatives.items():
        results[f"A_{key}"] = a.tolist()
        results[f"X_{key}"] = x.tolist()
    results["depth"] = fact.depth
    _emit_json(_document("sysjac", model, {"q": q.tolist(), "rep": args.rep}, results, t0), args.out)
    return EXIT_OK


def cmd_ikrates(args):
    t0 = time.perf_counter()
    model = resolve_model(args)
    try:
        doc = json.loads(Path(args.twists).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read twist document: {exc}") from exc
    rep = doc.get("rep", args.rep)
    if rep not in [r.value for r in TwistRep]:
        raise UsageError(f"unknown representation {rep!r}")
    q = np.asarray(doc["q"], dtype=float) if "q" in doc else _vector(args, model, "q", 0.0)
    v = np.asarray(doc.get("twists", []), dtype=float)
    if q.shape != (model.n,) or v.shape != (model.n, 6):
        raise UsageError(f"twist document must hold q ({model.n}) and twists ({model.n} x 6)")
    sol = rates_from_twists(model, q, kin.BodyTwists(TwistRep(rep), v))
    results = {
        "qdot": sol.qdot.tolist(),
        "residual_norm": sol.residual_norm,
        "consistent": sol.consistent,
        "residual": sol.residual.tolist(),
    }
    _emit_json(_document("ikrates", model, {"q": q.tolist(), "rep": rep}, results, t0), args.out)
    return EXIT_OK


def cmd_verify(args):
    t0 = time.perf_counter()
    model = resolve_model(args)
    report = run_suite(model, seed=args.seed, tol=tolerance_from_env(), samples=args.samples)
    for c in report.checks:
        print(f"{c.status:12s} {c.name}: {c.value:.3e} (tol {c.tol:.0e})", file=sys.stderr)
    inputs = {"seed": args.seed, "samples": args.samples, "tol": tolerance_from_env()}
    _emit_json(_document("verify", model, inputs, report.as_dict(), t0), args.out)
    return EXIT_OK if report.ok else EXIT_VERIFY


def cmd_bench(args):
    sizes = [int(s) for s in args.sizes.split(",")] if args.sizes else list(DEFAULT_SIZES)
    if any(s < 1 for s in sizes):
        raise UsageError("--sizes must be positive")
    rows = run_bench(sizes, seed=args.seed, repeats=args.repeats)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_example_rcm(args):
    t0 = time.perf_counter()
    out = Path(args.out or "rcm_example")
    out.mkdir(parents=True, exist_ok=True)
    doc, _ = parse_document(RCM_DOCUMENT)
    (out / "rcm.model").write_text(print_document(doc), encoding="utf-8")
    res = parse_model(RCM_DOCUMENT)
    model = res.model
    q = np.array([0.1, 0.2, 0.3, 0.4, 0.5])
    qd = np.array([0.5, -0.4, 0.3, -0.2, 0.1])
    st = kin.KinematicState(model, q)
    results = {
        "poses": [_pose_dict(model, i, c) for i, c in enumerate(st.poses)],
        "body_jacobian_body3": kin.body_jacobian(model, q, 2, state=st).dense(5).T.tolist(),
        "spatial_joint_screws": st.spatial_screws.tolist(),
        "twists": {
            rep.value: kin.twists(model, q, qd, rep, state=st).twists.tolist() for rep in TwistRep
        },
    }
    doc_out = _document("example-rcm", model, {"q": q.tolist(), "qdot": qd.tolist()}, results, t0)
    (out / "walkthrough.json").write_text(json.dumps(doc_out, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {out / 'rcm.model'} and {out / 'walkthrough.json'}", file=sys.stderr)
    return EXIT_OK


# -- argument parsing -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    reps = [r.value for r in TwistRep]
    parser = _Parser(prog="screwkin", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, q=True, qdot=False):
        p.add_argument("--model", default="rcm", help="model file, 'rcm' or 'random' (default rcm)")
        p.add_argument("--params", help="parameter overrides name=value,...")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--n", type=int, default=6, help="body count for --model random")
        p.add_argument("--out", help="output path (default stdout)")
        if q:
            p.add_argument("--q", help="joint values, comma separated (default zeros)")
        if qdot:
            p.add_argument("--qdot", help="joint rates, comma separated (default zeros)")

    p = sub.add_parser("fk", help="absolute body poses")
    common(p)
    p.add_argument("--method", choices=kin.FK_METHODS, default="spatial_poe")
    p.set_defaults(func=cmd_fk)

    p = sub.add_parser("jacobian", help="per-body Jacobians")
    common(p)
    p.add_argument("--rep", choices=reps, default="body")
    p.add_argument("--body", type=int, help="1-based body index (default all)")
    p.set_defaults(func=cmd_jacobian)

    p = sub.add_parser("twists", help="body twists from one recursive sweep")
    common(p, qdot=True)
    p.add_argument("--rep", choices=reps, default="body")
    p.set_defaults(func=cmd_twists)

    p = sub.add_parser("sysjac", help="system Jacobian and its factorization")
    common(p)
    p.add_argument("--rep", choices=reps, default="body")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--matrix", choices=("J", "A", "X", "D"), default="J", help="matrix written by --format csv")
    p.set_defaults(func=cmd_sysjac)

    p = sub.add_parser("ikrates", help="joint rates from a twist document")
    common(p)
    p.add_argument("--twists", required=True, help="JSON with 'rep', 'q' and 'twists' (n x 6)")
    p.add_argument("--rep", choices=reps, default="body", help="used when the document has no 'rep'")
    p.set_defaults(func=cmd_ikrates)

    p = sub.add_parser("verify", help="run the oracle suite")
    common(p, q=False)
    p.add_argument("--samples", type=int, default=3, help="random configurations to test")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="op counts and wall times on chains (CSV)")
    p.add_argument("--sizes", help=f"chain lengths (default {','.join(map(str, DEFAULT_SIZES))})")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("example-rcm", help="write the bundled RCM model and a walkthrough")
    p.add_argument("--out", help="output directory (default ./rcm_example)")
    p.set_defaults(func=cmd_example_rcm)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "n", 1) is not None and getattr(args, "n", 1) < 1:
        print("screwkin: error: --n must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"screwkin: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModelError as exc:
        print(f"screwkin: model error:\n{exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
