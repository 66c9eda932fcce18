"""Oracle suite: compares every analytic path of a model against the
brute-force references in :mod:`screwkin.oracle`."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import kinematics as kin
from . import liegroup as lg
from . import oracle
from .invkin import lstsq_gap, rates_from_twists
from .kinematics import TwistRep
from .model import MbsModel
from .sysjac import block_diag_adjoints, closed_form_inverse, nilpotency_index, nilpotent_expand, system_jacobian

DEFAULT_TOL = 1e-10
FD_RTOL = 1e-6
IK_NOISE = 1e-3
IK_LSTSQ_TOL = 1e-8


def tolerance_from_env() -> float:
    raw = os.environ.get("SCREWKIN_TOL")
    return float(raw) if raw else DEFAULT_TOL


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float
    informational: bool = False

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tol)

    @property
    def status(self) -> str:
        if self.passed:
            return "pass"
        return "discrepancy" if self.informational else "FAIL"


@dataclass
class VerifyReport:
    checks: list = field(default_factory=list)

    def add(self, name, value, tol, informational=False):
        self.checks.append(Check(name, float(value), float(tol), informational))

    @property
    def ok(self) -> bool:
        return all(c.passed or c.informational for c in self.checks)

    def find(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checks": [
                {"name": c.name, "value": c.value, "tol": c.tol, "status": c.status} for c in self.checks
            ],
        }


def _maxabs(a) -> float:
    return float(np.max(np.abs(a), initial=0.0))


def run_suite(model: MbsModel, seed=0, tol: float | None = None, samples: int = 3) -> VerifyReport:
    """Run every oracle comparison at ``samples`` random configurations.

    The least-squares comparison of the rate sweep is recorded as an
    informational check: a gap is reported, not treated as a failure.
    """
    tol = tolerance_from_env() if tol is None else tol
    rng = np.random.default_rng(seed)
    n = model.n
    rep_all = list(TwistRep)
    worst = {}

    def note(name, value, t=tol, info=False):
        key = (name, t, info)
        worst[key] = max(worst.get(key, 0.0), float(value))

    for _ in range(samples):
        q = rng.uniform(-np.pi, np.pi, n)
        qd = rng.normal(size=n)
        st = kin.KinematicState(model, q)
        ref = oracle.naive_fk(model, q)
        fd_all = oracle.fd_jacobians(model, q)
        for method in kin.FK_METHODS:
            c = kin.fk(model, q, method)
            note(f"fk[{method}] vs matrix chain", max(_maxabs(a.matrix() - b) for a, b in zip(c, ref)))

        for rep in rep_all:
            tw = kin.twists(model, q, qd, rep, state=st)
            jac_err = fd_err = 0.0
            for i in range(n):
                bj = kin.jacobian(model, q, i, rep, state=st)
                dense = bj.dense(n)
                fd = fd_all[rep.value][i].T
                fd_err = max(fd_err, _maxabs(dense - fd) / max(1.0, _maxabs(fd)))
                jac_err = max(jac_err, _maxabs(dense @ qd - tw.twists[i]))
            note(f"jacobian[{rep.value}] vs finite differences (rel)", fd_err, FD_RTOL)
            note(f"twists[{rep.value}] recursion vs J qdot", jac_err)
            j_sys, fact = system_jacobian(model, q, rep, state=st)
            note(f"system jacobian[{rep.value}] vs recursion", _maxabs(j_sys @ qd - tw.stacked()))
            eye = np.eye(6 * n)
            if rep is TwistRep.SPATIAL:
                for key, (a, x) in fact.alternatives.items():
                    note(f"spatial factorization A^{key} X", _maxabs(a @ x - j_sys))
                a_sb = fact.alternatives["sb"][0]
                note("inverse of A^sb", _maxabs(closed_form_inverse(fact, st.poses) @ a_sb - eye))
            else:
                note(f"A (I - D) = I [{rep.value}]", _maxabs(fact.A @ (eye - fact.D) - eye))
                note(f"series vs dense inverse [{rep.value}]",
                     _maxabs(fact.A - np.linalg.solve(eye - fact.D, eye)))
                note(f"nilpotency index = depth [{rep.value}]",
                     abs(nilpotency_index(fact.D) - model.depth), 0.0)
            if rep is TwistRep.BODY:
                _, f_s = system_jacobian(model, q, TwistRep.SPATIAL, state=st)
                note("A^sb = diag(Ad_C) A^b",
                     _maxabs(block_diag_adjoints(st.poses) @ fact.A - f_s.alternatives["sb"][0]))
                note("series truncated at depth", _maxabs(nilpotent_expand(fact.D, model.depth) - fact.A))

        for rep in rep_all:
            for other in rep_all:
                err = 0.0
                for c in st.poses:
                    v = rng.normal(size=6)
                    back = kin.convert_twist(kin.convert_twist(v, rep, other, c), other, rep, c)
                    err = max(err, _maxabs(back - v))
                note("twist conversion round trips", err)

        for rep in (TwistRep.BODY, TwistRep.SPATIAL, TwistRep.HYBRID):
            sol = rates_from_twists(model, q, kin.twists(model, q, qd, rep, state=st), state=st)
            note(f"rates from {rep.value} twists", _maxabs(sol.qdot - qd))

        vb = kin.twists(model, q, qd, TwistRep.BODY, state=st).twists
        noisy = vb + IK_NOISE * rng.normal(size=vb.shape)
        sweep = rates_from_twists(model, q, kin.BodyTwists(TwistRep.BODY, noisy), state=st).qdot
        note("rate sweep vs least squares (noisy twists)", lstsq_gap(sweep, oracle.lstsq_rates(model, q, noisy)),
             IK_LSTSQ_TOL, True)

        c_rand = lg.Pose(lg.so3_exp(rng.normal(size=3)), rng.normal(size=3))
        moved = [lg.compose(c_rand, c) for c in st.poses]
        inv_err = 0.0
        for i, (c, cm) in enumerate(zip(st.poses, moved)):
            vs = kin.convert_twist(vb[i], TwistRep.BODY, TwistRep.SPATIAL, c)
            vs_moved = lg.adjoint_pose_apply(c_rand, vs)
            inv_err = max(inv_err, _maxabs(kin.convert_twist(vs_moved, TwistRep.SPATIAL, TwistRep.BODY, cm) - vb[i]))
        note("body twist invariant under inertial frame change", inv_err)

    report = VerifyReport()
    for (name, t, info), value in worst.items():
        report.add(name, value, t, info)
    return report
