"""Operation counts and wall times of the twist recursions on chains."""

from __future__ import annotations

import time
from collections import Counter

import numpy as np

from .kinematics import KinematicState, TwistRep, twists
from .models import random_model

DEFAULT_SIZES = (8, 16, 32, 64, 128, 256, 512)
COUNT_KEYS = ("adjoint", "rotation", "cross", "scale", "add", "setup_adjoint", "setup_rotation")


def time_twists(model, q, qd, rep, repeats: int = 5) -> float:
    """Best-of-``repeats`` wall time of one full evaluation (poses + sweep)."""
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        twists(model, q, qd, rep, state=KinematicState(model, q))
        best = min(best, time.perf_counter() - t0)
    return best


def run_bench(sizes=DEFAULT_SIZES, seed=0, repeats: int = 5, reps=tuple(TwistRep)) -> list:
    rows = []
    for n in sizes:
        model = random_model(n, seed=seed, chain=True)
        rng = np.random.default_rng(seed)
        q, qd = rng.uniform(-np.pi, np.pi, n), rng.normal(size=n)
        for rep in reps:
            c = Counter()
            twists(model, q, qd, rep, counter=c)
            row = {"n": n, "rep": TwistRep(rep).value}
            row.update({k: c.get(k, 0) for k in COUNT_KEYS})
            row["time_s"] = time_twists(model, q, qd, rep, repeats)
            rows.append(row)
    return rows


def scaling_ratio(rows, rep, small: int, large: int) -> float:
    t = {r["n"]: r["time_s"] for r in rows if r["rep"] == TwistRep(rep).value}
    return t[large] / t[small]
