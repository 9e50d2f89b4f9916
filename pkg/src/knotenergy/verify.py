"""Self-verification suite: the nine acceptance criteria as callables.

Each criterion returns a :class:`CriterionResult` whose ``detail`` holds the
measured numbers, so a failing run says by how much it failed.
"""
from __future__ import annotations

import json
import math
import os
import subprocess
import sys
import time
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .diagrams import (Layered, add_kink, braid_word_moves, chord_diagram_of, conway_a2_skein,
                       count_subdiagrams, intersecting_pairs, layered_code, x_diagram, zoo_code)
from .energies import (crossing_bound_from_esin, doyle_schramm_residual, energy_e, energy_ecos,
                       energy_ecos_x, energy_esin, energy_esin_x)
from .flow import FlowConfig, relax
from .gauss import CHORD, X, MCConfig, gauss_functional, i_y, writhe
from .kernels import reflect
from .mobius import conformal_angle, random_far_inversion, transform_curve
from .projections import average_crossing_number, average_writhe, average_x_crossing
from .report import combined_error
from .zoo import sample_zoo


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] criterion {self.number}: {self.title} ({self.seconds:.1f} s)"

    def to_json(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "seconds": round(self.seconds, 3), "detail": self.detail}


def _timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


# -- individual criteria ------------------------------------------------------------

def circle_energy(seed: int = 7):
    c = sample_zoo("circle:r=1,n=512")
    r, dt = _timed(energy_e, c)
    ok = abs(r.value - 4.0) <= 1e-2 and dt < 1.0
    return ok, {"E": r.value, "error": r.error, "seconds": dt}


DS_CURVES = ("circle", "ellipse:a=2,b=1", "torus2q:q=3", "figure8", "perturbed_circle:amp=0.1,mode=5")


def doyle_schramm(seed: int = 7):
    t0 = time.perf_counter()
    rows, ok = {}, True
    for spec in DS_CURVES:
        c = sample_zoo(spec + ("," if ":" in spec else ":") + "n=512")
        res, err = doyle_schramm_residual(c)
        good = abs(res) <= max(1e-2, err)
        rows[spec] = {"residual": res, "error": err, "ok": good}
        ok &= good
    dt = time.perf_counter() - t0
    return ok and dt < 30.0, {"curves": rows, "seconds": dt}


MOBIUS_CURVES = ("torus2q:q=3", "figure8", "ellipse:a=2,b=1", "perturbed_circle:amp=0.1,mode=5")


def mobius_invariance(seed: int = 7, n: int = 96, draws: int = 5):
    t0 = time.perf_counter()
    rows, ok = {}, True
    for spec in MOBIUS_CURVES:
        c = sample_zoo(spec + ("," if ":" in spec else ":") + f"n={n}")
        rng = np.random.default_rng([seed, n])
        base = {f.__name__: f(c) for f in (energy_ecos, energy_esin, energy_ecos_x, energy_esin_x)}
        worst = {k: 0.0 for k in base}
        for _ in range(draws):
            d = transform_curve(random_far_inversion(c, rng), c)
            for name, f in (("energy_ecos", energy_ecos), ("energy_esin", energy_esin)):
                rel = abs(f(d).value - base[name].value) / abs(base[name].value)
                worst[name] = max(worst[name], rel)
                ok &= rel <= 1e-2
            for name, f in (("energy_ecos_x", energy_ecos_x), ("energy_esin_x", energy_esin_x)):
                r = f(d)
                z = abs(r.value - base[name].value) / (r.error + base[name].error)
                worst[name] = max(worst[name], z)
                ok &= z <= 3.0
        rows[spec] = {"worst_relative_ecos": worst["energy_ecos"],
                      "worst_relative_esin": worst["energy_esin"],
                      "worst_sigma_ecosx": worst["energy_ecos_x"],
                      "worst_sigma_esinx": worst["energy_esin_x"]}
    dt = time.perf_counter() - t0
    return ok and dt < 300.0, {"curves": rows, "seconds": dt}


def projection_averages(seed: int = 7, n: int = 256, samples: int = 2000):
    t0 = time.perf_counter()
    rows, ok = {}, True
    for spec in ("torus2q:q=3", "figure8"):
        c = sample_zoo(spec + ("," if ":" in spec else ":") + f"n={n}")
        pairs = {
            "writhe": (writhe(c), average_writhe(c, samples, seed)),
            "crossing": (gauss_functional(c, CHORD, signed=False),
                         average_crossing_number(c, samples, seed)),
            "x_crossing": (gauss_functional(c, X, signed=False),
                           average_x_crossing(c, samples, seed)),
        }
        rows[spec] = {}
        for key, (grid, mc) in pairs.items():
            z = abs(grid.value - mc.value) / combined_error(grid, mc)
            rows[spec][key] = {"integral": grid.value, "average": mc.value, "sigma": z}
            ok &= z <= 3.0
    dt = time.perf_counter() - t0
    return ok and dt < 600.0, {"curves": rows, "seconds": dt}


A2_KNOTS = (("circle", 0), ("torus2q:q=3", 1), ("figure8", -1))


def invariant_integrality(seed: int = 7, n: int = 128, samples: int = 10_000_000, knots=A2_KNOTS):
    rows, ok = {}, True
    for spec, expected in knots:
        t0 = time.perf_counter()
        c = sample_zoo(spec + ("," if ":" in spec else ":") + f"n={n}")
        ix = gauss_functional(c, X)
        runs = [i_y(c, MCConfig(samples=samples, seed=s)) for s in (seed, seed + 1)]
        agree = abs(runs[0].value - runs[1].value) / combined_error(*runs)
        iy_value = 0.5 * (runs[0].value + runs[1].value)
        iy_error = 0.5 * combined_error(*runs)
        a2 = 0.25 * ix.value - iy_value / 3.0 + 1.0 / 24.0
        dt = time.perf_counter() - t0
        good = abs(a2 - expected) <= 0.15 and agree <= 3.0 and dt < 900.0
        rows[spec] = {"a2": a2, "expected": expected, "i_x": ix.value, "i_y": iy_value,
                      "i_y_error": iy_error, "seed_sigma": agree, "seconds": dt, "ok": good}
        ok &= good
    return ok, {"knots": rows}


def inequality_suite(seed: int = 7, triples: int = 100_000):
    rng = np.random.default_rng(seed)
    u, v, w = (rng.standard_normal((triples, 3)) for _ in range(3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    triple = np.abs(np.einsum("ij,ij->i", w, np.cross(u, v)))
    sin_alpha = np.linalg.norm(np.cross(reflect(u, w), v), axis=1)
    # spot check the vectorised sine against the scalar angle routine
    for k in range(100):
        a = conformal_angle(np.zeros(3), u[k], w[k], v[k])
        assert abs(math.sin(a) - sin_alpha[k]) < 1e-9
    angle_ok = bool(np.all(triple <= sin_alpha + 1e-12))

    tref = sample_zoo("torus2q:q=3,n=256")
    cw = gauss_functional(tref, CHORD, signed=False)
    cx = gauss_functional(tref, X, signed=False)
    esin = energy_esin(tref)
    bound = crossing_bound_from_esin(esin.value)
    checks = {
        "triple_product": angle_ok,
        "crossing_functional": cw.value + 3 * cw.error >= 3.0,
        "sin_energy": bound + 3 * esin.error / (4 * math.pi) >= 3.0,
        "x_crossing_functional": cx.value + 3 * cx.error >= 2.0,
    }
    dominance = {}
    x3 = x_diagram(3)
    for spec in ("torus2q:q=3,n=48", "figure8:n=48"):
        c = sample_zoo(spec)
        for name, d in (("w", CHORD), ("X", X), ("X3", x3)):
            s = gauss_functional(c, d, signed=True)
            a = gauss_functional(c, d, signed=False)
            dominance[f"{spec}/{name}"] = a.value >= abs(s.value)
    checks["unsigned_dominates"] = all(dominance.values())
    detail = {"max_triple_minus_sin": float(np.max(triple - sin_alpha)),
              "C_w": cw.value, "E_sin/4pi": bound, "C_X": cx.value,
              "checks": checks, "dominance": dominance}
    return all(checks.values()), detail


def _reidemeister_catalogue():
    """(description, expected, code) rows: each code is a move away from a zoo diagram."""
    rows = []
    for name, a2 in (("unknot", 0), ("torus2q(3)", 1), ("figure-eight", -1),
                     ("torus2q(5)", 3), ("twist(3)", 2)):
        base = zoo_code(name)
        rows.append((name, a2, base))
        for pos in range(0, len(base.tokens) + 1, 3):
            for over_first, sign in product((True, False), (1, -1)):
                rows.append((f"{name}+R1@{pos}", a2, add_kink(base, pos, over_first, sign)))
    for word, a2 in (((1, 1, 1), 1), ((1, -2, 1, -2), -1)):
        width = max(abs(g) for g in word) + 1
        rows.append((f"braid{word}", a2, layered_code(Layered(width, word, "braid"))))
        for moved in braid_word_moves(word):
            w = max(width, max(abs(g) for g in moved) + 1)
            rows.append((f"braid{moved}", a2, layered_code(Layered(w, moved, "braid"))))
    return rows


def combinatorics(seed: int = 7):
    t0 = time.perf_counter()
    failures = []
    for n in range(1, 12, 2):
        xn = x_diagram(n)
        if intersecting_pairs(xn) != n * (n - 1) // 2:
            failures.append(f"pairs X_{n}")
        for k in range(1, n + 1):
            if count_subdiagrams(xn, x_diagram(k)) != math.comb(n, k):
                failures.append(f"count X_{k} in X_{n}")
        if n >= 3 and not chord_diagram_of(zoo_code(f"torus2q({n})")).isomorphic(xn):
            failures.append(f"torus2q({n}) chord diagram")
    rows = _reidemeister_catalogue()
    for label, expected, code in rows:
        if conway_a2_skein(code) != expected:
            failures.append(f"skein {label}")
    dt = time.perf_counter() - t0
    return not failures and dt < 10.0, {"failures": failures, "catalogue": len(rows), "seconds": dt}


def flow_sanity(seed: int = 7, n: int = 128):
    t0 = time.perf_counter()
    c = sample_zoo(f"perturbed_circle:amp=0.1,mode=5,seed={seed},n={n}")
    res = relax(c, FlowConfig(steps=500))
    dt = time.perf_counter() - t0
    e = res.energies
    monotone = all(b <= a for a, b in zip(e, e[1:]))
    hit = next((k for k, v in enumerate(e) if v <= 4.1), None)
    ok = monotone and hit is not None and hit <= 500 and dt < 300.0
    return ok, {"initial": e[0], "final": e[-1], "first_step_below_4.1": hit,
                "accepted": len(e) - 1, "status": res.status, "monotone": monotone, "seconds": dt}


DETERMINISM_RUNS = (
    (["zoo", "perturbed_circle:n=64"], ["iy", "--samples", "20000", "--seed", "3"]),
    (["zoo", "torus2q:q=3,n=96"], ["average", "cx", "--samples", "100", "--seed", "3"]),
    (["zoo", "figure8:n=96"], ["a2", "--samples", "20000", "--seed", "3"]),
    (["zoo", "perturbed_circle:amp=0.1,mode=5,n=64"], ["relax", "--steps", "3"]),
    (["zoo", "figure8:n=64"], ["gauss", "--diagram", "1-5,2-6,3-7,4-8", "--samples", "5000"]),
)


def _cli(args, stdin, threads):
    env = dict(os.environ, KNOT_THREADS=str(threads), NUMBA_NUM_THREADS=str(max(2, threads)))
    out = subprocess.run([sys.executable, "-m", "knotenergy.cli", *args], input=stdin,
                         capture_output=True, env=env, check=True)
    return out.stdout


def determinism(seed: int = 7):
    t0 = time.perf_counter()
    mismatched = []
    for producer, consumer in DETERMINISM_RUNS:
        curve = _cli(producer, b"", 1)
        outs = {_cli(consumer, curve, t) for t in (1, 1, 2)}
        if len(outs) != 1:
            mismatched.append(" ".join(consumer))
    return not mismatched, {"runs": len(DETERMINISM_RUNS), "mismatched": mismatched,
                            "seconds": time.perf_counter() - t0}


CRITERIA = {
    1: ("circle energy", circle_energy),
    2: ("E = E_cos + 4 identity", doyle_schramm),
    3: ("Mobius invariance", mobius_invariance),
    4: ("projection averages", projection_averages),
    5: ("second Conway coefficient integrality", invariant_integrality),
    6: ("inequalities", inequality_suite),
    7: ("diagram combinatorics", combinatorics),
    8: ("flow sanity", flow_sanity),
    9: ("determinism", determinism),
}
SUITES = {"all": tuple(CRITERIA), "fast": (1, 2, 3, 4, 6, 7, 8, 9)}


def run_criterion(number: int, seed: int = 7) -> CriterionResult:
    title, fn = CRITERIA[number]
    t0 = time.perf_counter()
    try:
        ok, detail = fn(seed)
    except Exception as exc:  # a crash is a failure with its reason recorded
        ok, detail = False, {"exception": f"{type(exc).__name__}: {exc}"}
    return CriterionResult(number, title, bool(ok), time.perf_counter() - t0, detail)


def parse_suite(text: str):
    if text in SUITES:
        return SUITES[text]
    try:
        nums = tuple(int(s) for s in text.split(","))
    except ValueError:
        raise ValueError(f"suite must be one of {sorted(SUITES)} or a list like 1,3,5") from None
    bad = [k for k in nums if k not in CRITERIA]
    if bad:
        raise ValueError(f"no such criteria: {bad}")
    return nums


def run_suite(suite: str = "all", seed: int = 7, stream=None):
    """Run criteria in order, writing one pass/fail line each to ``stream``."""
    results = []
    for k in parse_suite(suite):
        r = run_criterion(k, seed)
        if stream is not None:
            print(r.line(), file=stream, flush=True)
            print("    " + json.dumps(r.detail, sort_keys=True, default=str), file=stream, flush=True)
        results.append(r)
    return results
