"""Acceptance criteria 1-9, each at its stated tolerance and time limit."""

import json
import re
import subprocess
import sys
import time

import numpy as np

from hellinger_kit import exact as ex
from hellinger_kit.experiments import (double_factorial_ratio, exact_fundamental_at_rational, load_oracle_cases,
                                       load_scenarios, oracle_agreement, run_theorem1_scenarios, run_theorem4)
from hellinger_kit.lp_analysis import IN, THRESHOLD, perturbation_check
from hellinger_kit.operator_model import build_family
from hellinger_kit.recurrence import check_identities, fundamental_system
from hellinger_kit.voc import (InhomogeneousProblem, delta_system_defects, hellinger_representation,
                               solve_inhomogeneous, voc_coefficients)

from conftest import random_family, random_points

RANDOM_SET = [(seed, 1 + seed % 4) for seed in range(24)]  # 24 families, n cycles through 1..4


def test_criterion_1_identity_suite(acceptance):
    t0 = time.perf_counter()
    worst = 0.0
    for seed, n in RANDOM_SET:
        fam = random_family(seed, n)
        for z in random_points(1000 + seed):
            worst = max(worst, check_identities(fundamental_system(fam, z, 50)).max_defect)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 10
    acceptance(1, ok, f"{len(RANDOM_SET)} families x 5 z, max scaled defect {worst:.2e} (<= 1e-9), "
                      f"{elapsed:.2f} s (< 10 s)")
    assert ok


def test_criterion_2_variation_of_constants(acceptance):
    worst_res = worst_delta = 0.0
    for seed, n in RANDOM_SET:
        fam = random_family(seed, n)
        rng = np.random.default_rng(2000 + seed)
        for z in random_points(1000 + seed):
            fs = fundamental_system(fam, z, 50)
            F = rng.normal(size=(50, n, n)) + 1j * rng.normal(size=(50, n, n))
            for side in ("right", "left"):
                seq = solve_inhomogeneous(InhomogeneousProblem(fam, z, F, 50, side), fs=fs)
                worst_res = max(worst_res, seq.residual)
                zero = np.zeros((n, n))
                coeffs = voc_coefficients(fs, F, 0, 50, (zero, zero), side)
                worst_delta = max(worst_delta, float(delta_system_defects(fs, F, coeffs).max()))
    ok = worst_res <= 1e-9 and worst_delta <= 1e-9
    acceptance(2, ok, f"max scaled residual {worst_res:.2e}, max step-system defect {worst_delta:.2e} (<= 1e-9)")
    assert ok


def test_criterion_3_representation(acceptance):
    families = [build_family({"builtin": "counterexample"}),
                build_family({"builtin": "free_jacobi", "n": 2, "a": 1, "b": 0.5}),
                build_family({"builtin": "geometric", "ratio": 2}),
                build_family({"builtin": "diag_geometric", "ratios": [2, 3]})]
    families += [random_family(seed, n) for seed, n in RANDOM_SET[:8]]
    worst, count = 0.0, 0
    rng = np.random.default_rng(3)
    for fam in families:
        z0 = complex(*rng.uniform(-1, 1, 2))
        fs0 = fundamental_system(fam, z0, 100)
        for _ in range(3):
            r, t = rng.uniform(0, 2), rng.uniform(0, 2 * np.pi)
            fs = fundamental_system(fam, z0 + r * np.exp(1j * t), 100)
            for name in ("P", "Q", "Pp", "Qp"):
                for k in (0, 10):
                    worst = max(worst, hellinger_representation(fs0, fs.solution(name), k).max_defect)
                    count += 1
    ok = worst <= 1e-8
    acceptance(3, ok, f"{count} reconstructions, max scaled defect {worst:.2e} (<= 1e-8)")
    assert ok


def test_criterion_4_oracle(acceptance):
    cases = load_oracle_cases()
    worst = 0.0
    for case in cases:
        worst = max(worst, oracle_agreement(build_family(case["family"]), case["z"], case.get("J", 200)))
    ok = worst <= 1e-12
    acceptance(4, ok, f"{len(cases)} exact-capable scenarios, max entrywise relative error {worst:.2e} (<= 1e-12)")
    assert ok


def test_criterion_5_counterexample(acceptance):
    t0 = time.perf_counter()
    rep = run_theorem4(J_exponent=10_000, J_bounded=1_000, p_list=(2.0, 2.1))
    elapsed = time.perf_counter() - t0
    ok = rep.passed and elapsed < 60
    c = rep.checks
    acceptance(5, ok, f"exponents P {c['exponent_P']['value']:.4f}, Q {c['exponent_Q']['value']:.4f} (-0.5 +- 0.05); "
                      f"p=2 {c['membership_p=2']['right']}, p=2.1 {c['membership_p=2.1']['right']}; "
                      f"witness ratio i {c['witness_z=i']['ratio']:.3f}, -i {c['witness_z=-i']['ratio']:.3f} "
                      f"(>= 0.1); {elapsed:.1f} s (< 60 s)")
    assert ok


def test_criterion_6_hellinger_scenarios(acceptance):
    wanted = {"geometric-r2-p1", "geometric-r2-p2", "diag-geometric-2-3-p1", "diag-geometric-2-3-p2"}
    scenarios = [s for s in load_scenarios() if s["name"] in wanted]
    assert {s["name"] for s in scenarios} == wanted
    t0 = time.perf_counter()
    rep = run_theorem1_scenarios(scenarios)
    elapsed = time.perf_counter() - t0
    points = [pt for m in rep.measured.values() for pt in m["points"]]
    detail_ok = all(
        pt["status"] == "ok" and pt["product"] <= THRESHOLD and all(b["holds"] for b in pt["bounds"])
        and pt["verdict_right"] == IN and pt["verdict_left"] == IN for pt in points
    )
    worst = max(b["N"] / b["bound"] for pt in points for b in pt["bounds"])
    ok = rep.passed and detail_ok and len(points) == 4 * 64 and elapsed < 60
    acceptance(6, ok, f"{len(points)} grid points over 4 scenarios, worst N / (4 C M) = {worst:.3f} (<= 1.05), "
                      f"{elapsed:.1f} s (< 60 s)")
    assert ok


def test_criterion_7_perturbation(acceptance):
    fam = build_family({"builtin": "geometric", "ratio": 2})
    preserved = {p: perturbation_check(fam, {"kind": "sin"}, p).preserved for p in (1, 2)}
    gated = perturbation_check(fam, {"kind": "linear"}, 1)
    ok = all(preserved.values()) and gated.status == "precondition-violated"
    acceptance(7, ok, f"sin(j) preserves all-in-lp at p=1: {preserved[1]}, p=2: {preserved[2]}; "
                      f"j*E gate status: {gated.status}")
    assert ok


def test_criterion_8_double_factorial(acceptance):
    fam = build_family({"builtin": "counterexample"})
    orc = exact_fundamental_at_rational(fam, 0, 1000)
    bad = []
    for m in range(501):
        r = (-1) ** m * double_factorial_ratio(m)
        expected = [[ex.GaussQ(r), ex.GaussQ(0)], [ex.GaussQ(0), ex.GaussQ(r)]]
        if orc.get("Q", 2 * m) != expected:  # Q_2m = r E, so its norm is exactly |r|
            bad.append(m)
    ok = not bad
    acceptance(8, ok, f"||Q_2m(0)|| = (2m-1)!!/(2m)!! exactly for m = 0..500 ({501 - len(bad)} / 501 equal)")
    assert ok


def _strip_timestamp(text):
    return re.sub(r'"timestamp": \{[^{}]*\}', '"timestamp": null', text)


def test_criterion_9_determinism(acceptance, tmp_path):
    family = json.dumps({"builtin": "random", "n": 2, "seed": 5})
    geometric = json.dumps({"builtin": "geometric", "ratio": 2})
    runs = [
        ["hellinger", "--family", geometric, "--p", "2", "--J", "200"],
        ["lp-scan", "--family", "counterexample", "--p", "2.1", "--J", "2000", "--grid", "0,i,1+i"],
        ["identities", "--family", family, "--z", "1+0.5i", "--J", "50"],
    ]
    identical = True
    for i, argv in enumerate(runs):
        outputs = []
        for rep in range(2):
            out = tmp_path / f"run{i}_{rep}"
            proc = subprocess.run([sys.executable, "-m", "hellinger_kit.cli", *argv, "--out", str(out)],
                                  capture_output=True, text=True)
            assert proc.returncode == 0, proc.stderr
            files = sorted(p.name for p in out.iterdir())
            outputs.append({name: (out / name).read_text() for name in files})
        a, b = outputs
        identical &= a.keys() == b.keys()
        identical &= _strip_timestamp(a["report.json"]) == _strip_timestamp(b["report.json"])
        identical &= a["report.json"] != _strip_timestamp(a["report.json"])  # timestamp really present
        identical &= all(a[k] == b[k] for k in a if k.endswith(".csv"))
    acceptance(9, identical, f"{len(runs)} commands run twice in fresh processes; reports byte-identical "
                             f"apart from the timestamp: {identical}")
    assert identical
