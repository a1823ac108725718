import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hellinger_kit.lp_analysis import (IN, OUT, UNKNOWN, conjugate_exponent, default_grid, growth_classify,
                                      hellinger_check, membership_verdict, perturbation_check,
                                      series_summable, tail_norm, tail_profile)
from hellinger_kit.operator_model import build_family
from hellinger_kit.recurrence import fundamental_system


def test_conjugate_exponent():
    assert conjugate_exponent(2) == 2
    assert conjugate_exponent(1) == math.inf
    assert conjugate_exponent(math.inf) == 1
    assert conjugate_exponent(3) == pytest.approx(1.5)
    with pytest.raises(ValueError):
        conjugate_exponent(0.5)


def test_growth_power_law():
    gc = growth_classify(np.arange(1, 101, dtype=float), window=(0, 99))
    assert gc.classification == "growth-power"
    assert gc.exponent == pytest.approx(1.0, abs=0.02)
    assert gc.root_estimate == pytest.approx(1.0, abs=0.1)


def test_growth_geometric_free_jacobi():
    fs = fundamental_system(build_family({"builtin": "free_jacobi"}), 3.0, 200)
    gc = growth_classify(fs.norms("Q")[1:], window=(100, 200))
    assert gc.classification == "growth-geometric"
    assert gc.rate == pytest.approx((3 + math.sqrt(5)) / 2, rel=1e-3)
    assert gc.root_estimate > 1


def test_counterexample_decay_exponent(counterexample):
    fs = fundamental_system(counterexample, 0.0, 10_000)
    gc = growth_classify(fs.norms("Q")[1:], window=(100, 10_000))
    assert gc.classification == "decay-power"
    assert gc.exponent == pytest.approx(-0.5, abs=0.05)


def test_short_or_zero_windows_are_inconclusive():
    assert growth_classify(np.ones(10)).classification == "inconclusive"
    assert growth_classify(np.zeros(100)).classification == "inconclusive"


def test_harmonic_boundary_is_divergent():
    gc = growth_classify(1 / np.sqrt(np.arange(1, 5001)), window=(500, 5000))
    assert series_summable(gc, 2.0) is False
    assert series_summable(gc, 2.2) is True
    assert series_summable(gc, math.inf) is True


def test_tail_empty_beyond_support():
    fs = fundamental_system(build_family({"builtin": "scalar_embed", "n": 1, "a": [1, 1, 1, 1], "b": [0, 0, 0, 0]}),
                            0.0, 3)
    assert tail_norm(fs, 2, 3, classify=False).value > 0
    assert tail_profile(np.full(5, -np.inf), 2.0)[0] == -np.inf


def test_geometric_tail_matches_closed_form(geometric):
    fs = fundamental_system(geometric, 0.0, 200)
    for J in (60, 80):
        t = tail_norm(fs, 1, 0, J)
        assert t.value == pytest.approx(2 - 2.0 ** -(J // 2), abs=1e-15)
    assert abs(tail_norm(fs, 1, 0, 100).value - tail_norm(fs, 1, 0, 80).value) <= 1e-10


def test_counterexample_partial_sums_grow_like_log(counterexample):
    fs = fundamental_system(counterexample, 0.0, 8000)
    vals = [tail_norm(fs, 2, 1, J, classify=False).value ** 2 for J in (1000, 2000, 4000, 8000)]
    steps = np.diff(vals)
    assert np.allclose(steps, steps[0], rtol=0.02)
    # ||P_{2m+1}(0)||^2 ~ pi / (4m) dominates, so doubling J adds (pi / 4) log 2
    assert steps[0] == pytest.approx(math.pi / 4 * math.log(2), rel=0.02)


def test_tail_monotone_in_k_and_J(counterexample):
    fs = fundamental_system(counterexample, 0.5j, 500)
    prof = tail_profile(fs.log_norms("Q")[1:], 2.0)
    assert np.all(np.diff(prof) <= 0)
    by_J = [tail_norm(fs, 2.0, 10, J, classify=False).value for J in (50, 100, 400)]
    assert by_J == sorted(by_J)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 10_000), st.floats(1.01, 20))
def test_holder_inequality(seed, p):
    rng = np.random.default_rng(seed)
    x, y = np.abs(rng.normal(size=30)), np.abs(rng.normal(size=30))
    q = conjugate_exponent(p)
    lhs = np.sum(x * y)
    rhs = np.sum(x ** p) ** (1 / p) * np.sum(y ** q) ** (1 / q)
    assert lhs <= rhs * (1 + 1e-12)


def test_membership_examples(counterexample, geometric):
    assert membership_verdict(geometric, 0.0, 1).right.verdict == IN
    fs = fundamental_system(counterexample, 0.0, 2000, rescale=True)
    assert membership_verdict(counterexample, 0.0, 2.2, fs=fs).right.verdict == IN
    assert membership_verdict(counterexample, 0.0, 2.0, fs=fs).right.verdict == OUT
    jac = build_family({"builtin": "free_jacobi"})
    assert membership_verdict(jac, 0.0, math.inf).right.verdict == IN
    assert membership_verdict(jac, 0.0, 2).right.verdict == OUT


def test_embedding_into_larger_p(geometric, counterexample):
    fs = fundamental_system(counterexample, 0.0, 2000, rescale=True)
    for fam, p1 in ((geometric, 1.0), (counterexample, 2.2)):
        assert membership_verdict(fam, 0.0, p1, fs=fs if fam is counterexample else None).right.verdict == IN
        for p2 in (p1 + 0.5, 4.0, math.inf):
            assert membership_verdict(fam, 0.0, p2, fs=fs if fam is counterexample else None).right.verdict == IN


def test_short_horizon_is_inconclusive():
    fam = build_family({"builtin": "scalar_embed", "n": 1, "a": [1] * 10, "b": [0] * 10})
    assert membership_verdict(fam, 0.0, 2, J=9).right.verdict == UNKNOWN


def test_default_grid():
    grid = default_grid(1j)
    assert len(grid) == 64
    assert {round(abs(z - 1j), 12) for z in grid} == {0.5, 1.0, 2.0, 5.0}


def test_hellinger_examples(geometric, diag_geometric):
    rep = hellinger_check(geometric, 0.0, 2, [1, 1j, 3 + 4j, 0.0], J=200)
    assert rep.passed
    assert rep.points[3]["k0"] == 0 and rep.points[3]["product"] == 0
    rep = hellinger_check(diag_geometric, 0.0, 1, [2j], J=200)
    assert rep.passed and "k0" in rep.points[0]
    for b in rep.points[0]["bounds"]:
        assert b["holds"] and b["N"] <= b["bound"] * 1.05
        assert b["bound"] == pytest.approx(4 * b["C_k"] * (rep.points[0]["M_p"] if b["side"] == "right"
                                                           else rep.points[0]["M_q_plus"]))


def test_hellinger_vacuous_for_counterexample(counterexample):
    rep = hellinger_check(counterexample, 0.0, 2, [1j], J=200)
    assert rep.status == "vacuous" and not rep.passed


def test_symmetric_shortcut(diag_geometric):
    rep = hellinger_check(diag_geometric, 0.0, 2, [1, -1j], J=200, symmetric_shortcut=True)
    assert rep.passed and rep.precondition["symmetric_shortcut"]


def test_perturbations(geometric):
    rep = perturbation_check(geometric, {"kind": "zero"}, 1, J=200)
    assert rep.preserved
    assert perturbation_check(geometric, {"kind": "sin"}, 1, J=200).preserved
    bad = perturbation_check(geometric, {"kind": "linear"}, 1, J=200)
    assert bad.status == "precondition-violated" and bad.perturbed is None
