import json
from fractions import Fraction

import numpy as np
import pytest

from hellinger_kit import exact as ex
from hellinger_kit.errors import ConfigError, HellingerKitError
from hellinger_kit.experiments import (bounded_witness_search, double_factorial_ratio,
                                       exact_fundamental_at_rational, load_scenarios, oracle_agreement,
                                       run_theorem1_scenarios, run_theorem4)
from hellinger_kit.operator_model import build_family
from hellinger_kit.recurrence import fundamental_system


def test_double_factorial_ratio():
    assert double_factorial_ratio(0) == 1
    assert double_factorial_ratio(1) == Fraction(1, 2)
    assert double_factorial_ratio(3) == Fraction(15, 48)


def test_exact_parity_and_closed_forms(counterexample):
    orc = exact_fundamental_at_rational(counterexample, 0, 60)
    for j in range(0, 61):
        if j % 2 == 0:
            assert ex.is_zero(orc.get("P", j))
        else:
            assert ex.is_zero(orc.get("Q", j))
    for m in range(30):
        assert orc.get("Q", 2 * m)[0][0] == (-1) ** m * double_factorial_ratio(m)
        odd = Fraction(1, 2 * m + 1) / double_factorial_ratio(m)
        assert abs(complex(orc.get("P", 2 * m + 1)[0][0])) == pytest.approx(float(odd))
        assert orc.get("P", 2 * m + 1)[0][0].abs2() == odd ** 2


def test_exact_left_system_is_transpose_for_symmetric_family(counterexample):
    orc = exact_fundamental_at_rational(counterexample, "1/3+i", 10, left=True)
    for j in range(-1, 11):
        assert orc.get("Qp", j) == [list(r) for r in zip(*orc.get("Q", j))]


def test_exact_at_gaussian_point_matches_float():
    fam = build_family({"builtin": "free_jacobi", "n": 2, "a": 1, "b": "1/2"})
    assert oracle_agreement(fam, "1/3+i", 100) <= 1e-12


def test_exact_horizon_cap(counterexample):
    with pytest.raises(HellingerKitError, match="memory cap"):
        exact_fundamental_at_rational(counterexample, 0, 50, max_horizon=10)


def test_witness_search_at_i(counterexample):
    fs = fundamental_system(counterexample, 1j, 1000)
    best = bounded_witness_search(fs)
    assert best["score"] >= 0.1 and np.isfinite(best["sup"])


def test_witness_search_finds_nothing_for_decaying_system(geometric):
    fs = fundamental_system(geometric, 0.0, 200)
    assert bounded_witness_search(fs)["score"] < 1e-10


def test_scenario_fixture_is_versioned():
    scenarios = load_scenarios()
    names = {s["name"] for s in scenarios}
    assert {"geometric-r2-p1", "geometric-r2-p2", "counterexample-p2"} <= names


def test_scenario_version_check(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"version": 2, "scenarios": []}))
    with pytest.raises(ConfigError, match="version"):
        load_scenarios(path)


def test_invariance_scenarios_small_grid():
    scenarios = [s for s in load_scenarios() if s["name"] in ("geometric-r2-p2", "counterexample-p2")]
    rep = run_theorem1_scenarios(scenarios, z_grid=[1, 2j])
    assert rep.passed
    assert rep.checks["counterexample-p2"]["outcome"] == "vacuous"


def test_counterexample_script_rejects_small_horizons():
    with pytest.raises(ConfigError):
        run_theorem4(J_exponent=100)
