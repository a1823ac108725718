import csv
import json

import pytest

from hellinger_kit.cli import run


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "counterexample.json").write_text(json.dumps({"builtin": "counterexample"}))
    (tmp_path / "random2.json").write_text(json.dumps({"kind": "builtin", "name": "random", "n": 2,
                                                       "params": {"seed": 3}}))
    (tmp_path / "geometric.json").write_text(json.dumps({"builtin": "geometric", "ratio": 2}))
    return tmp_path


def _report(path):
    return json.loads((path / "report.json").read_text())


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_recur_writes_bundle(workdir):
    assert run(["recur", "--family", "counterexample.json", "--z", "0", "--J", "100", "--out", "out"]) == 0
    rep = _report(workdir / "out")
    assert rep["schema"] == 1 and rep["command"] == "recur"
    assert set(rep["timestamp"]) == {"utc", "wall_time_s"}
    rows = _rows(workdir / "out" / "series_fundamental.csv")
    assert [int(r["j"]) for r in rows] == list(range(-1, 101))
    assert float(rows[4]["norm_P"]) == pytest.approx(2 / 3)  # j = 3
    assert float(rows[3]["norm_Q"]) == pytest.approx(1 / 2)  # j = 2


def test_identities_exit_code_and_output(workdir, capsys):
    assert run(["identities", "--family", "random2.json", "--z", "1+0.5i", "--J", "50"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["result"]["max_defect"] <= 1e-9


def test_hellinger_example(workdir):
    assert run(["hellinger", "--family", "geometric.json", "--z0", "0", "--p", "2", "--grid", "1,i",
                "--J", "200", "--out", "h"]) == 0
    assert _report(workdir / "h")["result"]["passed"]


def test_verdict_failure_is_exit_1(workdir):
    assert run(["hellinger", "--family", "counterexample.json", "--p", "2", "--grid", "i", "--J", "300"]) == 1
    assert run(["perturb", "--family", "geometric.json", "--p", "1", "--J", "200",
                "--forcing", '{"kind": "linear"}']) == 1


@pytest.mark.parametrize("argv", [
    ["recur", "--family", "missing.json"],
    ["recur", "--family", "{bad json"],
    ["recur", "--family", "geometric.json", "--z", "two"],
    ["recur", "--family", "geometric.json", "--J", "0"],
    ["hellinger", "--family", "geometric.json", "--p", "2", "--q", "3"],
    ["hellinger", "--family", "geometric.json", "--p", "0.5"],
    ["nonsense"],
    [],
])
def test_config_errors_are_exit_2_with_json(workdir, capsys, argv):
    assert run(argv) == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["exit_code"] == 2 and err["message"]


def test_numerical_abort_is_exit_3(workdir, capsys):
    assert run(["recur", "--family", "geometric.json", "--J", "2000", "--out", "g"]) == 3
    assert _report(workdir / "g")["result"]["status"] == "overflow"
    bad = json.dumps({"kind": "explicit", "n": 1, "sub": [1, 0, 1], "diag": [0, 0, 0], "super": [1, 1, 1]})
    assert run(["identities", "--family", bad, "--J", "2"]) == 3
    assert json.loads(capsys.readouterr().err)["exit_code"] == 3


def test_config_file_and_flag_override(workdir, capsys):
    (workdir / "cfg.json").write_text(json.dumps({"family": "geometric.json", "z": "1+i", "J": 30}))
    assert run(["identities", "--config", "cfg.json", "--J", "12"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["config"]["J"] == 12 and rep["config"]["z"] == "1+i"


def test_other_commands(workdir):
    assert run(["solve", "--family", "random2.json", "--z", "1+i", "--J", "30", "--init-0", "[1, [0, 1]]"]) == 0
    assert run(["solve", "--family", "random2.json", "--J", "30", "--forcing", '{"kind": "sin"}',
                "--side", "left", "--out", "s"]) == 0
    assert run(["voc-check", "--family", "random2.json", "--z", "2-i", "--J", "60", "--out", "v"]) == 0
    assert _report(workdir / "v")["result"]["max_defect"] <= 1e-8
    assert run(["lp-scan", "--family", "counterexample", "--p", "2.2", "--J", "1000", "--grid", "0,0.5",
                "--out", "l"]) == 0
    assert len(_rows(workdir / "l" / "series_lp_scan.csv")) == 2
    assert run(["oracle", "--family", "counterexample", "--z", "1/2", "--J", "4", "--out", "o"]) == 0
    rep = _report(workdir / "o")
    assert rep["result"]["blocks"]["Q"][3][0][0] == "-3/8"  # Q_2(1/2) = (z^2 - 1) / 2


def test_report_family_round_trips(workdir):
    from hellinger_kit.operator_model import build_family
    run(["recur", "--family", "random2.json", "--J", "5", "--out", "r"])
    spec = _report(workdir / "r")["config"]["family"]
    assert build_family(spec).to_spec() == spec


def test_reports_are_deterministic(workdir):
    argv = ["hellinger", "--family", "geometric.json", "--p", "1", "--grid", "1,2j,-3", "--J", "150"]
    assert run(argv + ["--out", "a"]) == 0 and run(argv + ["--out", "b"]) == 0
    a, b = _report(workdir / "a"), _report(workdir / "b")
    a.pop("timestamp"), b.pop("timestamp")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert (workdir / "a" / "series_hellinger.csv").read_bytes() == (workdir / "b" / "series_hellinger.csv").read_bytes()
