"""Command-line entry point.

Every subcommand reads a family spec and a few numeric settings, runs one
library operation and emits a report bundle: ``report.json`` plus one or
more ``series_*.csv`` files when ``--out DIR`` is given, otherwise the JSON
report on standard output.

Exit codes: 0 success, 1 a verdict or tolerance check failed, 2 bad
configuration, 3 numerical abort (overflow or ill-conditioned blocks).
Errors are also written to standard error as one JSON object.

Settings come from ``--config FILE`` (a JSON object whose keys are the long
option names, e.g. ``{"family": {...}, "z": "1+0.5i", "J": 50}``); flags given
on the command line override the file.  Complex numbers on the command line
use ``a+bi`` text (``"1+0.5i"``, ``"-i"``, ``"1/3+2i"``); in JSON files they
may also be ``[re, im]`` pairs.
"""

import argparse
import csv
import json
import math
import os
import platform
import sys
import time
from datetime import datetime, timezone

import numpy as np
import scipy

from . import __version__, linalg
from ._parallel import ordered_map
from .errors import ConfigError, HellingerKitError, HorizonExceededError, NumericalError
from .experiments import exact_fundamental_at_rational, oracle_agreement, run_theorem4
from .lp_analysis import (conjugate_exponent, default_grid, hellinger_check, membership_verdict,
                          perturbation_check, tail_norm)
from .operator_model import build_family, build_sequence, decode_complex, format_complex, parse_complex
from .recurrence import IDENTITY_NAMES, NAMES, TOL_REC, check_identities, fundamental_system, solve_homogeneous
from .voc import (InhomogeneousProblem, delta_system_defects, hellinger_representation, solve_inhomogeneous,
                  voc_coefficients)

SCHEMA = 1
EXIT_OK, EXIT_VERDICT, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3
TOL_REPRESENTATION = 1e-8
TOL_ORACLE = 1e-12

# per-command defaults; anything not listed defaults to None
DEFAULTS = {
    "recur": {"z": "0", "J": 100, "p": "2", "rescale": False},
    "solve": {"z": "0", "J": 100, "side": "right", "tol": TOL_REC},
    "identities": {"z": "0", "J": 50, "tol": TOL_REC},
    "voc-check": {"z0": "0", "z": "1", "J": 100, "k": 0, "forcing": {"kind": "sin"}, "tol": TOL_REPRESENTATION},
    "lp-scan": {"z0": "0", "p": "2", "J": 2000, "grid": "default", "k": 0},
    "hellinger": {"z0": "0", "p": "2", "J": 200, "grid": "default", "symmetric_shortcut": False},
    "perturb": {"p": "2", "J": 2000, "forcing": {"kind": "sin"}},
    "counterexample": {"J": 10_000, "J_bounded": 1_000, "p_list": [2.0, 2.1], "n": 2},
    "oracle": {"z": "0", "J": 20, "tol": TOL_ORACLE},
}
COMMON = {"norm": linalg.DEFAULT_NORM}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# ---------------------------------------------------------------------------
# Argument parsing and config merging
# ---------------------------------------------------------------------------

def build_parser():
    ap = _Parser(prog="hellinger-kit", description="Block three-term recurrences and lp-invariance checks.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    def command(name, help_text, *options):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", help="JSON file with settings; flags override it")
        p.add_argument("--out", help="output directory for report.json and series_*.csv")
        p.add_argument("--norm", choices=linalg.NORMS, help="matrix norm (default spectral)")
        if name != "counterexample":
            p.add_argument("--family", help="family spec: JSON file, inline JSON or a builtin name")
            p.add_argument("--n", type=int, help="block order for a builtin given by name")
        for opt in options:
            OPTIONS[opt](p)
        return p

    command("recur", "fundamental systems P, Q, P+, Q+ at z", "z", "J", "p", "rescale")
    command("solve", "homogeneous or forced solve at z", "z", "J", "side", "init", "forcing", "tol")
    command("identities", "check the Wronskian-type identities", "z", "J", "tol")
    command("voc-check", "variation-of-constants and representation defects", "z0", "z", "J", "k",
            "forcing", "tol")
    command("lp-scan", "tail norms and membership verdicts over a z-grid", "z0", "p", "q", "J", "grid", "k")
    command("hellinger", "lp-invariance check around z0", "z0", "p", "q", "J", "grid", "symmetric_shortcut")
    command("perturb", "bounded diagonal perturbation check at z = 0", "p", "q", "J", "forcing")
    command("counterexample", "power-decay counterexample reproduction", "J", "J_bounded", "p_list", "n")
    command("oracle", "exact Gaussian-rational fundamental system dump", "z", "J", "tol")
    return ap


OPTIONS = {
    "z": lambda p: p.add_argument("--z", help="spectral parameter, e.g. 1+0.5i"),
    "z0": lambda p: p.add_argument("--z0", help="reference point"),
    "J": lambda p: p.add_argument("--J", type=int, help="horizon"),
    "J_bounded": lambda p: p.add_argument("--J-bounded", dest="J_bounded", type=int,
                                          help="horizon of the bounded-witness search"),
    "p": lambda p: p.add_argument("--p", help="exponent in [1, inf]"),
    "q": lambda p: p.add_argument("--q", help="conjugate exponent (checked against p)"),
    "p_list": lambda p: p.add_argument("--p-list", dest="p_list", type=float, nargs="+",
                                       help="exponents for the membership verdicts"),
    "n": lambda p: p.add_argument("--n", type=int, help="block order"),
    "k": lambda p: p.add_argument("--k", type=int, help="tail or anchor index"),
    "grid": lambda p: p.add_argument("--grid", help="'default' or comma-separated points"),
    "rescale": lambda p: p.add_argument("--rescale", action="store_true", default=None,
                                        help="renormalise to avoid overflow"),
    "side": lambda p: p.add_argument("--side", choices=("right", "left")),
    "init": lambda p: (p.add_argument("--init-m1", dest="init_m1", help="u_{-1} as a JSON vector"),
                       p.add_argument("--init-0", dest="init_0", help="u_0 as a JSON vector")),
    "forcing": lambda p: p.add_argument("--forcing", help="block sequence spec: JSON file or inline JSON"),
    "tol": lambda p: p.add_argument("--tol", type=float, help="pass/fail tolerance"),
    "symmetric_shortcut": lambda p: p.add_argument("--symmetric-shortcut", dest="symmetric_shortcut",
                                                   action="store_true", default=None,
                                                   help="take the left precondition from symmetry"),
}


def _load_json_arg(value, what):
    """A JSON document given inline or as a file path."""
    if isinstance(value, (dict, list)):
        return value
    text = str(value).strip()
    if text[:1] in "{[":
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{what}: invalid inline JSON ({exc})") from None
    if os.path.isfile(text):
        try:
            with open(text) as fh:
                return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{what}: invalid JSON in {text} ({exc})") from None
    return None


def _family_spec(value, n):
    if value is None:
        raise ConfigError("missing --family")
    doc = _load_json_arg(value, "family")
    if doc is None:
        text = str(value)
        if text.endswith(".json"):
            raise ConfigError(f"family file not found: {text}")
        doc = {"builtin": text}
    if n is not None and isinstance(doc, dict):
        doc = dict(doc, n=n)
    return doc


def merge_config(args):
    """Defaults < ``--config`` file < flags.  Returns a plain dict."""
    cfg = dict(COMMON)
    cfg.update(DEFAULTS[args.command])
    if args.config:
        doc = _load_json_arg(args.config, "config")
        if not isinstance(doc, dict):
            raise ConfigError(f"config must be a JSON object in an existing file: {args.config}")
        cfg.update({k.replace("-", "_"): v for k, v in doc.items()})
    for key, val in vars(args).items():
        if key in ("command", "config") or val is None:
            continue
        cfg[key] = val
    return cfg


def _parse_z(value, name):
    if value is None:
        raise ConfigError(f"missing --{name}")
    try:
        if isinstance(value, str):
            return parse_complex(value)
        return decode_complex(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from None


def _parse_p(cfg):
    raw = cfg.get("p")
    try:
        p = float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"p: cannot read {raw!r} as an exponent") from None
    if not p >= 1:
        raise ConfigError(f"p must lie in [1, inf], got {raw!r}")
    q = conjugate_exponent(p)
    if cfg.get("q") is not None:
        try:
            q_given = float(cfg["q"])
        except (TypeError, ValueError):
            raise ConfigError(f"q: cannot read {cfg['q']!r}") from None
        if not math.isclose(q_given, q, rel_tol=1e-12) and not (math.isinf(q) and math.isinf(q_given)):
            raise ConfigError(f"1/p + 1/q must equal 1 (p={p:g} needs q={q:g}, got {q_given:g})")
    return p, q


def _parse_J(cfg, key="J"):
    J = cfg.get(key)
    if not isinstance(J, int) or isinstance(J, bool) or J < 1:
        raise ConfigError(f"{key} must be a positive integer, got {J!r}")
    return J


def _parse_grid(cfg, z0):
    grid = cfg.get("grid", "default")
    if grid is None or grid == "default":
        return default_grid(z0), "default"
    if isinstance(grid, str):
        items = [s for s in grid.split(",") if s.strip()]
    elif isinstance(grid, list):
        items = grid
    else:
        raise ConfigError(f"grid must be 'default' or a list of points, got {grid!r}")
    if not items:
        raise ConfigError("grid is empty")
    pts = [_parse_z(s, "grid") for s in items]
    return pts, [format_complex(z) for z in pts]


def _forcing(cfg, n):
    doc = cfg.get("forcing")
    spec = _load_json_arg(doc, "forcing") if not isinstance(doc, dict) else doc
    if not isinstance(spec, dict):
        raise ConfigError(f"forcing must be a sequence spec object, got {doc!r}")
    return build_sequence(spec, n), spec


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else ("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))
    if isinstance(x, (complex, np.complexfloating)):
        return [_jsonable(x.real), _jsonable(x.imag)]
    return x


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def dump_report(report):
    return json.dumps(_jsonable(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _norm_rows(fs, names, kind, p=None):
    js = np.arange(-1, fs.J + 1)
    cols = [fs.norms(nm, kind) for nm in names]
    logs = [fs.log_norms(nm, kind) for nm in names]
    header = ["j"] + [f"norm_{nm}" for nm in names] + [f"log_norm_{nm}" for nm in names]
    extra = []
    if p is not None and math.isfinite(p):
        header += [f"partial_sum_{nm}" for nm in names]
        for lg in logs:
            with np.errstate(over="ignore"):
                extra.append(np.cumsum(np.exp(p * lg)))
    rows = [[int(j)] + [c[i] for c in cols] + [lg[i] for lg in logs] + [e[i] for e in extra]
            for i, j in enumerate(js)]
    return header, rows


# ---------------------------------------------------------------------------
# Commands.  Each returns (result, series, exit_code, summary).
# ---------------------------------------------------------------------------

def cmd_recur(cfg, family):
    z, J, kind = _parse_z(cfg["z"], "z"), _parse_J(cfg), cfg["norm"]
    p, _ = _parse_p(cfg)
    fs = fundamental_system(family, z, J, rescale=bool(cfg.get("rescale")))
    result = {
        "z": format_complex(z), "requested_J": J, "J": fs.J, "status": fs.status,
        "stop_index": fs.stop_index, "message": fs.message, "rescaled": fs.rescaled,
        "final_log_norms": {nm: fs.log_norms(nm, kind)[-1] for nm in NAMES},
        "max_log_norms": {nm: float(np.max(fs.log_norms(nm, kind))) for nm in NAMES},
    }
    code = EXIT_OK if fs.status == "ok" else EXIT_NUMERICAL
    return result, {"fundamental": _norm_rows(fs, NAMES, kind, p)}, code, \
        f"recur: J={fs.J} status={fs.status}"


def _vector(value, n, name):
    doc = _load_json_arg(value, name) if isinstance(value, str) else value
    if doc is None:
        raise ConfigError(f"{name}: expected a JSON vector")
    try:
        vec = np.array([decode_complex(x) for x in doc], dtype=np.complex128)
    except TypeError:
        raise ConfigError(f"{name}: expected a JSON list") from None
    if vec.shape != (n,):
        raise ConfigError(f"{name}: dimension mismatch, expected {n} entries")
    return vec


def cmd_solve(cfg, family):
    z, J, kind, side = _parse_z(cfg["z"], "z"), _parse_J(cfg), cfg["norm"], cfg["side"]
    n = family.n
    e0 = np.zeros(n, dtype=np.complex128)
    e0[0] = 1.0
    u_m1 = _vector(cfg["init_m1"], n, "init_m1") if cfg.get("init_m1") is not None else np.zeros(n, complex)
    u_0 = _vector(cfg["init_0"], n, "init_0") if cfg.get("init_0") is not None else e0
    tol = float(cfg["tol"])
    if cfg.get("forcing") is None:
        seq = solve_homogeneous(family, z, side, u_m1, u_0, J, kind=kind)
        result = {"mode": "homogeneous", "residual": seq.residual,
                  "superposition_defect": seq.superposition_defect, "status": seq.status,
                  "message": seq.message, "J": seq.J}
        ok = seq.residual <= tol and seq.superposition_defect <= tol
        code = EXIT_NUMERICAL if seq.status != "ok" else (EXIT_OK if ok else EXIT_VERDICT)
    else:
        F, fspec = _forcing(cfg, n)
        problem = InhomogeneousProblem(family, z, [F(j) for j in range(J)], J, side)
        seq = solve_inhomogeneous(problem, tol=tol, kind=kind)
        result = {"mode": "forced", "forcing": fspec, "residual": seq.residual, "J": seq.J,
                  "base_constants": "zero"}
        code = EXIT_OK
    result.update(z=format_complex(z), side=side, tol=tol)
    if result["mode"] == "homogeneous":
        result.update(init_m1=u_m1, init_0=u_0)
    rows = [[j - 1, v] for j, v in enumerate(seq.norms(kind))]
    return result, {"solution": (["j", "norm_u"], rows)}, code, \
        f"solve: residual {result['residual']:.3e} (tol {tol:.1e})"


def cmd_identities(cfg, family):
    z, J, kind, tol = _parse_z(cfg["z"], "z"), _parse_J(cfg), cfg["norm"], float(cfg["tol"])
    fs = fundamental_system(family, z, J)
    if fs.status != "ok":
        raise NumericalError(f"fundamental system truncated at {fs.J}: {fs.message}")
    rep = check_identities(fs, kind=kind)
    result = dict(rep.to_dict(), z=format_complex(z), J=J, tol=tol, passed=rep.passed(tol))
    rows = [[int(j)] + list(d) for j, d in zip(rep.j_values, rep.defects)]
    code = EXIT_OK if rep.passed(tol) else EXIT_VERDICT
    return result, {"identities": (["j"] + list(IDENTITY_NAMES), rows)}, code, \
        f"identities: max scaled defect {rep.max_defect:.3e} (tol {tol:.1e})"


def cmd_voc_check(cfg, family):
    z0, z = _parse_z(cfg["z0"], "z0"), _parse_z(cfg["z"], "z")
    J, kind, tol, k = _parse_J(cfg), cfg["norm"], float(cfg["tol"]), int(cfg["k"])
    fs0, fs = fundamental_system(family, z0, J), fundamental_system(family, z, J)
    for f in (fs0, fs):
        if f.status != "ok":
            raise NumericalError(f"fundamental system truncated at {f.J}: {f.message}")
    reps, rows = {}, None
    for name in NAMES:
        rep = hellinger_representation(fs0, fs.solution(name), k, kind=kind)
        reps[name] = {"max_defect": rep.max_defect, "anchor_cond": rep.anchor_cond, "side": rep.side}
        col = rep.defects
        rows = [[k + i] for i in range(col.size)] if rows is None else rows
        for i, v in enumerate(col):
            rows[i].append(v)
    F, fspec = _forcing(cfg, family.n)
    Fm = [F(j) for j in range(J)]
    forced = {}
    for side in ("right", "left"):
        seq = solve_inhomogeneous(InhomogeneousProblem(family, z, Fm, J, side), fs=fs, tol=tol, kind=kind)
        coeffs = voc_coefficients(fs, Fm, 0, J, (np.zeros((family.n,) * 2), np.zeros((family.n,) * 2)), side)
        delta = delta_system_defects(fs, Fm, coeffs, kind)
        forced[side] = {"residual": seq.residual, "delta_system_max": float(delta.max(initial=0.0))}
    worst = max([r["max_defect"] for r in reps.values()]
                + [max(v["residual"], v["delta_system_max"]) for v in forced.values()])
    result = {"z0": format_complex(z0), "z": format_complex(z), "J": J, "k": k, "forcing": fspec,
              "representation": reps, "forced": forced, "max_defect": worst, "tol": tol,
              "passed": worst <= tol}
    header = ["j"] + [f"defect_{nm}" for nm in NAMES]
    return result, {"representation": (header, rows)}, EXIT_OK if worst <= tol else EXIT_VERDICT, \
        f"voc-check: max defect {worst:.3e} (tol {tol:.1e})"


def cmd_lp_scan(cfg, family):
    z0, kind = _parse_z(cfg["z0"], "z0"), cfg["norm"]
    p, q = _parse_p(cfg)
    J, k = _parse_J(cfg), int(cfg["k"])
    grid, grid_desc = _parse_grid(cfg, z0)

    def one(z):
        fs = fundamental_system(family, z, J, rescale=True)
        mem = membership_verdict(family, z, p, J, fs=fs, q=q, kind=kind)
        kk = min(k, fs.J)
        right = tail_norm(fs, p, kk, side="plain", kind=kind)
        left = tail_norm(fs, q, kk, side="plus", kind=kind)
        return {"z": format_complex(z), "membership": mem.to_dict(),
                "tail_right": right.to_dict(), "tail_left": left.to_dict()}

    points = ordered_map(one, grid)
    rows = []
    for i, (z, pt) in enumerate(zip(grid, points)):
        m = pt["membership"]
        rows.append([i, z.real, z.imag, m["J"], m["right"]["verdict"], m["left"]["verdict"],
                     pt["tail_right"]["value"], pt["tail_left"]["value"]])
    header = ["index", "z_re", "z_im", "J", "verdict_right", "verdict_left", "tail_right", "tail_left"]
    result = {"z0": format_complex(z0), "p": p, "q": q, "J": J, "k": k, "grid": grid_desc, "points": points}
    return result, {"lp_scan": (header, rows)}, EXIT_OK, f"lp-scan: {len(points)} points"


def cmd_hellinger(cfg, family):
    z0, kind = _parse_z(cfg["z0"], "z0"), cfg["norm"]
    p, _ = _parse_p(cfg)
    J = _parse_J(cfg)
    grid, grid_desc = _parse_grid(cfg, z0)
    rep = hellinger_check(family, z0, p, grid, J=J, kind=kind,
                          symmetric_shortcut=bool(cfg.get("symmetric_shortcut")))
    result = dict(rep.to_dict(), grid=grid_desc)
    rows = []
    for i, (z, pt) in enumerate(zip(grid, rep.points)):
        rows.append([i, z.real, z.imag, pt.get("k0", -1), pt.get("product", "nan"), pt["passed"]])
    code = EXIT_OK if rep.passed else EXIT_VERDICT
    return result, {"hellinger": (["index", "z_re", "z_im", "k0", "product", "passed"], rows)}, code, \
        f"hellinger: status={rep.status} passed={rep.passed} ({len(rep.points)} points)"


def cmd_perturb(cfg, family):
    p, _ = _parse_p(cfg)
    J, kind = _parse_J(cfg), cfg["norm"]
    F, fspec = _forcing(cfg, family.n)
    rep = perturbation_check(family, F, p, J, kind=kind)
    result = dict(rep.to_dict(), forcing=fspec)
    rows = [[j, linalg.operator_norm(F(j), kind)] for j in range(J + 1)]
    code = EXIT_OK if rep.preserved else EXIT_VERDICT
    return result, {"forcing": (["j", "norm_F"], rows)}, code, \
        f"perturb: status={rep.status} preserved={rep.preserved}"


def cmd_counterexample(cfg, family):
    J, Jb = _parse_J(cfg), _parse_J(cfg, "J_bounded")
    n = int(cfg.get("n") or 2)
    rep = run_theorem4(J, Jb, tuple(float(x) for x in cfg["p_list"]), n=n, kind=cfg["norm"])
    s = rep.series
    decay_rows = [[j, a, b] for j, (a, b) in enumerate(zip(s["norm_P_z0"], s["norm_Q_z0"]))]
    wit_rows = [[j - 1, a, b] for j, (a, b) in enumerate(zip(s["witness_z=i"], s["witness_z=-i"]))]
    series = {"decay": (["j", "norm_P", "norm_Q"], decay_rows),
              "witness": (["j", "norm_u_plus_i", "norm_u_minus_i"], wit_rows)}
    return rep.to_dict(), series, EXIT_OK if rep.passed else EXIT_VERDICT, \
        f"counterexample: passed={rep.passed}"


def cmd_oracle(cfg, family):
    z_text, J, tol = cfg["z"], _parse_J(cfg), float(cfg["tol"])
    z_text = z_text if isinstance(z_text, str) else format_complex(decode_complex(z_text))
    orc = exact_fundamental_at_rational(family, z_text, J, left=True)
    agreement = oracle_agreement(family, orc.z, J)

    def text(m):
        return [[str(x) for x in row] for row in m]

    blocks = {nm: [text(m) for m in getattr(orc, nm)] for nm in NAMES}
    result = {"z": str(orc.z), "J": J, "indices": list(range(-1, J + 1)), "blocks": blocks,
              "float_agreement": agreement, "tol": tol, "passed": agreement <= tol}
    rows = []
    for i in range(J + 2):
        rows.append([i - 1] + [linalg.operator_norm(orc.as_float(nm)[i], cfg["norm"]) for nm in NAMES])
    code = EXIT_OK if agreement <= tol else EXIT_VERDICT
    return result, {"oracle": (["j"] + [f"norm_{nm}" for nm in NAMES], rows)}, code, \
        f"oracle: float agreement {agreement:.3e} (tol {tol:.1e})"


COMMANDS = {
    "recur": cmd_recur, "solve": cmd_solve, "identities": cmd_identities, "voc-check": cmd_voc_check,
    "lp-scan": cmd_lp_scan, "hellinger": cmd_hellinger, "perturb": cmd_perturb,
    "counterexample": cmd_counterexample, "oracle": cmd_oracle,
}


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------

def _error(exc, code):
    doc = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    sys.stderr.write(json.dumps(doc, sort_keys=True) + "\n")
    return code


def run(argv=None):
    """Parse ``argv``, execute one subcommand and return the exit code."""
    t0 = time.perf_counter()
    started = datetime.now(timezone.utc)
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise ConfigError("no command given; see --help")
        cfg = merge_config(args)
        if cfg.get("norm") not in linalg.NORMS:
            raise ConfigError(f"norm must be one of {linalg.NORMS}")
        family = None
        if args.command == "counterexample":
            cfg["family"] = {"kind": "builtin", "name": "hellinger_counterexample", "n": int(cfg.get("n") or 2)}
        else:
            family = build_family(_family_spec(cfg.get("family"), cfg.get("n")))
            cfg["family"] = family.to_spec()
        out = cfg.get("out")
        if out:
            os.makedirs(out, exist_ok=True)
            if not os.access(out, os.W_OK):
                raise ConfigError(f"output directory not writable: {out}")
        result, series, code, summary = COMMANDS[args.command](cfg, family)
    except ConfigError as exc:
        return _error(exc, EXIT_CONFIG)
    except HorizonExceededError as exc:
        return _error(exc, EXIT_CONFIG)
    except NumericalError as exc:
        return _error(exc, EXIT_NUMERICAL)
    except (HellingerKitError, OSError, ValueError) as exc:
        return _error(exc, EXIT_CONFIG)

    config_echo = {k: v for k, v in cfg.items() if k not in ("out", "config")}
    report = {
        "schema": SCHEMA,
        "command": args.command,
        "config": config_echo,
        "result": result,
        "exit_code": code,
        "meta": {"hellinger_kit": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                 "python": platform.python_version()},
        "timestamp": {"utc": started.isoformat(), "wall_time_s": time.perf_counter() - t0},
    }
    text = dump_report(report)
    if out:
        with open(os.path.join(out, "report.json"), "w") as fh:
            fh.write(text)
        for name, (header, rows) in series.items():
            write_csv(os.path.join(out, f"series_{name}.csv"), header, rows)
        print(summary)
    else:
        sys.stdout.write(text)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
