"""Exact-arithmetic oracle and scripted reproduction scenarios.

``exact_fundamental_at_rational`` runs the recurrence over Gaussian
rationals and is the reference for floating-point checks.  ``run_theorem4``
reproduces the ``p > 2`` counterexample (power-law decay of the fundamental
solutions at ``z = 0``, membership exactly for ``p > 2``, bounded
non-decaying solutions at ``z = +-i``); ``run_theorem1_scenarios`` runs
:func:`~hellinger_kit.lp_analysis.hellinger_check` over stored scenarios.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
import json
import math

import numpy as np

from . import exact as ex
from . import linalg
from .errors import ConfigError, HellingerKitError
from .lp_analysis import IN, OUT, _num, growth_classify, hellinger_check, membership_verdict
from .operator_model import build_family, format_complex, parse_complex, parse_gauss
from .recurrence import fundamental_system

MAX_EXACT_HORIZON = 20000


@dataclass
class RationalMatrixSeq:
    """Exact ``P_j(z), Q_j(z)`` (and optionally ``P+_j, Q+_j``) for ``j = -1..J``.

    Matrices are lists of rows of :class:`~hellinger_kit.exact.GaussQ`;
    ``P[j + 1]`` holds index ``j``.
    """

    z: ex.GaussQ
    J: int
    P: list
    Q: list
    Pp: list | None = None
    Qp: list | None = None

    def get(self, name, j):
        return getattr(self, name)[j + 1]

    def as_float(self, name):
        return np.array([ex.to_complex_array(m) for m in getattr(self, name)])


def _to_exact_z(z):
    if isinstance(z, ex.GaussQ):
        return z
    if isinstance(z, str):
        return parse_gauss(z)
    if isinstance(z, (tuple, list)):
        return ex.GaussQ(Fraction(z[0]), Fraction(z[1]))
    return ex.to_gauss(z)


def exact_fundamental_at_rational(family, z, J, left=False, max_horizon=MAX_EXACT_HORIZON):
    """Exact forward recursion over Gaussian rationals.

    ``z`` may be a :class:`GaussQ`, a ``(re, im)`` pair of rationals, a
    number (floats are taken at their exact binary value) or text such as
    ``"1/2"`` or ``"1+i"``.
    """
    if J > max_horizon:
        raise HellingerKitError(f"horizon memory cap exceeded: J={J} > {max_horizon}")
    if J < 1:
        raise ValueError("J must be >= 1")
    zq = _to_exact_z(z)
    n = family.n
    e, o = ex.exact_identity(n), ex.exact_zero(n)
    P, Q = [e, o], [o, e]
    Pp, Qp = ([e, o], [o, e]) if left else (None, None)
    for j in range(J):
        d = ex.mat_sub(ex.mat_scale(zq, e), family.exact_block("diag", j))
        a_left = family.exact_block("lower", j - 1)
        inv_up = ex.mat_inv(family.exact_block("upper", j))
        for seq in (P, Q):
            rhs = ex.mat_sub(ex.mat_mul(d, seq[-1]), ex.mat_mul(a_left, seq[-2]))
            seq.append(ex.mat_mul(inv_up, rhs))
        if left:
            a_up_prev = family.exact_block("upper", j - 1)
            inv_lo = ex.mat_inv(family.exact_block("lower", j))
            for seq in (Pp, Qp):
                lhs = ex.mat_sub(ex.mat_mul(seq[-1], d), ex.mat_mul(seq[-2], a_up_prev))
                seq.append(ex.mat_mul(lhs, inv_lo))
    return RationalMatrixSeq(zq, J, P, Q, Pp, Qp)


def double_factorial_ratio(m):
    """``(2m-1)!! / (2m)!!`` as an exact Fraction (``1`` for ``m = 0``)."""
    r = Fraction(1)
    for i in range(1, m + 1):
        r *= Fraction(2 * i - 1, 2 * i)
    return r


def oracle_agreement(family, z, J):
    """Largest entrywise relative error ``|float - exact| / |exact|`` over ``j <= J``.

    Entries that are exactly zero in the oracle must be exactly zero in
    floating point too; otherwise the result is ``inf``.
    """
    orc = exact_fundamental_at_rational(family, z, J, left=True)
    fs = fundamental_system(family, complex(orc.z), J)
    worst = 0.0
    for name in ("P", "Q", "Pp", "Qp"):
        ref = orc.as_float(name)
        got = getattr(fs, name)[: ref.shape[0]]
        zero = ref == 0
        if np.any(got[zero] != 0):
            return math.inf
        if (~zero).any():
            worst = max(worst, float(np.max(np.abs(got[~zero] - ref[~zero]) / np.abs(ref[~zero]))))
    return worst


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class ExperimentReport:
    """Scenario outcome; ``series`` keeps the raw arrays behind each number."""

    scenario: str
    parameters: dict
    measured: dict
    checks: dict  # name -> {"passed": bool, ...}
    series: dict = field(default_factory=dict, repr=False)

    @property
    def passed(self):
        return all(c.get("passed") for c in self.checks.values())

    def to_dict(self):
        return {"scenario": self.scenario, "parameters": self.parameters, "measured": self.measured,
                "checks": self.checks, "passed": self.passed}


# ---------------------------------------------------------------------------
# Counterexample for p > 2
# ---------------------------------------------------------------------------

def bounded_witness_search(fs, column=0, thetas=9, phis=16, trailing=0.1, kind=linalg.DEFAULT_NORM):
    """Search ``u_j = Q_j a + P_j b`` for bounded solutions that do not decay.

    ``a = cos(t) e_c`` and ``b = exp(i f) sin(t) e_c`` run over a grid in
    ``t`` (``[0, pi/2]``) and ``f`` (``[0, 2 pi)``).  The score of a candidate
    is ``inf_{trailing window} ||u_j|| / sup_{j} ||u_j||``; a score bounded
    away from zero certifies numerically that the solution neither grows
    nor tends to zero on the horizon.
    """
    J = fs.J
    e = np.zeros(fs.n, dtype=np.complex128)
    e[column] = 1.0
    qe = fs.Q @ e
    pe = fs.P @ e
    start = int(J - trailing * J)
    best = None
    for t in np.linspace(0.0, math.pi / 2, thetas):
        for f in np.linspace(0.0, 2 * math.pi, phis, endpoint=False):
            if t == 0.0 and f > 0.0:
                continue
            a, b = math.cos(t), complex(math.cos(f), math.sin(f)) * math.sin(t)
            u = a * qe + b * pe
            nrm = np.linalg.norm(u, axis=1)
            sup = float(nrm.max())
            inf_tail = float(nrm[start + 1:].min())
            score = inf_tail / sup
            if best is None or score > best["score"]:
                best = {"score": score, "sup": sup, "trailing_inf": inf_tail, "theta": float(t),
                        "phi": float(f), "column": column, "trailing_window": [start, J]}
    return best


def run_theorem4(J_exponent=10_000, J_bounded=1_000, p_list=(2.0, 2.1), n=2, fit_tol=0.05,
                 witness_ratio=0.1, kind=linalg.DEFAULT_NORM):
    """Reproduce the counterexample ``A_{j,j} = O, A_{j+1,j} = A_{j,j+1} = (j+1)E``.

    (a) decay exponents of ``||P_j(0)||``, ``||Q_j(0)||`` over
    ``[J_exponent/10, J_exponent]`` (expected ``-1/2``);
    (b) membership at ``z = 0`` for each ``p`` (expected all-in-lp iff ``p > 2``);
    (c) bounded, non-decaying witnesses at ``z = +-i`` over ``j <= J_bounded``.
    """
    if J_exponent < 10_000 or J_bounded < 1_000:
        raise ConfigError("run_theorem4 needs J_exponent >= 1e4 and J_bounded >= 1e3")
    family = build_family({"kind": "builtin", "name": "hellinger_counterexample", "n": n})
    params = {"J_exponent": J_exponent, "J_bounded": J_bounded, "p_list": list(p_list), "n": n,
              "fit_tol": fit_tol, "witness_ratio": witness_ratio}
    measured, checks, series = {}, {}, {}

    fs0 = fundamental_system(family, 0.0, J_exponent)
    window = (J_exponent // 10, J_exponent)
    for name in ("P", "Q"):
        nrm = fs0.norms(name, kind)[1:]
        series[f"norm_{name}_z0"] = nrm
        gc = growth_classify(nrm, window=window)
        measured[f"exponent_{name}"] = gc.to_dict()
        checks[f"exponent_{name}"] = {
            "expected": -0.5, "tolerance": fit_tol, "value": _num(gc.exponent),
            "passed": bool(gc.classification == "decay-power" and abs(gc.exponent + 0.5) <= fit_tol),
        }

    fs0r = fundamental_system(family, 0.0, J_exponent, rescale=True)
    for p in p_list:
        mem = membership_verdict(family, 0.0, p, J_exponent, fs=fs0r, kind=kind)
        expected = IN if p > 2 else OUT
        key = f"membership_p={p:g}"
        measured[key] = mem.to_dict()
        checks[key] = {"expected": expected, "right": mem.right.verdict, "left": mem.left.verdict,
                       "passed": mem.right.verdict == expected and mem.left.verdict == expected}

    for label, z in (("z=i", 1j), ("z=-i", -1j)):
        fs = fundamental_system(family, z, J_bounded)
        best = max((bounded_witness_search(fs, column=c, kind=kind) for c in range(n)),
                   key=lambda w: w["score"])
        a, b = math.cos(best["theta"]), complex(math.cos(best["phi"]), math.sin(best["phi"])) * \
            math.sin(best["theta"])
        e = np.zeros(n, dtype=np.complex128)
        e[best["column"]] = 1.0
        series[f"witness_{label}"] = np.linalg.norm(a * (fs.Q @ e) + b * (fs.P @ e), axis=1)
        measured[f"witness_{label}"] = dict(best, horizon=fs.J, horizon_status=fs.status)
        checks[f"witness_{label}"] = {
            "ratio": best["score"], "required": witness_ratio,
            "passed": bool(fs.J == J_bounded and math.isfinite(best["sup"]) and best["score"] >= witness_ratio),
        }
    return ExperimentReport("counterexample", params, measured, checks, series)


# ---------------------------------------------------------------------------
# Invariance scenarios
# ---------------------------------------------------------------------------

def _load_fixture(path):
    if path is None:
        text = resources.files("hellinger_kit").joinpath("data/scenarios.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    doc = json.loads(text)
    if doc.get("version") != 1:
        raise ConfigError(f"unsupported scenario file version {doc.get('version')!r}")
    return doc


def load_scenarios(path=None):
    """Scenario list from a JSON fixture (default: the packaged one)."""
    return _load_fixture(path)["scenarios"]


def load_oracle_cases(path=None):
    """Exact-capable ``{"family", "z", "J"?}`` cases from the same fixture."""
    return _load_fixture(path).get("oracle", [])


def run_theorem1_scenarios(scenarios=None, z_grid=None, J=200, kind=linalg.DEFAULT_NORM):
    """Run :func:`hellinger_check` per scenario and aggregate pass/fail.

    A scenario is ``{"name", "family", "z0", "p", "J"?, "expect"}`` where
    ``expect`` is ``"pass"`` or ``"vacuous"``.
    """
    if scenarios is None:
        scenarios = [s for s in load_scenarios() if s.get("check") in ("invariance", "symmetric")]
    measured, checks, series = {}, {}, {}
    for sc in scenarios:
        family = build_family(sc["family"])
        z0 = parse_complex(sc.get("z0", 0)) if isinstance(sc.get("z0", 0), str) else complex(sc.get("z0", 0))
        rep = hellinger_check(family, z0, float(sc["p"]), z_grid, J=int(sc.get("J", J)), kind=kind,
                              symmetric_shortcut=bool(sc.get("symmetric_shortcut", False)))
        name = sc["name"]
        outcome = "pass" if rep.passed else rep.status if rep.status == "vacuous" else "fail"
        measured[name] = rep.to_dict()
        checks[name] = {"expected": sc.get("expect", "pass"), "outcome": outcome,
                        "points": len(rep.points), "passed": outcome == sc.get("expect", "pass")}
        series[name] = np.array([[complex(parse_complex(pt["z"])).real, complex(parse_complex(pt["z"])).imag,
                                  pt.get("k0", -1)] for pt in rep.points]).reshape(-1, 3)
    params = {"scenarios": [s["name"] for s in scenarios], "J": J,
              "grid": "default" if z_grid is None else [format_complex(z) for z in z_grid]}
    return ExperimentReport("invariance_scenarios", params, measured, checks, series)
