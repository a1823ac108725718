"""lp tail norms, growth classification, membership and invariance checks.

Membership of the whole solution space in ``l^p`` is decided through the
fundamental solutions: all solutions of the right equation are p-summable iff
both ``||P_j||`` and ``||Q_j||`` are, and likewise for the left equation with
``P+``, ``Q+``.  Truncated sums alone cannot tell ``sum 1/j`` from a
convergent series, so every verdict goes through :func:`growth_classify`.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import stats

from . import linalg
from ._parallel import ordered_map
from .errors import ConfigError
from .operator_model import ShiftedFamily, build_sequence, check_symmetry, format_complex
from .recurrence import fundamental_system
from .voc import anchor_coefficients

DEFAULT_J = 2000
MIN_SAMPLES = 20
RESID_THRESHOLD = 0.5   # RMS misfit (natural-log units) above which fits are inconclusive
FLAT_TOL = 0.02         # |effective power exponent| below which a sequence counts as bounded
BOUNDARY_TOL = 0.01     # resolution in p*alpha + 1 for power-law decay
TOL_BOUND = 0.05
THRESHOLD = 0.25

IN, OUT, UNKNOWN = "all-in-lp", "not-all-in-lp", "inconclusive"


def conjugate_exponent(p):
    """``q`` with ``1/p + 1/q = 1`` (``1 <-> inf``)."""
    p = float(p)
    if not p >= 1:
        raise ConfigError(f"p must lie in [1, inf], got {p}")
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _num(x):
    """JSON-friendly float: non-finite values become strings."""
    if x is None:
        return None
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


# ---------------------------------------------------------------------------
# Growth classification
# ---------------------------------------------------------------------------

@dataclass
class GrowthClass:
    """Outcome of fitting ``log ||Y_j||`` on a window of indices.

    ``exponent`` is the power ``alpha`` for power-law classes and the log-rate
    ``log(lambda)`` for geometric ones; ``rate`` is ``lambda``.
    """

    classification: str
    window: tuple
    samples: int = 0
    model: str | None = None
    exponent: float = math.nan
    stderr: float = math.nan
    rate: float = math.nan
    intercept: float = math.nan
    residual_power: float = math.nan
    residual_geometric: float = math.nan
    root_estimate: float = math.nan
    note: str | None = None

    @property
    def decaying(self):
        return self.classification.startswith("decay")

    @property
    def growing(self):
        return self.classification.startswith("growth")

    def envelope_log(self, j):
        """Fitted ``log ||Y_j||`` at index ``j``."""
        if self.model == "power":
            return self.intercept + self.exponent * math.log(j + 1.0)
        if self.model == "geometric":
            return self.intercept + self.exponent * j
        return math.nan

    def confidence_interval(self, width=3.0):
        return (self.exponent - width * self.stderr, self.exponent + width * self.stderr)

    def to_dict(self):
        return {
            "classification": self.classification,
            "model": self.model,
            "exponent": _num(self.exponent),
            "stderr": _num(self.stderr),
            "rate": _num(self.rate),
            "residual_power": _num(self.residual_power),
            "residual_geometric": _num(self.residual_geometric),
            "root_estimate": _num(self.root_estimate),
            "window": list(self.window),
            "samples": self.samples,
            "note": self.note,
        }


def _fit(x, y):
    res = stats.linregress(x, y)
    resid = y - (res.intercept + res.slope * x)
    return res.slope, res.stderr, res.intercept, float(np.sqrt(np.mean(resid ** 2)))


def growth_classify(norm_seq, window=None, indices=None, log_input=False,
                    resid_threshold=RESID_THRESHOLD, flat_tol=FLAT_TOL):
    """Classify the growth of a nonnegative sequence over an index window.

    Parameters
    ----------
    norm_seq : array_like
        ``||Y_j||`` (or ``log ||Y_j||`` with ``log_input=True``).
    window : (int, int), optional
        Inclusive index range; defaults to the second half of the indices.
    indices : array_like, optional
        Index of each entry; defaults to ``0, 1, ...``.

    Zero entries are excluded from the fit.  The fit runs on an upper
    envelope (block maxima over about 25 blocks), which keeps oscillating or
    parity-structured sequences classifiable.  Both ``log y ~ j`` and
    ``log y ~ log(j + 1)`` are fitted and the smaller RMS misfit wins.
    """
    vals = np.asarray(norm_seq, dtype=float)
    idx = np.arange(vals.size) if indices is None else np.asarray(indices)
    if idx.shape != vals.shape:
        raise ValueError("indices and norm_seq differ in length")
    if vals.size == 0:
        return GrowthClass("inconclusive", (0, 0), note="empty sequence")
    if window is None:
        lo_i, hi_i = int(idx[0]), int(idx[-1])
        window = (lo_i + (hi_i - lo_i) // 2, hi_i)
    a, b = int(window[0]), int(window[1])
    sel = (idx >= a) & (idx <= b) & (idx >= 0)
    if log_input:
        logs = vals[sel]
    else:
        with np.errstate(divide="ignore"):
            logs = np.log(vals[sel])
    js = idx[sel]
    overflowed = bool(np.any(logs == np.inf))
    keep = np.isfinite(logs)
    js, logs = js[keep], logs[keep]
    m = js.size
    if m < MIN_SAMPLES:
        note = "all zeros in window" if m == 0 and not overflowed and sel.any() else \
            f"only {m} usable samples in window (need {MIN_SAMPLES})"
        if overflowed:
            note += "; overflowed entries present"
        return GrowthClass("inconclusive", (a, b), samples=m, note=note)

    bs = max(1, m // 25)
    nb = m // bs
    start = m - nb * bs  # drop the earliest leftovers so the window end is kept
    blk_logs = logs[start:].reshape(nb, bs)
    arg = np.argmax(blk_logs, axis=1)
    ey = blk_logs[np.arange(nb), arg]
    ej = js[start:].reshape(nb, bs)[np.arange(nb), arg].astype(float)

    s_g, se_g, c_g, r_g = _fit(ej, ey)
    s_p, se_p, c_p, r_p = _fit(np.log(ej + 1.0), ey)

    tail = js[js >= a + 3 * (b - a) // 4]
    tail_logs = logs[js >= a + 3 * (b - a) // 4]
    pos = tail > 0
    root = float(np.exp(np.max(tail_logs[pos] / tail[pos]))) if pos.any() else math.nan

    gc = GrowthClass("inconclusive", (a, b), samples=m, residual_power=r_p, residual_geometric=r_g,
                     root_estimate=root)
    if min(r_p, r_g) > resid_threshold:
        gc.note = f"no model fits (RMS misfit {min(r_p, r_g):.3g} > {resid_threshold})"
        return gc
    span = math.log((ej[-1] + 1.0) / (ej[0] + 1.0)) if ej[-1] > ej[0] else 0.0
    if r_p <= r_g:
        gc.model, gc.exponent, gc.stderr, gc.intercept = "power", s_p, se_p, c_p
        gc.rate = 1.0
        effective = s_p
    else:
        gc.model, gc.exponent, gc.stderr, gc.intercept = "geometric", s_g, se_g, c_g
        gc.rate = math.exp(s_g)
        effective = s_g * (ej[-1] - ej[0]) / span if span > 0 else 0.0
    if abs(effective) <= flat_tol:
        gc.classification = "bounded"
    elif gc.model == "power":
        gc.classification = "growth-power" if s_p > 0 else "decay-power"
    else:
        gc.classification = "growth-geometric" if s_g > 0 else "decay-geometric"
    if overflowed:
        gc.note = "overflowed entries excluded"
    return gc


def series_summable(gc, p):
    """True / False / None (undecided) for p-summability of a classified series.

    For power-law decay ``j^alpha`` the series converges iff ``p*alpha < -1``.
    Within ``BOUNDARY_TOL`` of ``-1`` (and a sharp fit) the sequence behaves
    like ``1/j`` and is reported as divergent.
    """
    c = gc.classification
    if c == "zero":
        return True
    if c == "inconclusive":
        return None
    if math.isinf(p):
        return not gc.growing
    if c == "decay-geometric":
        return True
    if c != "decay-power":
        return False
    e = gc.exponent * p + 1.0
    ci = 3.0 * gc.stderr * p
    if e < -(BOUNDARY_TOL + ci):
        return True
    if e > BOUNDARY_TOL + ci:
        return False
    if ci <= BOUNDARY_TOL:
        return False
    return None


def tail_remainder(gc, p, J):
    """Estimate of ``sum_{j>J} ||Y_j||^p`` from the fitted envelope (``inf``: divergent)."""
    c = gc.classification
    if c == "zero":
        return 0.0
    if c == "inconclusive":
        return math.nan
    if math.isinf(p):
        return 0.0 if not gc.growing else math.inf
    if not series_summable(gc, p):
        return math.inf
    if c == "decay-geometric":
        lam_p = gc.rate ** p
        return math.exp(p * gc.envelope_log(J)) * lam_p / (1.0 - lam_p)
    s = gc.exponent * p
    return math.exp(p * gc.intercept) * (J + 1.0) ** (s + 1.0) / (-s - 1.0)


# ---------------------------------------------------------------------------
# Tail norms
# ---------------------------------------------------------------------------

def _series_names(side):
    if side == "plain":
        return ("P", "Q")
    if side == "plus":
        return ("Pp", "Qp")
    raise ValueError(f"side must be 'plain' or 'plus', got {side!r}")


def tail_profile(log_norms, p, k0=0):
    """``log`` of the tail norms ``(sum_{j=k}^{J} y_j^p)^{1/p}`` for every ``k >= k0``.

    ``log_norms[i]`` is ``log y_{k0+i}``.  For ``p = inf`` the tail supremum is
    returned.  Sums are accumulated from the far end, so the profile is
    exactly nonincreasing in ``k``.
    """
    ln = np.asarray(log_norms, dtype=float)
    if ln.size == 0:
        return ln
    if math.isinf(p):
        return np.maximum.accumulate(ln[::-1])[::-1]
    finite = ln[np.isfinite(ln)]
    if np.any(ln == np.inf):
        return np.where(np.arange(ln.size) <= np.max(np.nonzero(ln == np.inf)), np.inf, _tail_sum(ln, p))
    if finite.size == 0:
        return np.full(ln.shape, -np.inf)
    return _tail_sum(ln, p)


def _tail_sum(ln, p):
    ln = np.where(ln == np.inf, -np.inf, ln)
    shift = np.max(ln[np.isfinite(ln)]) if np.isfinite(ln).any() else 0.0
    with np.errstate(under="ignore"):
        terms = np.exp(p * (ln - shift))
    sums = np.cumsum(terms[::-1])[::-1]
    with np.errstate(divide="ignore"):
        return (np.log(sums) + p * shift) / p


@dataclass
class LpTail:
    p: float
    k: int
    J: int
    side: str
    value: float
    series: dict
    remainder: dict = field(default_factory=dict)
    extrapolated: float = math.nan

    def to_dict(self):
        return {
            "p": _num(self.p), "k": self.k, "J": self.J, "side": self.side,
            "value": _num(self.value), "extrapolated": _num(self.extrapolated),
            "series": {k: _num(v) for k, v in self.series.items()},
            "remainder": {k: _num(v) for k, v in self.remainder.items()},
        }


def tail_norm(fs, p, k, J=None, side="plain", kind=linalg.DEFAULT_NORM, classify=True):
    """``max`` over the P- and Q-series of ``(sum_{j=k}^{J} ||Y_j||^p)^{1/p}``.

    ``side="plus"`` uses ``P+``, ``Q+``; ``p = inf`` gives the tail supremum.
    A remainder estimate beyond ``J`` from the fitted growth class is attached
    (``extrapolated`` is the value with the remainder added).
    """
    J = fs.J if J is None else J
    if not -1 <= k <= J or J > fs.J:
        raise IndexError(f"need -1 <= k <= J <= {fs.J}, got k={k}, J={J}")
    p = float(p)
    series, rem = {}, {}
    total_ext = []
    for name in _series_names(side):
        ln = fs.log_norms(name, kind)[k + 1:J + 2]
        val = float(np.exp(tail_profile(ln, p)[0])) if ln.size else 0.0
        series[name] = val
        if classify:
            full = fs.log_norms(name, kind)[1:J + 2]
            js = np.arange(0, J + 1)
            window = (J // 2, J)
            if np.isfinite(full[J // 2:]).sum() < MIN_SAMPLES:
                window = (0, J)
            gc = growth_classify(full, indices=js, window=window, log_input=True)
            r = tail_remainder(gc, p, J)
            rem[name] = r
            if math.isinf(p):
                total_ext.append(val if r == 0.0 else (math.inf if r == math.inf else math.nan))
            else:
                total_ext.append((val ** p + r) ** (1.0 / p) if math.isfinite(r) else r)
    ext = max(total_ext) if total_ext and not any(math.isnan(t) for t in total_ext) else math.nan
    return LpTail(p, k, J, side, max(series.values()), series, rem, ext)


# ---------------------------------------------------------------------------
# Membership
# ---------------------------------------------------------------------------

@dataclass
class SideVerdict:
    verdict: str
    p: float
    series: dict  # name -> GrowthClass
    summable: dict

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "p": _num(self.p),
            "series": {k: dict(v.to_dict(), summable=self.summable[k]) for k, v in self.series.items()},
        }


@dataclass
class Membership:
    z: complex
    J: int
    status: str
    right: SideVerdict | None = None
    left: SideVerdict | None = None
    note: str | None = None

    def to_dict(self):
        return {
            "z": format_complex(self.z), "J": self.J, "status": self.status, "note": self.note,
            "right": self.right.to_dict() if self.right else None,
            "left": self.left.to_dict() if self.left else None,
        }


def side_verdict(fs, names, p, window=None, kind=linalg.DEFAULT_NORM):
    J = fs.J
    window = window or (J // 2, J)
    classes, flags = {}, {}
    for name in names:
        ln = fs.log_norms(name, kind)[1:J + 2]
        js = np.arange(0, J + 1)
        inwin = ln[(js >= window[0]) & (js <= window[1])]
        if inwin.size >= MIN_SAMPLES and np.all(inwin == -np.inf):
            gc = GrowthClass("zero", tuple(window), samples=int(inwin.size), note="identically zero on window")
        else:
            gc = growth_classify(ln, indices=js, window=window, log_input=True)
        classes[name] = gc
        flags[name] = series_summable(gc, p)
    vals = list(flags.values())
    if all(v is True for v in vals):
        verdict = IN
    elif any(v is False for v in vals):
        verdict = OUT
    else:
        verdict = UNKNOWN
    return SideVerdict(verdict, float(p), classes, flags)


def membership_verdict(family, z, p, J=DEFAULT_J, fs=None, sides=("right", "left"),
                       q=None, window=None, kind=linalg.DEFAULT_NORM):
    """Decide whether all solutions at ``z`` lie in ``l^p``, per side.

    The left side is judged at exponent ``q`` when given (default ``p``).
    A rescaled fundamental system is used so growing solutions cannot
    overflow.  If the horizon is cut short before the window holds
    ``MIN_SAMPLES`` indices the verdicts are inconclusive.
    """
    if fs is None:
        fs = fundamental_system(family, z, J, rescale=True)
    left_p = p if q is None else q
    out = Membership(complex(z), fs.J, fs.status, note=fs.message)
    if fs.J < 2 * MIN_SAMPLES and window is None:
        note = f"horizon {fs.J} too short for classification ({fs.status})"
        out.note = note
        if "right" in sides:
            out.right = SideVerdict(UNKNOWN, float(p), {}, {})
        if "left" in sides:
            out.left = SideVerdict(UNKNOWN, float(left_p), {}, {})
        return out
    if "right" in sides:
        out.right = side_verdict(fs, ("P", "Q"), p, window, kind)
    if "left" in sides:
        out.left = side_verdict(fs, ("Pp", "Qp"), left_p, window, kind)
    return out


# ---------------------------------------------------------------------------
# Invariance of lp-membership in z
# ---------------------------------------------------------------------------

def default_grid(z0, radii=(0.5, 1.0, 2.0, 5.0), points=16):
    """``points`` equally spaced points on each circle ``|z - z0| = r``."""
    z0 = complex(z0)
    return [z0 + r * complex(math.cos(2 * math.pi * m / points), math.sin(2 * math.pi * m / points))
            for r in radii for m in range(points)]


@dataclass
class HellingerReport:
    family: dict
    z0: complex
    p: float
    q: float
    J: int
    status: str  # "ok", "vacuous"
    precondition: dict
    points: list
    tolerances: dict
    note: str | None = None

    @property
    def passed(self):
        return self.status == "ok" and all(pt["passed"] for pt in self.points)

    def to_dict(self):
        return {
            "family": self.family, "z0": format_complex(self.z0), "p": _num(self.p), "q": _num(self.q),
            "J": self.J, "status": self.status, "passed": self.passed, "note": self.note,
            "precondition": self.precondition, "tolerances": self.tolerances, "points": self.points,
        }


def _norm_power_sum(lognorms, p):
    """``(sum y^p)^{1/p}`` (or max for ``p = inf``) from log norms."""
    if lognorms.size == 0:
        return 0.0
    return float(np.exp(tail_profile(lognorms, p)[0]))


def _bound_checks(fs0, fs, k0, Mp, Mq, p, q, J, tol_bound, kind):
    """Check ``N <= 4 C_k M_k`` for the four fundamental solutions at ``z``."""
    out = []
    for name in ("Q", "P", "Qp", "Pp"):
        side = "right" if name in ("Q", "P") else "left"
        expo, M = (p, Mp) if side == "right" else (q, Mq)
        Y = fs.solution(name)
        c1, c2, cond = anchor_coefficients(fs0, Y, k0, side, kind)
        Ck = max(linalg.operator_norm(c1, kind), linalg.operator_norm(c2, kind))
        N = _norm_power_sum(fs.log_norms(name, kind)[k0 + 1:J + 2], expo)
        bound = 4.0 * Ck * M
        out.append({
            "solution": name, "side": side, "exponent": _num(expo), "C_k": _num(Ck), "N": _num(N),
            "bound": _num(bound), "anchor_cond": _num(cond),
            "holds": bool(N <= bound * (1.0 + tol_bound)),
        })
    return out


def hellinger_check(family, z0, p, z_list=None, J=200, kind=linalg.DEFAULT_NORM,
                    tol_bound=TOL_BOUND, symmetric_shortcut=False, verdict_J=None):
    """Numerically verify lp-invariance around ``z0`` on a list of ``z``.

    Precondition: at ``z0`` all right solutions are in ``l^p`` and all left
    solutions in ``l^q`` (``1/p + 1/q = 1``); otherwise the report is vacuous.
    With ``symmetric_shortcut`` and a family passing :func:`check_symmetry`,
    real ``z0`` and ``p <= 2``, the left precondition is taken from the right
    one instead of being verified.

    For each ``z``: the smallest ``k0`` with
    ``|z - z0| * M^{q,+}_{k0}(z0) * M^p_{k0}(z0) <= 1/4`` (tails truncated at
    the common horizon), the bound ``N_{k0} <= 4 C_{k0} M^p_{k0}(z0)`` for
    ``P(z), Q(z)`` and its mirror for ``P+(z), Q+(z)``, and the membership
    verdicts at ``z``.
    """
    z0 = complex(z0)
    p = float(p)
    q = conjugate_exponent(p)
    z_list = default_grid(z0) if z_list is None else [complex(z) for z in z_list]
    verdict_J = verdict_J or J
    tolerances = {"tol_bound": tol_bound, "threshold": THRESHOLD, "boundary_tol": BOUNDARY_TOL,
                  "flat_tol": FLAT_TOL, "resid_threshold": RESID_THRESHOLD, "norm": kind}
    spec = family.to_spec()

    pre = membership_verdict(family, z0, p, verdict_J, q=q, kind=kind)
    shortcut = False
    if symmetric_shortcut and z0.imag == 0 and p <= 2:
        shortcut = check_symmetry(family, min(verdict_J, pre.J)).is_symmetric
    left_ok = pre.left.verdict == IN or (shortcut and pre.right.verdict == IN)
    precondition = {
        "right_verdict": pre.right.verdict, "left_verdict": pre.left.verdict,
        "symmetric_shortcut": shortcut, "membership": pre.to_dict(),
    }
    if pre.right.verdict != IN or not left_ok:
        return HellingerReport(spec, z0, p, q, J, "vacuous", precondition, [], tolerances,
                               note="precondition fails at z0: not all solutions in l^p / l^q")

    fs0 = fundamental_system(family, z0, J)
    J0 = fs0.J
    Mp = np.exp(np.maximum(*(tail_profile(fs0.log_norms(nm, kind)[1:J0 + 2], p) for nm in ("P", "Q"))))
    Mq = np.exp(np.maximum(*(tail_profile(fs0.log_norms(nm, kind)[1:J0 + 2], q) for nm in ("Pp", "Qp"))))

    def one(z):
        dist = abs(z - z0)
        products = dist * Mq * Mp
        hits = np.nonzero(products[:J0] <= THRESHOLD)[0]
        entry = {"z": format_complex(z), "distance": dist}
        if hits.size == 0:
            entry.update(status="threshold not reached", passed=False,
                         min_product=_num(products[:J0].min()))
            return entry
        k0 = int(hits[0])
        fs = fundamental_system(family, z, J0)
        Jc = min(fs.J, J0)
        bounds = _bound_checks(fs0, fs, k0, Mp[k0], Mq[k0], p, q, Jc, tol_bound, kind)
        mem = membership_verdict(family, z, p, verdict_J, q=q, kind=kind)
        left_in = mem.left.verdict == IN
        entry.update(
            status="ok", k0=k0, product=_num(products[k0]), M_p=_num(Mp[k0]), M_q_plus=_num(Mq[k0]),
            horizon=Jc, horizon_status=fs.status, bounds=bounds,
            verdict_right=mem.right.verdict, verdict_left=mem.left.verdict,
            passed=bool(all(b["holds"] for b in bounds) and mem.right.verdict == IN and left_in),
        )
        return entry

    points = ordered_map(one, z_list)
    note = None if fs0.status == "ok" else f"horizon at z0 cut to {J0} ({fs0.status})"
    return HellingerReport(spec, z0, p, q, J0, "ok", precondition, points, tolerances, note=note)


# ---------------------------------------------------------------------------
# Bounded perturbations of the diagonal
# ---------------------------------------------------------------------------

@dataclass
class PerturbationReport:
    family: dict
    p: float
    q: float
    J: int
    status: str  # "ok", "precondition-violated", "vacuous"
    sup_F: float
    sup_G: float
    gate: dict
    unperturbed: dict | None = None
    perturbed: dict | None = None
    note: str | None = None

    @property
    def preserved(self):
        return self.status == "ok" and self.perturbed["right"]["verdict"] == IN \
            and self.perturbed["left"]["verdict"] == IN

    def to_dict(self):
        return {
            "family": self.family, "p": _num(self.p), "q": _num(self.q), "J": self.J,
            "status": self.status, "preserved": self.preserved, "sup_F": _num(self.sup_F),
            "sup_G": _num(self.sup_G), "gate": self.gate, "unperturbed": self.unperturbed,
            "perturbed": self.perturbed, "note": self.note,
        }


def _boundedness(seq, J, kind):
    vals = np.array([linalg.operator_norm(seq(j), kind) for j in range(J + 1)])
    sup = float(vals.max()) if vals.size else 0.0
    if not np.all(np.isfinite(vals)):
        return sup, False, {"classification": "non-finite"}
    if np.all(vals == 0):
        return 0.0, True, {"classification": "zero"}
    gc = growth_classify(vals, window=(0, J))
    bounded = gc.classification not in ("growth-power", "growth-geometric")
    return sup, bounded, gc.to_dict()


def perturbation_check(family, F, p, J=DEFAULT_J, G=None, kind=linalg.DEFAULT_NORM):
    """Check that lp-membership at ``z = 0`` survives a bounded perturbation.

    Right: ``l(u)_j = F_j u_j``; left: ``l+(v)_j = v_j^* G_j`` (``G`` defaults
    to ``F``).  Both are the ``z = 0`` equations of the family with diagonal
    blocks shifted by ``-F_j`` (resp. ``-G_j``).  A perturbation whose norms
    are classified as growing over ``0..J`` fails the gate and no verdict is
    given.
    """
    n = family.n
    F = build_sequence(F, n)
    G = F if G is None else build_sequence(G, n)
    p = float(p)
    q = conjugate_exponent(p)
    sup_f, ok_f, cls_f = _boundedness(F, J, kind)
    sup_g, ok_g, cls_g = _boundedness(G, J, kind)
    gate = {"F": cls_f, "G": cls_g, "F_bounded": ok_f, "G_bounded": ok_g}
    spec = family.to_spec()
    if not (ok_f and ok_g):
        return PerturbationReport(spec, p, q, J, "precondition-violated", sup_f, sup_g, gate,
                                  note="perturbation is not bounded; no verdict claimed")
    base = membership_verdict(family, 0.0, p, J, q=q, kind=kind)
    if base.right.verdict != IN or base.left.verdict != IN:
        return PerturbationReport(spec, p, q, J, "vacuous", sup_f, sup_g, gate, base.to_dict(),
                                  note="unperturbed equations are not all-in-lp / l^q at z = 0")
    right = membership_verdict(ShiftedFamily(family, F), 0.0, p, J, sides=("right",), kind=kind)
    left = membership_verdict(ShiftedFamily(family, G), 0.0, p, J, sides=("left",), q=q, kind=kind)
    perturbed = {"right": right.right.to_dict(), "left": left.left.to_dict(),
                 "horizon": {"right": right.J, "left": left.J}}
    return PerturbationReport(spec, p, q, J, "ok", sup_f, sup_g, gate, base.to_dict(), perturbed)
