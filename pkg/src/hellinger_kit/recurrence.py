"""Fundamental systems of the block three-term recurrences.

Right equation (matrix or column-vector unknowns)::

    A_{j,j-1} Y_{j-1} + A_{j,j} Y_j + A_{j,j+1} Y_{j+1} = z Y_j,      j >= 0

Left equation (matrix or row-vector unknowns)::

    Y+_{j-1} A_{j-1,j} + Y+_j A_{j,j} + Y+_{j+1} A_{j+1,j} = z Y+_j,  j >= 0

with ``A_{0,-1} = A_{-1,0} = -E``.  ``P, Q`` (right) and ``P+, Q+`` (left)
are fixed by ``P_{-1} = Q_0 = E``, ``P_0 = Q_{-1} = O`` and likewise for the
plus versions.  Arrays are stored with an offset of one: ``arr[j + 1]`` holds
index ``j``, so index ``-1`` sits at position 0.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import linalg
from .errors import HorizonExceededError, IllConditionedBlockError, NonFiniteMatrixError

TOL_REC = 1e-9
OVERFLOW = 1e300
# Rescaled mode renormalises whenever a running norm leaves [1/RESCALE_AT, RESCALE_AT].
RESCALE_AT = 1e100

NAMES = ("P", "Q", "Pp", "Qp")


@dataclass
class FundamentalSystem:
    """``P_j(z), Q_j(z), P+_j(z), Q+_j(z)`` for ``j = -1..J``.

    In rescaled mode the stored blocks are ``Y_j / exp(log_scale[j + 1])``;
    right (``P, Q``) and left (``Pp, Qp``) pairs carry separate scales.
    ``status`` is ``"ok"`` or names the reason the horizon was cut short
    (``"ill-conditioned"``, ``"overflow"``), with ``stop_index`` the step
    that failed.
    """

    family: object
    z: complex
    requested_J: int
    P: np.ndarray
    Q: np.ndarray
    Pp: np.ndarray
    Qp: np.ndarray
    cond: np.ndarray
    status: str = "ok"
    stop_index: int | None = None
    message: str | None = None
    rescaled: bool = False
    log_scale: np.ndarray | None = None
    log_scale_left: np.ndarray | None = None
    _norm_cache: dict = field(default_factory=dict, repr=False)

    @property
    def J(self):
        return self.P.shape[0] - 2

    @property
    def n(self):
        return self.P.shape[1]

    @property
    def truncated(self):
        return self.status != "ok"

    def get(self, name, j):
        if self.rescaled:
            raise ValueError("blocks of a rescaled system are only known up to scale")
        if not -1 <= j <= self.J:
            raise IndexError(f"index {j} outside -1..{self.J}")
        return getattr(self, name)[j + 1]

    def _scales(self, name):
        return self.log_scale if name in ("P", "Q") else self.log_scale_left

    def log_norms(self, name, kind=linalg.DEFAULT_NORM):
        """``log ||Y_j||`` for ``j = -1..J`` (``-inf`` where the block is zero)."""
        key = ("log", name, kind)
        if key not in self._norm_cache:
            with np.errstate(divide="ignore"):
                out = np.log(linalg.norms(getattr(self, name), kind))
            if self.rescaled:
                out = out + self._scales(name)
            self._norm_cache[key] = out
        return self._norm_cache[key]

    def norms(self, name, kind=linalg.DEFAULT_NORM):
        """``||Y_j||`` for ``j = -1..J``; may hold ``inf`` in rescaled mode."""
        key = ("abs", name, kind)
        if key not in self._norm_cache:
            if self.rescaled:
                with np.errstate(over="ignore"):
                    out = np.exp(self.log_norms(name, kind))
            else:
                out = linalg.norms(getattr(self, name), kind)
            self._norm_cache[key] = out
        return self._norm_cache[key]

    def solution(self, name):
        """The matrix solution ``name`` as a :class:`SolutionSeq`."""
        if self.rescaled:
            raise ValueError("rescaled systems do not hold true solution values")
        side = "right" if name in ("P", "Q") else "left"
        return SolutionSeq(self.z, side, getattr(self, name).copy(), self.family)


def fundamental_system(family, z, J, rescale=False):
    """Forward recursion for ``P, Q, P+, Q+`` up to index ``J``.

    Ill-conditioned or non-finite blocks, and norms above ``1e300`` in raw
    mode, stop the recursion; the result then holds the indices computed so
    far and a ``status`` flag.  Querying an explicit family past its horizon
    raises :class:`HorizonExceededError`.
    """
    if J < 1:
        raise ValueError("J must be >= 1")
    n = family.n
    z = complex(z)
    e = linalg.identity(n)
    o = linalg.zeros(n)
    X = np.empty((J + 2, n, 2 * n), dtype=np.complex128)  # [Q_j | P_j]
    W = np.empty((J + 2, 2 * n, n), dtype=np.complex128)  # [Q+_j ; P+_j]
    X[0] = np.hstack([o, e])
    X[1] = np.hstack([e, o])
    W[0] = np.vstack([o, e])
    W[1] = np.vstack([e, o])
    cond = np.ones(J + 2)
    ls_r = np.zeros(J + 2) if rescale else None
    ls_l = np.zeros(J + 2) if rescale else None
    x_prev, x_cur = X[0].copy(), X[1].copy()
    w_prev, w_cur = W[0].copy(), W[1].copy()
    sr = sl = 0.0
    status, stop, message = "ok", None, None
    last = J
    for j in range(J):
        try:
            inv_up, c_up = family.inverse("upper", j)
            inv_lo, c_lo = family.inverse("lower", j)
            d = z * e - family.block("diag", j)
            a_left = family.block("lower", j - 1)   # A_{j,j-1}
            a_up_prev = family.block("upper", j - 1)  # A_{j-1,j}
        except HorizonExceededError:
            raise
        except IllConditionedBlockError as exc:
            status, stop, message = "ill-conditioned", j, str(exc)
            last = j
            break
        except NonFiniteMatrixError as exc:
            status, stop, message = "overflow", j, f"non-finite block at index {j}: {exc}"
            last = j
            break
        cond[j + 2] = max(c_up, c_lo)
        x_next = inv_up @ (d @ x_cur - a_left @ x_prev)
        w_next = (w_cur @ d - w_prev @ a_up_prev) @ inv_lo
        big = max(np.abs(x_next).max(), np.abs(w_next).max())
        if not np.isfinite(big) or (not rescale and big > OVERFLOW):
            status, stop, message = "overflow", j + 1, f"norm above {OVERFLOW:.0e} at index {j + 1}"
            last = j
            break
        x_prev, x_cur, w_prev, w_cur = x_cur, x_next, w_cur, w_next
        if rescale:
            sr, x_prev, x_cur = _renormalise(sr, x_prev, x_cur)
            sl, w_prev, w_cur = _renormalise(sl, w_prev, w_cur)
            ls_r[j + 2] = sr
            ls_l[j + 2] = sl
            # the previous index was stored before this renormalisation
        X[j + 2] = x_cur
        W[j + 2] = w_cur
    keep = last + 2
    X, W, cond = X[:keep], W[:keep], cond[:keep]
    if rescale:
        ls_r, ls_l = ls_r[:keep], ls_l[:keep]
    return FundamentalSystem(
        family=family, z=z, requested_J=J,
        Q=np.ascontiguousarray(X[:, :, :n]), P=np.ascontiguousarray(X[:, :, n:]),
        Qp=np.ascontiguousarray(W[:, :n, :]), Pp=np.ascontiguousarray(W[:, n:, :]),
        cond=cond, status=status, stop_index=stop, message=message,
        rescaled=rescale, log_scale=ls_r, log_scale_left=ls_l,
    )


def _renormalise(log_s, prev, cur):
    m = np.abs(cur).max()
    if m > RESCALE_AT or (0.0 < m < 1.0 / RESCALE_AT):
        return log_s + math.log(m), prev / m, cur / m
    return log_s, prev, cur


# ---------------------------------------------------------------------------
# Identities
# ---------------------------------------------------------------------------

IDENTITY_NAMES = (
    "P_j Q+_j - Q_j P+_j = O",
    "P_{j+1} Q+_j - Q_{j+1} P+_j = A_{j,j+1}^-1",
    "Q_j P+_{j+1} - P_j Q+_{j+1} = A_{j+1,j}^-1",
    "Q+_{j+1} A_{j+1,j} Q_j - Q+_j A_{j,j+1} Q_{j+1} = O",
    "P+_{j+1} A_{j+1,j} P_j - P+_j A_{j,j+1} P_{j+1} = O",
    "P+_{j+1} A_{j+1,j} Q_j - P+_j A_{j,j+1} Q_{j+1} = E",
    "Q+_j A_{j,j+1} P_{j+1} - Q+_{j+1} A_{j+1,j} P_j = E",
)


@dataclass
class IdentityReport:
    j_values: np.ndarray
    defects: np.ndarray  # (len(j_values), 7) scaled defects
    names: tuple = IDENTITY_NAMES

    @property
    def max_defect(self):
        return float(self.defects.max()) if self.defects.size else 0.0

    @property
    def worst(self):
        """``(identity name, j)`` of the largest defect."""
        if not self.defects.size:
            return None
        r, c = np.unravel_index(np.argmax(self.defects), self.defects.shape)
        return self.names[c], int(self.j_values[r])

    def passed(self, tol=TOL_REC):
        return self.max_defect <= tol

    def to_dict(self):
        return {
            "j_range": [int(self.j_values[0]), int(self.j_values[-1])] if self.j_values.size else [],
            "max_defect": self.max_defect,
            "max_per_identity": dict(zip(self.names, self.defects.max(axis=0).tolist()))
            if self.defects.size else {},
            "worst": list(self.worst) if self.worst else None,
        }


def check_identities(fs, family=None, j_range=None, kind=linalg.DEFAULT_NORM):
    """Scaled defects of the seven Wronskian-type identities.

    Each defect is ``||lhs - rhs|| / (1 + sum of products of factor norms)``.
    ``j_range`` is an iterable of indices in ``0..J-1`` (default: all).
    """
    if fs.rescaled:
        raise ValueError("identities need an unscaled fundamental system")
    family = family or fs.family
    js = np.arange(0, fs.J) if j_range is None else np.asarray(list(j_range), dtype=int)
    if js.size and (js.min() < 0 or js.max() > fs.J - 1):
        raise IndexError(f"j_range must lie in 0..{fs.J - 1}")
    n = fs.n
    e = linalg.identity(n)
    up = np.array([family.block("upper", j) for j in js]).reshape(-1, n, n)
    lo = np.array([family.block("lower", j) for j in js]).reshape(-1, n, n)
    up_inv = np.array([family.inverse("upper", j)[0] for j in js]).reshape(-1, n, n)
    lo_inv = np.array([family.inverse("lower", j)[0] for j in js]).reshape(-1, n, n)
    P0, Q0, Pp0, Qp0 = (getattr(fs, k)[js + 1] for k in NAMES)
    P1, Q1, Pp1, Qp1 = (getattr(fs, k)[js + 2] for k in NAMES)

    def nm(a):
        return linalg.norms(a, kind)

    nP0, nQ0, nPp0, nQp0 = nm(P0), nm(Q0), nm(Pp0), nm(Qp0)
    nP1, nQ1, nPp1, nQp1 = nm(P1), nm(Q1), nm(Pp1), nm(Qp1)
    nup, nlo = nm(up), nm(lo)

    cases = [
        (P0 @ Qp0 - Q0 @ Pp0, 0, nP0 * nQp0 + nQ0 * nPp0),
        (P1 @ Qp0 - Q1 @ Pp0 - up_inv, 0, nP1 * nQp0 + nQ1 * nPp0),
        (Q0 @ Pp1 - P0 @ Qp1 - lo_inv, 0, nQ0 * nPp1 + nP0 * nQp1),
        (Qp1 @ lo @ Q0 - Qp0 @ up @ Q1, 0, nQp1 * nlo * nQ0 + nQp0 * nup * nQ1),
        (Pp1 @ lo @ P0 - Pp0 @ up @ P1, 0, nPp1 * nlo * nP0 + nPp0 * nup * nP1),
        (Pp1 @ lo @ Q0 - Pp0 @ up @ Q1 - e, 1, nPp1 * nlo * nQ0 + nPp0 * nup * nQ1),
        (Qp0 @ up @ P1 - Qp1 @ lo @ P0 - e, 1, nQp0 * nup * nP1 + nQp1 * nlo * nP0),
    ]
    defects = np.column_stack([nm(diff) / (1.0 + scale) for diff, _, scale in cases]) if js.size \
        else np.zeros((0, len(cases)))
    return IdentityReport(js, defects)


# ---------------------------------------------------------------------------
# Solutions
# ---------------------------------------------------------------------------

@dataclass
class SolutionSeq:
    """Solution values for ``j = -1..J`` stored at ``values[j + 1]``.

    ``side="right"`` holds column vectors or matrices of the right equation;
    ``side="left"`` holds row vectors ``v_j^*`` (or matrices) of the left one.
    """

    z: complex
    side: str
    values: np.ndarray
    family: object = None
    residual: float | None = None
    superposition_defect: float | None = None
    status: str = "ok"
    message: str | None = None

    @property
    def J(self):
        return self.values.shape[0] - 2

    def at(self, j):
        if not -1 <= j <= self.J:
            raise IndexError(f"index {j} outside -1..{self.J}")
        return self.values[j + 1]

    def norms(self, kind=linalg.DEFAULT_NORM):
        return linalg.norms(self.values, kind)


def _check_side(side):
    if side not in ("right", "left"):
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")


def apply_l(family, seq, j, forcing=None):
    """Residual ``l(u)_j - z u_j`` (right) or ``l+(v)_j - z v_j`` (left).

    With ``forcing`` given, ``F_j`` is subtracted as well.
    """
    if not 0 <= j <= seq.J - 1:
        raise IndexError(f"residual index {j} outside 0..{seq.J - 1}")
    u_m, u_0, u_p = seq.at(j - 1), seq.at(j), seq.at(j + 1)
    d = family.block("diag", j)
    if seq.side == "right":
        r = family.block("lower", j - 1) @ u_m + d @ u_0 + family.block("upper", j) @ u_p - seq.z * u_0
    else:
        r = u_m @ family.block("upper", j - 1) + u_0 @ d + u_p @ family.block("lower", j) - seq.z * u_0
    if forcing is not None:
        r = r - forcing
    return r


def residual_scale(family, seq, j, kind=linalg.DEFAULT_NORM, magnitudes=None):
    """Magnitude of the terms entering ``apply_l`` at index ``j``.

    ``magnitudes[j + 1]`` may replace ``||u_j||`` when the values were
    assembled from larger terms that cancel.
    """
    nm = linalg.operator_norm
    if seq.side == "right":
        a_m, a_p = family.block("lower", j - 1), family.block("upper", j)
    else:
        a_m, a_p = family.block("upper", j - 1), family.block("lower", j)
    if magnitudes is None:
        u_m, u0, u_p = (nm(seq.at(i), kind) for i in (j - 1, j, j + 1))
    else:
        u_m, u0, u_p = magnitudes[j], magnitudes[j + 1], magnitudes[j + 2]
    return (nm(a_m, kind) * u_m + nm(family.block("diag", j), kind) * u0
            + nm(a_p, kind) * u_p + abs(seq.z) * u0)


def max_scaled_residual(family, seq, forcing=None, kind=linalg.DEFAULT_NORM, magnitudes=None):
    """Largest ``||residual_j|| / (1 + scale_j)`` over ``0 <= j <= J-1``."""
    worst = 0.0
    for j in range(seq.J):
        f = None if forcing is None else forcing[j]
        r = linalg.operator_norm(apply_l(family, seq, j, f), kind)
        s = residual_scale(family, seq, j, kind, magnitudes)
        if f is not None:
            s += linalg.operator_norm(f, kind)
        worst = max(worst, r / (1.0 + s))
    return worst


def solve_homogeneous(family, z, side, init_m1, init_0, J, fs=None, kind=linalg.DEFAULT_NORM):
    """Forward solve from ``(u_{-1}, u_0)``, checked against superposition.

    For ``side="right"`` the superposition is ``u_j = Q_j u_0 + P_j u_{-1}``;
    for ``side="left"`` it is ``v_j = v_0 Q+_j + v_{-1} P+_j`` with ``v`` the
    stored row values.
    """
    _check_side(side)
    z = complex(z)
    u_m1 = np.asarray(init_m1, dtype=np.complex128)
    u_0 = np.asarray(init_0, dtype=np.complex128)
    if u_m1.shape != u_0.shape:
        raise ValueError("initial values must have the same shape")
    n = family.n
    e = linalg.identity(n)
    vals = np.empty((J + 2,) + u_0.shape, dtype=np.complex128)
    vals[0], vals[1] = u_m1, u_0
    status, message, last = "ok", None, J
    for j in range(J):
        try:
            d = z * e - family.block("diag", j)
            if side == "right":
                inv, _ = family.inverse("upper", j)
                nxt = inv @ (d @ vals[j + 1] - family.block("lower", j - 1) @ vals[j])
            else:
                inv, _ = family.inverse("lower", j)
                nxt = (vals[j + 1] @ d - vals[j] @ family.block("upper", j - 1)) @ inv
        except (IllConditionedBlockError, NonFiniteMatrixError) as exc:
            status, message, last = "ill-conditioned" if isinstance(exc, IllConditionedBlockError) \
                else "overflow", str(exc), j
            break
        if not np.all(np.isfinite(nxt)) or np.abs(nxt).max(initial=0.0) > OVERFLOW:
            status, message, last = "overflow", f"norm above {OVERFLOW:.0e} at index {j + 1}", j
            break
        vals[j + 2] = nxt
    vals = vals[: last + 2]
    seq = SolutionSeq(z, side, vals, family, status=status, message=message)
    seq.residual = max_scaled_residual(family, seq, kind=kind)
    if fs is None or fs.rescaled or fs.J < seq.J or fs.z != z:
        fs = fundamental_system(family, z, max(seq.J, 1))
    seq.superposition_defect = _superposition_defect(fs, seq, kind)
    return seq


def _superposition_defect(fs, seq, kind):
    m = min(fs.J, seq.J)
    u_m1, u_0 = seq.at(-1), seq.at(0)
    n_m1, n_0 = linalg.operator_norm(u_m1, kind), linalg.operator_norm(u_0, kind)
    worst = 0.0
    for j in range(-1, m + 1):
        if seq.side == "right":
            pred = fs.Q[j + 1] @ u_0 + fs.P[j + 1] @ u_m1
            scale = fs.norms("Q", kind)[j + 1] * n_0 + fs.norms("P", kind)[j + 1] * n_m1
        else:
            pred = u_0 @ fs.Qp[j + 1] + u_m1 @ fs.Pp[j + 1]
            scale = fs.norms("Qp", kind)[j + 1] * n_0 + fs.norms("Pp", kind)[j + 1] * n_m1
        diff = linalg.operator_norm(seq.at(j) - pred, kind)
        if diff:
            worst = max(worst, diff / max(scale, np.finfo(float).tiny))
    return worst
