"""Variation of constants for the inhomogeneous block recurrences.

Right problem ``l(U)_j - z U_j = F_j`` with ``U_j = Q_j C1_j + P_j C2_j``;
left problem ``l+(U+)_j - z U+_j = F_j`` with ``U+_j = C1+_j Q+_j + C2+_j P+_j``.
The coefficients change by ``dC1_{j+1} = -P+_j F_j``, ``dC2_{j+1} = Q+_j F_j``
(right) and ``dC1+_{j+1} = -F_j P_j``, ``dC2+_{j+1} = F_j Q_j`` (left).
"""

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DegenerateAnchorError, HorizonExceededError, VocInconsistencyError
from .recurrence import (
    TOL_REC,
    SolutionSeq,
    fundamental_system,
    max_scaled_residual,
)


def _cumsum(terms, compensated):
    """Running sums ``S_0 = 0, S_m = terms[0] + ... + terms[m-1]``."""
    out = np.zeros((len(terms) + 1,) + terms.shape[1:], dtype=np.complex128)
    if not compensated:
        np.cumsum(terms, axis=0, out=out[1:])
        return out
    acc = np.zeros(terms.shape[1:], dtype=np.complex128)
    carry = np.zeros_like(acc)
    for i, t in enumerate(terms):
        y = t - carry
        s = acc + y
        carry = (s - acc) - y
        acc = s
        out[i + 1] = acc
    return out


def _lmul(m, x):
    """Stacked ``m[i] @ x[i]`` where ``x`` holds matrices or vectors."""
    return np.einsum("mij,mj->mi", m, x) if x.ndim == 2 else m @ x


def _rmul(x, m):
    """Stacked ``x[i] @ m[i]`` where ``x`` holds matrices or row vectors."""
    return np.einsum("mi,mij->mj", x, m) if x.ndim == 2 else x @ m


@dataclass
class VocCoefficients:
    """``C1_j, C2_j`` for ``j = k..J`` (``C1[j - k]``), right or left problem."""

    k: int
    side: str
    C1: np.ndarray
    C2: np.ndarray

    @property
    def J(self):
        return self.k + self.C1.shape[0] - 1

    def at(self, j):
        if not self.k <= j <= self.J:
            raise IndexError(f"index {j} outside {self.k}..{self.J}")
        return self.C1[j - self.k], self.C2[j - self.k]


def voc_coefficients(fs, F, k, J, base, side="right", compensated=False):
    """Cumulative coefficient sums from the base values ``(C1_k, C2_k)``.

    ``F`` is indexable by ``j`` (``F[j]`` is ``F_j``) and must cover ``k..J-1``.
    """
    if side not in ("right", "left"):
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")
    if fs.rescaled:
        raise ValueError("variation of constants needs an unscaled fundamental system")
    if fs.J < J or k < 0 or k > J:
        raise HorizonExceededError(f"horizon mismatch: need 0 <= k <= J <= {fs.J}, got k={k}, J={J}")
    if len(F) < J:
        raise HorizonExceededError(f"horizon mismatch: forcing has {len(F)} terms, need {J}")
    c1, c2 = (np.asarray(b, dtype=np.complex128) for b in base)
    Fk = np.asarray([F[i] for i in range(k, J)], dtype=np.complex128).reshape((J - k,) + c1.shape)
    if side == "right":
        d1 = -_lmul(fs.Pp[k + 1:J + 1], Fk)
        d2 = _lmul(fs.Qp[k + 1:J + 1], Fk)
    else:
        d1 = -_rmul(Fk, fs.P[k + 1:J + 1])
        d2 = _rmul(Fk, fs.Q[k + 1:J + 1])
    C1 = c1 + _cumsum(d1, compensated)
    C2 = c2 + _cumsum(d2, compensated)
    return VocCoefficients(k, side, C1, C2)


@dataclass
class InhomogeneousProblem:
    family: object
    z: complex
    F: object  # sequence of n x n matrices (or vectors), F[j] for j = 0..J-1
    J: int
    side: str = "right"
    base: tuple = None  # (C1_0, C2_0); defaults to (O, O)

    def __post_init__(self):
        if self.side not in ("right", "left"):
            raise ValueError(f"side must be 'right' or 'left', got {self.side!r}")
        if len(self.F) < self.J:
            raise HorizonExceededError(f"forcing has {len(self.F)} terms, need {self.J}")
        shape = np.shape(self.F[0])
        n = self.family.n
        if shape not in ((n, n), (n,)):
            raise ValueError(f"forcing blocks must have shape ({n}, {n}) or ({n},), got {shape}")
        if self.base is None:
            zero = np.zeros(shape, dtype=np.complex128)
            self.base = (zero, zero)


def assemble(fs, coeffs, side):
    """``U_j`` for ``j = k..J`` from fundamental blocks and coefficients."""
    k, J = coeffs.k, coeffs.J
    if side == "right":
        return _lmul(fs.Q[k + 1:J + 2], coeffs.C1) + _lmul(fs.P[k + 1:J + 2], coeffs.C2)
    return _rmul(coeffs.C1, fs.Qp[k + 1:J + 2]) + _rmul(coeffs.C2, fs.Pp[k + 1:J + 2])


def term_magnitudes(fs, coeffs, side, kind=linalg.DEFAULT_NORM):
    """``||Q_j|| ||C1_j|| + ||P_j|| ||C2_j||`` (or the left analog) for ``j = k..J``."""
    k, J = coeffs.k, coeffs.J
    nm = lambda a: linalg.norms(a, kind)  # noqa: E731
    if side == "right":
        return nm(fs.Q[k + 1:J + 2]) * nm(coeffs.C1) + nm(fs.P[k + 1:J + 2]) * nm(coeffs.C2)
    return nm(coeffs.C1) * nm(fs.Qp[k + 1:J + 2]) + nm(coeffs.C2) * nm(fs.Pp[k + 1:J + 2])


def solve_inhomogeneous(problem, fs=None, tol=TOL_REC, compensated=False, kind=linalg.DEFAULT_NORM):
    """Solve the forced recurrence by variation of constants.

    ``U_{-1}`` and ``U_0`` use the base constants ``(C1_0, C2_0)``.  The
    residual ``l(U)_j - z U_j - F_j`` is checked for ``0 <= j <= J-1``.

    Raises
    ------
    VocInconsistencyError
        If the scaled residual exceeds ``tol``.
    """
    p = problem
    if fs is None or fs.rescaled or fs.J < p.J or fs.z != complex(p.z):
        fs = fundamental_system(p.family, p.z, p.J)
    coeffs = voc_coefficients(fs, p.F, 0, p.J, p.base, p.side, compensated)
    c1, c2 = (np.asarray(b, dtype=np.complex128) for b in p.base)
    if p.side == "right":
        u_m1 = fs.Q[0] @ c1 + fs.P[0] @ c2
    else:
        u_m1 = c1 @ fs.Qp[0] + c2 @ fs.Pp[0]
    body = assemble(fs, coeffs, p.side)
    values = np.concatenate([u_m1[None], body])
    seq = SolutionSeq(complex(p.z), p.side, values, p.family)
    F = [np.asarray(p.F[j], dtype=np.complex128) for j in range(p.J)]
    # U_j is assembled from terms that can be far larger than U_j itself
    mags = np.concatenate([[linalg.operator_norm(u_m1, kind)], term_magnitudes(fs, coeffs, p.side, kind)])
    seq.residual = max_scaled_residual(p.family, seq, forcing=F, kind=kind, magnitudes=mags)
    if not seq.residual <= tol:
        raise VocInconsistencyError(
            f"variation-of-constants inconsistency: scaled residual {seq.residual:.3e} > {tol:.1e}"
        )
    return seq


def delta_system_defects(fs, F, coeffs, kind=linalg.DEFAULT_NORM):
    """Scaled defects of the two-equation system each coefficient step solves.

    Right: ``Q_j dC1 + P_j dC2 = 0`` and ``A_{j,j+1}(Q_{j+1} dC1 + P_{j+1} dC2) = F_j``.
    Left:  ``dC1 Q+_j + dC2 P+_j = 0`` and ``(dC1 Q+_{j+1} + dC2 P+_{j+1}) A_{j+1,j} = F_j``.
    Returns an array of shape ``(steps, 2)``.
    """
    fam = fs.family
    nm = linalg.operator_norm
    out = []
    for j in range(coeffs.k, coeffs.J):
        a1, a2 = coeffs.at(j)
        b1, b2 = coeffs.at(j + 1)
        d1, d2 = b1 - a1, b2 - a2
        f = np.asarray(F[j], dtype=np.complex128)
        Q0, P0, Q1, P1 = fs.Q[j + 1], fs.P[j + 1], fs.Q[j + 2], fs.P[j + 2]
        Qp0, Pp0, Qp1, Pp1 = fs.Qp[j + 1], fs.Pp[j + 1], fs.Qp[j + 2], fs.Pp[j + 2]
        if coeffs.side == "right":
            a = fam.block("upper", j)
            e1 = Q0 @ d1 + P0 @ d2
            s1 = nm(Q0, kind) * nm(d1, kind) + nm(P0, kind) * nm(d2, kind)
            inner = Q1 @ d1 + P1 @ d2
            e2 = a @ inner - f
            s2 = nm(a, kind) * (nm(Q1, kind) * nm(d1, kind) + nm(P1, kind) * nm(d2, kind)) + nm(f, kind)
        else:
            a = fam.block("lower", j)
            e1 = d1 @ Qp0 + d2 @ Pp0
            s1 = nm(Qp0, kind) * nm(d1, kind) + nm(Pp0, kind) * nm(d2, kind)
            inner = d1 @ Qp1 + d2 @ Pp1
            e2 = inner @ a - f
            s2 = nm(a, kind) * (nm(Qp1, kind) * nm(d1, kind) + nm(Pp1, kind) * nm(d2, kind)) + nm(f, kind)
        out.append((nm(e1, kind) / (1.0 + s1), nm(e2, kind) / (1.0 + s2)))
    return np.array(out).reshape(-1, 2)


# ---------------------------------------------------------------------------
# Representation of a solution at z through the fundamental system at z0
# ---------------------------------------------------------------------------

def anchor_coefficients(fs0, Y, k, side="right", kind=linalg.DEFAULT_NORM):
    """Constants ``(C1_k, C2_k)`` matching ``Y`` at indices ``k-1`` and ``k``.

    Uses the closed-form inverse supplied by the identities: for the right
    problem ``C1 = P+_k A_{k,k-1} Y_{k-1} - P+_{k-1} A_{k-1,k} Y_k`` and
    ``C2 = Q+_{k-1} A_{k-1,k} Y_k - Q+_k A_{k,k-1} Y_{k-1}``.
    Returns ``(C1, C2, cond)`` with ``cond`` the condition number of the
    two-by-two block matrix being inverted.

    Raises
    ------
    DegenerateAnchorError
        If that matrix is numerically singular (condition above the
        family's cap).
    """
    fam = fs0.family
    if not 0 <= k <= min(fs0.J, Y.J):
        raise IndexError(f"anchor index {k} outside 0..{min(fs0.J, Y.J)}")
    a_up = fam.block("upper", k - 1)   # A_{k-1,k}
    a_lo = fam.block("lower", k - 1)   # A_{k,k-1}
    y_m, y_0 = Y.at(k - 1), Y.at(k)
    if side == "right":
        blocks = np.block([[fs0.Q[k], fs0.P[k]], [fs0.Q[k + 1], fs0.P[k + 1]]])
        c1 = fs0.Pp[k + 1] @ a_lo @ y_m - fs0.Pp[k] @ a_up @ y_0
        c2 = fs0.Qp[k] @ a_up @ y_0 - fs0.Qp[k + 1] @ a_lo @ y_m
    else:
        blocks = np.block([[fs0.Qp[k], fs0.Qp[k + 1]], [fs0.Pp[k], fs0.Pp[k + 1]]])
        c1 = y_m @ a_up @ fs0.P[k + 1] - y_0 @ a_lo @ fs0.P[k]
        c2 = y_0 @ a_lo @ fs0.Q[k] - y_m @ a_up @ fs0.Q[k + 1]
    cond = linalg.condition(blocks)
    if not np.isfinite(cond) or cond > fam.cond_cap:
        raise DegenerateAnchorError(f"degenerate anchor at k={k} (condition {cond:.3e})")
    return c1, c2, cond


@dataclass
class Representation:
    k: int
    C1: np.ndarray
    C2: np.ndarray
    anchor_cond: float
    values: np.ndarray  # reconstructed Y_j for j = k..J, values[j - k]
    defects: np.ndarray  # scaled defect per j = k..J
    side: str

    @property
    def max_defect(self):
        return float(self.defects.max()) if self.defects.size else 0.0


def hellinger_representation(fs0, Y, k, side=None, kind=linalg.DEFAULT_NORM):
    """Rebuild a solution ``Y`` at ``z`` from the fundamental system at ``z0``.

    With ``F_i = (z - z0) Y_i`` the right solution satisfies
    ``Y_j = Q_j C1_k + P_j C2_k + (z - z0) sum_{i=k}^{j-1} (P_j Q+_i - Q_j P+_i) Y_i``
    (all fundamental blocks at ``z0``), and the left one the mirrored formula.
    The defect at ``j`` is ``||rebuilt - Y_j||`` divided by the sum of the
    magnitudes of the terms that build it.
    """
    side = side or Y.side
    if side != Y.side:
        raise ValueError("side does not match the solution")
    J = min(fs0.J, Y.J)
    c1, c2, cond = anchor_coefficients(fs0, Y, k, side, kind)
    dz = complex(Y.z) - complex(fs0.z)
    F = dz * Y.values[1:J + 1]  # F_i for i = 0..J-1
    coeffs = voc_coefficients(fs0, F, k, J, (c1, c2), side)
    rebuilt = assemble(fs0, coeffs, side)
    target = Y.values[k + 1:J + 2]
    scale = term_magnitudes(fs0, coeffs, side, kind) + linalg.norms(target, kind)
    diff = linalg.norms(rebuilt - target, kind)
    defects = np.where(diff == 0, 0.0, diff / np.maximum(scale, np.finfo(float).tiny))
    return Representation(k, c1, c2, cond, rebuilt, defects, side)
