"""Dense complex matrix helpers: norms, guarded inversion, structure tests.

Every matrix in the package is a plain ``numpy`` array of dtype complex128.
The default matrix norm is the spectral norm (largest singular value);
``"fro"`` selects the Frobenius norm instead.  Vectors always use the
Euclidean norm, which is compatible with both choices.
"""

import numpy as np

from .errors import IllConditionedBlockError, NonFiniteMatrixError

NORMS = ("spectral", "fro")
DEFAULT_NORM = "spectral"
TOL_INV = 1e-10
COND_CAP = 1e12


def as_matrix(m, n=None):
    """Coerce ``m`` to a square complex128 array, optionally of order ``n``."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if n is not None and a.shape[0] != n:
        raise ValueError(f"expected order {n}, got {a.shape[0]}")
    return a


def identity(n):
    return np.eye(n, dtype=np.complex128)


def zeros(n):
    return np.zeros((n, n), dtype=np.complex128)


def _check_norm_kind(kind):
    if kind not in NORMS:
        raise ValueError(f"unknown norm {kind!r}; expected one of {NORMS}")


def operator_norm(m, kind=DEFAULT_NORM):
    """Norm of a matrix (or Euclidean norm of a vector).

    Raises
    ------
    NonFiniteMatrixError
        If ``m`` holds NaN or Inf.
    """
    _check_norm_kind(kind)
    a = np.asarray(m, dtype=np.complex128)
    if not np.all(np.isfinite(a)):
        raise NonFiniteMatrixError("non-finite matrix")
    if a.ndim <= 1:
        return float(np.linalg.norm(a))
    return float(np.linalg.norm(a, 2 if kind == "spectral" else "fro"))


def norms(stack, kind=DEFAULT_NORM):
    """Norms of a stack of matrices (shape ``(m, n, n)``) or vectors (``(m, n)``).

    Non-finite entries propagate as ``inf`` instead of raising; callers that
    walk long sequences use this to locate overflow.
    """
    _check_norm_kind(kind)
    a = np.asarray(stack, dtype=np.complex128)
    out = np.empty(a.shape[0])
    finite = np.all(np.isfinite(a.reshape(a.shape[0], -1)), axis=1)
    out[~finite] = np.inf
    if finite.any():
        good = a[finite]
        if a.ndim == 2:
            out[finite] = np.linalg.norm(good, axis=1)
        elif kind == "spectral":
            out[finite] = np.linalg.norm(good, 2, axis=(1, 2))
        else:
            out[finite] = np.linalg.norm(good, "fro", axis=(1, 2))
    return out


def condition(m):
    """Spectral condition number; ``inf`` for singular input."""
    s = np.linalg.svd(as_matrix(m), compute_uv=False)
    if s[-1] == 0.0:
        return np.inf
    return float(s[0] / s[-1])


def invert(m, cond_cap=COND_CAP, tol=TOL_INV):
    """Inverse of ``m`` together with its condition estimate.

    Returns
    -------
    (ndarray, float)
        ``M^{-1}`` and the spectral condition number of ``M``.

    Raises
    ------
    NonFiniteMatrixError
        If ``m`` holds NaN or Inf.
    IllConditionedBlockError
        If ``m`` is singular to working precision, its condition number
        exceeds ``cond_cap``, or ``M M^{-1}`` misses ``E`` by more than ``tol``.
    """
    a = as_matrix(m)
    if not np.all(np.isfinite(a)):
        raise NonFiniteMatrixError("non-finite matrix")
    cond = condition(a)
    if not np.isfinite(cond) or cond > cond_cap:
        raise IllConditionedBlockError(
            f"ill-conditioned block (condition {cond:.3e} > cap {cond_cap:.3e})", cond=cond
        )
    inv = np.linalg.inv(a)
    n = a.shape[0]
    # Relative check: the attainable accuracy degrades linearly with cond.
    defect = np.linalg.norm(a @ inv - np.eye(n), 2)
    if defect > tol * max(1.0, cond):
        raise IllConditionedBlockError(
            f"ill-conditioned block (inversion defect {defect:.3e})", cond=cond
        )
    return inv, cond


def is_hermitian_positive(m, tol=1e-12):
    """Return ``(hermitian, positive_definite)`` flags for a square matrix."""
    a = as_matrix(m)
    scale = np.linalg.norm(a, 2)
    hermitian = bool(np.linalg.norm(a - a.conj().T, 2) <= tol * scale)
    if not hermitian:
        return False, False
    lam_min = np.linalg.eigvalsh(0.5 * (a + a.conj().T))[0]
    return True, bool(lam_min > tol)
