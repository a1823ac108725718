"""Block tridiagonal operators ``A = (A_{i,j})`` with n-by-n complex blocks.

A family produces, for every ``j >= 0``, the diagonal block ``A_{j,j}``, the
upper block ``A_{j,j+1}`` and the lower block ``A_{j+1,j}``.  The boundary
blocks ``A_{0,-1}`` and ``A_{-1,0}`` are fixed to ``-E`` for every family.

Families are built from JSON-style config records::

    {"kind": "builtin", "name": "geometric", "n": 1, "params": {"ratio": 2}}
    {"kind": "explicit", "n": 2, "sub": [...], "diag": [...], "super": [...]}

where ``sub[j] = A_{j+1,j}``, ``diag[j] = A_{j,j}``, ``super[j] = A_{j,j+1}``.
Complex numbers are written as ``[re, im]`` pairs (plain reals are accepted);
a matrix is a list of rows.  Builtin parameters that must stay exact (ratios)
may also be given as strings like ``"3/2"``.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math
import re

import numpy as np

from . import linalg
from .errors import ConfigError, HorizonExceededError, IllConditionedBlockError, NumericalError
from .exact import GaussQ, exact_identity, exact_zero, to_gauss

BLOCK_KINDS = ("diag", "upper", "lower")


# ---------------------------------------------------------------------------
# JSON encoding of complex numbers and matrices
# ---------------------------------------------------------------------------

def decode_complex(x):
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ConfigError(f"complex number must be a [re, im] pair, got {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, str):
        return parse_complex(x)
    if isinstance(x, (int, float, complex)):
        return complex(x)
    raise ConfigError(f"cannot read a complex number from {x!r}")


def encode_complex(z):
    z = complex(z)
    return [z.real, z.imag]


def decode_matrix(m, n):
    """Read a matrix of order ``n``; a bare scalar is accepted when ``n == 1``."""
    if n == 1 and not (isinstance(m, list) and len(m) == 1 and isinstance(m[0], list)):
        return np.array([[decode_complex(m)]], dtype=np.complex128)
    if not isinstance(m, list) or len(m) != n:
        raise ConfigError(f"dimension mismatch: expected {n} rows, got {m!r}")
    rows = []
    for row in m:
        if not isinstance(row, list) or len(row) != n:
            raise ConfigError(f"non-square block: expected {n} entries per row, got {row!r}")
        rows.append([decode_complex(x) for x in row])
    return np.array(rows, dtype=np.complex128)


def encode_matrix(a):
    a = np.asarray(a, dtype=np.complex128)
    return [[encode_complex(x) for x in row] for row in a]


_IMAG_SPLIT = re.compile(r"(?<=[0-9.)])(?<![eE])(?=[+-])")


def parse_gauss(text):
    """Exact parse of ``a+bi`` text with rational parts (``"1/3+i"``, ``"-2.5e-3i"``, ``"4"``)."""
    s = str(text).strip().replace(" ", "")
    if not s:
        raise ConfigError("empty complex number")
    try:
        if s[-1] not in "iIjJ":
            return GaussQ(Fraction(s))
        body = s[:-1]
        parts = _IMAG_SPLIT.split(body, maxsplit=1) if body not in ("", "+", "-") else [body]
        re_part, im_part = (parts[0], parts[1]) if len(parts) == 2 else ("0", parts[0])
        if im_part in ("", "+", "-"):
            im_part += "1"
        return GaussQ(Fraction(re_part), Fraction(im_part))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"cannot parse complex number {text!r}") from None


def parse_complex(text):
    """Parse ``a+bi`` style text (``"1+0.5i"``, ``"-i"``, ``"3"``, ``"1/2-i"``)."""
    s = str(text).strip().replace(" ", "")
    if s[-1:] in ("i", "I", "j", "J"):
        s = s[:-1] + "j"
    try:
        return complex(s)
    except ValueError:
        return complex(parse_gauss(text))


def format_complex(z):
    z = complex(z)
    return f"{z.real:.17g}{z.imag:+.17g}i"


def _exact_param(x, name):
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError:
            raise ConfigError(f"parameter {name}: cannot read {x!r} as a rational") from None
    if isinstance(x, (int, float)) and math.isfinite(x):
        return Fraction(x)
    raise ConfigError(f"parameter {name}: expected a finite real number, got {x!r}")


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------

class OperatorFamily:
    """Base class; subclasses implement ``_block(kind, j)`` for ``j >= 0``.

    Blocks are cached per instance, as are inverses of off-diagonal blocks.
    Instances are treated as immutable.
    """

    kind = "abstract"

    def __init__(self, n, cond_cap=linalg.COND_CAP):
        if not isinstance(n, int) or n < 1:
            raise ConfigError(f"block dimension must be a positive integer, got {n!r}")
        self.n = n
        self.cond_cap = float(cond_cap)
        self._blocks = {}
        self._inverses = {}

    # subclasses -----------------------------------------------------------
    def _block(self, kind, j):
        raise NotImplementedError

    def _exact_block(self, kind, j):
        """Exact Gaussian-rational block; default is the exact binary value."""
        return [[to_gauss(x) for x in row] for row in self.block(kind, j)]

    @property
    def horizon(self):
        """Largest ``j`` for which all three blocks exist (``None``: unbounded)."""
        return None

    def to_spec(self):
        raise NotImplementedError

    # public ---------------------------------------------------------------
    def block(self, kind, j):
        """``A_{j,j}`` (``"diag"``), ``A_{j,j+1}`` (``"upper"``) or ``A_{j+1,j}`` (``"lower"``)."""
        if kind not in BLOCK_KINDS:
            raise ValueError(f"unknown block kind {kind!r}")
        if j == -1 and kind in ("upper", "lower"):
            return -linalg.identity(self.n)
        if j < 0:
            raise IndexError(f"block index {j} out of range")
        key = (kind, j)
        b = self._blocks.get(key)
        if b is None:
            h = self.horizon
            if h is not None and j > h:
                raise HorizonExceededError(f"horizon exceeded: index {j} > stored horizon {h}")
            b = np.asarray(self._block(kind, j), dtype=np.complex128)
            b.setflags(write=False)
            self._blocks[key] = b
        return b

    def exact_block(self, kind, j):
        if j == -1 and kind in ("upper", "lower"):
            return [[-x for x in row] for row in exact_identity(self.n)]
        h = self.horizon
        if h is not None and j > h:
            raise HorizonExceededError(f"horizon exceeded: index {j} > stored horizon {h}")
        return self._exact_block(kind, j)

    def block_at(self, row, col):
        """The block ``A_{row,col}`` of the infinite matrix (indices ``>= -1``)."""
        if row < -1 or col < -1:
            raise IndexError(f"block indices must be >= -1, got ({row}, {col})")
        if abs(row - col) > 1:
            return linalg.zeros(self.n)
        if row == col:
            if row == -1:
                raise IndexError("A_{-1,-1} is not part of the operator")
            return self.block("diag", row)
        if col == row + 1:
            return self.block("upper", row)
        return self.block("lower", col)

    def inverse(self, kind, j):
        """Cached ``(inverse, condition)`` of an off-diagonal block."""
        key = (kind, j)
        hit = self._inverses.get(key)
        if hit is None:
            try:
                hit = linalg.invert(self.block(kind, j), cond_cap=self.cond_cap)
            except IllConditionedBlockError as exc:
                exc.index = j
                raise
            self._inverses[key] = hit
        return hit

    def __repr__(self):
        return f"{type(self).__name__}({self.to_spec()!r})"


class BuiltinFamily(OperatorFamily):
    """Closed-form family from the builtin catalog."""

    kind = "builtin"

    def __init__(self, name, n, params=None, cond_cap=None):
        if name not in BUILTINS:
            raise ConfigError(f"unknown builtin family {name!r}; known: {sorted(BUILTINS)}")
        params = dict(params or {})
        self.name = name
        self._impl = BUILTINS[name](n, params)
        if cond_cap is None:
            cond_cap = self._impl.default_cond_cap
        super().__init__(n, cond_cap)
        self.params = params

    @property
    def horizon(self):
        return self._impl.horizon

    def _block(self, kind, j):
        return self._impl.block(kind, j)

    def _exact_block(self, kind, j):
        ex = self._impl.exact_block(kind, j)
        return ex if ex is not None else super()._exact_block(kind, j)

    def to_spec(self):
        spec = {"kind": "builtin", "name": self.name, "n": self.n, "params": dict(self.params)}
        if self.cond_cap != self._impl.default_cond_cap:
            spec["cond_cap"] = self.cond_cap
        return spec


class ExplicitFamily(OperatorFamily):
    """Finite list of blocks; queries past the horizon raise."""

    kind = "explicit"

    def __init__(self, n, sub, diag, sup, cond_cap=linalg.COND_CAP):
        super().__init__(n, cond_cap)
        if not (len(sub) == len(diag) == len(sup)) or not diag:
            raise ConfigError("explicit family needs non-empty sub/diag/super lists of equal length")
        self._lists = {
            "lower": [linalg.as_matrix(b, n) for b in sub],
            "diag": [linalg.as_matrix(b, n) for b in diag],
            "upper": [linalg.as_matrix(b, n) for b in sup],
        }

    @property
    def horizon(self):
        return len(self._lists["diag"]) - 1

    def _block(self, kind, j):
        return self._lists[kind][j]

    def to_spec(self):
        spec = {
            "kind": "explicit",
            "n": self.n,
            "sub": [encode_matrix(b) for b in self._lists["lower"]],
            "diag": [encode_matrix(b) for b in self._lists["diag"]],
            "super": [encode_matrix(b) for b in self._lists["upper"]],
        }
        if self.cond_cap != linalg.COND_CAP:
            spec["cond_cap"] = self.cond_cap
        return spec


class ShiftedFamily(OperatorFamily):
    """``base`` with diagonal blocks replaced by ``A_{j,j} - shift(j)``.

    ``l(u)_j = F_j u_j`` for the base family is the homogeneous equation at
    ``z = 0`` of the family shifted by ``F``.
    """

    kind = "shifted"

    def __init__(self, base, shift):
        super().__init__(base.n, base.cond_cap)
        self.base = base
        self.shift = shift

    @property
    def horizon(self):
        return self.base.horizon

    def _block(self, kind, j):
        b = self.base.block(kind, j)
        if kind == "diag":
            return b - linalg.as_matrix(self.shift(j), self.n)
        return b

    def inverse(self, kind, j):
        return self.base.inverse(kind, j)

    def to_spec(self):
        shift = self.shift.to_spec() if hasattr(self.shift, "to_spec") else repr(self.shift)
        return {"kind": "shifted", "base": self.base.to_spec(), "shift": shift}


# ---------------------------------------------------------------------------
# Builtin catalog
# ---------------------------------------------------------------------------

def _scalar_block(value, n):
    out = np.zeros((n, n), dtype=np.complex128)
    np.fill_diagonal(out, value)
    return out


def _exact_scalar(value, n):
    v = to_gauss(value)
    return [[v if r == c else GaussQ(0) for c in range(n)] for r in range(n)]


@dataclass
class _Builtin:
    n: int
    params: dict
    default_cond_cap: float = field(default=linalg.COND_CAP, init=False)
    horizon = None
    allowed = ()

    def __post_init__(self):
        extra = set(self.params) - set(self.allowed)
        if extra:
            raise ConfigError(f"unknown parameters {sorted(extra)} for this builtin")
        self.setup()

    def setup(self):
        pass

    def exact_block(self, kind, j):
        return None


class _Counterexample(_Builtin):
    """``A_{j,j} = O``, ``A_{j+1,j} = A_{j,j+1} = (j+1) E``."""

    def block(self, kind, j):
        if kind == "diag":
            return linalg.zeros(self.n)
        return _scalar_block(j + 1, self.n)

    def exact_block(self, kind, j):
        return _exact_scalar(0 if kind == "diag" else j + 1, self.n)


class _FreeJacobi(_Builtin):
    """Constant coefficients ``a E`` off the diagonal, ``b E`` on it (default 1, 0)."""

    allowed = ("a", "b")

    def setup(self):
        self.a = self.params.get("a", 1)
        self.b = self.params.get("b", 0)
        self.a_c, self.b_c = decode_complex(self.a), decode_complex(self.b)
        if self.a_c == 0:
            raise ConfigError("free_jacobi: a must be nonzero")

    def block(self, kind, j):
        return _scalar_block(self.b_c if kind == "diag" else self.a_c, self.n)

    def exact_block(self, kind, j):
        v = self.b if kind == "diag" else self.a
        return _exact_scalar(_gauss_param(v), self.n)


class _Geometric(_Builtin):
    """``A_{j+1,j} = A_{j,j+1} = r^{j+1} E``, ``A_{j,j} = O``."""

    allowed = ("ratio",)

    def setup(self):
        self.ratio = _exact_param(self.params.get("ratio", 2), "ratio")
        if self.ratio == 0:
            raise ConfigError("geometric: ratio must be nonzero")

    def block(self, kind, j):
        if kind == "diag":
            return linalg.zeros(self.n)
        return _scalar_block(_fpow(self.ratio, j + 1), self.n)

    def exact_block(self, kind, j):
        return _exact_scalar(0 if kind == "diag" else self.ratio ** (j + 1), self.n)


class _DiagGeometric(_Builtin):
    """``A_{j+1,j} = A_{j,j+1} = diag(r_1^{j+1}, ..., r_n^{j+1})``, ``A_{j,j} = O``.

    The blocks are diagonal, so inversion is exact no matter how far apart the
    ratios drive the condition number; the cap is lifted accordingly.
    """

    allowed = ("ratios",)

    def setup(self):
        ratios = self.params.get("ratios")
        if not isinstance(ratios, list) or len(ratios) != self.n:
            raise ConfigError(f"diag_geometric: 'ratios' must list {self.n} values")
        self.ratios = [_exact_param(r, "ratios") for r in ratios]
        if any(r == 0 for r in self.ratios):
            raise ConfigError("diag_geometric: ratios must be nonzero")
        self.default_cond_cap = 1e300

    def block(self, kind, j):
        if kind == "diag":
            return linalg.zeros(self.n)
        out = np.zeros((self.n, self.n), dtype=np.complex128)
        np.fill_diagonal(out, [_fpow(r, j + 1) for r in self.ratios])
        return out

    def exact_block(self, kind, j):
        if kind == "diag":
            return exact_zero(self.n)
        return [[to_gauss(self.ratios[r] ** (j + 1)) if r == c else GaussQ(0) for c in range(self.n)]
                for r in range(self.n)]


class _ScalarEmbed(_Builtin):
    """Scalar Jacobi data ``a_j``, ``b_j`` (finite lists) tensored with ``E_n``."""

    allowed = ("a", "b")

    def setup(self):
        a, b = self.params.get("a"), self.params.get("b")
        if not isinstance(a, list) or not isinstance(b, list) or not a or len(a) != len(b):
            raise ConfigError("scalar_embed: 'a' and 'b' must be non-empty lists of equal length")
        self.a = [decode_complex(x) for x in a]
        self.b = [decode_complex(x) for x in b]
        self.horizon = len(a) - 1

    def block(self, kind, j):
        return _scalar_block(self.b[j] if kind == "diag" else self.a[j], self.n)

    def exact_block(self, kind, j):
        src = self.params["b" if kind == "diag" else "a"][j]
        return _exact_scalar(_gauss_param(src), self.n)


class _Random(_Builtin):
    """Seeded random complex family with well-conditioned off-diagonal blocks.

    Each index draws from its own generator ``default_rng([seed, j])`` so the
    blocks are a pure function of ``(seed, j)``.
    """

    allowed = ("seed", "scale", "diag_scale")

    def setup(self):
        self.seed = int(self.params.get("seed", 0))
        self.scale = float(self.params.get("scale", 0.3))
        self.diag_scale = float(self.params.get("diag_scale", 1.0))

    def _draw(self, j):
        rng = np.random.default_rng([self.seed, j])
        shape = (3, self.n, self.n)
        g = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2 * self.n)
        e = np.eye(self.n)
        return {"diag": self.diag_scale * g[0], "upper": e + self.scale * g[1], "lower": e + self.scale * g[2]}

    def block(self, kind, j):
        return self._draw(j)[kind]


def _fpow(r, k):
    try:
        return float(r) ** k
    except OverflowError:
        return math.copysign(math.inf, float(r)) if k % 2 else math.inf


def _gauss_param(v):
    if isinstance(v, str):
        return parse_gauss(v)
    if isinstance(v, (list, tuple)):
        return GaussQ(Fraction(v[0]), Fraction(v[1]))
    return to_gauss(v)


BUILTINS = {
    "hellinger_counterexample": _Counterexample,
    "free_jacobi": _FreeJacobi,
    "geometric": _Geometric,
    "diag_geometric": _DiagGeometric,
    "scalar_embed": _ScalarEmbed,
    "random": _Random,
}
ALIASES = {"counterexample": "hellinger_counterexample"}


def build_family(spec):
    """Build an :class:`OperatorFamily` from a config record.

    ``{"builtin": name, "n": ..., ...}`` is accepted as a shorthand for
    ``{"kind": "builtin", "name": name, "n": ..., "params": {...}}`` with the
    remaining keys taken as parameters.
    """
    if isinstance(spec, OperatorFamily):
        return spec
    if not isinstance(spec, dict):
        raise ConfigError(f"family spec must be a JSON object, got {type(spec).__name__}")
    spec = dict(spec)
    if "builtin" in spec and "kind" not in spec:
        name = spec.pop("builtin")
        n = spec.pop("n", None)
        cap = spec.pop("cond_cap", None)
        params = spec.pop("params", {})
        params.update(spec)
        spec = {"kind": "builtin", "name": name, "n": n, "params": params}
        if cap is not None:
            spec["cond_cap"] = cap
    kind = spec.get("kind")
    n = spec.get("n")
    if kind == "builtin":
        name = ALIASES.get(spec.get("name"), spec.get("name"))
        if n is None:
            n = 2 if name == "hellinger_counterexample" else 1
        params = spec.get("params") or {}
        if not isinstance(params, dict):
            raise ConfigError("'params' must be a JSON object")
        if name == "diag_geometric" and "ratios" in params and spec.get("n") is None:
            n = len(params["ratios"])
        return BuiltinFamily(name, _check_n(n), params, cond_cap=spec.get("cond_cap"))
    if kind == "explicit":
        n = _check_n(n)
        lists = []
        for key in ("sub", "diag", "super"):
            blocks = spec.get(key)
            if not isinstance(blocks, list):
                raise ConfigError(f"explicit family needs a '{key}' list")
            lists.append([decode_matrix(b, n) for b in blocks])
        return ExplicitFamily(n, *lists, cond_cap=spec.get("cond_cap", linalg.COND_CAP))
    if kind == "shifted":
        base = build_family(spec.get("base"))
        return ShiftedFamily(base, build_sequence(spec.get("shift"), base.n))
    raise ConfigError(f"unknown family kind {kind!r}")


def _check_n(n):
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ConfigError(f"'n' must be a positive integer, got {n!r}")
    return n


# ---------------------------------------------------------------------------
# Matrix sequences (forcing terms and perturbations)
# ---------------------------------------------------------------------------

class BlockSequence:
    """A JSON-describable sequence ``j -> n x n`` matrix.

    Kinds: ``zero``; ``constant`` (``value`` times E, or ``matrix``);
    ``sin`` (``scale * sin(j) * E``); ``linear`` (``scale * j * E``);
    ``delta`` (``value * E`` at ``index``, else O); ``explicit`` (``blocks`` list).
    """

    KINDS = ("zero", "constant", "sin", "linear", "delta", "explicit")

    def __init__(self, spec, n):
        if not isinstance(spec, dict) or spec.get("kind") not in self.KINDS:
            raise ConfigError(f"sequence spec needs 'kind' in {self.KINDS}, got {spec!r}")
        self.spec = dict(spec)
        self.n = n
        kind = spec["kind"]
        self.scale = decode_complex(spec.get("scale", 1))
        if kind == "constant" and "matrix" in spec:
            self._const = decode_matrix(spec["matrix"], n)
        else:
            self._const = decode_complex(spec.get("value", 1)) * np.eye(n, dtype=np.complex128)
        if kind == "explicit":
            blocks = spec.get("blocks")
            if not isinstance(blocks, list):
                raise ConfigError("explicit sequence needs a 'blocks' list")
            self._blocks = [decode_matrix(b, n) for b in blocks]

    def __call__(self, j):
        kind = self.spec["kind"]
        e = np.eye(self.n, dtype=np.complex128)
        if kind == "zero":
            return np.zeros((self.n, self.n), dtype=np.complex128)
        if kind == "constant":
            return self._const.copy()
        if kind == "sin":
            return self.scale * math.sin(j) * e
        if kind == "linear":
            return self.scale * j * e
        if kind == "delta":
            return self._const.copy() if j == int(self.spec.get("index", 0)) else 0 * e
        if j >= len(self._blocks):
            raise HorizonExceededError(f"horizon exceeded: sequence has {len(self._blocks)} blocks")
        return self._blocks[j].copy()

    def to_spec(self):
        return dict(self.spec)

    def __repr__(self):
        return f"BlockSequence({self.spec!r})"


def build_sequence(spec, n):
    if isinstance(spec, BlockSequence) or callable(spec):
        return spec
    return BlockSequence(spec, n)


# ---------------------------------------------------------------------------
# Symmetry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymmetryReport:
    j_max: int
    is_symmetric: bool
    first_violation: int | None = None
    reason: str | None = None
    defect: float = 0.0

    def to_dict(self):
        return {
            "range": [0, self.j_max],
            "is_symmetric": self.is_symmetric,
            "first_violation": self.first_violation,
            "reason": self.reason,
            "defect": self.defect,
        }


def check_symmetry(family, j_max, tol=1e-12):
    """Check ``A_{j,j} = A_{j,j}^*`` and ``A_{j+1,j} = A_{j,j+1} > 0`` for ``0 <= j <= j_max``."""
    if j_max < 0:
        raise ValueError("j_max must be >= 0")
    for j in range(j_max + 1):
        try:
            d, up, lo = family.block("diag", j), family.block("upper", j), family.block("lower", j)
        except (HorizonExceededError, NumericalError) as exc:
            return SymmetryReport(j_max, False, j, f"block unavailable: {exc}", math.inf)
        scale = max(np.linalg.norm(d, 2), 1.0)
        herm_defect = float(np.linalg.norm(d - d.conj().T, 2))
        if not np.all(np.isfinite(d)) or herm_defect > tol * scale:
            return SymmetryReport(j_max, False, j, "diagonal block not Hermitian", herm_defect)
        if not (np.all(np.isfinite(up)) and np.all(np.isfinite(lo))):
            return SymmetryReport(j_max, False, j, "non-finite off-diagonal block", math.inf)
        off_scale = max(np.linalg.norm(up, 2), 1.0)
        gap = float(np.linalg.norm(up - lo, 2))
        if gap > tol * off_scale:
            return SymmetryReport(j_max, False, j, "A_{j+1,j} != A_{j,j+1}", gap)
        herm, pos = linalg.is_hermitian_positive(up, tol)
        if not pos:
            lam = float(np.linalg.eigvalsh(0.5 * (up + up.conj().T))[0]) if herm else math.nan
            defect = -lam if herm else float(np.linalg.norm(up - up.conj().T, 2))
            return SymmetryReport(j_max, False, j, "off-diagonal block not positive definite", defect)
    return SymmetryReport(j_max, True)
