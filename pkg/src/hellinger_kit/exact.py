"""Exact Gaussian-rational scalars and list-of-lists matrices over them."""

from fractions import Fraction
import numbers

_ZERO = Fraction(0)


class GaussQ:
    """``re + im*i`` with both parts :class:`fractions.Fraction`."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    def __add__(self, other):
        other = to_gauss(other)
        return GaussQ(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = to_gauss(other)
        return GaussQ(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return to_gauss(other) - self

    def __neg__(self):
        return GaussQ(-self.re, -self.im)

    def __mul__(self, other):
        other = to_gauss(other)
        if not self.im and not other.im:
            return GaussQ(self.re * other.re, _ZERO)
        return GaussQ(self.re * other.re - self.im * other.im, self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = to_gauss(other)
        if not other.im:
            if not other.re:
                raise ZeroDivisionError("GaussQ division by zero")
            return GaussQ(self.re / other.re, self.im / other.re)
        d = other.re * other.re + other.im * other.im
        return GaussQ((self.re * other.re + self.im * other.im) / d,
                      (self.im * other.re - self.re * other.im) / d)

    def __rtruediv__(self, other):
        return to_gauss(other) / self

    def conjugate(self):
        return GaussQ(self.re, -self.im)

    def abs2(self):
        return self.re * self.re + self.im * self.im

    def __eq__(self, other):
        try:
            other = to_gauss(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __str__(self):
        """``a+bi`` text with rational parts, readable back by ``parse_gauss``."""
        if not self.im:
            return str(self.re)
        im = "" if self.im == 1 else "-" if self.im == -1 else str(self.im)
        if not self.re:
            return f"{im}i"
        sign = "" if self.im < 0 else "+"
        return f"{self.re}{sign}{im}i"

    def __repr__(self):
        if not self.im:
            return f"GaussQ({self.re})"
        return f"GaussQ({self.re}, {self.im})"


def to_gauss(x):
    if isinstance(x, GaussQ):
        return x
    if isinstance(x, (Fraction, numbers.Integral)):
        return GaussQ(x, _ZERO)
    if isinstance(x, numbers.Real):
        return GaussQ(Fraction(float(x)), _ZERO)
    if isinstance(x, numbers.Complex):
        x = complex(x)
        return GaussQ(Fraction(x.real), Fraction(x.imag))
    raise TypeError(f"cannot convert {type(x).__name__} to GaussQ")


def exact_identity(n):
    return [[GaussQ(1 if r == c else 0) for c in range(n)] for r in range(n)]


def exact_zero(n, m=None):
    return [[GaussQ() for _ in range(n if m is None else m)] for _ in range(n)]


def mat_add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(s, a):
    s = to_gauss(s)
    return [[s * x for x in row] for row in a]


def mat_mul(a, b):
    cols = list(zip(*b))
    out = []
    for row in a:
        out_row = []
        for col in cols:
            acc = GaussQ()
            for x, y in zip(row, col):
                if x and y:
                    acc = acc + x * y
            out_row.append(acc)
        out.append(out_row)
    return out


def mat_inv(a):
    """Gauss-Jordan inverse; raises ``ZeroDivisionError`` for singular input."""
    n = len(a)
    m = [list(row) + [GaussQ(1 if r == c else 0) for c in range(n)] for r, row in enumerate(a)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col]), None)
        if pivot is None:
            raise ZeroDivisionError("singular matrix")
        m[col], m[pivot] = m[pivot], m[col]
        inv_p = GaussQ(1) / m[col][col]
        m[col] = [x * inv_p for x in m[col]]
        for r in range(n):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [row[n:] for row in m]


def is_zero(a):
    return not any(x for row in a for x in row)


def to_complex_array(a):
    import numpy as np

    return np.array([[complex(x) for x in row] for row in a], dtype=np.complex128)


def frobenius_sq(a):
    """Exact squared Frobenius norm (a Fraction)."""
    return sum((x.abs2() for row in a for x in row), Fraction(0))
