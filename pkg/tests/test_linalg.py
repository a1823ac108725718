from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from hellinger_kit import exact as ex
from hellinger_kit import linalg
from hellinger_kit.errors import IllConditionedBlockError, NonFiniteMatrixError

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def complex_matrices(n):
    return arrays(np.float64, (2, n, n), elements=finite).map(lambda a: a[0] + 1j * a[1])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(complex_matrices(n), complex_matrices(n))))
def test_operator_norm_is_submultiplicative(pair):
    a, b = pair
    for kind in linalg.NORMS:
        assert linalg.operator_norm(a @ b, kind) <= linalg.operator_norm(a, kind) * linalg.operator_norm(b, kind) \
            * (1 + 1e-12) + 1e-9


def test_operator_norm_values():
    a = np.diag([3.0, -4.0]).astype(complex)
    assert linalg.operator_norm(a) == pytest.approx(4.0)
    assert linalg.operator_norm(a, "fro") == pytest.approx(5.0)
    assert linalg.operator_norm(linalg.zeros(3)) == 0.0
    assert linalg.operator_norm(np.array([3.0, 4.0j])) == pytest.approx(5.0)


def test_operator_norm_rejects_non_finite():
    with pytest.raises(NonFiniteMatrixError, match="non-finite matrix"):
        linalg.operator_norm(np.array([[np.nan]]))
    with pytest.raises(ValueError):
        linalg.operator_norm(np.eye(2), "nuclear")


def test_batched_norms_match_single():
    rng = np.random.default_rng(0)
    stack = rng.normal(size=(7, 3, 3)) + 1j * rng.normal(size=(7, 3, 3))
    stack[3, 0, 0] = np.inf
    out = linalg.norms(stack)
    assert out[3] == np.inf
    for i in (0, 1, 6):
        assert out[i] == pytest.approx(linalg.operator_norm(stack[i]))


def test_invert_and_condition_cap():
    a = np.array([[2.0, 1.0], [1.0, 3.0]], dtype=complex)
    inv, cond = linalg.invert(a)
    assert np.allclose(inv @ a, np.eye(2))
    assert cond == pytest.approx(linalg.condition(a))
    with pytest.raises(IllConditionedBlockError) as info:
        linalg.invert(np.array([[1.0, 1.0], [1.0, 1.0 + 1e-14]]))
    assert info.value.cond > linalg.COND_CAP
    with pytest.raises(IllConditionedBlockError):
        linalg.invert(linalg.zeros(2))


def test_hermitian_positive():
    assert linalg.is_hermitian_positive(np.eye(2)) == (True, True)
    assert linalg.is_hermitian_positive(np.diag([1.0, -1.0])) == (True, False)
    assert linalg.is_hermitian_positive(np.array([[1.0, 1.0], [0.0, 1.0]]))[0] is False


def test_gaussian_rationals():
    i = ex.GaussQ(0, 1)
    assert i * i == ex.GaussQ(-1)
    half = ex.GaussQ(Fraction(1, 2))
    assert (ex.GaussQ(1, 1) / ex.GaussQ(1, -1)) == i
    assert complex(half + i) == 0.5 + 1j
    assert (half - half) == 0 and not (half - half)
    assert ex.to_gauss(0.1) == ex.GaussQ(Fraction(0.1))
    with pytest.raises(ZeroDivisionError):
        _ = half / ex.GaussQ(0)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.fractions(max_denominator=20), st.fractions(max_denominator=20)),
                min_size=4, max_size=4))
def test_exact_inverse(entries):
    a = [[ex.GaussQ(*entries[0]), ex.GaussQ(*entries[1])], [ex.GaussQ(*entries[2]), ex.GaussQ(*entries[3])]]
    det = a[0][0] * a[1][1] - a[0][1] * a[1][0]
    if not det:
        with pytest.raises(ZeroDivisionError):
            ex.mat_inv(a)
        return
    assert ex.mat_mul(a, ex.mat_inv(a)) == ex.exact_identity(2)
