import numpy as np
import pytest

from hellinger_kit.errors import DegenerateAnchorError, HorizonExceededError
from hellinger_kit.recurrence import fundamental_system
from hellinger_kit.voc import (InhomogeneousProblem, anchor_coefficients, delta_system_defects,
                               hellinger_representation, solve_inhomogeneous, voc_coefficients)

from conftest import random_family


def _forcing(seed, n, J, vector=False):
    rng = np.random.default_rng(seed)
    shape = (J, n) if vector else (J, n, n)
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


@pytest.mark.parametrize("side", ["right", "left"])
@pytest.mark.parametrize("n", [1, 2, 4])
def test_forced_solution_residual(side, n):
    fam = random_family(100 + n, n)
    F = _forcing(n, n, 50)
    seq = solve_inhomogeneous(InhomogeneousProblem(fam, 0.7 + 0.2j, F, 50, side))
    assert seq.residual <= 1e-9


def test_forced_vector_solution_with_base():
    fam = random_family(5, 3)
    F = _forcing(1, 3, 40, vector=True)
    base = (np.array([1, 0, 0], complex), np.array([0, 2j, 0]))
    seq = solve_inhomogeneous(InhomogeneousProblem(fam, -1j, F, 40, "right", base), compensated=True)
    assert seq.residual <= 1e-9


@pytest.mark.parametrize("side", ["right", "left"])
def test_delta_system(side):
    fam = random_family(8, 2)
    fs = fundamental_system(fam, 1.5, 50)
    F = _forcing(2, 2, 50)
    zero = np.zeros((2, 2))
    coeffs = voc_coefficients(fs, F, 0, 50, (zero, zero), side)
    assert delta_system_defects(fs, F, coeffs).max() <= 1e-9


def test_forcing_too_short():
    fam = random_family(1, 1)
    with pytest.raises(HorizonExceededError):
        InhomogeneousProblem(fam, 0, _forcing(0, 1, 5), 10)


@pytest.mark.parametrize("name", ["P", "Q", "Pp", "Qp"])
@pytest.mark.parametrize("k", [0, 7])
def test_representation_through_reference_point(name, k):
    fam = random_family(21, 2)
    fs0 = fundamental_system(fam, 0.0, 100)
    fs = fundamental_system(fam, 1.2 - 0.9j, 100)
    rep = hellinger_representation(fs0, fs.solution(name), k)
    assert rep.max_defect <= 1e-8


def test_anchor_recovers_fundamental_coordinates():
    fam = random_family(2, 2)
    fs0 = fundamental_system(fam, 0.4, 20)
    c1, c2, _ = anchor_coefficients(fs0, fs0.solution("Q"), 5)
    assert np.allclose(c1, np.eye(2)) and np.allclose(c2, 0)


def test_degenerate_anchor_raises():
    fam = random_family(4, 2)
    fs0 = fundamental_system(fam, 0.0, 20)
    Y = fundamental_system(fam, 1.0, 20).solution("Q")
    fs0.P[6], fs0.P[7] = fs0.Q[6], fs0.Q[7]  # columns of the anchor matrix now coincide
    with pytest.raises(DegenerateAnchorError, match="degenerate anchor"):
        anchor_coefficients(fs0, Y, 6)
