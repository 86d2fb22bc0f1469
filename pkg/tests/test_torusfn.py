from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torusfilters.errors import IncompatibleGridError, OffGridError
from torusfilters.lattice import validate_dilation
from torusfilters.torusfn import (
    TorusFunction,
    bracket,
    coefficient_bracket,
    default_grid,
    invariance_residual,
    is_compatible,
    random_trig_poly,
    standard_orthonormal_basis,
    translate,
)

from conftest import OBSTRUCTION

SMALL = [[[2]], [[1, 1], [1, -1]], [[0, 0, 2], [1, 0, 0], [0, 1, 0]], [[2, 1], [0, 2]]]


def test_evaluate_and_sample():
    f = TorusFunction.from_coeffs({(0,): 1, (1,): 1})
    assert f.evaluate(0) == pytest.approx(2)
    assert f.evaluate(0.5) == pytest.approx(0, abs=1e-15)
    g = f.with_grid((8,))
    assert np.allclose(g.grid, 1 + np.exp(2j * np.pi * np.arange(8) / 8))
    assert g.evaluate(0.25) == pytest.approx(1 + 1j)
    grid_only = TorusFunction.from_grid(g.grid)
    with pytest.raises(OffGridError):
        grid_only.evaluate(0.3)
    with pytest.raises(OffGridError):
        grid_only.sample((6,))
    assert np.allclose(grid_only.sample((4,)), g.grid[::2])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(0, 3), st.integers(0, 2**31))
def test_arithmetic_matches_grid(n, d, seed):
    rng = np.random.default_rng(seed)
    f, g = random_trig_poly(n, d, rng), random_trig_poly(n, d, rng)
    shape = (8,) * n
    fv, gv = f.sample(shape), g.sample(shape)
    assert np.abs((f * g).sample(shape) - fv * gv).max() < 1e-9
    assert np.abs((f + g).sample(shape) - (fv + gv)).max() < 1e-12
    assert np.abs((f - 2 * g).sample(shape) - (fv - 2 * gv)).max() < 1e-12
    assert np.abs(f.conj().sample(shape) - fv.conj()).max() < 1e-12


def test_translate_exact():
    f = TorusFunction.from_coeffs({(1, 0): 1.0, (0, 2): 2.0})
    w = (Fraction(1, 2), Fraction(1, 4))
    tf = translate(f, w)
    x = np.array([0.1, 0.3])
    assert tf.evaluate(x) == pytest.approx(f.evaluate(x - np.array([0.5, 0.25])))
    grid = f.with_grid((8, 8))
    assert np.allclose(translate(TorusFunction.from_grid(grid.grid), w).grid, tf.sample((8, 8)))


def test_grid_compatibility():
    A = validate_dilation(OBSTRUCTION)
    F = A.dual_group
    assert is_compatible((9, 8, 8, 8, 8), F)
    assert not is_compatible((8, 8, 8, 8, 8), F)
    assert default_grid(validate_dilation([[2]]).dual_group) == (32,)
    f = TorusFunction.from_grid(np.ones((8, 2, 2, 2, 2)))
    with pytest.raises(IncompatibleGridError):
        bracket(f, f, F)


@pytest.mark.parametrize("M", SMALL)
def test_bracket_consistency(M, rng):
    A = validate_dilation(M)
    for _ in range(5):
        f = random_trig_poly(A.n, 4, rng)
        g = random_trig_poly(A.n, 4, rng)
        for primed in (False, True):
            cb = coefficient_bracket(f, g, A, primed)
            gb = bracket(f, g, A.dual_group, primed)
            assert np.abs(cb.sample(gb.shape) - gb.grid).max() < 1e-10


@pytest.mark.parametrize("M", SMALL)
def test_bracket_properties(M, rng):
    A = validate_dilation(M)
    F = A.dual_group
    f, g = random_trig_poly(A.n, 3, rng), random_trig_poly(A.n, 3, rng)
    b = bracket(f, g, F)
    # F-invariant, Hermitian, primed = q * unprimed, coefficients in A Z^n
    assert invariance_residual(b.grid, F) < 1e-12
    assert np.abs(bracket(g, f, F).grid - b.grid.conj()).max() < 1e-12
    assert np.abs(bracket(f, g, F, primed=True).grid - A.q * b.grid).max() < 1e-12
    cb = coefficient_bracket(f, g, A)
    assert all(A.contains(k) for k in cb.coeffs)
    # A-linearity: <a f, g> = a <f, g> for invariant a
    a = coefficient_bracket(g, g, A)
    lhs = bracket(a * f, g, F).grid
    rhs = a.sample(b.shape) * b.grid
    assert np.abs(lhs - rhs).max() < 1e-12 * np.abs(rhs).max()


@pytest.mark.parametrize("M", SMALL + [OBSTRUCTION])
def test_standard_basis_reconstruction(M, rng):
    A = validate_dilation(M)
    F = A.dual_group
    shape = tuple(2 * r for r in F.min_resolution()) if A.n == 5 else None
    basis = standard_orthonormal_basis(A)
    f = random_trig_poly(A.n, 2 if A.n == 5 else 4, rng)
    shape = shape or default_grid(F)
    recon = np.zeros(shape, dtype=complex)
    for e in basis:
        recon += bracket(f, e, F, shape=shape).grid * e.sample(shape)
        for e2 in basis:
            want = 1.0 if e2 is e else 0.0
            assert np.abs(bracket(e, e2, F, shape=shape).grid - want).max() < 1e-12
    assert np.abs(recon - f.sample(shape)).max() < 1e-10
