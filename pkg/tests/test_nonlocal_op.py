import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from levymem import kernel as kn
from levymem.elliptic import solve_elliptic
from levymem.errors import BoundUnavailable, GridMismatchError, InadmissibleKernelError, KernelDomainError
from levymem.grid import Grid, inner_l2
from levymem.nonlocal_op import (apply, assemble, bilinear, energy_form, gauss_green_residual,
                                 levy_apply_quadrature, nonlocal_normal_derivative,
                                 poincare_lower_bound, x_norm)
from levymem.potential import zero
from levymem.quadrature import QuadratureSpec

import oracles

vec64 = arrays(np.float64, 64, elements=st.floats(-10, 10))

KERNELS = {
    "frac025": kn.fractional(0.25),
    "frac075": kn.fractional(0.75),
    "rescaled": kn.rescale(kn.fractional(0.5), 0.2),
    "tempered": kn.tempered(0.5, 1.0),
    "indicator": kn.indicator(0.3),
}


@pytest.mark.parametrize("name", sorted(KERNELS))
@pytest.mark.parametrize("near_cut", [1, 3])
def test_m_matrix_structure(name, near_cut):
    K = assemble(KERNELS[name], Grid(-1.0, 1.0, 64), QuadratureSpec(near_cut=near_cut))
    A = K.matrix
    assert np.max(np.abs(A - A.T)) <= 1e-12 * np.max(np.abs(A))
    off = A - np.diag(np.diag(A))
    assert np.all(off <= 0)
    assert np.all(np.diag(A) > 0)
    assert np.all(np.diag(A) >= np.sum(np.abs(off), axis=1))
    assert np.all(K.tail >= 0)


@pytest.mark.parametrize("name", sorted(KERNELS))
def test_full_operator_annihilates_constants(name):
    K = assemble(KERNELS[name], Grid(-1.0, 1.0, 64))
    assert np.max(np.abs(K.full @ np.ones(64))) <= 1e-10 * np.max(np.abs(K.matrix))


def test_tail_dominates_exact_complement(op64):
    assert np.all(op64.tail >= op64.complement)


@given(vec64)
def test_form_positive_definite(op64, a):
    u = op64.grid.function(a)
    xi = bilinear(op64, u, u)
    assert xi >= 0
    if np.any(a != 0):
        assert xi > 0


@given(vec64, vec64, st.floats(-3, 3), st.floats(-3, 3))
def test_apply_linear(op64, a, b, al, be):
    g = op64.grid
    u, w = g.function(a), g.function(b)
    lhs = apply(op64, al * u + be * w).values
    rhs = al * apply(op64, u).values + be * apply(op64, w).values
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * (1 + np.max(np.abs(lhs))))


@given(vec64, vec64)
def test_bilinear_symmetric_and_pair_form(op64, a, b):
    g = op64.grid
    u, w = g.function(a), g.function(b)
    uw, wu = bilinear(op64, u, w), bilinear(op64, w, u)
    scale = 1 + abs(uw)
    assert abs(uw - wu) <= 1e-12 * scale * 1e2
    assert abs(energy_form(op64, u, w) - uw) <= 1e-10 * (1 + bilinear(op64, u, u) + bilinear(op64, w, w))


def test_apply_zero_and_grid_mismatch(op64):
    assert np.all(apply(op64, op64.grid.zeros()).values == 0)
    with pytest.raises(GridMismatchError):
        apply(op64, Grid(-1.0, 1.0, 63).ones())


@pytest.mark.parametrize("x", [-0.6, 0.0, 0.3, 0.85])
def test_pointwise_quadrature_operator_matches_mpmath(frac_half, x):
    w = lambda y: np.sqrt(np.maximum(1 - y**2, 0.0))
    got = levy_apply_quadrature(frac_half, w, [x], (-1.0, 1.0))[0]
    assert got == pytest.approx(float(oracles.fractional_laplacian_sqrt(x)), abs=1e-9)


def test_consistency_on_closed_form_improves(frac_half):
    errs = []
    for n in (64, 128, 256, 512):
        g = Grid(-1.0, 1.0, n)
        K = assemble(frac_half, g)
        r = K.matrix @ np.sqrt(1 - g.x**2) - 1.0
        errs.append(np.max(np.abs(r[np.abs(g.x) <= 0.8])))
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_energy_of_poisson_solution_tends_to_half_pi(frac_half):
    vals = []
    for n in (64, 256, 512):
        K = assemble(frac_half, Grid(-1.0, 1.0, n))
        v = solve_elliptic(K, zero(), K.grid.ones()).v
        vals.append(bilinear(K, v, v))
    gaps = [abs(x - math.pi / 2) for x in vals]
    assert gaps[0] > gaps[1] > gaps[2] and gaps[2] < 0.01


def test_poincare_constant_half_order(frac_half):
    g = Grid(-1.0, 1.0, 32)
    assert poincare_lower_bound(frac_half, g) == pytest.approx(math.pi / 2, rel=1e-12)
    assert poincare_lower_bound(frac_half.scaled(2.0), g) == pytest.approx(math.pi / 4, rel=1e-12)


def test_poincare_unavailable_for_short_range_kernel():
    with pytest.raises(BoundUnavailable, match="bound unavailable"):
        poincare_lower_bound(kn.indicator(1.0), Grid(-1.0, 1.0, 32))


@given(vec64)
def test_discrete_poincare_inequality(op64, a):
    u = op64.grid.function(a)
    C = poincare_lower_bound(op64.kernel, op64.grid)
    assert inner_l2(u, u) <= C * x_norm(op64, u)**2 * (1 + 1e-8) + 1e-300


def test_normal_derivative(op64, frac_half):
    g = op64.grid
    ys = [-3.0, -1.0, 1.0, 1.2, 40.0]
    assert np.all(nonlocal_normal_derivative(frac_half, g, g.zeros(), ys) == 0)
    u = g.sample(lambda x: 1 - x**2)
    Nu = nonlocal_normal_derivative(frac_half, g, u, ys)
    assert np.all(Nu < 0)
    assert np.allclose(nonlocal_normal_derivative(frac_half, g, 2 * u, ys), 2 * Nu, rtol=1e-15)
    with pytest.raises(KernelDomainError):
        nonlocal_normal_derivative(frac_half, g, u, [0.5])


def bump(c, r):
    def f(x):
        t = (np.asarray(x, dtype=float) - c) / r
        with np.errstate(all="ignore"):
            return np.where(np.abs(t) < 1, np.exp(1 - 1 / np.maximum(1 - t**2, 1e-300)), 0.0)
    return f


def test_gauss_green_identity_for_interior_bumps(op128):
    assert gauss_green_residual(op128, bump(-0.2, 0.5), bump(0.3, 0.6)) <= 1e-12
    assert gauss_green_residual(op128, lambda x: 0 * x, bump(0.3, 0.6)) == 0.0


def test_gauss_green_complement_term_for_wide_test_function(frac_half):
    # psi nonzero outside Omega: exterior pairs and the complement integral of psi * N phi
    phi, psi = bump(0.0, 0.9), bump(0.0, 3.0)
    res = []
    for n in (31, 63):
        K = assemble(frac_half, Grid(-1.0, 1.0, n))
        assert gauss_green_residual(K, phi, psi) <= 1e-10
        res.append(gauss_green_residual(K, phi, psi, operator="quadrature"))
    assert res[1] < res[0] / 1.5


def test_assembly_preconditions(frac_half):
    g = Grid(-1.0, 1.0, 16)
    with pytest.raises(ValueError, match="far_radius"):
        assemble(frac_half, g, QuadratureSpec(far_radius=1.5))
    with pytest.raises(ValueError, match="near_cut"):
        assemble(frac_half, g, QuadratureSpec(near_cut=16))
    hyper = kn.general(lambda r: r**-3.5, singular_exponent=3.5, tail_decay=2.5)
    with pytest.raises(InadmissibleKernelError):
        assemble(hyper, g)


def test_generic_profile_assembly_agrees_with_closed_form():
    C = kn.fractional_constant(1, 0.5)
    g = kn.general(lambda r: C * r**-2.0, singular_exponent=2.0, tail_decay=1.0)
    grid = Grid(-1.0, 1.0, 48)
    A, B = assemble(g, grid).matrix, assemble(kn.fractional(0.5), grid).matrix
    assert np.max(np.abs(A - B)) <= 1e-9 * np.max(np.abs(B))
