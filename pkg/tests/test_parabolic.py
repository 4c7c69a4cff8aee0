import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from levymem import kernel as kn
from levymem import parabolic as pb
from levymem.errors import SolverError
from levymem.grid import Grid, TimeGrid, l2_norm
from levymem.nonlocal_op import assemble
from levymem.parabolic import (energy_check, heat_mode_oracle, max_principle_check, solve_parabolic, step,
                               telescoping_residual, time_integral)

states = arrays(np.float64, 64, elements=st.floats(-1, 1))
weights = arrays(np.float64, 64, elements=st.floats(0, 20))


def test_step_zero_state(op64):
    assert np.all(step(op64, None, op64.grid.zeros(), 0.1).values == 0)


@given(states)
def test_step_contracts_without_weight(op64, a):
    u = op64.grid.function(a)
    assert l2_norm(step(op64, None, u, 0.05)) <= l2_norm(u) * (1 + 1e-14)


@given(arrays(np.float64, 64, elements=st.floats(0, 1)), weights)
def test_step_preserves_sign(op64, a, z):
    assert np.all(step(op64, z, op64.grid.function(a), 0.2).values >= 0)


def test_step_rejects_bad_inputs(op64):
    u = op64.grid.ones()
    z = np.ones(64)
    z[3] = -1e-3
    with pytest.raises(ValueError, match="nonnegative"):
        step(op64, z, u, 0.1)
    with pytest.raises(ValueError, match="theta"):
        step(op64, None, u, 0.1, theta=0.4)
    with pytest.raises(ValueError):
        step(op64, None, u, 0.0)


def test_linear_solve_failure_is_tagged(op64, monkeypatch):
    def broken(*a, **k):
        raise np.linalg.LinAlgError("not positive definite")
    monkeypatch.setattr(pb, "cho_factor", broken)
    with pytest.raises(SolverError, match=r"^\[parabolic\]"):
        step(op64, None, op64.grid.ones(), 0.1)


def test_zero_initial_state(op64):
    tr = solve_parabolic(op64, np.ones(64), op64.grid.zeros(), TimeGrid(1.0, 10))
    assert not np.any(tr.states)
    assert energy_check(tr).holds and max_principle_check(tr)
    assert not np.any(time_integral(tr).values)


def test_trajectory_keeps_initial_state(op64):
    u0 = op64.grid.sample(np.cos)
    tr = solve_parabolic(op64, None, u0, TimeGrid(0.3, 6))
    assert np.array_equal(tr.u0.values, u0.values)
    assert tr.states.shape == (7, 64)
    assert tr.ledger[0].half_l2_sq == pytest.approx(0.5 * l2_norm(u0)**2, rel=1e-14)


def test_weight_damps_nonnegative_data(op64):
    u0 = op64.grid.sample(lambda x: 1 - x**2)
    tg = TimeGrid(0.5, 20)
    free = solve_parabolic(op64, None, u0, tg)
    damped = solve_parabolic(op64, np.ones(64), u0, tg)
    assert l2_norm(damped.u_T) < l2_norm(free.u_T)
    for a, b in zip(free.ledger, damped.ledger):
        assert b.half_l2_sq <= a.half_l2_sq + 1e-15


@given(states, weights, st.floats(0.01, 2.0), st.integers(1, 30))
def test_energy_inequality(op64, a, z, T, n):
    tr = solve_parabolic(op64, z, op64.grid.function(a), TimeGrid(T, n))
    assert energy_check(tr).holds


@given(states, weights, st.floats(0.01, 2.0), st.integers(1, 30))
def test_maximum_principle(op64, a, z, T, n):
    u0 = op64.grid.function(a)
    tr = solve_parabolic(op64, z, u0, TimeGrid(T, n))
    assert max_principle_check(tr)
    flipped = solve_parabolic(op64, z, -u0, TimeGrid(T, n))
    assert np.array_equal(np.abs(flipped.states), np.abs(tr.states))


@given(states, weights, st.integers(1, 30))
def test_telescoping_identity(op64, a, z, n):
    tr = solve_parabolic(op64, z, op64.grid.function(a), TimeGrid(0.7, n))
    assert telescoping_residual(op64, tr) <= 1e-12 * (1 + np.max(np.abs(op64.matrix)) * 0.7)


def test_energy_check_requires_implicit_euler(op64):
    tr = solve_parabolic(op64, None, op64.grid.ones(), TimeGrid(0.1, 4), theta=0.5)
    with pytest.raises(ValueError):
        energy_check(tr)


def test_time_integral_rules(op64):
    g = op64.grid
    c = g.sample(np.sin)
    tg = TimeGrid(0.8, 4)
    tr = pb.Trajectory(g, tg, np.vstack([g.zeros().values] + [c.values] * 4), np.zeros(64), 1.0, ())
    assert np.allclose(time_integral(tr).values, 0.8 * c.values, rtol=1e-14)
    assert np.allclose(time_integral(tr, "trapezoid").values, 0.7 * c.values, rtol=1e-14)
    with pytest.raises(ValueError):
        time_integral(tr, "simpson")


def test_heat_oracle_at_time_zero():
    g = Grid(-1.0, 1.0, 33)
    assert np.array_equal(heat_mode_oracle(g, 0.0).values, np.sin(math.pi * (g.x + 1) / 2))
    assert heat_mode_oracle(g, 1.0, 1.0).values[16] == pytest.approx(math.exp(-(math.pi / 2)**2))


def test_first_order_in_time():
    g = Grid(-1.0, 1.0, 99)
    K = assemble(kn.rescale(kn.fractional(0.5), 0.1), g)
    u0 = heat_mode_oracle(g, 0.0)
    ref = solve_parabolic(K, None, u0, TimeGrid(0.1, 1280), theta=0.5).u_T
    errs = [l2_norm(solve_parabolic(K, None, u0, TimeGrid(0.1, n)).u_T - ref) for n in (10, 20, 40)]
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 0.8
