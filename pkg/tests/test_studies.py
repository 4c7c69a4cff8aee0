import math

import numpy as np
import pytest

from levymem import kernel as kn
from levymem.grid import Grid, TimeGrid
from levymem.memory_fixed_point import PicardOptions
from levymem.parabolic import heat_mode_oracle
from levymem.potential import quadratic, zero
from levymem.studies import fracpoisson_exact, study_fracpoisson, study_kernel_limit, study_threshold

GRID = Grid(-1.0, 1.0, 127)


def test_exact_solution_centre_value():
    for s in (0.25, 0.5, 0.75):
        assert fracpoisson_exact(0.0, s) * math.gamma(1 + 2 * s) == pytest.approx(1.0)
    assert fracpoisson_exact(1.5, 0.5) == 0


def test_fracpoisson_orders_positive():
    rows = study_fracpoisson((0.25, 0.5, 0.75), (32, 64, 128))
    assert all(np.isfinite(r.err_l2) and np.isfinite(r.err_linf_interior) for r in rows)
    assert all(r.order > 0 for r in rows if r.n != 32)


def test_fracpoisson_single_level_is_finite():
    (row,) = study_fracpoisson((0.5,), (40,))
    assert math.isnan(row.order) and np.isfinite(row.err_l2)


def test_kernel_limit_zero_data():
    rows = study_kernel_limit((0.4, 0.2), Grid(-1.0, 1.0, 63), TimeGrid(0.1, 10), amplitude=0.0)
    assert all(r.err_linf == 0 and r.err_l2 == 0 for r in rows)


def test_heat_oracle_is_initial_state_at_zero():
    u0 = heat_mode_oracle(GRID, 0.0, 0.5, 2.0)
    assert np.array_equal(u0.values, 2.0 * np.sin(np.pi * (GRID.x + 1) / 2))


def test_threshold_row_at_half():
    u0 = GRID.sample(lambda x: np.cos(np.pi * x / 2))
    rows = study_threshold((0.01, 0.5), quadratic(), u0, kn.fractional(0.5), steps=32)
    small, half = rows
    assert half.kLT2 == pytest.approx(0.25, rel=1e-12) and half.converged
    assert half.last_ratio <= 0.9
    assert small.iters <= 4 and small.last_ratio < 1e-3
    assert max(r.duhamel_residual for r in rows) <= 1e-10


def test_threshold_zero_potential_rows():
    u0 = GRID.sample(lambda x: np.cos(np.pi * x / 2))
    rows = study_threshold((0.25, 1.0, 4.0), zero(), u0, kn.fractional(0.5), dt=1 / 16)
    assert all(r.converged and r.iters <= 2 and r.kLT2 == 0 for r in rows)


def test_threshold_records_nonconvergence():
    u0 = GRID.sample(lambda x: np.cos(np.pi * x / 2))
    (row,) = study_threshold((2.0,), quadratic(), u0, kn.fractional(0.5), steps=16,
                             opts=PicardOptions(max_iters=1))
    assert not row.converged and row.iters == 1
