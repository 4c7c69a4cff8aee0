"""The three shipped studies: fractional-Poisson convergence, kernel limit, uniqueness threshold."""

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import gamma

from . import kernel as kn
from .elliptic import EllipticOptions, solve_elliptic
from .errors import PicardNonConvergence
from .grid import Grid, TimeGrid, l2_norm
from .memory_fixed_point import MemoryProblem, consistency_check, solve_memory, uniqueness_indicator
from .nonlocal_op import assemble
from .parabolic import heat_mode_oracle, solve_parabolic
from .potential import zero
from .quadrature import QuadratureSpec


def fracpoisson_exact(x, s, a=-1.0, b=1.0):
    """Solution of (-Delta)^s v = 1 on (a, b), v = 0 outside: (rho^2 - (x - c)^2)_+^s / Gamma(1 + 2s)."""
    c, rho = 0.5 * (a + b), 0.5 * (b - a)
    y = np.asarray(x, dtype=float) - c
    return np.maximum(rho**2 - y**2, 0.0)**s / gamma(1 + 2 * s)


@dataclass(frozen=True)
class FracPoissonRow:
    s: float
    n: int
    err_l2: float
    err_linf_interior: float
    order: float
    center_value: float   # interpolated discrete v at the midpoint, scaled so the exact value is 1


FRACPOISSON_HEADER = ("s", "n", "err_l2", "err_linf_interior", "order")


def study_fracpoisson(s_list, n_list, a=-1.0, b=1.0, quad=None, interior=0.8):
    """phi = 0, f = 1.  ``interior`` is the fraction of the half-width used for the sup error."""
    quad = quad or QuadratureSpec()
    rows = []
    for s in s_list:
        prev = None
        for n in n_list:
            g = Grid(a, b, n)
            K = assemble(kn.fractional(s), g, quad)
            sol = solve_elliptic(K, zero(), g.ones(), EllipticOptions(validate=False))
            exact = fracpoisson_exact(g.x, s, a, b)
            err = sol.v - exact
            c, rho = 0.5 * (a + b), 0.5 * (b - a)
            mask = np.abs(g.x - c) <= interior * rho
            e2 = l2_norm(err)
            einf = float(np.max(np.abs(err.values[mask])))
            order = math.log(prev[1] / e2) / math.log(prev[0] / g.h) if prev else float("nan")
            centre = float(sol.v.at(c)) * gamma(1 + 2 * s) / rho**(2 * s)
            rows.append(FracPoissonRow(s, n, e2, einf, order, centre))
            prev = (g.h, e2)
    return rows


@dataclass(frozen=True)
class KernelLimitRow:
    eps: float
    err_linf: float
    err_l2: float


KERNEL_LIMIT_HEADER = ("eps", "err_linf", "err_l2")


def study_kernel_limit(eps_list, grid, tgrid, base=None, quad=None, diffusivity=0.5,
                       amplitude=1.0, theta=1.0):
    """Nonlocal heat flow with nu_eps against the local flow u_t = D u'' for the first sine mode.

    A kernel normalised to mass 1/N rescales to an operator whose limit is
    -(1/2) Delta in 1-D (second moment of the normalised kernel), hence D = 1/2
    by default.
    """
    quad = quad or QuadratureSpec()
    base = base or kn.fractional(0.5)
    u0 = heat_mode_oracle(grid, 0.0, diffusivity, amplitude)
    oracle = heat_mode_oracle(grid, tgrid.T, diffusivity, amplitude)
    rows = []
    for eps in eps_list:
        K = assemble(kn.rescale(base, eps, quad), grid, quad)
        traj = solve_parabolic(K, None, u0, tgrid, theta)
        err = traj.u_T - oracle
        rows.append(KernelLimitRow(eps, float(np.max(np.abs(err.values))), l2_norm(err)))
    return rows


@dataclass(frozen=True)
class ThresholdRow:
    T: float
    kappa: float
    kLT2: float
    converged: bool
    iters: int
    last_ratio: float
    duhamel_residual: float


THRESHOLD_HEADER = ("T", "kappa", "kLT2", "converged", "iters", "last_ratio", "duhamel_residual")


def study_threshold(T_list, potential, u0, kernel, quad=None, dt=None, steps=64, opts=None):
    """solve_memory for each horizon T; non-convergent rows are recorded, not raised.

    With ``dt`` given the step count scales with T, otherwise every run uses ``steps``.
    """
    quad = quad or QuadratureSpec()
    grid = u0.grid
    K = assemble(kernel, grid, quad)
    rows = []
    for T in T_list:
        nsteps = max(1, int(round(T / dt))) if dt else steps
        prob = MemoryProblem(kernel, grid, potential, u0, TimeGrid(T, nsteps), quad, operator=K)
        ind = uniqueness_indicator(prob)
        try:
            sol = solve_memory(prob, opts)
            rep, cons, ok = sol.report, sol.consistency, True
        except PicardNonConvergence as exc:
            rep, ok = exc.report, False
            cons = consistency_check(exc.solution, prob)
        rows.append(ThresholdRow(T, ind["kappa"], ind["value"], ok, rep.iterations,
                                 rep.last_ratio, cons.duhamel_residual))
    return rows
