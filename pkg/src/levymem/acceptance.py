"""Acceptance criteria as plain functions; shared by ``levymem --check`` and the test suite."""

from dataclasses import dataclass
from functools import lru_cache
import math
import os
import tempfile
import time

import numpy as np

from . import kernel as kn
from .elliptic import solve_elliptic, stability_gap
from .grid import Grid, TimeGrid, l2_norm
from .memory_fixed_point import MemoryProblem, PicardOptions, solve_memory, uniqueness_indicator
from .nonlocal_op import assemble, gauss_green_residual, levy_apply_quadrature, poincare_lower_bound
from .parabolic import energy_check, max_principle_check, solve_parabolic
from .potential import quadratic, zero
from .quadrature import QuadratureSpec
from .studies import study_fracpoisson, study_kernel_limit


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'} [{self.number:2d}] {self.name}: {self.detail}"


def bump(centre, radius, height=1.0):
    """C-infinity bump supported on (centre - radius, centre + radius)."""
    def f(x):
        t = (np.asarray(x, dtype=float) - centre) / radius
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            return np.where(np.abs(t) < 1, height * np.exp(1 - 1 / np.maximum(1 - t**2, 1e-300)), 0.0)
    return f


def sine_mode(grid):
    return grid.sample(lambda x: np.sin(np.pi * (x - grid.a) / (grid.b - grid.a)))


@lru_cache(maxsize=None)
def _operator(s, n):
    return assemble(kn.fractional(s), Grid(-1.0, 1.0, n))


def _unit(rng, grid, smooth=False):
    """Random unit-norm forcing: white noise, or a random mix of the eight lowest sine modes."""
    if smooth:
        t = (grid.x - grid.a) / (grid.b - grid.a)
        vals = sum(rng.standard_normal() * np.sin((k + 1) * np.pi * t) for k in range(8))
        f = grid.function(vals)
    else:
        f = grid.function(rng.standard_normal(grid.n))
    return f / l2_norm(f)


# -- 1 ------------------------------------------------------------------------

def fracpoisson_benchmark():
    t0 = time.perf_counter()
    rows = study_fracpoisson([0.5], [64, 128, 256, 512])
    errs = [r.err_l2 for r in rows]
    orders = [r.order for r in rows[1:]]
    centre = rows[-1].center_value
    # independent check of the oracle: L applied to sqrt(1 - x^2) by adaptive quadrature is 1
    k = kn.fractional(0.5)
    probe = np.array([-0.6, -0.25, 0.0, 0.3, 0.7])
    Lv = levy_apply_quadrature(k, lambda x: np.sqrt(np.maximum(1 - x**2, 0.0)), probe, (-1.0, 1.0))
    oracle_err = float(np.max(np.abs(Lv - 1.0)))
    elapsed = time.perf_counter() - t0
    ok = (abs(centre - 1) <= 0.02 and all(b < a for a, b in zip(errs, errs[1:]))
          and min(orders) >= 0.4 and oracle_err <= 1e-6 and elapsed <= 10.0)
    return CriterionResult(1, "fractional-Poisson benchmark", ok,
                           f"|v(0)-1|={abs(centre - 1):.2e} (<=0.02), L2 errors "
                           f"{', '.join(f'{e:.2e}' for e in errs)}, orders "
                           f"{', '.join(f'{o:.2f}' for o in orders)} (>=0.4), "
                           f"oracle check {oracle_err:.1e}, {elapsed:.1f}s (<=10s)")


# -- 2, 3 -----------------------------------------------------------------------

def elliptic_estimate_ii(count=50, n=128, seed=2):
    K = _operator(0.5, n)
    p = quadratic()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(count):
        sol = solve_elliptic(K, p, _unit(rng, K.grid, smooth=i % 2 == 0))
        worst = max(worst, sol.estimates.e2)
    return CriterionResult(2, "elliptic estimate (ii)", worst <= 1 + 1e-8,
                           f"max ||chi(v)|| = {worst:.6f} over {count} unit-norm f, half smooth (<= 1 + 1e-8)")


def stability_identity(count=20, n=128, seed=3):
    K = _operator(0.5, n)
    p = quadratic()
    C = poincare_lower_bound(K.kernel, K.grid)
    rng = np.random.default_rng(seed)
    worst, mono, bounds = 0.0, math.inf, True
    for _ in range(count):
        f1, f2 = _unit(rng, K.grid, smooth=True), _unit(rng, K.grid)
        rep = stability_gap(solve_elliptic(K, p, f1), solve_elliptic(K, p, f2), f1, f2, C)
        worst = max(worst, rep.identity_residual)
        mono = min(mono, rep.monotone_term)
        bounds &= rep.dual_bound_holds and rep.l2_bound_holds
    ok = worst <= 1e-9 and mono >= -1e-12 and bounds
    return CriterionResult(3, "stability identity", ok,
                           f"max identity residual {worst:.2e} (<=1e-9), min monotone term "
                           f"{mono:.2e} (>=-1e-12), difference bounds {'hold' if bounds else 'FAIL'}")


# -- 4, 5, 7 share trajectories -------------------------------------------------

@lru_cache(maxsize=None)
def _random_parabolic_runs(count=50, n=64, seed=5):
    K = _operator(0.5, n)
    rng = np.random.default_rng(seed)
    runs = []
    for _ in range(count):
        u0 = K.grid.function(rng.uniform(-1, 1, n))
        u0 = u0 / max(1.0, float(np.max(np.abs(u0.values))))
        zeta = rng.uniform(0, 5, n) * (rng.random() < 0.8)
        T = float(rng.uniform(0.05, 1.0))
        runs.append(solve_parabolic(K, zeta, u0, TimeGrid(T, int(rng.integers(5, 40)))))
    return tuple(runs)


KERNEL_LIMIT = dict(eps_list=(0.4, 0.2, 0.1), n=399, T=0.1, steps=200, diffusivity=0.5)


@lru_cache(maxsize=None)
def _kernel_limit_runs():
    c = KERNEL_LIMIT
    grid = Grid(-1.0, 1.0, c["n"])
    tgrid = TimeGrid(c["T"], c["steps"])
    rows = study_kernel_limit(c["eps_list"], grid, tgrid, diffusivity=c["diffusivity"])
    trajs = tuple(solve_parabolic(assemble(kn.rescale(kn.fractional(0.5), e), grid), None,
                                  sine_mode(grid), tgrid) for e in c["eps_list"])
    return tuple(rows), trajs


MEMORY = dict(n=127, T=0.5, steps=64, tol=1e-10, max_iters=50)


@lru_cache(maxsize=None)
def _memory_problem(potential="quadratic"):
    c = MEMORY
    K = _operator(0.5, c["n"])
    p = quadratic(1.0) if potential == "quadratic" else zero()
    return MemoryProblem(K.kernel, K.grid, p, sine_mode(K.grid), TimeGrid(c["T"], c["steps"]),
                         operator=K)


@lru_cache(maxsize=None)
def _memory_solutions():
    prob = _memory_problem()
    opts = PicardOptions(tol=MEMORY["tol"], max_iters=MEMORY["max_iters"])
    return solve_memory(prob, opts), solve_memory(prob, opts, w0=prob.u0)


def energy_estimate():
    trajs = list(_random_parabolic_runs()) + list(_kernel_limit_runs()[1])
    trajs += [s.trajectory for s in _memory_solutions()]
    worst = max(energy_check(t).max_violation for t in trajs)
    ok = all(energy_check(t).holds for t in trajs)
    return CriterionResult(4, "energy estimate", ok,
                           f"{len(trajs)} theta=1 runs, max relative excess {worst:.2e} (<=1e-12)")


def maximum_principle():
    runs = _random_parabolic_runs()
    worst = max(float(np.max(np.abs(t.states))) / max(float(np.max(np.abs(t.states[0]))), 1e-300)
                for t in runs)
    ok = all(max_principle_check(t) for t in runs)
    return CriterionResult(5, "maximum principle", ok,
                           f"{len(runs)} random (u0, zeta>=0) runs, max_n ||u^n||_inf / ||u0||_inf "
                           f"= {worst:.15f} (<= 1 + 1e-12)")


def kernel_limit():
    rows, _ = _kernel_limit_runs()
    errs = [r.err_linf for r in rows]
    ok = all(b < a for a, b in zip(errs, errs[1:]))
    return CriterionResult(7, "kernel limit", ok,
                           "sup errors " + ", ".join(f"eps={r.eps:g}: {r.err_linf:.4f}" for r in rows)
                           + " (strictly decreasing)")


# -- 6 ------------------------------------------------------------------------

def fixed_point_regime():
    prob = _memory_problem()
    ind = uniqueness_indicator(prob)
    a, b = _memory_solutions()
    rep = a.report
    ratios_ok = all(r <= 0.9 for r in rep.contraction_ratios + b.report.contraction_ratios)
    agree = float(np.max(np.abs(a.u_T.values - b.u_T.values)))
    duh = a.consistency.duhamel_residual
    ok = (abs(ind["value"] - 0.25) <= 1e-12 and rep.converged and b.report.converged
          and rep.iterations <= MEMORY["max_iters"] and ratios_ok and duh <= 1e-9 and agree <= 1e-8
          and rep.ball_violations == 0)
    return CriterionResult(6, "fixed-point regime", ok,
                           f"kappa*Lambda*T^2={ind['value']:.4g}, {rep.iterations} iterations, "
                           f"max ratio {max(rep.contraction_ratios):.3f} (<=0.9), duhamel {duh:.1e} "
                           f"(<=1e-9), starts 0/u0 agree to {agree:.1e} (<=1e-8)")


# -- 8 ------------------------------------------------------------------------

GG_LEVELS = (31, 63, 127, 255)


def poly_bump(x):
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) < 1, (1 - x**2)**4, 0.0)


def gauss_green():
    K = _operator(0.5, 127)
    phi, psi = bump(0.0, 0.9), bump(0.1, 0.7)
    ident = max(gauss_green_residual(K, phi, psi), gauss_green_residual(K, poly_bump, poly_bump),
                gauss_green_residual(K, bump(-0.3, 0.5), bump(0.4, 0.5)))
    factors = {}
    for label, (f, g) in (("poly", (poly_bump, poly_bump)), ("shifted", (phi, psi))):
        res = [gauss_green_residual(_operator(0.5, n), f, g, operator="quadrature") for n in GG_LEVELS]
        factors[label] = [a / b for a, b in zip(res, res[1:])]
    ok = ident <= 1e-12 and min(min(v) for v in factors.values()) >= 1.5
    return CriterionResult(8, "Gauss-Green", ok,
                           f"identity residual {ident:.1e} (<=1e-12), refinement factors "
                           + "; ".join(f"{k} " + ", ".join(f"{x:.2f}" for x in v)
                                       for k, v in factors.items()) + " (>=1.5)")


# -- 9 ------------------------------------------------------------------------

DECOUPLING_YAML = """\
domain: {a: -1.0, b: 1.0, n: 64}
time: {T: 0.5, steps: 32}
kernel: {family: fractional, s: 0.5}
potential: {profile: %s, c: 1.0}
initial: {profile: sine, amplitude: 1.0}
weight: {profile: zero, amplitude: 0.0}
"""


def decoupling():
    from .cli import main

    with tempfile.TemporaryDirectory() as tmp:
        cfg = os.path.join(tmp, "zero.yaml")
        with open(cfg, "w") as fh:
            fh.write(DECOUPLING_YAML % "zero")
        pdir, mdir = os.path.join(tmp, "para"), os.path.join(tmp, "mem")
        codes = (main(["solve-parabolic", "--config", cfg, "--out", pdir]),
                 main(["solve-memory", "--config", cfg, "--out", mdir]))
        with open(os.path.join(pdir, "trajectory.csv"), "rb") as fh:
            a = fh.read()
        with open(os.path.join(mdir, "trajectory.csv"), "rb") as fh:
            b = fh.read()
        with open(os.path.join(mdir, "report.txt")) as fh:
            report = dict(line.strip().split(" = ", 1) for line in fh if " = " in line)
    iters = int(report["iterations"])
    ok = codes == (0, 0) and a == b and iters == 1
    return CriterionResult(9, "zero-potential decoupling", ok,
                           f"exit codes {codes}, trajectory.csv identical: {a == b}, "
                           f"effective iterations {iters} (==1)")


# -- 10 -----------------------------------------------------------------------

def rescaled_mass():
    quad = QuadratureSpec()
    errs = {}
    for name, base in (("fractional(0.5)", kn.fractional(0.5)), ("fractional(0.25)", kn.fractional(0.25)),
                       ("tempered(0.5,1)", kn.tempered(0.5, 1.0))):
        for eps in (1.0, 0.5, 0.1):
            errs[(name, eps)] = abs(kn.levy_mass(kn.rescale(base, eps, quad), quad) - 1.0)
    worst = max(errs.values())
    return CriterionResult(10, "rescaled-kernel mass", worst <= 1e-6,
                           f"max |mass - 1/N| = {worst:.1e} over {len(errs)} (kernel, eps) pairs (<=1e-6)")


CRITERIA = (fracpoisson_benchmark, elliptic_estimate_ii, stability_identity, energy_estimate,
            maximum_principle, fixed_point_regime, kernel_limit, gauss_green, decoupling,
            rescaled_mass)


def run_all():
    return [c() for c in CRITERIA]
