"""Picard iteration for the memory problem.

The map  pi(w) = U_T(phi(V(u0 - w)))  chains an elliptic solve, the weight
zeta = phi(v) and a parabolic solve; its fixed point w = u(T) yields the
solution u of the full problem together with v = int_0^T u dt.
"""

from dataclasses import dataclass, field
from functools import cached_property
import math
from typing import Optional

import numpy as np

from .elliptic import EllipticOptions, solve_elliptic
from .errors import PicardNonConvergence, PotentialError
from .grid import GridFunction, l2_norm
from .nonlocal_op import assemble
from .parabolic import solve_parabolic, time_integral
from .potential import kappa, validate_assumption
from .quadrature import QuadratureSpec

BALL_SLACK = 1e-10


@dataclass(frozen=True, eq=False)
class MemoryProblem:
    kernel: object
    grid: object
    potential: object
    u0: GridFunction
    tgrid: object
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    theta: float = 1.0
    operator: Optional[object] = None

    def __post_init__(self):
        if self.u0.grid != self.grid:
            raise ValueError("u0 does not live on the problem grid")
        if not np.all(np.isfinite(self.u0.values)):
            raise ValueError("u0 must be finite")
        R = 10.0 * max(1.0, self.Lam)
        rep = validate_assumption(self.potential, -R, R)
        if not rep.passed:
            raise PotentialError(f"potential {self.potential.name!r} fails the structural "
                                 f"assumption on [{-R:g}, {R:g}]: {rep}")

    @cached_property
    def K(self):
        if self.operator is not None:
            return self.operator
        return assemble(self.kernel, self.grid, self.quad)

    @property
    def Lam(self):
        return float(np.max(np.abs(self.u0.values)))

    @property
    def ball_radius(self):
        return l2_norm(self.u0)


@dataclass(frozen=True)
class PicardOptions:
    tol: float = 1e-10
    max_iters: int = 50
    damping: float = 1.0
    fallback_damping: float = 0.5
    elliptic_tol: float = 1e-10

    def __post_init__(self):
        if not 0 < self.damping <= 1 or not 0 < self.fallback_damping <= 1:
            raise ValueError("damping factors must lie in (0, 1]")
        if not self.tol > 0 or not self.elliptic_tol > 0:
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True)
class PiIterationReport:
    residual_history: tuple        # ||pi(w_k) - w_k|| for k = 0, 1, ...
    contraction_ratios: tuple
    kappa_lambda_T2: float
    converged: bool
    ball_violations: int
    evaluations: int
    damping_used: tuple = ()

    @property
    def iterations(self):
        """Picard updates taken, i.e. residuals that were still above tolerance."""
        return max(len(self.residual_history) - 1, 0)

    @property
    def last_ratio(self):
        return self.contraction_ratios[-1] if self.contraction_ratios else float("nan")


@dataclass(frozen=True)
class ConsistencyReport:
    duhamel_residual: float
    v_vs_integral: float


@dataclass(frozen=True, eq=False)
class MemorySolution:
    trajectory: object
    v: GridFunction
    u_T: GridFunction
    w: GridFunction
    report: PiIterationReport
    consistency: Optional[ConsistencyReport] = None


@dataclass(frozen=True, eq=False)
class PiEvaluation:
    w_next: GridFunction
    v: GridFunction
    traj: object
    elliptic: object


def pi_map(prob, w, elliptic_tol=1e-10):
    r = prob.ball_radius
    if l2_norm(w) > r * (1 + BALL_SLACK) + 1e-300:
        raise ValueError(f"w lies outside the ball G: ||w|| = {l2_norm(w):.6g} > {r:.6g}")
    K = prob.K
    sol = solve_elliptic(K, prob.potential, prob.u0 - w, EllipticOptions(tol=elliptic_tol))
    zeta = prob.potential.phi(sol.v.values)
    traj = solve_parabolic(K, zeta, prob.u0, prob.tgrid, prob.theta)
    return PiEvaluation(w_next=traj.u_T, v=sol.v, traj=traj, elliptic=sol)


def uniqueness_indicator(prob):
    Lam, T = prob.Lam, prob.tgrid.T
    kap = kappa(prob.potential, Lam, T)
    value = kap * Lam * T**2
    return {"kappa": kap, "Lambda": Lam, "value": value, "unique_regime": value < 1}


def consistency_check(sol, prob):
    K = prob.K
    traj = sol.trajectory
    I = time_integral(traj, "right")
    zeta = prob.potential.phi(sol.v.values)
    r = K.matrix @ I.values + zeta * I.values - (prob.u0.values - sol.u_T.values)
    duh = math.sqrt(K.grid.h) * float(np.linalg.norm(r))
    diff = l2_norm(sol.v - I) / max(l2_norm(sol.v), prob.tgrid.dt)
    return ConsistencyReport(duhamel_residual=duh, v_vs_integral=diff)


def solve_memory(prob, opts=None, w0=None):
    opts = opts or PicardOptions()
    grid = prob.grid
    w = grid.zeros() if w0 is None else w0
    radius = prob.ball_radius
    indicator = uniqueness_indicator(prob)["value"]

    alpha = opts.damping
    ev = pi_map(prob, w, opts.elliptic_tol)
    evals = 1
    violations = int(l2_norm(ev.w_next) > radius * (1 + BALL_SLACK))
    res = l2_norm(ev.w_next - w)
    history, ratios, alphas = [res], [], []

    while res > opts.tol:
        if len(history) > opts.max_iters:
            rep = PiIterationReport(tuple(history), tuple(ratios), indicator, False,
                                    violations, evals, tuple(alphas))
            partial = MemorySolution(ev.traj, ev.v, ev.w_next, w, rep)
            raise PicardNonConvergence(
                f"Picard iteration did not reach tol={opts.tol:g} in {opts.max_iters} "
                f"iterations (last residual {res:.3e}, kappa*Lambda*T^2 = {indicator:.4g})",
                report=rep, solution=partial)
        w = (1 - alpha) * w + alpha * ev.w_next
        alphas.append(alpha)
        ev = pi_map(prob, w, opts.elliptic_tol)
        evals += 1
        violations += int(l2_norm(ev.w_next) > radius * (1 + BALL_SLACK))
        new = l2_norm(ev.w_next - w)
        ratios.append(new / res if res > 0 else 0.0)
        if new > res and alpha > opts.fallback_damping:
            alpha = opts.fallback_damping
        res = new
        history.append(res)

    rep = PiIterationReport(tuple(history), tuple(ratios), indicator, True, violations,
                            evals, tuple(alphas))
    sol = MemorySolution(trajectory=ev.traj, v=ev.v, u_T=ev.w_next, w=w, report=rep)
    return MemorySolution(trajectory=ev.traj, v=ev.v, u_T=ev.w_next, w=w, report=rep,
                          consistency=consistency_check(sol, prob))
