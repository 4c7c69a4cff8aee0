"""Weighted linear nonlocal heat flow u_t + L u + zeta u = 0 by the theta-scheme.

With A = K + diag(zeta) every step solves

    (I + theta dt A) u^{n+1} = (I - (1 - theta) dt A) u^n.

For theta = 1 the system matrix is an SPD M-matrix, which makes the energy
inequality and the maximum principle exact discrete statements.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import SolverError
from .grid import GridFunction


def _zeta_values(K, zeta):
    if zeta is None:
        return np.zeros(K.n)
    if isinstance(zeta, GridFunction):
        K._check(zeta)
        z = np.asarray(zeta.values, dtype=float)
    else:
        z = np.broadcast_to(np.asarray(zeta, dtype=float), (K.n,)).copy()
    if np.any(z < 0) or not np.all(np.isfinite(z)):
        raise ValueError("weight zeta must be finite and nonnegative at every node")
    return z


def _check_theta(theta):
    if not 0.5 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0.5, 1], got {theta}")


class _Stepper:
    """Factor once, step many times."""

    def __init__(self, K, z, dt, theta):
        if not dt > 0:
            raise ValueError(f"time step must be positive, got {dt}")
        _check_theta(theta)
        n = K.n
        self.A = K.matrix + np.diag(z)
        self.theta = theta
        self.dt = dt
        lhs = np.eye(n) + theta * dt * self.A
        self.explicit = None if theta == 1.0 else np.eye(n) - (1 - theta) * dt * self.A
        try:
            self.factor = cho_factor(lhs)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"step matrix is not positive definite: {exc}", stage="parabolic") from exc

    def __call__(self, u):
        rhs = u if self.explicit is None else self.explicit @ u
        out = cho_solve(self.factor, rhs)
        if not np.all(np.isfinite(out)):
            raise SolverError("non-finite state after linear solve", stage="parabolic")
        return out


def step(K, zeta, u_n, dt, theta=1.0):
    K._check(u_n)
    z = _zeta_values(K, zeta)
    return GridFunction(K.grid, _Stepper(K, z, dt, theta)(u_n.values))


@dataclass(frozen=True)
class LedgerRow:
    n: int
    half_l2_sq: float
    diss_xi: float     # sum_{1<=m<=n} dt xi_h(u^m, u^m)
    diss_zeta: float   # sum_{1<=m<=n} dt (zeta, (u^m)^2)_h


@dataclass(frozen=True, eq=False)
class Trajectory:
    grid: object
    tgrid: object
    states: np.ndarray   # (steps + 1, n)
    zeta: np.ndarray
    theta: float
    ledger: tuple

    def state(self, k):
        return GridFunction(self.grid, self.states[k])

    @property
    def u0(self):
        return self.state(0)

    @property
    def u_T(self):
        return self.state(-1)


def solve_parabolic(K, zeta, u0, tgrid, theta=1.0):
    K._check(u0)
    z = _zeta_values(K, zeta)
    stepper = _Stepper(K, z, tgrid.dt, theta)
    h, dt = K.grid.h, tgrid.dt
    states = np.empty((tgrid.steps + 1, K.n))
    states[0] = u0.values
    ledger = [LedgerRow(0, 0.5 * h * float(states[0] @ states[0]), 0.0, 0.0)]
    dxi = dz = 0.0
    for k in range(tgrid.steps):
        u = stepper(states[k])
        states[k + 1] = u
        dxi += dt * h * float(u @ (K.matrix @ u))
        dz += dt * h * float(z @ (u * u))
        ledger.append(LedgerRow(k + 1, 0.5 * h * float(u @ u), dxi, dz))
    states.flags.writeable = False
    z.flags.writeable = False
    return Trajectory(grid=K.grid, tgrid=tgrid, states=states, zeta=z, theta=theta,
                      ledger=tuple(ledger))


@dataclass(frozen=True)
class EnergyReport:
    lhs: tuple
    rhs: float
    max_violation: float   # max(lhs - rhs) / max(rhs, tiny)
    holds: bool


def energy_check(traj, zeta=None, rtol=1e-12):
    """1/2 ||u^n||^2 + dissipation up to n <= 1/2 ||u^0||^2 at every step."""
    if traj.theta != 1.0:
        raise ValueError("the discrete energy inequality is exact only for theta = 1")
    if zeta is not None and not np.array_equal(np.asarray(zeta, dtype=float), traj.zeta):
        raise ValueError("zeta does not match the weight used for the trajectory")
    rhs = traj.ledger[0].half_l2_sq
    lhs = tuple(r.half_l2_sq + r.diss_xi + r.diss_zeta for r in traj.ledger)
    excess = max(l - rhs for l in lhs)
    scale = rhs if rhs > 0 else 1.0
    return EnergyReport(lhs=lhs, rhs=rhs, max_violation=excess / scale,
                        holds=excess <= rtol * (2 * rhs) + 0.0)


def max_principle_check(traj, Lam=None, rtol=1e-12):
    if Lam is None:
        Lam = float(np.max(np.abs(traj.states[0])))
    return bool(np.max(np.abs(traj.states)) <= Lam * (1 + rtol))


def time_integral(traj, rule="right"):
    """I(u) = dt sum_{n>=1} u^n (right rectangle, scheme-exact) or the trapezoid rule."""
    dt = traj.tgrid.dt
    if rule == "right":
        vals = dt * np.sum(traj.states[1:], axis=0)
    elif rule == "trapezoid":
        vals = dt * (np.sum(traj.states[1:-1], axis=0) + 0.5 * (traj.states[0] + traj.states[-1]))
    else:
        raise ValueError(f"unknown time quadrature rule {rule!r}")
    return GridFunction(traj.grid, vals)


def telescoping_residual(K, traj):
    """max |(u^N - u^0) + (K + diag zeta) I(u)| for the right-rectangle integral (theta = 1)."""
    I = time_integral(traj, "right").values
    r = traj.states[-1] - traj.states[0] + K.matrix @ I + traj.zeta * I
    return float(np.max(np.abs(r))) if r.size else 0.0


def heat_mode_oracle(grid, T, diffusivity=0.5, amplitude=1.0):
    """Exact local heat flow -D u'' for the first Dirichlet sine mode on (a, b)."""
    L = grid.b - grid.a
    lam = (math.pi / L)**2
    return GridFunction(grid, amplitude * math.exp(-diffusivity * lam * T)
                        * np.sin(math.pi * (grid.x - grid.a) / L))
