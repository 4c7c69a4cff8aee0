"""Discrete Levy operator on a 1-D grid with zero complement data.

For a node x_i the operator is written as

    L u(x_i) = int_0^inf (2 u_i - u(x_i + z) - u(x_i - z)) nu(z) dz.

The part z < r = near_cut * h is replaced by the second difference times
c = int_0^r z^2 nu(z) dz (the odd Taylor term cancels by symmetry).  For
z >= r the zero-extended function is replaced by its piecewise-linear
interpolant on the infinite lattice, so the weights are exact hat-function
moments of the kernel.  Lattice points outside the domain carry u = 0 and
their weights collapse into the diagonal complement term ``tail``.  The
resulting matrix is symmetric Toeplitz-plus-diagonal with nonpositive
off-diagonals and ``K_ii = sum_j |K_ij| + tail_i``.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import integrate
from scipy.linalg import toeplitz

from .errors import BoundUnavailable, GridMismatchError, InadmissibleKernelError, KernelDomainError
from .grid import GridFunction
from .kernel import check_levy_admissible, sphere_area
from .quadrature import QuadratureSpec

__all__ = [
    "QuadratureSpec", "OperatorMatrix", "assemble", "apply", "bilinear",
    "energy_form", "x_norm", "dual_norm", "poincare_lower_bound", "nonlocal_normal_derivative", "levy_apply_quadrature",
    "gauss_green_residual",
]


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Assembled operator. ``matrix`` acts on interior nodal values.

    tail: diagonal contribution of the zero complement actually used by the scheme.
    complement: exact ``int_{R minus Omega} nu(x_i - y) dy`` per node (diagnostic).
    near_weight: c / h^2, the second-difference weight of the punched-out cell.
    """

    grid: object
    kernel: object
    quad: QuadratureSpec
    matrix: np.ndarray
    tail: np.ndarray
    complement: np.ndarray
    near_weight: float

    @property
    def n(self):
        return self.grid.n

    @property
    def full(self):
        """Operator without the complement term: annihilates globally constant vectors."""
        return self.matrix - np.diag(self.tail)

    def _check(self, u):
        if u.grid != self.grid:
            raise GridMismatchError("grid function does not live on the operator's grid")


def assemble(kernel, grid, quad=None):
    quad = quad or QuadratureSpec()
    if kernel.N != 1:
        raise ValueError("operator assembly is implemented for N = 1 only")
    if quad.far_radius <= grid.diameter:
        raise ValueError(f"far_radius={quad.far_radius} must exceed diam(Omega)={grid.diameter}")
    report = check_levy_admissible(kernel, quad)
    if not report.admissible:
        raise InadmissibleKernelError(f"kernel {kernel.name!r} is not admissible: {report}")
    n, h, nc = grid.n, grid.h, quad.near_cut
    if nc >= n:
        raise ValueError(f"near_cut={nc} must be smaller than the node count {n}")
    r = nc * h

    c = float(kernel.moment(2, 0.0, r, quad)[0])
    if not np.isfinite(c):
        raise InadmissibleKernelError("second moment of the kernel diverges near the origin")
    near = c / h**2

    # cell j = [j h, (j+1) h] clipped below at r, for j = 0..n-1
    j = np.arange(n)
    lo = np.maximum(j * h, r)
    hi = (j + 1) * h
    live = hi > lo
    M0 = np.zeros(n)
    M1 = np.zeros(n)
    M0[live] = kernel.moment(0, lo[live], hi[live], quad)
    M1[live] = kernel.moment(1, lo[live], hi[live], quad)
    if not (np.all(np.isfinite(M0)) and np.all(np.isfinite(M1))):
        raise InadmissibleKernelError("kernel moments are not finite on the grid cells")

    # rising half of the hat at m h lives on cell m-1, falling half on cell m
    rising = np.zeros(n + 1)
    rising[1:] = (M1 - j * h * M0) / h
    falling = ((j + 1) * h * M0 - M1) / h  # indexed by the hat's centre cell m -> cell m

    m = np.arange(1, n)
    omega = np.where(m >= nc, rising[m] + falling[m], 0.0)
    omega = np.maximum(omega, 0.0)

    col = np.zeros(n)
    col[1:] = -omega
    col[1] -= near
    K = toeplitz(col)

    # exterior lattice offsets m >= m0 on one side of node i
    tail_far = float(kernel.tail_mass(n * h, quad)[0])
    suffix = np.concatenate([np.cumsum(M0[::-1])[::-1], [0.0]])

    def exterior(m0):
        M = np.maximum(m0, nc)
        return tail_far + suffix[M] + rising[M] + np.where(m0 == 1, near, 0.0)

    i = np.arange(1, n + 1)
    tail = exterior(i) + exterior(n + 1 - i)
    off = np.sum(np.abs(K), axis=1)
    K[np.diag_indices(n)] = off + tail

    x = grid.x
    complement = kernel.tail_mass(x - grid.a, quad) + kernel.tail_mass(grid.b - x, quad)
    K.flags.writeable = False
    tail.flags.writeable = False
    return OperatorMatrix(grid=grid, kernel=kernel, quad=quad, matrix=K, tail=tail,
                          complement=complement, near_weight=near)


def apply(K, u):
    K._check(u)
    return GridFunction(K.grid, K.matrix @ u.values)


def bilinear(K, u, w):
    """xi_h(u, w) = h w^T K u."""
    K._check(u)
    K._check(w)
    return float(K.grid.h * (w.values @ (K.matrix @ u.values)))


def energy_form(K, u, w):
    """Pair form of xi_h: h [1/2 sum_{i != j} |K_ij| (u_i - u_j)(w_i - w_j) + sum_i tail_i u_i w_i].

    Interior pairs carry the lattice weights, pairs with an exterior partner
    (where the zero extension vanishes) collapse into ``tail``.  Equal to
    ``bilinear`` because K_ii = sum_j |K_ij| + tail_i.
    """
    K._check(u)
    K._check(w)
    W = -K.matrix.copy()
    np.fill_diagonal(W, 0.0)
    du = u.values[:, None] - u.values[None, :]
    dw = w.values[:, None] - w.values[None, :]
    pairs = 0.5 * float(np.sum(W * du * dw))
    return float(K.grid.h * (pairs + float(np.sum(K.tail * u.values * w.values))))


def x_norm(K, u):
    """Discrete energy norm, ||u||_X^2 = 2 xi_h(u, u)."""
    return math.sqrt(max(2.0 * bilinear(K, u, u), 0.0))


def dual_norm(K, g):
    """sup_w (g, w)_h / ||w||_X over grid functions w."""
    K._check(g)
    y = np.linalg.solve(K.matrix, g.values)
    return math.sqrt(max(0.5 * K.grid.h * float(g.values @ y), 0.0))


def poincare_lower_bound(kernel, grid, quad=None):
    """C = (2 ||nu_R||_L1)^-1 with R = diam(Omega), so that ||u||^2 <= C ||u||_X^2."""
    quad = quad or QuadratureSpec()
    R = grid.diameter
    if kernel.N == 1:
        mass = 2.0 * float(kernel.tail_mass(R, quad)[0])
    else:
        from .quadrature import integrate_to_infinity
        mass = sphere_area(kernel.N) * integrate_to_infinity(
            kernel.radial, kernel.N - 1, R, quad, kernel.tail_decay, N=kernel.N,
            breakpoints=kernel.breakpoints)
    if not mass > 0:
        raise BoundUnavailable(
            f"bound unavailable: kernel {kernel.name!r} has no mass beyond diam(Omega)={R}")
    return 1.0 / (2.0 * mass)


def nonlocal_normal_derivative(kernel, grid, u, y):
    """N u(y) = int_Omega (u(y) - u(x)) nu(y - x) dx for y outside Omega (u(y) = 0)."""
    if u.grid != grid:
        raise GridMismatchError("grid function does not live on the given grid")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(grid.contains(y)):
        raise KernelDomainError("nonlocal normal derivative is defined only outside Omega")
    nu = kernel.signed(y[:, None] - grid.x[None, :])
    return -grid.h * (nu @ u.values)


def levy_apply_quadrature(kernel, func, x, support, quad=None, delta=1e-3):
    """Pointwise L w(x) for a closed-form w vanishing outside ``support`` = (a, b).

    Adaptive quadrature on [delta, Z] and a quadratic fit of the even
    second-difference quotient on (0, delta]; beyond Z = max distance to the
    support edges only the 2 w(x) nu(z) part survives and is integrated exactly.
    ``w`` must be smooth in a neighbourhood of each evaluation point.
    """
    quad = quad or QuadratureSpec()
    a, b = support

    def w(y):
        y = np.asarray(y, dtype=float)
        inside = (y > a) & (y < b)
        return np.where(inside, func(np.clip(y, a, b)), 0.0)

    out = []
    for xi in np.atleast_1d(np.asarray(x, dtype=float)):
        w0 = float(w(xi))
        Z = max(b - xi, xi - a)
        d = min(delta, 0.1 * min(b - xi, xi - a)) if a < xi < b else delta

        def quotient(z):
            return (2.0 * w0 - w(xi + z) - w(xi - z)) / z**2

        q1, q2 = float(quotient(d)), float(quotient(d / 2))
        D2 = (q1 - q2) / (d**2 - d**2 / 4)
        D0 = q1 - D2 * d**2
        val = D0 * kernel.moment(2, 0.0, d, quad)[0] + D2 * kernel.moment(4, 0.0, d, quad)[0]

        def integrand(z):
            return float((2.0 * w0 - w(xi + z) - w(xi - z)) * kernel.radial(np.array([z]))[0])

        kinks = sorted({p for p in (b - xi, xi - a, *kernel.breakpoints) if d < p < Z})
        edges = [d, *kinks, Z]
        for lo, hi in zip(edges[:-1], edges[1:]):
            piece, _ = integrate.quad(integrand, lo, hi, limit=400, epsabs=1e-14, epsrel=1e-12)
            val += piece
        val += 2.0 * w0 * float(kernel.tail_mass(Z, quad)[0])
        out.append(val)
    return np.array(out)


def _vanishes_outside(grid, psi, L):
    probe = np.concatenate([np.linspace(grid.a - L, grid.a, 2001)[:-1],
                            np.linspace(grid.b, grid.b + L, 2001)[1:]])
    return not np.any(psi(probe) != 0)


def _complement_term(kernel, grid, phi_h, psi, quad):
    """int_{R minus Omega} psi(y) N phi(y) dy (y-outer integration)."""
    L = quad.far_radius

    def integrand(y):
        return float(psi(y) * nonlocal_normal_derivative(kernel, grid, phi_h, [y])[0])

    left, _ = integrate.quad(integrand, grid.a - L, grid.a, limit=400)
    right, _ = integrate.quad(integrand, grid.b, grid.b + L, limit=400)
    return left + right


def _exterior_pairs(kernel, grid, phi_h, psi, quad):
    """Pairs (x in Omega, y outside) of the form that involve psi(y): -h sum_i phi_i int psi(y) nu(x_i - y) dy.

    Integrated node by node (x-outer), the opposite order to ``_complement_term``.
    """
    L = quad.far_radius
    total = 0.0
    for xi, p in zip(grid.x, phi_h.values):
        if p == 0:
            continue

        def integrand(y, xi=xi):
            return float(psi(y) * kernel.signed(np.array([xi - y]))[0])

        left, _ = integrate.quad(integrand, grid.a - L, grid.a, limit=400)
        right, _ = integrate.quad(integrand, grid.b, grid.b + L, limit=400)
        total -= grid.h * p * (left + right)
    return total


def gauss_green_residual(K, phi, psi, operator="discrete"):
    """|xi_h(phi, psi) - (psi, L phi)_h - int_{complement} psi N phi|.

    xi_h is taken in its pair form (``energy_form``); when psi does not vanish
    off Omega the pairs with an exterior partner also see psi(y) and are added
    by quadrature.  ``operator="discrete"`` uses L_h = K, which makes the
    residual an algebraic identity for interior-supported psi.
    ``operator="quadrature"`` evaluates L phi at the nodes by adaptive
    quadrature of the continuous operator, so the residual measures the
    consistency of the discrete form and shrinks under refinement.
    """
    grid = K.grid
    phi_h, psi_h = grid.sample(phi), grid.sample(psi)
    xi = energy_form(K, phi_h, psi_h)
    if operator == "discrete":
        Lphi = K.matrix @ phi_h.values
    elif operator == "quadrature":
        Lphi = levy_apply_quadrature(K.kernel, phi, grid.x, (grid.a, grid.b), K.quad)
    else:
        raise ValueError(f"unknown operator mode {operator!r}")
    comp = 0.0
    if not _vanishes_outside(grid, psi, K.quad.far_radius):
        xi += _exterior_pairs(K.kernel, grid, phi_h, psi, K.quad)
        comp = _complement_term(K.kernel, grid, phi_h, psi, K.quad)
    return abs(xi - grid.h * float(psi_h.values @ Lphi) - comp)
