"""Radial quadrature for singular Levy densities.

Everything here integrates ``r**k * f(r)`` over a half-line interval where
``f`` may blow up like a power at ``r = 0`` and decay like a power at
infinity.  Near the origin the interval is cut into dyadic shells and the
remainder is summed as a geometric series; towards infinity the integral is
carried to ``far_radius`` and closed with the analytic power-law tail.
"""

from dataclasses import dataclass
import math

import numpy as np

N_ORIGIN_SHELLS = 100


@dataclass(frozen=True)
class QuadratureSpec:
    """Quadrature controls for kernel integrals and operator assembly.

    near_cut: radius of the punched-out singular cell, in grid spacings.
    far_radius: truncation radius; beyond it power-law tails are closed analytically.
    tol: relative tolerance used when deciding convergence/divergence.
    order: Gauss-Legendre points per subinterval.
    """

    near_cut: int = 1
    far_radius: float = 100.0
    tol: float = 1e-12
    order: int = 20

    def __post_init__(self):
        if self.near_cut < 1:
            raise ValueError(f"near_cut must be >= 1, got {self.near_cut}")
        if not self.far_radius > 0:
            raise ValueError(f"far_radius must be positive, got {self.far_radius}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.order < 2:
            raise ValueError(f"order must be >= 2, got {self.order}")


def _gauss(order):
    return np.polynomial.legendre.leggauss(order)


def gauss_intervals(fun, k, lo, hi, order):
    """Integrate r**k * fun(r) on each interval [lo[j], hi[j]] with one Gauss rule each."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    t, w = _gauss(order)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    r = mid[..., None] + half[..., None] * t
    vals = fun(r) * r**k
    return half * (vals @ w)


def split_at(lo, hi, breakpoints):
    """Split intervals at breakpoints. Returns sub-lo, sub-hi and the owning interval index."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    owner = np.arange(lo.size)
    for bp in breakpoints:
        cut = (lo < bp) & (bp < hi)
        if not cut.any():
            continue
        lo = np.concatenate([lo, np.full(cut.sum(), bp)])
        new_hi = hi.copy()
        new_hi[cut] = bp
        hi = np.concatenate([new_hi, hi[cut]])
        owner = np.concatenate([owner, owner[cut]])
    return lo, hi, owner


def integrate_cells(fun, k, lo, hi, order, breakpoints=()):
    """Sum of r**k fun(r) over each cell, splitting cells at the kernel's breakpoints."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    sub_lo, sub_hi, owner = split_at(lo, hi, breakpoints)
    parts = gauss_intervals(fun, k, sub_lo, sub_hi, order)
    out = np.zeros(lo.size)
    np.add.at(out, owner, parts)
    return out


def integrate_to_origin(fun, k, r, quad, breakpoints=()):
    """Integral of r**k fun(r) over (0, r].

    Returns ``math.inf`` when the dyadic shell contributions stop decaying,
    which is how divergence at the origin is detected.
    """
    j = np.arange(N_ORIGIN_SHELLS)
    hi = r * 2.0**(-j)
    lo = hi / 2.0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        shells = integrate_cells(fun, k, lo, hi, quad.order, breakpoints)
    if not np.all(np.isfinite(shells)):
        return math.inf
    total = shells.sum()
    last, prev = shells[-1], shells[-2]
    if last == 0.0:
        return float(total)
    ratio = last / prev if prev != 0.0 else math.inf
    if not ratio < 1.0 - 1e-9:
        return math.inf
    # exact for densities that are power laws near the origin
    remainder = last * ratio / (1.0 - ratio)
    return float(total + remainder)


def integrate_to_infinity(fun, k, a, quad, tail_decay, N=1, breakpoints=()):
    """Integral of r**k fun(r) over [a, inf).

    Geometric subintervals up to ``far_radius``; beyond that the density is
    taken to behave like ``fun(R) (r/R)**(-N - tail_decay)`` and the tail is
    added in closed form.  ``tail_decay=None`` means the density is
    negligible beyond ``far_radius``.
    """
    R = quad.far_radius
    if a >= R:
        R = 2.0 * a
    n_geo = max(1, int(math.ceil(math.log2(R / a))))
    edges = a * 2.0**np.arange(n_geo + 1)
    edges[-1] = R
    edges = np.unique(edges)
    body = integrate_cells(fun, k, edges[:-1], edges[1:], quad.order, breakpoints).sum()
    if tail_decay is None:
        return float(body)
    expo = N + tail_decay - k - 1
    if expo <= 0:
        return math.inf
    tail = float(fun(np.array([R]))[0]) * R**(k + 1) / expo
    return float(body + tail)


def power_integral(coef, power, k, a, b):
    """Closed form of the integral of coef * r**(k - power) from a to b (vectorised).

    ``a`` may be 0 and ``b`` may be inf; divergent cases come back as inf.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    e = k - power + 1.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if abs(e) < 1e-13:
            val = coef * (np.log(b) - np.log(a))
        elif e > 0:
            val = coef * (b**e - a**e) / e
        else:
            # b**e -> 0 at infinity, a**e -> inf at zero
            val = coef * (b**e - a**e) / e
    return np.where(b > a, val, 0.0)
