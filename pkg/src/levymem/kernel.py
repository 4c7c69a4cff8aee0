"""Symmetric Levy kernels, their admissibility checks and the epsilon-rescaling.

Kernels are radius-profile functions plus metadata.  Built-in families that
are piecewise power laws (fractional, indicator and every rescaling of them)
carry an exact ``pieces`` representation so that all radial integrals are
evaluated in closed form; other profiles go through the Gauss-Legendre shell
quadrature in :mod:`levymem.quadrature`.
"""

from dataclasses import dataclass, field, replace
import math
from typing import Callable, Optional

import numpy as np
from scipy.special import gamma

from .errors import InadmissibleKernelError, KernelDomainError
from .quadrature import (
    QuadratureSpec,
    integrate_cells,
    integrate_to_infinity,
    integrate_to_origin,
    power_integral,
)


def fractional_constant(N, s):
    """Normalising constant of the fractional Laplacian kernel C_{N,s} |h|^{-N-2s}."""
    if not 0.0 < s < 1.0:
        raise KernelDomainError(f"fractional order s must lie in (0,1), got {s}")
    if N < 1 or int(N) != N:
        raise KernelDomainError(f"dimension N must be a positive integer, got {N}")
    return 2.0**(2 * s) * s * gamma((N + 2 * s) / 2) / (math.pi**(N / 2) * gamma(1 - s))


def sphere_area(N):
    """Surface measure of the unit sphere in R^N (2 for N = 1)."""
    return 2.0 * math.pi**(N / 2) / gamma(N / 2)


@dataclass(frozen=True)
class PowerPiece:
    """``coef * r**(-power)`` on ``lo < r <= hi``."""

    coef: float
    power: float
    lo: float = 0.0
    hi: float = math.inf

    def __call__(self, r):
        inside = (r > self.lo) & (r <= self.hi)
        with np.errstate(divide="ignore", over="ignore"):
            return np.where(inside, self.coef * r**(-self.power), 0.0)

    def moment(self, k, a, b):
        return power_integral(self.coef, self.power, k,
                              np.maximum(a, self.lo), np.minimum(b, self.hi))


def _eval_pieces(pieces, r):
    r = np.asarray(r, dtype=float)
    out = np.zeros(r.shape)
    for p in pieces:
        out = out + p(r)
    return out


class _RadialMixin:
    """Integration helpers shared by base and rescaled kernels."""

    def moment(self, k, a, b, quad):
        """Vectorised ``int_a^b r**k nu(r) dr`` for ``0 <= a < b <= inf``."""
        a = np.atleast_1d(np.asarray(a, dtype=float))
        b = np.broadcast_to(np.asarray(b, dtype=float), a.shape)
        pieces = self.exact_pieces()
        if pieces is not None:
            total = np.zeros(a.shape)
            for p in pieces:
                total = total + p.moment(k, a, b)
            return total
        out = np.empty(a.shape)
        finite = (a > 0) & np.isfinite(b)
        if finite.any():
            out[finite] = integrate_cells(self.radial, k, a[finite], b[finite],
                                          quad.order, self.breakpoints)
        for idx in np.flatnonzero(~finite):
            lo, hi = a[idx], b[idx]
            val = 0.0
            if lo == 0.0:
                cut = 1.0 if not np.isfinite(hi) else hi
                val += integrate_to_origin(self.radial, k, cut, quad, self.breakpoints)
                lo = cut
            if not np.isfinite(hi):
                val += integrate_to_infinity(self.radial, k, lo, quad, self.tail_decay,
                                             N=1, breakpoints=self.breakpoints)
            elif hi > lo:
                val += integrate_cells(self.radial, k, [lo], [hi], quad.order,
                                       self.breakpoints)[0]
            out[idx] = val
        return out

    def tail_mass(self, d, quad):
        """``int_d^inf nu(r) dr`` for each d > 0 (one-sided, 1-D)."""
        d = np.atleast_1d(np.asarray(d, dtype=float))
        return self.moment(0, d, np.full(d.shape, np.inf), quad)


@dataclass(frozen=True)
class LevyKernel(_RadialMixin):
    """Symmetric jump density.

    Radial kernels are described by ``pieces`` (exact piecewise power law) or
    by ``profile`` (a vectorised function of the radius).  A non-radial 1-D
    density can be supplied through ``density``; such kernels are only used
    by the admissibility checks.

    ``singular_exponent`` is beta in nu ~ r^-beta at the origin and
    ``tail_decay`` is alpha in nu ~ r^(-N-alpha) at infinity (``None`` when
    the density is negligible beyond the quadrature far radius).
    """

    family: str
    N: int = 1
    s: Optional[float] = None
    pieces: Optional[tuple] = None
    profile: Optional[Callable] = None
    density: Optional[Callable] = None
    singular_exponent: float = 0.0
    tail_decay: Optional[float] = None
    breakpoints: tuple = ()
    normalization: float = 1.0
    name: str = ""

    def __post_init__(self):
        if not self.normalization > 0:
            raise KernelDomainError(f"normalization must be positive, got {self.normalization}")
        if self.pieces is None and self.profile is None and self.density is None:
            raise KernelDomainError("kernel needs pieces, a radial profile or a density")

    @property
    def is_radial(self):
        return self.density is None

    def exact_pieces(self):
        if self.pieces is None:
            return None
        c = self.normalization
        return tuple(replace(p, coef=c * p.coef) for p in self.pieces)

    def radial(self, r):
        if not self.is_radial:
            raise KernelDomainError(f"kernel {self.name!r} is not radial")
        if self.pieces is not None:
            return self.normalization * _eval_pieces(self.pieces, r)
        return self.normalization * self.profile(np.asarray(r, dtype=float))

    def signed(self, h):
        """Density at signed 1-D offsets (h != 0)."""
        h = np.asarray(h, dtype=float)
        if self.is_radial:
            return self.radial(np.abs(h))
        return self.normalization * self.density(h)

    def scaled(self, factor):
        return replace(self, normalization=self.normalization * factor)


@dataclass(frozen=True)
class RescaledKernel(_RadialMixin):
    """nu_eps built from a radial base kernel by the three-branch rescaling

        eps^{-N-2} nu(h/eps)          |h| <= eps
        eps^{-N} |h|^{-2} nu(h/eps)   eps < |h| <= 1
        eps^{-N} nu(h/eps)            |h| > 1

    The branches are evaluated literally.  Their factors agree at |h| = eps
    and at |h| = 1, so nu_eps inherits the continuity of the base kernel.
    """

    base: LevyKernel
    epsilon: float
    name: str = field(default="")

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise KernelDomainError(f"epsilon must lie in (0,1], got {self.epsilon}")
        if not self.base.is_radial:
            raise KernelDomainError("only radial kernels can be rescaled")
        if not self.name:
            object.__setattr__(self, "name", f"{self.base.name}@eps={self.epsilon:g}")

    family = "rescaled"
    is_radial = True

    @property
    def N(self):
        return self.base.N

    @property
    def s(self):
        return self.base.s

    @property
    def normalization(self):
        return self.base.normalization

    @property
    def singular_exponent(self):
        return self.base.singular_exponent

    @property
    def tail_decay(self):
        return self.base.tail_decay

    @property
    def breakpoints(self):
        eps = self.epsilon
        pts = {eps, 1.0} | {eps * b for b in self.base.breakpoints}
        return tuple(sorted(p for p in pts if p > 0))

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        eps, N = self.epsilon, self.N
        base = self.base.radial(r / eps)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(r <= eps, eps**(-N - 2) * base,
                            np.where(r <= 1.0, eps**(-N) * base / r**2, eps**(-N) * base))

    def signed(self, h):
        return self.radial(np.abs(np.asarray(h, dtype=float)))

    def exact_pieces(self):
        base = self.base.exact_pieces()
        if base is None:
            return None
        eps, N = self.epsilon, self.N
        out = []
        for p in base:
            lo, hi = eps * p.lo, eps * p.hi
            spans = [
                (lo, min(hi, eps), p.coef * eps**(p.power - N - 2), p.power),
                (max(lo, eps), min(hi, 1.0), p.coef * eps**(p.power - N), p.power + 2),
                (max(lo, 1.0), hi, p.coef * eps**(p.power - N), p.power),
            ]
            out.extend(PowerPiece(c, pw, a, b) for a, b, c, pw in spans if b > a)
        return tuple(out)

    def scaled(self, factor):
        return RescaledKernel(self.base.scaled(factor), self.epsilon)


# -- built-in families -------------------------------------------------------

def fractional(s, N=1):
    """Fractional Laplacian kernel C_{N,s} |h|^{-N-2s}."""
    C = fractional_constant(N, s)
    return LevyKernel(family="fractional", N=N, s=s,
                      pieces=(PowerPiece(C, N + 2 * s),),
                      singular_exponent=N + 2 * s, tail_decay=2 * s,
                      name=f"fractional(s={s:g})")


def indicator(radius=1.0, height=1.0, N=1):
    """Bounded compactly supported kernel height * 1{|h| <= radius}."""
    if not radius > 0 or not height > 0:
        raise KernelDomainError("indicator kernel needs positive radius and height")
    return LevyKernel(family="general", N=N, pieces=(PowerPiece(height, 0.0, 0.0, radius),),
                      singular_exponent=0.0, tail_decay=None, breakpoints=(radius,),
                      name=f"indicator(R={radius:g})")


def tempered(s, lam=1.0, N=1):
    """Exponentially tempered fractional kernel C_{N,s} e^{-lam r} r^{-N-2s}."""
    C = fractional_constant(N, s)
    if not lam > 0:
        raise KernelDomainError(f"tempering rate must be positive, got {lam}")

    def profile(r):
        with np.errstate(divide="ignore", over="ignore"):
            return C * np.exp(-lam * r) * r**(-N - 2 * s)

    return LevyKernel(family="general", N=N, s=s, profile=profile,
                      singular_exponent=N + 2 * s, tail_decay=None,
                      name=f"tempered(s={s:g},lam={lam:g})")


def general(profile, singular_exponent=0.0, tail_decay=None, N=1, breakpoints=(), name="general"):
    """Radial kernel from an arbitrary vectorised profile r -> nu(r)."""
    return LevyKernel(family="general", N=N, profile=profile,
                      singular_exponent=singular_exponent, tail_decay=tail_decay,
                      breakpoints=tuple(breakpoints), name=name)


BUILTIN_PROFILES = {
    "indicator": indicator,
    "tempered": tempered,
}


# -- operations --------------------------------------------------------------

def eval_kernel(kernel, h):
    """nu(h). ``h`` is a scalar/array of 1-D offsets, or vectors along the last axis when N > 1."""
    h = np.asarray(h, dtype=float)
    if kernel.N == 1:
        r = np.abs(h)
    else:
        if h.shape[-1:] != (kernel.N,):
            raise KernelDomainError(f"expected offsets of dimension {kernel.N}, got shape {h.shape}")
        r = np.linalg.norm(h, axis=-1)
    if np.any(r == 0):
        raise KernelDomainError("kernel is singular at the origin: h must be nonzero")
    if kernel.N == 1 and not kernel.is_radial:
        return kernel.signed(h)
    return kernel.radial(r)


def _sides(kernel):
    """Radial functions to integrate: one for radial kernels, both half-lines otherwise."""
    if kernel.is_radial:
        return [(kernel.radial, sphere_area(kernel.N))]
    return [(lambda r: kernel.signed(r), 1.0), (lambda r: kernel.signed(-r), 1.0)]


def levy_mass(kernel, quad=None):
    """``int (1 ^ |h|^2) nu(h) dh`` with the split at |h| = 1."""
    quad = quad or QuadratureSpec()
    N = kernel.N
    if kernel.is_radial:
        area = sphere_area(N)
        near = kernel.moment(N + 1, 0.0, 1.0, quad)[0]
        far = kernel.moment(N - 1, 1.0, np.inf, quad)[0]
        if kernel.exact_pieces() is None and kernel.tail_decay is not None:
            # moment() closes tails with the 1-D rule; redo the far part with weight r^(N-1)
            far = integrate_to_infinity(kernel.radial, N - 1, 1.0, quad, kernel.tail_decay,
                                        N=N, breakpoints=kernel.breakpoints)
        total = area * (near + far)
    else:
        total = 0.0
        for fun, _ in _sides(kernel):
            total += integrate_to_origin(fun, 2, 1.0, quad)
            total += integrate_to_infinity(fun, 0, 1.0, quad, kernel.tail_decay)
    if not np.isfinite(total):
        raise InadmissibleKernelError(
            f"Levy mass of {kernel.name!r} diverges: int (1^|h|^2) nu(h) dh is not finite")
    return float(total)


def normalize(kernel, quad=None, target=None):
    """Rescale the kernel so that its Levy mass equals ``target`` (default 1/N)."""
    target = 1.0 / kernel.N if target is None else target
    return kernel.scaled(target / levy_mass(kernel, quad))


def rescale(kernel, epsilon, quad=None):
    """nu_eps from ``kernel`` after normalising its Levy mass to 1/N."""
    if not 0.0 < epsilon <= 1.0:
        raise KernelDomainError(f"epsilon must lie in (0,1], got {epsilon}")
    if not kernel.is_radial:
        raise KernelDomainError("only radial kernels can be rescaled")
    if isinstance(kernel, RescaledKernel):
        raise KernelDomainError("rescale the base kernel, not an already rescaled one")
    return RescaledKernel(normalize(kernel, quad), epsilon)


@dataclass(frozen=True)
class AdmissibilityReport:
    symmetric: bool
    mass_finite: bool
    non_integrable_at_origin: bool
    full_support: bool
    mass: float

    @property
    def admissible(self):
        """Requirements for assembling an operator: symmetry and finite Levy mass."""
        return self.symmetric and self.mass_finite

    @property
    def all_passed(self):
        return (self.symmetric and self.mass_finite
                and self.non_integrable_at_origin and self.full_support)


def _origin_mass_diverges(kernel, quad):
    pieces = kernel.exact_pieces()
    if pieces is not None:
        return any(p.lo == 0.0 and p.power >= kernel.N and p.coef > 0 for p in pieces)
    k = kernel.N - 1 if kernel.is_radial else 0
    for fun, _ in _sides(kernel):
        if not np.isfinite(integrate_to_origin(fun, k, 1.0, quad)):
            return True
    return False


def check_levy_admissible(kernel, quad=None, samples=1000, seed=0):
    """Sampled/numerical admissibility checks; failures are reported, never raised."""
    quad = quad or QuadratureSpec()
    rng = np.random.default_rng(seed)
    r = 10.0**rng.uniform(-6, math.log10(quad.far_radius), samples)
    if kernel.N == 1:
        pos, neg = kernel.signed(r), kernel.signed(-r)
        symmetric = bool(np.all(pos >= 0) and np.allclose(pos, neg, rtol=1e-14, atol=0))
    else:
        symmetric = kernel.is_radial
    try:
        mass = levy_mass(kernel, quad)
        mass_finite = True
    except InadmissibleKernelError:
        mass, mass_finite = math.inf, False
    grid = np.logspace(-6, math.log10(quad.far_radius), 400)
    if kernel.N == 1:
        support = np.minimum(kernel.signed(grid), kernel.signed(-grid))
    else:
        support = kernel.radial(grid)
    return AdmissibilityReport(
        symmetric=symmetric,
        mass_finite=mass_finite,
        non_integrable_at_origin=_origin_mass_diverges(kernel, quad),
        full_support=bool(np.all(support > 0)),
        mass=mass,
    )
