"""Interaction potentials phi >= 0 with chi(t) = phi(t) t monotone.

Built-ins (all with a scale c >= 0):

    quadratic   phi = c t^2            chi = c t^3
    absolute    phi = c |t|            chi = c |t| t
    saturating  phi = c t^2/(1+t^2)    bounded, not increasing at infinity
    zero        phi = 0                decouples the memory problem
"""

from dataclasses import dataclass
import math
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize


@dataclass(frozen=True)
class Potential:
    name: str
    phi: Callable
    phi_prime: Callable
    G_exact: Optional[Callable] = None
    chi_prime_exact: Optional[Callable] = None
    kappa_exact: Optional[Callable] = None  # L -> sup |phi'| on [-L, L]
    params: tuple = ()

    def chi(self, t):
        t = np.asarray(t, dtype=float)
        return self.phi(t) * t

    def chi_prime(self, t):
        t = np.asarray(t, dtype=float)
        if self.chi_prime_exact is not None:
            return self.chi_prime_exact(t)
        return self.phi_prime(t) * t + self.phi(t)

    def G(self, t):
        """Antiderivative of chi vanishing at 0."""
        t = np.asarray(t, dtype=float)
        if self.G_exact is not None:
            return self.G_exact(t)
        flat = [integrate.quad(lambda s: float(self.chi(s)), 0.0, float(ti),
                               epsabs=1e-13, epsrel=1e-12)[0] for ti in t.ravel()]
        return np.array(flat).reshape(t.shape)


def quadratic(c=1.0):
    return Potential(
        "quadratic",
        phi=lambda t: c * t**2,
        phi_prime=lambda t: 2 * c * t,
        G_exact=lambda t: c * t**4 / 4,
        chi_prime_exact=lambda t: 3 * c * t**2,
        kappa_exact=lambda L: 2 * c * L,
        params=(("c", c),),
    )


def absolute(c=1.0):
    # phi' = c sign(t) is undefined at 0; its essential sup is c on any nondegenerate interval
    return Potential(
        "absolute",
        phi=lambda t: c * np.abs(t),
        phi_prime=lambda t: c * np.sign(t),
        G_exact=lambda t: c * np.abs(t)**3 / 3,
        chi_prime_exact=lambda t: 2 * c * np.abs(t),
        kappa_exact=lambda L: c if L > 0 else 0.0,
        params=(("c", c),),
    )


def saturating(c=1.0):
    peak = 1.0 / math.sqrt(3.0)

    def kappa(L):
        L = min(L, peak)
        return 2 * c * L / (1 + L**2)**2

    return Potential(
        "saturating",
        phi=lambda t: c * t**2 / (1 + t**2),
        phi_prime=lambda t: 2 * c * t / (1 + t**2)**2,
        G_exact=lambda t: c * (t**2 - np.log1p(t**2)) / 2,
        chi_prime_exact=lambda t: c * (t**4 + 3 * t**2) / (1 + t**2)**2,
        kappa_exact=kappa,
        params=(("c", c),),
    )


def zero():
    return Potential(
        "zero",
        phi=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        phi_prime=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        G_exact=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        chi_prime_exact=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        kappa_exact=lambda L: 0.0,
    )


PROFILES = {"quadratic": quadratic, "absolute": absolute, "saturating": saturating}


def from_profile(profile, c=1.0):
    if profile == "zero":
        return zero()
    if profile not in PROFILES:
        raise KeyError(f"unknown potential profile {profile!r}; known: {sorted(PROFILES) + ['zero']}")
    return PROFILES[profile](c)


@dataclass(frozen=True)
class PotentialValues:
    phi: float
    chi: float
    chi_prime: float
    G: float


def evaluate(p, tau):
    tau = float(tau)
    return PotentialValues(phi=float(p.phi(tau)), chi=float(p.chi(tau)),
                           chi_prime=float(p.chi_prime(tau)), G=float(p.G(tau)))


@dataclass(frozen=True)
class ValidationReport:
    nonneg: bool
    zero_at_zero: bool
    chi_monotone: bool
    chi_prime_bounded: bool
    delta_unit: float
    range: tuple

    @property
    def passed(self):
        return self.nonneg and self.zero_at_zero and self.chi_monotone and self.chi_prime_bounded


def delta_unit(p, hi, samples=2001):
    """Largest delta <= hi with phi^2 <= 1 on [-delta, delta] (bisection on sampled maxima)."""

    def worst(d):
        t = np.linspace(-d, d, samples)
        return float(np.max(p.phi(t)**2)) - 1.0

    if worst(hi) <= 0:
        return float(hi)
    if float(p.phi(0.0))**2 > 1:
        return 0.0
    return float(optimize.bisect(worst, 0.0, hi, xtol=1e-12, maxiter=200))


def validate_assumption(p, lo=-10.0, hi=10.0, samples=4001):
    """Sampled certificate of the structural assumption on [lo, hi]."""
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    t = np.linspace(lo, hi, samples)
    if lo < 0 < hi:
        t = np.union1d(t, [0.0])
    phi = p.phi(t)
    chi = p.chi(t)
    dchi = p.chi_prime(t)
    scale = max(1.0, float(np.max(np.abs(chi))))
    return ValidationReport(
        nonneg=bool(np.all(phi >= 0)),
        zero_at_zero=float(p.phi(0.0)) == 0.0,
        chi_monotone=bool(np.all(np.diff(chi) >= -1e-14 * scale)),
        chi_prime_bounded=bool(np.all(np.isfinite(dchi))),
        delta_unit=delta_unit(p, max(abs(lo), abs(hi))),
        range=(lo, hi),
    )


def kappa(p, Lam, T, samples=4001):
    """sup |phi'| on [-Lam T, Lam T]; closed form for built-ins, dense sampling otherwise."""
    L = Lam * T
    if p.kappa_exact is not None:
        return float(p.kappa_exact(L))
    t = np.linspace(-L, L, samples)
    return float(np.max(np.abs(p.phi_prime(t))))
