import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from levymem import potential as pt

BUILTINS = [pt.quadratic(1.0), pt.quadratic(2.5), pt.absolute(1.0), pt.saturating(1.0), pt.saturating(3.0),
            pt.zero()]
tau = st.floats(-10, 10)


def test_evaluate_quadratic_at_two():
    r = pt.evaluate(pt.quadratic(), 2.0)
    assert (r.phi, r.chi, r.chi_prime, r.G) == pytest.approx((4.0, 8.0, 12.0, 4.0))


@pytest.mark.parametrize("p", BUILTINS, ids=lambda p: p.name)
def test_evaluate_at_zero(p):
    r = pt.evaluate(p, 0.0)
    assert (r.phi, r.chi, r.chi_prime, r.G) == (0.0, 0.0, 0.0, 0.0)


def test_evaluate_absolute_at_minus_one():
    r = pt.evaluate(pt.absolute(), -1.0)
    assert (r.phi, r.chi, r.chi_prime) == (1.0, -1.0, 2.0)
    assert r.G == pytest.approx(1 / 3)


def test_validate_quadratic():
    rep = pt.validate_assumption(pt.quadratic(), -10, 10)
    assert rep.passed
    assert rep.delta_unit == pytest.approx(1.0, abs=1e-9)


def test_validate_rejects_constant_and_negative():
    one = pt.Potential("one", phi=lambda t: np.ones_like(np.asarray(t, dtype=float)),
                       phi_prime=lambda t: np.zeros_like(np.asarray(t, dtype=float)))
    neg = pt.Potential("neg", phi=lambda t: -np.asarray(t)**2, phi_prime=lambda t: -2 * np.asarray(t))
    assert not pt.validate_assumption(one, -5, 5).zero_at_zero
    assert not pt.validate_assumption(neg, -5, 5).nonneg
    assert not pt.validate_assumption(neg, -5, 5).passed


def test_validate_rejects_decreasing_chi():
    # phi = t^2 for |t| <= 1, then 1/t^2: chi = 1/t decreases beyond 1
    p = pt.Potential("bent", phi=lambda t: np.where(np.abs(t) <= 1, np.asarray(t)**2, 1 / np.maximum(np.asarray(t)**2, 1)),
                     phi_prime=lambda t: np.zeros_like(np.asarray(t, dtype=float)))
    rep = pt.validate_assumption(p, -4, 4)
    assert rep.nonneg and rep.zero_at_zero and not rep.chi_monotone


def test_validate_range_order():
    with pytest.raises(ValueError):
        pt.validate_assumption(pt.quadratic(), 1.0, -1.0)


def test_delta_unit_closed_forms():
    assert pt.delta_unit(pt.quadratic(4.0), 10) == pytest.approx(0.5, abs=1e-9)
    assert pt.delta_unit(pt.absolute(2.0), 10) == pytest.approx(0.5, abs=1e-9)
    # phi <= c < 1 everywhere: capped at the range
    assert pt.delta_unit(pt.saturating(0.9), 7.0) == 7.0


def test_kappa_examples():
    assert pt.kappa(pt.quadratic(), 1.0, 0.5) == 1.0
    assert pt.kappa(pt.quadratic(), 0.0, 0.5) == 0.0
    assert pt.kappa(pt.absolute(1.5), 1.0, 1.0) == 1.5
    assert pt.kappa(pt.saturating(1.0), 10.0, 1.0) == pytest.approx(2 / math.sqrt(3) / (4 / 3)**2)


@given(st.floats(0, 5), st.floats(0.01, 2), st.floats(1.0, 3.0))
def test_kappa_non_decreasing_in_T(Lam, T, factor):
    for p in BUILTINS:
        assert pt.kappa(p, Lam, T) <= pt.kappa(p, Lam, T * factor) + 1e-15


@pytest.mark.parametrize("p", [pt.quadratic(2.0), pt.saturating(1.0)], ids=lambda p: p.name)
def test_kappa_sampling_matches_closed_form(p):
    sampled = pt.Potential(p.name, p.phi, p.phi_prime)
    for L in (0.1, 0.4, 1.0, 3.0):
        assert pt.kappa(sampled, L, 1.0, samples=20001) == pytest.approx(pt.kappa(p, L, 1.0), rel=1e-6)


def test_chi_monotone_on_random_pairs():
    rng = np.random.default_rng(7)
    t1, t2 = rng.uniform(-10, 10, (2, 1000))
    for p in BUILTINS:
        assert np.all((p.chi(t1) - p.chi(t2)) * (t1 - t2) >= 0)


@given(tau, tau)
def test_chi_monotone_property(t1, t2):
    for p in BUILTINS:
        assert (float(p.chi(t1)) - float(p.chi(t2))) * (t1 - t2) >= 0


@pytest.mark.parametrize("p", BUILTINS, ids=lambda p: f"{p.name}{p.params}")
def test_quadrature_G_matches_closed_form(p):
    generic = pt.Potential(p.name, p.phi, p.phi_prime)
    t = np.linspace(-6, 6, 25)
    assert np.allclose(generic.G(t), p.G(t), rtol=1e-8, atol=1e-10)


@pytest.mark.parametrize("p", BUILTINS, ids=lambda p: f"{p.name}{p.params}")
def test_chi_prime_matches_finite_difference(p):
    t = np.linspace(-5, 5, 101)
    d = 1e-6
    fd = (p.chi(t + d) - p.chi(t - d)) / (2 * d)
    # |t| t has a kink in its second derivative at 0, where the central difference is off by d
    assert np.allclose(p.chi_prime(t), fd, rtol=1e-6, atol=1.5 * d)


@pytest.mark.parametrize("p", BUILTINS, ids=lambda p: f"{p.name}{p.params}")
def test_generic_chi_prime_from_product_rule(p):
    generic = pt.Potential(p.name, p.phi, p.phi_prime)
    t = np.linspace(-5, 5, 41)
    assert np.allclose(generic.chi_prime(t), p.chi_prime(t), rtol=1e-12, atol=1e-12)


@given(tau)
def test_G_nonnegative(t):
    for p in BUILTINS:
        assert float(p.G(t)) >= 0


def test_profiles():
    assert pt.from_profile("zero").name == "zero"
    assert pt.from_profile("saturating", 2.0).params == (("c", 2.0),)
    with pytest.raises(KeyError):
        pt.from_profile("flory-huggins")
