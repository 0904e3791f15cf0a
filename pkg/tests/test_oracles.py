"""Recompute the frozen reference values from scratch."""

import math

import pytest
from scipy.integrate import quad

import oracle_values as ov
from cnls_lab.cutoff import c4_cutoff

SPHERE = 2 * math.pi**2


def radial(f, a=0.0, b=math.inf):
    val, _ = quad(lambda r: r**3 * f(r), a, b, epsabs=0, epsrel=1e-13, limit=500)
    return SPHERE * val


def g(r):
    return math.exp(-r * r / 2)


def w(r):
    return 1 / (1 + r * r / 8)


@pytest.mark.parametrize(
    "frozen, integrand",
    [
        (ov.GAUSS_E_R2, lambda r: math.exp(-r * r)),
        (ov.W_L4_4, lambda r: w(r) ** 4),
        (ov.GRAD_W_SQ, lambda r: (r / 4 * w(r) ** 2) ** 2),
        (ov.W_L10_3, lambda r: w(r) ** (10 / 3)),
        (ov.GAUSS_MASS, lambda r: g(r) ** 2),
        (ov.GAUSS_GRAD_SQ, lambda r: (r * g(r)) ** 2),
        (ov.GAUSS_L4_4, lambda r: g(r) ** 4),
        (ov.GAUSS_L10_3, lambda r: g(r) ** (10 / 3)),
        (ov.GAUSS_SECOND_MOMENT, lambda r: r * r * g(r) ** 2),
    ],
)
def test_quadrature_oracles(frozen, integrand):
    assert radial(integrand) == pytest.approx(frozen, rel=1e-12)


def test_closed_forms():
    pi2 = math.pi**2
    assert ov.GRAD_W_SQ == pytest.approx(32 * pi2 / 3, rel=1e-14)
    assert ov.M_THRESHOLD == pytest.approx(ov.GRAD_W_SQ / 4, rel=1e-14)
    assert ov.C4 == pytest.approx(ov.GRAD_W_SQ**-0.25, rel=1e-14)
    assert ov.W_L10_3 == pytest.approx(2 * pi2 * 32 * 9 / 28, rel=1e-13)
    assert ov.GAUSS_L10_3 == pytest.approx(9 * pi2 / 25, rel=1e-13)
    assert ov.GAUSS_L10_3_NORM == pytest.approx(ov.GAUSS_L10_3**0.3, rel=1e-14)
    assert ov.GAUSS_QUOTIENT == pytest.approx(4 * pi2, rel=1e-14)
    assert ov.GAUSS_H_2M1 == pytest.approx(0.28125 * pi2, rel=1e-13)
    assert ov.GAUSS_VIRIAL_DTT_R2 == pytest.approx(16.304 * pi2, rel=1e-13)
    assert ov.GAUSS_ENERGY == pytest.approx(pi2 * (1 - 1 / 16 + 27 / 250), rel=1e-13)


@pytest.mark.parametrize("a", sorted(ov.SCALED_GAUSS))
def test_scaled_gaussian_energy_and_k(a):
    G, Q, P = ov.GAUSS_GRAD_SQ, ov.GAUSS_L4_4, ov.GAUSS_L10_3
    e = a**2 * G / 2 - a**4 * Q / 4 + 0.3 * a ** (10 / 3) * P
    k = (a**2 * G - a**4 * Q) + 0.8 * a ** (10 / 3) * P
    assert (e, k) == pytest.approx(ov.SCALED_GAUSS[a], rel=1e-12)


def test_angular_and_bump():
    val, _ = quad(lambda t: (1 - math.cos(t)) * math.sin(t) ** 2, 0, math.pi)
    assert val == pytest.approx(ov.ANGULAR, rel=1e-13)
    psi4 = radial(lambda r: float(c4_cutoff(r)) ** 4, 0, 1) + radial(lambda r: float(c4_cutoff(r)) ** 4, 1, 2)
    assert psi4 == pytest.approx(ov.PSI4, rel=1e-12)


def test_free_gaussian_solves_free_equation():
    # i u_t + u_rr + 3 u_r / r = 0, checked by centred differences
    r, t, d = 1.3, 0.4, 1e-4
    u = ov.free_gaussian
    u_t = (u(r, t + d) - u(r, t - d)) / (2 * d)
    u_r = (u(r + d, t) - u(r - d, t)) / (2 * d)
    u_rr = (u(r + d, t) - 2 * u(r, t) + u(r - d, t)) / d**2
    assert abs(1j * u_t + u_rr + 3 * u_r / r) < 1e-6
