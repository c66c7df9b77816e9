import math

import numpy as np
import pytest
from scipy import integrate, special

from apkinetic.constants import (
    C_of_s,
    a_eps_z,
    compute_kappa,
    compute_symbol_constant,
    discrete_kappa,
    fractional_constants,
    gamma,
    heavy_tail_symbol,
    laplace_of_C,
    operator_normalization,
    sphere_moment,
    tail_flux_sum,
)
from apkinetic.grids import VelocityGrid, heavy_tail_normalization, make_equilibrium

M25 = 0.37841336432032846


def closed_A(alpha):
    if alpha == 1.0:
        return math.pi
    return -2.0 * special.gamma(-alpha) * math.cos(math.pi * alpha / 2)


def closed_kappa(alpha, m):
    # int_R w^2/(1+w^2) |w|^(-1-alpha) dw = pi / sin(pi alpha / 2)
    return m * math.pi / math.sin(math.pi * alpha / 2)


@pytest.mark.parametrize("x", [0.5, 0.75, 1.0, 1.5, 2.5, 3.3, 4.0, 5.0])
def test_gamma_against_stdlib(x):
    assert math.isclose(gamma(x), math.gamma(x), rel_tol=1e-12)


def test_gamma_reflection_and_poles():
    for x in (-0.5, -1.5, 0.25, 0.1):
        assert math.isclose(gamma(x), math.gamma(x), rel_tol=1e-12)
    for n in (1, 2, 3, 6):
        assert math.isclose(gamma(n), math.factorial(n - 1), rel_tol=1e-13)
    with pytest.raises(ValueError):
        gamma(0)
    with pytest.raises(ValueError):
        gamma(-2)


def test_kappa_values():
    assert math.isclose(compute_kappa(1.5, 1, M25), 1.681246279909893, rel_tol=1e-10)
    assert abs(compute_kappa(1.5, 1, M25) - 1.6813) < 1e-3
    assert compute_kappa(1.2, 1, 0.0) == 0.0
    for a in (0.3, 0.8, 1.0, 1.5, 1.9):
        m = heavy_tail_normalization(a + 1)
        assert math.isclose(compute_kappa(a, 1, m), closed_kappa(a, m), rel_tol=1e-10)


def test_kappa_rejects_alpha():
    for a in (0.0, 2.0, -1.0, 2.5):
        with pytest.raises(ValueError):
            compute_kappa(a, 1, 0.3)


def test_kappa_by_independent_quadrature():
    # plain adaptive quadrature on the unfolded real line
    m = M25
    f = lambda w: w * w / (1 + w * w) * m / w**2.5
    head, _ = integrate.quad(f, 0, 1, limit=200)
    tail, _ = integrate.quad(f, 1, np.inf, limit=200)
    assert math.isclose(compute_kappa(1.5, 1, m), 2 * (head + tail), rel_tol=1e-7)


@pytest.mark.parametrize("alpha", [0.3, 0.8, 1.0, 1.2, 1.5, 1.9])
def test_symbol_constant_closed_form(alpha):
    assert math.isclose(compute_symbol_constant(alpha), closed_A(alpha), rel_tol=1e-10)


def test_symbol_constant_values():
    assert math.isclose(compute_symbol_constant(1.5), 3.3422, abs_tol=1e-4)
    assert math.isclose(compute_symbol_constant(1.0), math.pi, rel_tol=1e-12)
    assert compute_symbol_constant(0.5) > 0


@pytest.mark.parametrize("alpha", [0.8, 1.0, 1.5])
def test_kappa_identity(alpha):
    c = fractional_constants(alpha)
    assert c.identity_residual <= 1e-6
    assert c.kappa > 0 and c.A > 0
    assert math.isclose(c.kappa / (c.m * c.gamma_alpha_plus_1), c.A, rel_tol=1e-6)


def test_C_of_s_power_law_and_value():
    assert C_of_s(0.0, 2.5, M25) == 0.0
    assert math.isclose(C_of_s(1.0, 2.5, M25), -1.264722184671436, rel_tol=1e-10)
    for alpha in (0.8, 1.0, 1.5):
        m = heavy_tail_normalization(alpha + 1)
        A = compute_symbol_constant(alpha)
        for s in (0.5, 1.0, 2.0):
            c = C_of_s(s, alpha + 1, m)
            assert abs(c + m * s**alpha * A) <= 1e-6 * abs(c)


def test_laplace_identity():
    kappa = compute_kappa(1.5, 1, M25)
    val = laplace_of_C(2.5, M25, 40)
    assert abs(val + kappa) <= 1e-5 * kappa
    assert math.isclose(val, -1.6813, abs_tol=1e-3)


def test_sphere_moment_dimension_one():
    for a in (0.5, 1.0, 1.5):
        assert math.isclose(sphere_moment(a, 1), 2.0, rel_tol=1e-13)


def test_sphere_moment_three_d():
    # int_{S^2} |cos theta|^a = 4 pi / (a + 1)
    for a in (0.5, 1.0, 1.5):
        assert math.isclose(sphere_moment(a, 3), 4 * math.pi / (a + 1), rel_tol=1e-12)


def test_heavy_tail_symbol_basic(heavy):
    assert heavy_tail_symbol(1e-2, 1.0, 0.0, heavy) == 0
    for k in (np.pi, 3 * np.pi, -7 * np.pi):
        val = heavy_tail_symbol(1e-2, 0.7, k, heavy)
        assert val.real <= 0
        assert heavy_tail_symbol(1e-2, 0.7, -k, heavy) == pytest.approx(np.conj(val), abs=1e-15)
    with pytest.raises(ValueError):
        heavy_tail_symbol(1e-2, 1.0, 1.0, make_equilibrium("gaussian"))


def test_heavy_tail_symbol_residual_fine_grid():
    eq = make_equilibrium("heavytail", VelocityGrid(1e4, 200000))
    r2 = heavy_tail_symbol(1e-2, 1.0, np.pi, eq, verify=True)
    r3 = heavy_tail_symbol(1e-3, 1.0, np.pi, eq, verify=True)
    assert r3.relative_residual <= 0.1
    assert r2.relative_residual >= 2 * r3.relative_residual


def test_heavy_tail_symbol_truncated_grid_documented(heavy):
    # the default grid cannot resolve |v| ~ 1/(eps k); its residual is large
    r = heavy_tail_symbol(1e-3, 1.0, np.pi, heavy, verify=True)
    assert r.relative_residual > 0.1


def test_a_eps_z_ratio():
    m = M25
    ratios = [a_eps_z(e, 1.0, 0.1, 2.5, m, normalized=True) for e in (1e-2, 1e-3, 1e-4)]
    assert 0.95 <= ratios[1] <= 1.05
    gaps = [abs(r - 1) for r in ratios]
    assert gaps[0] > gaps[1] > gaps[2]
    assert a_eps_z(1e-2, -2.0, 0.1, 2.5, m) >= 0
    with pytest.raises(ValueError):
        a_eps_z(1e-2, 0.0, 0.1, 2.5, m)


def test_a_eps_z_independent_quadrature():
    m, eps = M25, 1e-2
    f = lambda s: (eps * s) ** 1.5 / ((eps * s) ** 2.5 + 1) * math.exp(-s)
    ref, _ = integrate.quad(f, 0, 0.1 / eps**1.5, limit=500)
    assert math.isclose(a_eps_z(eps, 1.0, 0.1, 2.5, m), m * ref, rel_tol=1e-8)


def test_operator_normalization_is_not_the_symbol_normalization():
    c = fractional_constants(1.5)
    assert math.isclose(c.c_standard * c.A, 1.0)
    # m Gamma(alpha+1)/c_operator is far from kappa: the two normalizations differ
    assert c.m * c.gamma_alpha_plus_1 / operator_normalization(1.5) > 10 * c.kappa


def test_discrete_kappa_tends_to_kappa():
    m = M25
    k50 = discrete_kappa(VelocityGrid(50, 200), 1.5, m)
    k5000 = discrete_kappa(VelocityGrid(5000, 20000), 1.5, m)
    kappa = compute_kappa(1.5, 1, m)
    assert k50 < k5000 < kappa
    assert abs(k5000 - kappa) < abs(k50 - kappa)
    s = tail_flux_sum(VelocityGrid(50, 200), 1.5, m, np.array([0.0, 0.1, 1.0]))
    assert s[0] == pytest.approx(k50) and s[0] > s[1] > s[2] > 0
