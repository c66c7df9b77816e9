import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from apkinetic.grids import SpatialGrid, initial_density, make_equilibrium, to_spectral, from_spectral
from apkinetic.limits import ADS, DS, LimitConfig, run_limit
from apkinetic.micromacro import (
    C_CFL,
    CENTERED2,
    MMSA,
    MMSD,
    UPWIND1,
    CFLWarning,
    DerivativeOperator,
    MicroMacroState,
    MicroMacroStepper,
    cfl_max_dt,
    mmsa_step,
    mmsd_step,
    stability_max_dt,
)


def test_derivative_operators_on_sine():
    sg = SpatialGrid(256)
    x = sg.nodes
    f = np.sin(np.pi * x)
    exact = np.pi * np.cos(np.pi * x)
    c = DerivativeOperator(CENTERED2, sg.dx).apply(f)
    u = DerivativeOperator(UPWIND1, sg.dx).apply(f)
    assert np.max(np.abs(c - exact)) < (np.pi * sg.dx) ** 2 * np.pi / 6 * 1.01
    assert np.max(np.abs(u - exact)) < np.pi**2 * sg.dx
    with pytest.raises(ValueError):
        DerivativeOperator("spectral", sg.dx)


def test_upwind_direction():
    dop = DerivativeOperator(UPWIND1, 1.0)
    f = np.arange(6.0)[:, None] ** 2 * np.ones((1, 2))
    out = dop.apply(f, np.array([-1.0, 1.0]))
    assert out[2, 1] == 4 - 1 and out[2, 0] == 9 - 4


def test_cfl_formula_and_stability_bound(gauss):
    sg = SpatialGrid(32)
    s = MicroMacroState.initial(sg, gauss, 1e-2, 1e-4)
    vmax = float(np.max(np.abs(gauss.grid.nodes)))
    assert cfl_max_dt(s) == pytest.approx(C_CFL * max(1e-4, sg.dx * 1e-2 / vmax))
    assert stability_max_dt(1e-8, 2.0, sg.dx, vmax) == math.inf
    assert stability_max_dt(1e-8, 2.0, sg.dx, vmax, diffusion=1.0) == pytest.approx(2 * sg.dx**2)
    b = stability_max_dt(0.1, 1.5, sg.dx, vmax)
    lam = b / (0.1**1.5 + b)
    assert 0.1 * lam * vmax / sg.dx == pytest.approx(1 - lam / 2)


def test_unstable_step_warns_or_raises(heavy):
    sg = SpatialGrid(32)
    with pytest.warns(CFLWarning):
        MicroMacroStepper(MMSA, sg, heavy, 0.1, 1e-2)
    with pytest.raises(ValueError):
        MicroMacroStepper(MMSA, sg, heavy, 0.1, 1e-2, strict_cfl=True)


def test_requirements(gauss, heavy):
    sg = SpatialGrid(16)
    with pytest.raises(ValueError):
        MicroMacroStepper(MMSA, sg, gauss, 1e-2, 1e-5)
    with pytest.raises(ValueError):
        MicroMacroStepper("mm", sg, heavy, 1e-2, 1e-5)


def test_initial_state(heavy):
    s = MicroMacroState.initial(SpatialGrid(32), heavy, 0.1, 1e-3)
    assert not s.g.any()
    assert np.allclose(s.rho, 1 + np.sin(np.pi * SpatialGrid(32).nodes))


def test_constant_density_is_steady(gauss):
    sg = SpatialGrid(16)
    s = MicroMacroState.initial(sg, gauss, 0.5, 1e-4)
    s = type(s)(rho=np.ones(16), g=s.g, eps=s.eps, dt=s.dt, alpha=s.alpha, sgrid=sg, eq=gauss)
    out = MicroMacroStepper(MMSD, sg, gauss, 0.5, 1e-4).run(s, 5)
    assert np.max(np.abs(out.rho - 1)) < 1e-15 and np.max(np.abs(out.g)) < 1e-15


def test_mmsd_near_ds(gauss):
    sg = SpatialGrid(64)
    dt, n = 1e-4, 1000
    out = MicroMacroStepper(MMSD, sg, gauss, 1e-6, dt).run(MicroMacroState.initial(sg, gauss, 1e-6, dt), n)
    ref = run_limit(to_spectral(initial_density(sg)), LimitConfig.from_equilibrium(DS, gauss, dt), sg, n)
    r = to_spectral(out.rho)
    assert np.linalg.norm(r - ref) / np.linalg.norm(ref) < 1e-2


def test_mmsa_near_ads(heavy):
    sg = SpatialGrid(32)
    out = MicroMacroStepper(MMSA, sg, heavy, 1e-8, 1e-3).run(MicroMacroState.initial(sg, heavy, 1e-8, 1e-3), 100)
    ref = run_limit(to_spectral(initial_density(sg)), LimitConfig.from_equilibrium(ADS, heavy, 1e-3), sg, 100)
    r = to_spectral(out.rho)
    assert np.linalg.norm(r - ref) / np.linalg.norm(ref) < 1e-8
    assert np.max(np.abs(out.g)) < 1e-6


def test_step_helpers(gauss, heavy):
    sg = SpatialGrid(16)
    s = MicroMacroState.initial(sg, gauss, 0.5, 1e-4)
    assert np.array_equal(mmsd_step(s).rho, MicroMacroStepper(MMSD, sg, gauss, 0.5, 1e-4).step(s).rho)
    h = MicroMacroState.initial(sg, heavy, 1e-3, 1e-4)
    assert mmsa_step(h).steps == 1


@settings(max_examples=20, deadline=None)
@given(eps=st.floats(1e-6, 1.0), frac=st.floats(0.05, 0.9))
def test_mass_and_zero_g_mean(eps, frac):
    eq = make_equilibrium("gaussian")
    sg = SpatialGrid(16)
    vmax = float(np.max(np.abs(eq.grid.nodes)))
    dt = frac * min(stability_max_dt(eps, 2.0, sg.dx, vmax, 1.0), 1e-2)
    with warnings.catch_warnings():
        warnings.simplefilter("error", CFLWarning)
        st_ = MicroMacroStepper(MMSD, sg, eq, eps, dt)
    out = st_.run(MicroMacroState.initial(sg, eq, eps, dt), 20)
    assert abs(out.rho.mean() - 1.0) < 1e-12
    # g stays orthogonal to constants in v
    assert np.max(np.abs(out.g @ eq.grid.weights)) < 1e-12
    assert np.max(np.abs(out.rho - 1)) <= 1 + 1e-9
