"""Asymptotic-preserving solvers for the scaled BGK equation with Gaussian and heavy-tailed equilibria."""

from .constants import (
    C_of_s,
    FractionalConstants,
    a_eps_z,
    compute_kappa,
    compute_symbol_constant,
    fractional_constants,
    gamma,
    heavy_tail_symbol,
    laplace_of_C,
)
from .duhamel import (
    CoefficientTable,
    DuhamelSolver,
    HistoryBuffer,
    build_table,
    cn_variant_step,
    coeffs_anomalous,
    coeffs_diffusion,
    duhamel_step,
    initial_layer,
)
from .grids import (
    Equilibrium,
    SpatialGrid,
    VelocityGrid,
    discrete_moment,
    from_spectral,
    initial_condition,
    make_equilibrium,
    to_spectral,
)
from .harness import (
    ExperimentConfig,
    emit_csv,
    fit_slope,
    relative_error,
    run_scheme,
    sweep_dt,
    sweep_epsilon,
    uniform_study,
)
from .implicit import ImplicitState, ImplicitStepper, isa_step, isd_step
from .limits import LimitConfig, ads_step, ds_step, exact_limit_solution
from .micromacro import DerivativeOperator, MicroMacroState, MicroMacroStepper, cfl_max_dt, mmsa_step, mmsd_step

__version__ = "0.1.0"
