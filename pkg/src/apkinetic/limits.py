"""Implicit Euler solvers for the diffusion and fractional diffusion limits.

Both act diagonally on Fourier modes:

    DS :  rho^{n+1}(k) = rho^n(k) / (1 + dt D k^2)
    ADS:  rho^{n+1}(k) = rho^n(k) / (1 + dt kappa |k|^alpha)

By default the constants are the discrete velocity sums of the kinetic
schemes, so kinetic-vs-limit gaps measure time and scaling error only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import compute_kappa, discrete_kappa
from .grids import GAUSSIAN, HEAVY_TAIL, Equilibrium, SpatialGrid, discrete_moment

DS = "ds"
ADS = "ads"


@dataclass(frozen=True)
class LimitConfig:
    """``coeff`` is ``D`` for DS and ``kappa`` for ADS."""

    kind: str
    coeff: float
    alpha: float
    dt: float

    def __post_init__(self):
        if self.kind not in (DS, ADS):
            raise ValueError(f"unknown limit solver {self.kind!r}")
        if not self.coeff > 0:
            raise ValueError("the diffusion constant must be positive")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.kind == DS and self.alpha != 2.0:
            raise ValueError("DS is the alpha = 2 limit")

    def symbol(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        if self.kind == DS:
            return self.coeff * k**2
        return self.coeff * np.abs(k) ** self.alpha

    @classmethod
    def from_equilibrium(cls, kind: str, eq: Equilibrium, dt: float, continuous: bool = False):
        """Build DS from ``D_h = <v^2 M>`` or ADS from the discrete ``kappa_h``.

        With ``continuous=True`` the exact constants (``D = 1`` for the Gaussian,
        ``kappa`` by quadrature for the heavy tail) are used instead.
        """
        if kind == DS:
            if continuous:
                if eq.kind != GAUSSIAN:
                    raise ValueError("the continuous second moment is only finite for the Gaussian")
                return cls(DS, 1.0, 2.0, dt)
            return cls(DS, discrete_moment(eq, 2), 2.0, dt)
        if eq.kind != HEAVY_TAIL:
            raise ValueError("ADS needs a heavy-tailed equilibrium")
        alpha = eq.alpha
        coeff = compute_kappa(alpha, 1, eq.m) if continuous else discrete_kappa(eq.grid, alpha, eq.m)
        return cls(ADS, coeff, alpha, dt)


def _step(rho, cfg: LimitConfig, modes):
    return np.asarray(rho) / (1.0 + cfg.dt * cfg.symbol(modes))


def ds_step(rho, cfg: LimitConfig, modes) -> np.ndarray:
    if cfg.kind != DS:
        raise ValueError("ds_step needs a DS configuration")
    return _step(rho, cfg, modes)


def ads_step(rho, cfg: LimitConfig, modes) -> np.ndarray:
    if cfg.kind != ADS:
        raise ValueError("ads_step needs an ADS configuration")
    return _step(rho, cfg, modes)


def run_limit(rho0, cfg: LimitConfig, sgrid: SpatialGrid, nsteps: int) -> np.ndarray:
    """``nsteps`` implicit Euler steps, applied as one power of the amplification factor per mode."""
    factor = 1.0 / (1.0 + cfg.dt * cfg.symbol(sgrid.modes))
    rho = np.asarray(rho0, dtype=complex)
    for _ in range(nsteps):
        rho = rho * factor
    return rho


def initial_amplitude(k: float) -> complex:
    """Fourier coefficient of ``1 + sin(pi x)`` at mode ``k``."""
    if k == 0:
        return 1.0 + 0j
    if math.isclose(abs(k), math.pi, rel_tol=0, abs_tol=1e-12):
        return -0.5j if k > 0 else 0.5j
    return 0j


def exact_limit_solution(t: float, k: float, cfg: LimitConfig) -> complex:
    """Exact amplitude ``exp(-sigma(k) t) rho0_hat(k)`` for the datum ``1 + sin(pi x)``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return complex(initial_amplitude(k) * math.exp(-float(cfg.symbol(k)) * t))
