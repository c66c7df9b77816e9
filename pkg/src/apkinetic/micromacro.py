"""Micro-macro steppers MMSD and MMSA in physical space.

``f = rho M + g`` with ``<g> = 0``.  The fluctuation is advanced with explicit
upwind transport and implicit relaxation,

    g^{n+1} = (1 - lam) g^n - eps lam (v d_x rho^n M + v d_x g^n - <v d_x g^n> M),

where ``lam = dt/(eps^alpha + dt)`` (so ``eps lam`` is ``dt eps^(1-alpha)``
divided by ``1 + dt/eps^alpha``).  MMSD then updates
``rho^{n+1} = rho^n - dt eps^(1-alpha) <v d_x g^{n+1}>``; MMSA solves the
density mode-wise in Fourier space with the fractional divisor
``1 + dt lam^alpha |k|^alpha Theta(eps lam |k|)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .constants import tail_flux_sum
from .grids import HEAVY_TAIL, Equilibrium, SpatialGrid, VelocityGrid, from_spectral, initial_density, to_spectral
from .implicit import relaxation_weights

MMSD = "mmsd"
MMSA = "mmsa"
UPWIND1 = "upwind1"
CENTERED2 = "centered2"
C_CFL = 0.9


class CFLWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class DerivativeOperator:
    """Periodic first-derivative stencil along axis 0."""

    kind: str
    dx: float

    def __post_init__(self):
        if self.kind not in (UPWIND1, CENTERED2):
            raise ValueError(f"unknown stencil {self.kind!r}")
        if self.dx <= 0:
            raise ValueError("dx must be positive")

    def apply(self, field, velocity=None):
        """``d_x field``; the upwind stencil looks against the sign of ``velocity``.

        ``field`` has shape ``(nx,)`` or ``(nx, nv)``; ``velocity`` (shape ``(nv,)``)
        is required for the upwind stencil on phase-space fields.
        """
        field = np.asarray(field)
        if self.kind == CENTERED2:
            return (np.roll(field, -1, axis=0) - np.roll(field, 1, axis=0)) / (2.0 * self.dx)
        back = (field - np.roll(field, 1, axis=0)) / self.dx
        fwd = (np.roll(field, -1, axis=0) - field) / self.dx
        if velocity is None:
            return back
        return np.where(np.asarray(velocity) > 0, back, fwd)


@dataclass(frozen=True, eq=False)
class MicroMacroState:
    rho: np.ndarray
    g: np.ndarray
    eps: float
    dt: float
    alpha: float
    sgrid: SpatialGrid
    eq: Equilibrium
    t: float = 0.0
    steps: int = 0

    @classmethod
    def initial(cls, sgrid, eq, eps, dt, alpha=None):
        """Equilibrium data ``f0 = (1 + sin(pi x)) M``, hence ``g0 = 0``."""
        alpha = eq.alpha if alpha is None else float(alpha)
        rho = initial_density(sgrid)
        g = np.zeros((sgrid.nx, eq.grid.nv))
        return cls(rho=rho, g=g, eps=float(eps), dt=float(dt), alpha=alpha, sgrid=sgrid, eq=eq)


def cfl_max_dt(state: MicroMacroState) -> float:
    """``C_cfl * max(eps^alpha, dx eps^(alpha-1) / v_max)``.

    This is the damping-relaxed transport bound; :func:`stability_max_dt`
    gives the sharper von Neumann limit of the upwind update.
    """
    eps, alpha = state.eps, state.alpha
    vmax = float(np.max(np.abs(state.eq.grid.nodes)))
    return C_CFL * max(eps**alpha, state.sgrid.dx * eps ** (alpha - 1.0) / vmax)


def stability_max_dt(eps: float, alpha: float, dx: float, vmax: float, diffusion: float | None = None) -> float:
    """Largest stable ``dt`` of the damped upwind fluctuation update.

    The amplification factor ``1 - lam - c + c e^{-i theta}`` with
    ``c = eps lam vmax / dx`` stays in the unit disc iff ``c <= 1 - lam/2``.
    With ``diffusion`` given, the explicit-in-rho diffusion limit of MMSD adds
    ``dt <= 2 dx^2 / diffusion``.  Returns ``inf`` when no bound applies.
    """
    cap = 1.0 / (eps * vmax / dx + 0.5)
    bound = math.inf if cap >= 1.0 else eps**alpha * cap / (1.0 - cap)
    if diffusion is not None and diffusion > 0:
        bound = min(bound, 2.0 * dx * dx / diffusion)
    return bound


class MicroMacroStepper:
    """Precomputed operators of MMSD or MMSA for fixed ``(eps, dt, alpha)``.

    Parameters
    ----------
    kind : {"mmsd", "mmsa"}
    stencil : str
        Stencil for the transport of ``g`` (``"upwind1"`` by default); the
        density gradient in the ``g`` source always uses ``"centered2"``.
    strict_cfl : bool
        Raise instead of warning when ``dt`` exceeds the stability bound.
    """

    def __init__(self, kind, sgrid, eq, eps, dt, alpha=None, wgrid=None, stencil=UPWIND1, strict_cfl=False):
        if kind not in (MMSD, MMSA):
            raise ValueError(f"unknown micro-macro scheme {kind!r}")
        alpha = eq.alpha if alpha is None else float(alpha)
        if kind == MMSA:
            if eq.kind != HEAVY_TAIL:
                raise ValueError("MMSA needs a heavy-tailed equilibrium")
            if abs(eq.alpha - alpha) > 1e-12:
                raise ValueError(f"MMSA needs beta = alpha + 1 (alpha={alpha}, beta={eq.beta})")
        self.kind, self.sgrid, self.eq = kind, sgrid, eq
        self.eps, self.dt, self.alpha = float(eps), float(dt), alpha
        self.lam, self.one_minus_lam = relaxation_weights(self.eps, self.dt, alpha)
        self.transport = DerivativeOperator(stencil, sgrid.dx)
        self.gradient = DerivativeOperator(CENTERED2, sgrid.dx)
        self.v = eq.grid.nodes
        self.vmax = float(np.max(np.abs(self.v)))
        if kind == MMSA:
            wgrid = wgrid or eq.grid
            ak = np.abs(sgrid.modes)
            theta = tail_flux_sum(wgrid, alpha, eq.m, self.eps * self.lam * ak)
            self.divisor = 1.0 + self.dt * self.lam**alpha * ak**alpha * theta
        d2 = float(np.dot(eq.grid.weights, self.v**2 * eq.values)) if kind == MMSD else None
        self.max_stable_dt = stability_max_dt(self.eps, alpha, sgrid.dx, self.vmax, d2)
        if self.dt > self.max_stable_dt:
            msg = f"dt={self.dt:g} exceeds the stable step {self.max_stable_dt:.3g} (eps={self.eps:g}, alpha={alpha:g})"
            if strict_cfl:
                raise ValueError(msg)
            warnings.warn(msg, CFLWarning, stacklevel=2)

    def _flux(self, g):
        """``<v d_x g>`` with upwind transport."""
        return (self.v * self.transport.apply(g, self.v)) @ self.eq.grid.weights

    def _advance_g(self, rho, g):
        M, w = self.eq.values, self.eq.grid.weights
        vdg = self.v * self.transport.apply(g, self.v)
        proj = vdg @ w
        src = np.outer(self.gradient.apply(rho), self.v * M)
        g_new = self.one_minus_lam * g - self.eps * self.lam * (src + vdg - np.outer(proj, M))
        return g_new, proj

    def step(self, state: MicroMacroState) -> MicroMacroState:
        g_new, flux_old = self._advance_g(state.rho, state.g)
        if self.kind == MMSD:
            scale = self.dt * self.eps ** (1.0 - self.alpha)
            rho_new = state.rho - scale * self._flux(g_new)
        else:
            rho_hat = to_spectral(state.rho) - self.eps * self.lam * to_spectral(flux_old)
            rho_new = from_spectral(rho_hat / self.divisor).real
        return replace(state, rho=rho_new, g=g_new, t=state.t + self.dt, steps=state.steps + 1)

    def run(self, state: MicroMacroState, nsteps: int) -> MicroMacroState:
        for _ in range(nsteps):
            state = self.step(state)
        return state


def mmsd_step(state: MicroMacroState, stencil=UPWIND1) -> MicroMacroState:
    return MicroMacroStepper(MMSD, state.sgrid, state.eq, state.eps, state.dt, state.alpha, stencil=stencil).step(state)


def mmsa_step(state: MicroMacroState, wgrid: VelocityGrid | None = None, stencil=UPWIND1) -> MicroMacroState:
    return MicroMacroStepper(MMSA, state.sgrid, state.eq, state.eps, state.dt, state.alpha, wgrid, stencil).step(state)
