"""Fully implicit Fourier-diagonal steppers ISD and ISA.

Both schemes treat transport and relaxation implicitly,

    eps^alpha (f^{n+1} - f^n)/dt + i eps k v f^{n+1} = rho^{n+1} M - f^{n+1},

which gives ``f^{n+1} (1 + i a) = (1 - lam) f^n + lam rho^{n+1} M`` with
``lam = dt/(eps^alpha + dt)`` and ``a = lam eps k v``.  Taking the velocity
average closes a scalar equation for ``rho^{n+1}`` in each mode.  ISA evaluates
the flux part of that equation after the change of variables ``w = eps lam k v``,
which keeps the heavy tail visible on a truncated grid.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .constants import tail_flux_sum
from .grids import HEAVY_TAIL, Equilibrium, SpatialGrid, VelocityGrid, initial_condition, reduce_density

ISD = "isd"
ISA = "isa"


def relaxation_weights(eps: float, dt: float, alpha: float) -> tuple[float, float]:
    """Return ``(lam, 1 - lam)``; the second is formed directly to avoid cancellation."""
    if eps <= 0:
        raise ValueError("eps must be positive (lam = 1 is degenerate)")
    if dt <= 0:
        raise ValueError("dt must be positive")
    ea = eps**alpha
    return dt / (ea + dt), ea / (ea + dt)


@dataclass(frozen=True, eq=False)
class ImplicitState:
    """Spectral phase-space state of an implicit scheme.

    ``f`` has shape ``(nx, nv)`` and ``rho`` is its velocity reduction.
    """

    f: np.ndarray
    rho: np.ndarray
    eps: float
    dt: float
    alpha: float
    sgrid: SpatialGrid
    eq: Equilibrium
    t: float = 0.0
    steps: int = 0

    @property
    def lam(self) -> float:
        return relaxation_weights(self.eps, self.dt, self.alpha)[0]

    @classmethod
    def initial(cls, sgrid, eq, eps, dt, alpha=None):
        alpha = eq.alpha if alpha is None else float(alpha)
        f0 = initial_condition(sgrid, eq)
        return cls(f=f0, rho=reduce_density(f0, eq), eps=float(eps), dt=float(dt), alpha=alpha, sgrid=sgrid, eq=eq)


class ImplicitStepper:
    """Precomputed per-mode factors of ISD or ISA for fixed ``(eps, dt, alpha)``.

    Parameters
    ----------
    kind : {"isd", "isa"}
    sgrid, eq : grids and equilibrium
    eps, dt, alpha : scaling parameters; ``alpha`` defaults to the equilibrium's
    wgrid : VelocityGrid, optional
        Quadrature for the rescaled flux integral of ISA; defaults to the
        equilibrium's own velocity grid.
    """

    def __init__(self, kind, sgrid, eq, eps, dt, alpha=None, wgrid: VelocityGrid | None = None):
        if kind not in (ISD, ISA):
            raise ValueError(f"unknown implicit scheme {kind!r}")
        alpha = eq.alpha if alpha is None else float(alpha)
        if kind == ISA:
            if eq.kind != HEAVY_TAIL:
                raise ValueError("ISA needs a heavy-tailed equilibrium")
            if abs(eq.alpha - alpha) > 1e-12:
                raise ValueError(f"ISA needs beta = alpha + 1 (alpha={alpha}, beta={eq.beta})")
        self.kind, self.sgrid, self.eq = kind, sgrid, eq
        self.eps, self.dt, self.alpha = float(eps), float(dt), alpha
        self.lam, self.one_minus_lam = relaxation_weights(self.eps, self.dt, alpha)

        k = sgrid.modes
        v = eq.grid.nodes
        w = eq.grid.weights
        a = self.lam * self.eps * np.outer(k, v)
        a2 = a * a
        self.inv = 1.0 / (1.0 + 1j * a)
        # <M/(1+ia)> is real by symmetry; summing the real form keeps it exactly so
        base = (w * eq.values / (1.0 + a2)).sum(axis=1)
        if kind == ISD:
            # <a^2 M/(1+a^2)>/(1-lam) with a^2/(1-lam) = dt lam eps^(2-alpha) k^2 v^2
            flux = self.dt * self.lam * self.eps ** (2.0 - alpha) * k**2 * (w * v**2 * eq.values / (1.0 + a2)).sum(axis=1)
        else:
            wgrid = wgrid or eq.grid
            ak = np.abs(k)
            theta = tail_flux_sum(wgrid, alpha, eq.m, self.eps * self.lam * ak)
            # (eps lam |k|)^alpha/(1-lam) = dt lam^(alpha-1) |k|^alpha
            flux = self.dt * self.lam ** (alpha - 1.0) * ak**alpha * theta
        self.denominator = base + flux

    def step(self, state: ImplicitState) -> ImplicitState:
        eq = self.eq
        w = eq.grid.weights
        rho_new = (state.f * self.inv) @ w / self.denominator
        f_new = (self.one_minus_lam * state.f + self.lam * np.outer(rho_new, eq.values)) * self.inv
        return replace(state, f=f_new, rho=rho_new, t=state.t + self.dt, steps=state.steps + 1)

    def run(self, state: ImplicitState, nsteps: int) -> ImplicitState:
        for _ in range(nsteps):
            state = self.step(state)
        return state


def isd_step(state: ImplicitState) -> ImplicitState:
    """One ISD step (implicit scheme for the diffusion scaling)."""
    return ImplicitStepper(ISD, state.sgrid, state.eq, state.eps, state.dt, state.alpha).step(state)


def isa_step(state: ImplicitState, wgrid: VelocityGrid | None = None) -> ImplicitState:
    """One ISA step (implicit scheme with the rescaled flux integral)."""
    return ImplicitStepper(ISA, state.sgrid, state.eq, state.eps, state.dt, state.alpha, wgrid).step(state)
