"""Spatial and velocity grids, equilibria, and the spatial Fourier transform.

All spectral arrays are stored in FFT order: index ``j`` of a length-``nx``
array holds the mode ``k = pi * fftfreq(nx, 1/nx)[j] / L``.  The forward
transform carries the ``1/nx`` factor so that the zero mode is the spatial
mean::

    rho_hat(k) = (1/nx) * sum_j rho(x_j) * exp(-1j * k * x_j)

Phase-space arrays have shape ``(nx, nv)``: mode first, velocity node second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

GAUSSIAN = "gaussian"
HEAVY_TAIL = "heavytail"
EQUILIBRIUM_KINDS = (GAUSSIAN, HEAVY_TAIL)


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform periodic grid on ``[-L, L)``."""

    nx: int = 64
    half_width: float = 1.0

    def __post_init__(self):
        if self.nx <= 0 or self.nx % 2:
            raise ValueError(f"nx must be a positive even integer, got {self.nx}")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.nx

    @property
    def nodes(self) -> np.ndarray:
        return -self.half_width + self.dx * np.arange(self.nx)

    @property
    def modes(self) -> np.ndarray:
        """Wavenumbers in FFT order; the first entry is the mean mode."""
        return np.pi * np.fft.fftfreq(self.nx, d=1.0 / self.nx) / self.half_width

    def mode_index(self, k: float) -> int:
        idx = np.flatnonzero(np.isclose(self.modes, k, rtol=0, atol=1e-9))
        if idx.size == 0:
            raise KeyError(f"mode {k} is not on the grid")
        return int(idx[0])


@dataclass(frozen=True)
class VelocityGrid:
    """Midpoint quadrature on ``[-vmax, vmax]`` with ``nv`` cells.

    Nodes sit at cell centres, so the grid is symmetric and ``v = 0`` is not a
    node when ``nv`` is even.  Odd moments of even functions cancel exactly.
    """

    vmax: float
    nv: int

    def __post_init__(self):
        if self.nv <= 0 or self.nv % 2:
            raise ValueError(f"nv must be a positive even integer, got {self.nv}")
        if self.vmax <= 0:
            raise ValueError("vmax must be positive")

    @property
    def dv(self) -> float:
        return 2.0 * self.vmax / self.nv

    @property
    def nodes(self) -> np.ndarray:
        half = self.dv * (np.arange(self.nv // 2) + 0.5)
        # built from one half so the symmetry is bitwise exact
        return np.concatenate([-half[::-1], half])

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.nv, self.dv)


def default_velocity_grid(kind: str) -> VelocityGrid:
    if kind == GAUSSIAN:
        return VelocityGrid(vmax=10.0, nv=20)
    if kind == HEAVY_TAIL:
        return VelocityGrid(vmax=50.0, nv=200)
    raise ValueError(f"unknown equilibrium kind {kind!r}")


def heavy_tail_normalization(beta: float, d: int = 1) -> float:
    """Return ``m`` such that ``m / (1 + |v|^beta)`` has unit mass on R.

    The integral is split at ``|v| = 1``; the tail is mapped onto ``[0, 1]``
    by ``v -> 1/u`` so both pieces are finite-interval integrals.
    """
    if d != 1:
        raise NotImplementedError("equilibria are only built in dimension 1")
    if not d < beta < d + 2:
        raise ValueError(f"beta must lie in ({d}, {d + 2}), got {beta}")
    inner, _ = integrate.quad(lambda v: 1.0 / (1.0 + v**beta), 0.0, 1.0, epsabs=0, epsrel=1e-13)
    # int_1^inf dv/(1+v^b) = int_0^1 u^(b-2)/(u^b+1) du
    outer, _ = integrate.quad(
        lambda u: u ** (beta - 2.0) / (u**beta + 1.0), 0.0, 1.0, epsabs=0, epsrel=1e-13, limit=200
    )
    return 1.0 / (2.0 * (inner + outer))


@dataclass(frozen=True, eq=False)
class Equilibrium:
    """Equilibrium sampled on a velocity grid.

    ``values`` are rescaled so that the discrete mass is one; ``m`` keeps the
    continuous normalization of ``m / (1 + |v|^beta)`` (``nan`` for the
    Gaussian) and ``raw_mass`` the discrete mass before rescaling.
    """

    kind: str
    grid: VelocityGrid
    values: np.ndarray
    m: float
    beta: float | None = None
    raw_mass: float = 1.0
    d: int = field(default=1)

    @property
    def alpha(self) -> float:
        return 2.0 if self.kind == GAUSSIAN else self.beta - self.d

    def mass(self) -> float:
        return float(np.dot(self.grid.weights, self.values))


def make_equilibrium(kind: str, grid: VelocityGrid | None = None, beta: float | None = None) -> Equilibrium:
    """Sample and discretely renormalize a Gaussian or heavy-tailed equilibrium.

    Parameters
    ----------
    kind : {"gaussian", "heavytail"}
    grid : VelocityGrid, optional
        Defaults to ``vmax=10, nv=20`` (Gaussian) or ``vmax=50, nv=200``.
    beta : float, optional
        Tail exponent, required in ``(1, 3)`` for the heavy tail; defaults to 2.5.
    """
    if kind not in EQUILIBRIUM_KINDS:
        raise ValueError(f"unknown equilibrium kind {kind!r}")
    grid = grid or default_velocity_grid(kind)
    v = grid.nodes
    if not np.array_equal(v, -v[::-1]):
        raise ValueError("velocity grid is not symmetric")
    if kind == GAUSSIAN:
        samples = np.exp(-0.5 * v**2) / math.sqrt(2.0 * math.pi)
        m = float("nan")
        beta = None
    else:
        beta = 2.5 if beta is None else float(beta)
        m = heavy_tail_normalization(beta)
        samples = m / (1.0 + np.abs(v) ** beta)
    raw_mass = float(np.dot(grid.weights, samples))
    values = samples / raw_mass
    values.setflags(write=False)
    return Equilibrium(kind=kind, grid=grid, values=values, m=m, beta=beta, raw_mass=raw_mass)


def discrete_moment(eq: Equilibrium, p: int) -> float:
    """``sum_i w_i v_i^p M_i`` on the equilibrium's own grid."""
    if not 0 <= p <= 4:
        raise ValueError("moment order must be in [0, 4]")
    v = eq.grid.nodes
    return float(np.dot(eq.grid.weights, v**p * eq.values))


def _phase(nx: int, ndim: int, axis: int) -> np.ndarray:
    if nx % 2:
        raise ValueError(f"transform length must be even, got {nx}")
    # x_0 = -L shifts mode j by a phase (-1)^j
    sign = 1.0 - 2.0 * (np.arange(nx) % 2)
    shape = [1] * ndim
    shape[axis] = nx
    return sign.reshape(shape)


def to_spectral(values, axis: int = -1) -> np.ndarray:
    """Forward transform of nodal values with the 1/nx convention."""
    values = np.asarray(values)
    nx = values.shape[axis]
    return np.fft.fft(values, axis=axis) * _phase(nx, values.ndim, axis) / nx


def from_spectral(amps, axis: int = -1) -> np.ndarray:
    """Inverse of :func:`to_spectral`; returns complex nodal values."""
    amps = np.asarray(amps)
    nx = amps.shape[axis]
    return np.fft.ifft(amps * _phase(nx, amps.ndim, axis), axis=axis) * nx


def density_from_spectral(amps) -> np.ndarray:
    """Physical density from spectral amplitudes, dropping roundoff imaginary parts."""
    return from_spectral(amps).real


def initial_density(sgrid: SpatialGrid) -> np.ndarray:
    """Nodal values of ``1 + sin(pi x)``."""
    return 1.0 + np.sin(np.pi * sgrid.nodes)


def initial_condition(sgrid: SpatialGrid, eq: Equilibrium) -> np.ndarray:
    """Spectral phase-space data ``f0_hat(k, v_i) = rho0_hat(k) * M_i``, shape ``(nx, nv)``."""
    rho_hat = to_spectral(initial_density(sgrid))
    return np.outer(rho_hat, eq.values)


def reduce_density(f_hat: np.ndarray, eq: Equilibrium) -> np.ndarray:
    """``sum_i w_i f(., v_i)``; works on spectral or physical phase-space arrays."""
    return f_hat @ eq.grid.weights
