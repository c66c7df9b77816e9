"""Duhamel (memory-term) schemes DSD and DSA and their Crank-Nicolson variant.

The exact solution of the Fourier-transformed kinetic equation gives

    rho(t, k) = A0(t, k) + eps^-alpha int_0^t <exp(-(t-s) z / eps^alpha) M> rho(s, k) ds,

with ``z = 1 + i eps k v``.  Interpolating ``rho`` linearly on each time
cell and integrating the exponential exactly yields

    (1 - c_0) rho^{n+1} = A0(t_{n+1}) + b_0 rho^n + sum_{j=1}^n (c_j rho^{n+1-j} + b_j rho^{n-j}),

    b_j = <exp(-j x) h g_b(x) M>,   c_j = <exp(-j x) h g_c(x) M>,   x = h z,  h = dt/eps^alpha,

    g_b(x) = (1 - (1+x) e^-x) / x^2,   g_c(x) = (x - 1 + e^-x) / x^2.

For symmetric equilibria the coefficients are real.  DSA evaluates the
velocity average after the substitution ``w = eps |k| v``, which turns
``<F(eps k v) M>`` into ``F(0) (1 - mu) + sum_i nu_i F(w_i)`` with
``nu_i = (eps|k|)^alpha q_i m / ((eps|k|)^beta + |w_i|^beta)`` and ``mu = sum nu_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grids import HEAVY_TAIL, Equilibrium, SpatialGrid, VelocityGrid, initial_condition

DSD = "dsd"
DSA = "dsa"

# below this real part exp() underflows; flushing first avoids 0 * inf
_EXP_FLOOR = -745.0
# exp(-t_j/eps^alpha) < 1e-16 beyond this scaled time
_TRUNCATE_AT = math.log(1e16)
_SERIES_CUT = 0.1
_SERIES_TERMS = 14


class DegenerateStepError(ArithmeticError):
    pass


def _safe_exp(arg):
    arg = np.asarray(arg, dtype=complex)
    out = np.zeros_like(arg)
    live = arg.real >= _EXP_FLOOR
    out[live] = np.exp(arg[live])
    return out


def _psi1(x):
    """``(1 - e^-x)/x`` for ``Re x > 0``."""
    x = np.asarray(x, dtype=complex)
    out = np.empty_like(x)
    far = x.real > -_EXP_FLOOR
    out[far] = 1.0 / x[far]
    out[~far] = -np.expm1(-x[~far]) / x[~far]
    return out


def _series_coefficients():
    n = np.arange(2, 2 + _SERIES_TERMS)
    sign = (-1.0) ** n
    fact = np.array([math.factorial(int(i)) for i in n], dtype=float)
    return sign * (n - 1) / fact, sign / fact


_GB_SERIES, _GC_SERIES = _series_coefficients()


def time_kernels(x):
    """``(g_b(x), g_c(x))`` evaluated without cancellation for small ``|x|``."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < _SERIES_CUT
    xs = np.where(small, 1.0, x)
    e = _safe_exp(-xs)
    gb = (1.0 - (1.0 + xs) * e) / xs**2
    gc = (xs - 1.0 + e) / xs**2
    if small.any():
        xt = x[small]
        # Horner on the Taylor series, highest power first
        pb = np.zeros_like(xt)
        pc = np.zeros_like(xt)
        for cb, cc in zip(_GB_SERIES[::-1], _GC_SERIES[::-1]):
            pb = pb * xt + cb
            pc = pc * xt + cc
        gb[small] = pb
        gc[small] = pc
    return gb, gc


def _check(eps, dt, alpha):
    if eps <= 0 or dt <= 0:
        raise ValueError("eps and dt must be positive")
    if not 0 < alpha <= 2:
        raise ValueError("alpha must lie in (0, 2]")


def _half(grid: VelocityGrid, values):
    """Positive half of a symmetric grid: nodes and doubled weights * values."""
    h = grid.nv // 2
    return grid.nodes[h:], 2.0 * grid.weights[h:] * values[h:]


# --- diffusion scaling -------------------------------------------------------


def _diffusion_x(k, eps, dt, eq, alpha):
    h = dt / eps**alpha
    v, wm = _half(eq.grid, eq.values)
    z = 1.0 + 1j * eps * np.multiply.outer(np.atleast_1d(np.asarray(k, dtype=float)), v)
    return h, z, wm


def coeffs_diffusion(j: int, k, eps: float, dt: float, eq: Equilibrium, alpha: float = 2.0):
    """``(b_j(k), c_j(k))`` for the diffusion scaling, as real arrays over ``k``."""
    _check(eps, dt, alpha)
    h, z, wm = _diffusion_x(k, eps, dt, eq, alpha)
    x = h * z
    gb, gc = time_kernels(x)
    decay = _safe_exp(-j * x) * h
    b = (decay * gb).real @ wm
    c = (decay * gc).real @ wm
    return _squeeze(b, k), _squeeze(c, k)


def one_minus_c0_diffusion(k, eps: float, dt: float, eq: Equilibrium, alpha: float = 2.0):
    """``1 - c_0 = <[(z-1)/z + (1 - e^{-hz})/(h z^2)] M>`` without cancellation."""
    _check(eps, dt, alpha)
    h, z, wm = _diffusion_x(k, eps, dt, eq, alpha)
    a2 = (z.imag) ** 2
    val = (a2 / (1.0 + a2) + (_psi1(h * z) / z).real) @ wm
    return _squeeze(val, k)


# --- anomalous scaling -------------------------------------------------------


def substitution_weights(k, eps: float, alpha: float, m: float, wgrid: VelocityGrid):
    """``nu(k, w_i)`` on the positive half of ``wgrid`` (doubled) and ``mu(k) = sum nu``."""
    beta = alpha + 1.0
    w, q = _half(wgrid, np.ones(wgrid.nv))
    s = eps * np.abs(np.atleast_1d(np.asarray(k, dtype=float)))
    nu = (s**alpha)[:, None] * q * m / ((s**beta)[:, None] + w**beta)
    return nu, nu.sum(axis=1)


def _anomalous_setup(eps, dt, eq, alpha, wgrid):
    if eq.kind != HEAVY_TAIL:
        raise ValueError("DSA needs a heavy-tailed equilibrium")
    alpha = eq.alpha if alpha is None else float(alpha)
    _check(eps, dt, alpha)
    wgrid = wgrid or eq.grid
    h = dt / eps**alpha
    w = wgrid.nodes[wgrid.nv // 2 :]
    return alpha, wgrid, h, 1.0 + 1j * w


def coeffs_anomalous(j: int, k, eps: float, dt: float, eq: Equilibrium, wgrid: VelocityGrid | None = None, alpha=None):
    """``(b_j(k), c_j(k))`` for the anomalous scaling via the substituted variable."""
    alpha, wgrid, h, zw = _anomalous_setup(eps, dt, eq, alpha, wgrid)
    nu, mu = substitution_weights(k, eps, alpha, eq.m, wgrid)
    gb0, gc0 = time_kernels(np.array([h + 0j]))
    d0 = math.exp(-j * h) * h if j * h <= -_EXP_FLOOR else 0.0
    x = h * zw
    gb, gc = time_kernels(x)
    decay = _safe_exp(-j * x) * h
    b = d0 * gb0.real[0] * (1.0 - mu) + nu @ (decay * gb).real
    c = d0 * gc0.real[0] * (1.0 - mu) + nu @ (decay * gc).real
    return _squeeze(b, k), _squeeze(c, k)


def one_minus_c0_anomalous(k, eps: float, dt: float, eq: Equilibrium, wgrid: VelocityGrid | None = None, alpha=None):
    """``phi + sum nu [i w/z - phi + (1 - e^{-hz})/(h z^2)]`` with ``phi = (1 - e^-h)/h``."""
    alpha, wgrid, h, zw = _anomalous_setup(eps, dt, eq, alpha, wgrid)
    nu, _ = substitution_weights(k, eps, alpha, eq.m, wgrid)
    phi = float(_psi1(np.array([h + 0j])).real[0])
    w2 = zw.imag**2
    kern = w2 / (1.0 + w2) - phi + (_psi1(h * zw) / zw).real
    return _squeeze(phi + nu @ kern, k)


def _squeeze(arr, k):
    return float(arr[0]) if np.ndim(k) == 0 else arr


# --- tables, history and stepping ---------------------------------------------


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    """``b[j]``, ``c[j]`` (shape ``(N+1, nx)``) and ``1 - c_0`` for one run.

    Rows past ``active`` are identically zero (flushed underflow or the
    optional truncation) and are skipped by the steppers.
    """

    b: np.ndarray
    c: np.ndarray
    one_minus_c0: np.ndarray
    eps: float
    dt: float
    alpha: float
    nsteps: int
    active: int

    def partition_residual(self) -> float:
        """Max over ``n`` of ``|sum_{j<=n} (b_j(0) + c_j(0)) - (1 - e^{-t_{n+1}/eps^alpha})|``."""
        h = self.dt / self.eps**self.alpha
        partial = np.cumsum(self.b[:, 0] + self.c[:, 0])
        n = np.arange(self.nsteps + 1)
        exact = -np.expm1(-(n + 1) * h)
        return float(np.max(np.abs(partial - exact)))


def build_table(kind, sgrid: SpatialGrid, eq: Equilibrium, eps, dt, nsteps, alpha=None, wgrid=None, truncate=False):
    """Tabulate ``b_j``, ``c_j`` for ``j = 0..nsteps`` on every mode of ``sgrid``."""
    if kind not in (DSD, DSA):
        raise ValueError(f"unknown Duhamel scheme {kind!r}")
    eps, dt = float(eps), float(dt)
    alpha = (2.0 if kind == DSD else eq.alpha) if alpha is None else float(alpha)
    k = sgrid.modes
    h = dt / eps**alpha
    # rows whose every exponential is flushed are exactly zero
    cutoff = _TRUNCATE_AT if truncate else -_EXP_FLOOR
    active = min(nsteps + 1, int(math.floor(cutoff / h)) + 1)
    b = np.zeros((nsteps + 1, k.size))
    c = np.zeros((nsteps + 1, k.size))
    coeff = coeffs_diffusion if kind == DSD else coeffs_anomalous
    extra = {"alpha": alpha} if kind == DSD else {"alpha": alpha, "wgrid": wgrid}
    for j in range(active):
        b[j], c[j] = coeff(j, k, eps, dt, eq, **extra)
    if kind == DSD:
        omc = one_minus_c0_diffusion(k, eps, dt, eq, alpha)
    else:
        omc = one_minus_c0_anomalous(k, eps, dt, eq, wgrid, alpha)
    return CoefficientTable(b=b, c=c, one_minus_c0=np.asarray(omc), eps=eps, dt=dt, alpha=alpha, nsteps=nsteps, active=active)


def initial_layer(t: float, k, f0, eps: float, alpha: float, vgrid: VelocityGrid):
    """``A0(t, k) = sum_i w_i exp(-(t/eps^alpha)(1 + i eps k v_i)) f0(k, v_i)``.

    ``f0`` has shape ``(nk, nv)`` (or ``(nv,)`` for a scalar ``k``).
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    kk = np.atleast_1d(np.asarray(k, dtype=float))
    f0 = np.asarray(f0).reshape(kk.size, vgrid.nv)
    s = t / eps**alpha
    if s > -_EXP_FLOOR:
        out = np.zeros(kk.size, dtype=complex)
    else:
        phase = _safe_exp(-s * (1.0 + 1j * eps * np.multiply.outer(kk, vgrid.nodes)))
        out = (phase * f0) @ vgrid.weights
    return complex(out[0]) if np.ndim(k) == 0 else out


class HistoryBuffer:
    """All past spectral densities ``rho^0..rho^n`` plus the retained initial data."""

    def __init__(self, f0: np.ndarray, rho0: np.ndarray, nsteps: int):
        self.f0 = f0
        self.rho = np.zeros((nsteps + 1, rho0.size), dtype=complex)
        self.rho[0] = rho0
        self.n = 0

    def __len__(self):
        return self.n + 1

    def append(self, rho):
        if self.n + 1 >= self.rho.shape[0]:
            raise IndexError("history buffer is full")
        self.n += 1
        self.rho[self.n] = rho

    @property
    def latest(self):
        return self.rho[self.n]


def _memory(history: HistoryBuffer, table: CoefficientTable, n: int):
    """``b_0 rho^n + sum_{j=1}^n (c_j rho^{n+1-j} + b_j rho^{n-j})`` over active rows."""
    J = min(n, table.active - 1)
    H = history.rho
    acc = (table.b[: J + 1] * H[n - J : n + 1][::-1]).sum(axis=0)
    if J >= 1:
        acc = acc + (table.c[1 : J + 1] * H[n + 1 - J : n + 1][::-1]).sum(axis=0)
    return acc


def _rhs(history, table, n, sgrid, vgrid):
    t_next = (n + 1) * table.dt
    a0 = initial_layer(t_next, sgrid.modes, history.f0, table.eps, table.alpha, vgrid)
    return a0 + _memory(history, table, n)


def duhamel_step(history: HistoryBuffer, table: CoefficientTable, sgrid: SpatialGrid, vgrid: VelocityGrid, n=None):
    """Advance from ``rho^n`` to ``rho^{n+1}``, append it and return it."""
    n = history.n if n is None else n
    if n != history.n:
        raise ValueError("the history must end at step n")
    if np.min(np.abs(table.one_minus_c0)) < 1e-14:
        raise DegenerateStepError(f"|1 - c_0| = {np.min(np.abs(table.one_minus_c0)):.3e} (eps={table.eps}, dt={table.dt})")
    rho = _rhs(history, table, n, sgrid, vgrid) / table.one_minus_c0
    history.append(rho)
    return rho


def cn_variant_step(history: HistoryBuffer, table: CoefficientTable, sgrid: SpatialGrid, vgrid: VelocityGrid, n=None):
    """Crank-Nicolson-type variant.

    The modified relation adds ``(c_0 + b_0 - 1)(rho^{n+1} + rho^n)/2 + (1 - b_0) rho^{n+1}``
    to the Duhamel right-hand side.  Collecting every ``rho^{n+1}`` term gives

        (b_0 + 1 - c_0)/2 rho^{n+1} = A0 + memory + (b_0 - (1 - c_0))/2 rho^n,

    which tends to the Crank-Nicolson step of the limit equation as ``eps -> 0``.
    """
    n = history.n if n is None else n
    if n != history.n:
        raise ValueError("the history must end at step n")
    b0 = table.b[0]
    omc = table.one_minus_c0
    lhs = 0.5 * (b0 + omc)
    if np.min(np.abs(lhs)) < 1e-14:
        raise DegenerateStepError("vanishing Crank-Nicolson coefficient")
    rhs = _rhs(history, table, n, sgrid, vgrid) + 0.5 * (b0 - omc) * history.rho[n]
    rho = rhs / lhs
    history.append(rho)
    return rho


class DuhamelSolver:
    """Tabulates coefficients once and runs DSD/DSA (optionally the CN variant)."""

    def __init__(self, kind, sgrid, eq, eps, dt, nsteps, alpha=None, wgrid=None, crank_nicolson=False, truncate=False):
        self.kind, self.sgrid, self.eq = kind, sgrid, eq
        self.nsteps = int(nsteps)
        self.table = build_table(kind, sgrid, eq, eps, dt, self.nsteps, alpha, wgrid, truncate)
        self.crank_nicolson = crank_nicolson

    def run(self, f0=None) -> HistoryBuffer:
        f0 = initial_condition(self.sgrid, self.eq) if f0 is None else f0
        hist = HistoryBuffer(f0, f0 @ self.eq.grid.weights, self.nsteps)
        step = cn_variant_step if self.crank_nicolson else duhamel_step
        for _ in range(self.nsteps):
            step(hist, self.table, self.sgrid, self.eq.grid)
        return hist
