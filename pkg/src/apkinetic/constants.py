"""Constants of the anomalous diffusion limit and their numerical cross-checks.

For ``d > 1`` every rotation-invariant integral factors into a radial
integral times the spherical moment ``int_{S^{d-1}} |e . s|^alpha ds``; the
radial parts are one-dimensional and are evaluated with adaptive quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate

from .grids import HEAVY_TAIL, Equilibrium, VelocityGrid, heavy_tail_normalization

# Lanczos approximation, g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(x: float) -> float:
    """Euler Gamma function (Lanczos approximation with reflection for x < 1/2)."""
    x = float(x)
    if x == math.floor(x) and x <= 0:
        raise ValueError(f"gamma has a pole at {x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    x -= 1.0
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (x + i)
    t = x + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (x + 0.5) * math.exp(-t) * acc


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"alpha must lie in (0, 2), got {alpha}")


def sphere_moment(alpha: float, d: int = 1) -> float:
    """``int_{S^{d-1}} |e . s|^alpha ds``; equals 2 in dimension one."""
    if d < 1:
        raise ValueError("dimension must be positive")
    return 2.0 * math.pi ** ((d - 1) / 2) * gamma((alpha + 1) / 2) / gamma((alpha + d) / 2)


def _radial_kappa(alpha: float) -> float:
    # int_0^inf u^(1-alpha) / (1 + u^2) du, the tail folded onto [0, 1] by u -> 1/u
    head, _ = integrate.quad(
        lambda u: 1.0 / (1.0 + u * u), 0.0, 1.0, weight="alg", wvar=(1.0 - alpha, 0.0), epsabs=0, epsrel=1e-12
    )
    tail, _ = integrate.quad(
        lambda u: 1.0 / (1.0 + u * u), 0.0, 1.0, weight="alg", wvar=(alpha - 1.0, 0.0), epsabs=0, epsrel=1e-12
    )
    return head + tail


def _one_minus_cos_integral(s: float, alpha: float) -> float:
    """``int_0^inf (1 - cos(s u)) u^(-1-alpha) du`` by direct quadrature in ``u``."""
    if s == 0.0:
        return 0.0
    s = abs(s)
    cut = 1.0 / s

    def near(u):
        h = 0.5 * s * u
        # (1 - cos(su)) / u^2, written to avoid cancellation at small u
        return 2.0 * (math.sin(h) / u) ** 2 if u > 0 else 0.5 * s * s

    head, _ = integrate.quad(near, 0.0, cut, weight="alg", wvar=(1.0 - alpha, 0.0), epsabs=0, epsrel=1e-12, limit=200)
    smooth = cut ** (-alpha) / alpha
    # int_c^inf cos(s u) u^(-1-alpha) du on the rotated contour u = c + i y,
    # where the integrand decays like exp(-s y) instead of oscillating
    def rotated(y, part):
        val = 1j * np.exp(1j * s * cut - s * y) * (cut + 1j * y) ** (-1.0 - alpha)
        return val.real if part == 0 else val.imag

    osc, _ = integrate.quad(rotated, 0.0, np.inf, args=(0,), epsabs=0, epsrel=1e-11, limit=200)
    return head + smooth - osc


def compute_kappa(alpha: float, d: int = 1, m: float | None = None) -> float:
    """Anomalous diffusion coefficient ``int (w.e)^2/(1+(w.e)^2) m/|w|^(alpha+d) dw``.

    ``m`` defaults to the normalization of ``m/(1+|v|^(alpha+d))``.
    """
    _check_alpha(alpha)
    if m is None:
        m = heavy_tail_normalization(alpha + d, d)
    return m * sphere_moment(alpha, d) * _radial_kappa(alpha)


def compute_symbol_constant(alpha: float, d: int = 1) -> float:
    """``A = int (1 - cos(w.e)) / |w|^(d+alpha) dw``, the symbol of the P.V. operator."""
    _check_alpha(alpha)
    return sphere_moment(alpha, d) * _one_minus_cos_integral(1.0, alpha)


def C_of_s(s: float, beta: float, m: float, d: int = 1) -> float:
    """``C(s) = int (exp(-i s e.w) - 1) m/|w|^beta dw`` (real by symmetry).

    In dimension one this is a direct quadrature in ``w`` for the given ``s``;
    the power law ``C(s) = -m s^alpha A`` is therefore a genuine check.
    """
    alpha = beta - d
    _check_alpha(alpha)
    if s < 0:
        raise ValueError("s must be nonnegative")
    if d == 1:
        return -m * 2.0 * _one_minus_cos_integral(s, alpha)
    # rotation invariance: the radial integral along e.s scales as |e.s|^alpha
    return -m * s**alpha * sphere_moment(alpha, d) * _one_minus_cos_integral(1.0, alpha)


def laplace_of_C(beta: float, m: float, npoints: int = 40) -> float:
    """``int_0^inf exp(-s) C(s) ds`` with Gauss-Laguerre quadrature; tends to ``-kappa``."""
    nodes, weights = np.polynomial.laguerre.laggauss(npoints)
    return float(sum(w * C_of_s(s, beta, m) for s, w in zip(nodes, weights)))


class SymbolCheck(NamedTuple):
    value: complex
    asymptotic: float
    residual: float
    relative_residual: float


def heavy_tail_symbol(eps: float, s: float, k: float, eq: Equilibrium, verify: bool = False):
    """Discrete ``<(exp(-i eps s k v) - 1) M>`` on the equilibrium's grid.

    With ``verify=True`` a :class:`SymbolCheck` is returned that compares the
    value against its small-``eps`` equivalent ``(eps |k|)^alpha C(s)``.
    """
    if eq.kind != HEAVY_TAIL:
        raise ValueError("heavy_tail_symbol needs a heavy-tailed equilibrium")
    v = eq.grid.nodes
    phase = eps * s * k * v
    # exp(-i x) - 1 = -2 sin^2(x/2) - i sin(x), free of cancellation
    integrand = (-2.0 * np.sin(0.5 * phase) ** 2 - 1j * np.sin(phase)) * eq.values
    value = complex(np.dot(eq.grid.weights, integrand))
    if not verify:
        return value
    alpha = eq.alpha
    asym = (eps * abs(k)) ** alpha * C_of_s(s, eq.beta, eq.m)
    residual = abs(value - asym)
    rel = residual / abs(asym) if asym != 0 else (0.0 if residual == 0 else math.inf)
    return SymbolCheck(value, asym, residual, rel)


def a_eps_z(eps: float, z: float, t: float, beta: float, m: float, normalized: bool = False) -> float:
    """Kernel weight ``a(eps, z)`` of the space-variable formulation (d = 1).

    ``m int_0^{t/eps^alpha} |z|^beta (eps s)^(beta-1) / ((eps s)^beta + |z|^beta) e^-s ds``.
    With ``normalized=True`` the ratio to ``m eps^alpha Gamma(alpha+1)`` is returned,
    which tends to one as ``eps -> 0``.
    """
    if z == 0:
        raise ValueError("a(eps, z) is defined for z != 0")
    if t <= 0:
        raise ValueError("t must be positive")
    alpha = beta - 1.0
    upper = t / eps**alpha
    az = abs(z) ** beta

    def integrand(s):
        es = eps * s
        return az * es ** (beta - 1.0) / (es**beta + az) * math.exp(-s)

    # beyond s = 800 the exponential factor is below double precision
    top = min(upper, 800.0)
    bump = min(top, max(1.0, abs(z) / eps))
    val, _ = integrate.quad(integrand, 0.0, top, points=[bump] if bump < top else None, epsabs=0, epsrel=1e-11, limit=400)
    val *= m
    if normalized:
        return val / (m * eps**alpha * gamma(alpha + 1.0))
    return val


def operator_normalization(alpha: float, d: int = 1) -> float:
    """``alpha Gamma((d+alpha)/2) / (2 pi^(d/2+alpha) Gamma(1-alpha/2))``, reported only."""
    _check_alpha(alpha)
    return alpha * gamma((d + alpha) / 2) / (2 * math.pi ** (d / 2 + alpha) * gamma(1 - alpha / 2))


def tail_flux_sum(grid: VelocityGrid, alpha: float, m: float, scale=0.0, d: int = 1):
    """``sum_i w_i v_i^2/(1+v_i^2) * m / (scale^beta + |v_i|^beta)`` with ``beta = alpha + d``.

    This is the discrete form of the rescaled velocity integral that carries
    the fractional diffusion.  ``scale`` may be an array (one entry per mode);
    ``scale = 0`` gives the discrete anomalous diffusion coefficient.
    """
    beta = alpha + d
    v = grid.nodes
    kernel = grid.weights * v**2 / (1.0 + v**2)
    scale = np.asarray(scale, dtype=float)
    denom = scale[..., None] ** beta + np.abs(v) ** beta
    out = (kernel * m / denom).sum(axis=-1)
    return float(out) if out.ndim == 0 else out


def discrete_kappa(grid: VelocityGrid, alpha: float, m: float) -> float:
    return tail_flux_sum(grid, alpha, m, 0.0)


@dataclass(frozen=True)
class FractionalConstants:
    alpha: float
    d: int
    beta: float
    m: float
    kappa: float
    A: float
    c_operator: float
    gamma_alpha_plus_1: float

    @property
    def c_standard(self) -> float:
        """Normalization making the P.V. operator's symbol exactly ``|k|^alpha``."""
        return 1.0 / self.A

    @property
    def identity_residual(self) -> float:
        """Relative gap in ``kappa = m Gamma(alpha+1) A``."""
        return abs(self.kappa - self.m * self.gamma_alpha_plus_1 * self.A) / self.kappa


def fractional_constants(alpha: float, d: int = 1, m: float | None = None) -> FractionalConstants:
    _check_alpha(alpha)
    if m is None:
        m = heavy_tail_normalization(alpha + d, d)
    return FractionalConstants(
        alpha=alpha,
        d=d,
        beta=alpha + d,
        m=m,
        kappa=compute_kappa(alpha, d, m),
        A=compute_symbol_constant(alpha, d),
        c_operator=operator_normalization(alpha, d),
        gamma_alpha_plus_1=gamma(alpha + 1.0),
    )
