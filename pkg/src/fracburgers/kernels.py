"""Poisson kernel, fractional Laplacian and the physical-space oracle for Lambda.

The oracle evaluates the singular integral

    Lambda g(x) = C_1 int (2 g(x) - g(x + y) - g(x - y)) / |y|^2 dy

directly from samples. On the torus the kernel ``|y|^-2`` is replaced by its
periodization ``sum_m |y + 2Lm|^-2 = (pi / 2L)^2 / sin^2(pi y / 2L)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gamma as gamma_fn
from scipy.special import sici

from . import _kernels
from .lp import DyadicPartition, ZeroBlockError
from .spectral import Field, Grid, apply_symbol, from_transform, sup_norm


@dataclass(frozen=True)
class PoissonKernelSpec:
    d: int
    t: float

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.d}")
        if not self.t > 0:
            raise ValueError(f"Poisson kernel needs t > 0, got {self.t}")


def poisson_eval(spec: PoissonKernelSpec, x) -> np.ndarray:
    """Whole-space closed form ``Gamma((d+1)/2) t^-d / (pi^((d+1)/2) (1+|x/t|^2)^((d+1)/2))``.

    ``x`` is an array of points; in 2D its last axis has length 2 (or pass radii).
    """
    d, t = spec.d, spec.t
    x = np.asarray(x, dtype=float)
    if d == 2 and x.ndim >= 1 and x.shape[-1] == 2:
        r2 = np.sum(x * x, axis=-1)
    else:
        r2 = x * x
    h = 0.5 * (d + 1)
    return gamma_fn(h) * t ** (-d) / (math.pi ** h * (1.0 + r2 / t ** 2) ** h)


def poisson_periodic_eval(t: float, x, L: float) -> np.ndarray:
    """1D Poisson kernel periodized over ``[-L, L)``, in closed form."""
    if not t > 0:
        raise ValueError(f"Poisson kernel needs t > 0, got {t}")
    a = math.pi * t / L
    theta = math.pi * np.asarray(x, dtype=float) / L
    # sinh(a) / (cosh(a) - cos(theta)) written to stay accurate for large a
    em = math.exp(-a)
    return (1.0 - em * em) / (2.0 * L * (1.0 - 2.0 * em * np.cos(theta) + em * em))


def poisson_tail_mass(d: int, t: float, R: float) -> float:
    """Mass of ``P_t`` outside the ball ``|x| < R``."""
    if d == 1:
        return 1.0 - 2.0 / math.pi * math.atan(R / t)
    return t / math.sqrt(t * t + R * R)


def poisson_symbol(grid: Grid, t: float) -> np.ndarray:
    return np.exp(-t * grid.rxi_abs)


def poisson_field(grid: Grid, t: float, mass: float = 1.0) -> Field:
    """``mass * P_t`` on the torus from its transform ``mass * exp(-t |xi|)``."""
    if not t > 0:
        raise ValueError(f"Poisson kernel needs t > 0, got {t}")
    return from_transform(grid, lambda *xi: mass * np.exp(-t * _abs(xi)), t)


def _abs(xi) -> np.ndarray:
    if len(xi) == 1:
        return np.abs(xi[0])
    return np.sqrt(xi[0] ** 2 + xi[1] ** 2)


def poisson_semigroup(f: Field, t: float) -> Field:
    """``exp(-t Lambda) f``."""
    if t < 0:
        raise ValueError(f"semigroup time must be >= 0, got {t}")
    out = apply_symbol(f, poisson_symbol(f.grid, t))
    return Field(f.grid, out.samples, f.t + t)


def fractional_laplacian_symbol(grid: Grid, gamma: float) -> np.ndarray:
    if not 0 < gamma <= 2:
        raise ValueError(f"gamma must lie in (0, 2], got {gamma}")
    return grid.rxi_abs ** gamma


def fractional_laplacian(f: Field, gamma: float = 1.0) -> Field:
    """``Lambda^gamma f`` through the multiplier ``|xi|^gamma``."""
    return apply_symbol(f, fractional_laplacian_symbol(f.grid, gamma))


# --- singular-integral oracle -------------------------------------------------


def _second_difference_integral_cos(y_max: float, panels: int) -> float:
    """``int_R (2 - 2 cos y) / y^2 dy`` by Gauss-Legendre panels plus analytic tail."""
    nodes, weights = leggauss(16)
    edges = np.linspace(0.0, y_max, panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    y = 0.5 * (b - a) * nodes[None, :] + 0.5 * (a + b)
    w = 0.5 * (b - a) * weights[None, :]
    # 2 - 2 cos y = 4 sin^2(y/2) avoids cancellation near the origin
    body = np.sum(w * 4.0 * np.sin(0.5 * y) ** 2 / y ** 2)
    si, ci = sici(y_max)
    # int_Y^inf cos(y)/y^2 dy = cos(Y)/Y - (pi/2 - Si(Y))
    tail = 2.0 / y_max - 2.0 * (math.cos(y_max) / y_max - (0.5 * math.pi - si))
    return 2.0 * (body + tail)


@lru_cache(maxsize=None)
def calibrate_c1(y_max: float = 200.0 * math.pi, panels: int = 4000) -> float:
    """Normalizing constant making the oracle reproduce ``Lambda cos = cos``."""
    return 1.0 / _second_difference_integral_cos(y_max, panels)


def _fd_second_derivative(g: np.ndarray, dx: float, periodic: bool) -> np.ndarray:
    # eighth-order centred stencil
    c = [-205.0 / 72, 8.0 / 5, -1.0 / 5, 8.0 / 315, -1.0 / 560]
    if periodic:
        out = c[0] * g
        for m in range(1, 5):
            out = out + c[m] * (np.roll(g, m) + np.roll(g, -m))
        return out / dx ** 2
    p = np.pad(g, 4)
    n = g.size
    out = c[0] * g
    for m in range(1, 5):
        out = out + c[m] * (p[4 + m:4 + m + n] + p[4 - m:4 - m + n])
    return out / dx ** 2


def fractional_laplacian_quadrature(g: Field, periodic: bool = True, c1: float | None = None,
                                    y_max: float | None = None) -> np.ndarray:
    """Physical-space evaluation of ``Lambda g`` at every grid point (1D, gamma = 1).

    The second difference is integrated over the lattice ``y = m dx`` with the
    trapezoid rule; the ``y = 0`` node uses its limit ``-g''(x)`` (8th-order
    finite differences). ``periodic=False`` zero-extends ``g`` and integrates
    ``|y|^-2`` up to ``y_max`` (default ``2L``) plus the analytic tail
    ``2 g(x) / y_max``.
    """
    grid = g.grid
    if grid.dim != 1:
        raise ValueError("the quadrature oracle is 1D only")
    c1 = calibrate_c1() if c1 is None else c1
    s = g.samples
    dx = grid.dx
    n = grid.n
    near = -_fd_second_derivative(s, dx, periodic)
    if periodic:
        m = np.arange(1, n // 2 + 1)
        kernel = (math.pi / (2 * grid.L)) ** 2 / np.sin(math.pi * m * dx / (2 * grid.L)) ** 2
        w = 2.0 * kernel
        w[-1] = kernel[-1]  # y = L is shared by both sides
        # the m = n/2 term was counted with weight 1 on 2g - g(x+L) - g(x-L)
        body = _kernels.second_difference_sum(s, w * dx, True)
        return c1 * (near * dx + body)
    y_max = 2.0 * grid.L if y_max is None else y_max
    M = int(round(y_max / dx))
    m = np.arange(1, M + 1)
    w = 2.0 / (m * dx) ** 2 * dx
    w[-1] *= 0.5
    body = _kernels.second_difference_sum(s, w, False)
    tail = 2.0 * 2.0 * s / (M * dx)
    return c1 * (near * dx + body + tail)


# --- frequency-block semigroup bounds ---------------------------------------


@dataclass(frozen=True)
class BlockDecay:
    j: int
    t: float
    ratio: float

    @property
    def decade(self) -> float:
        return 2.0 ** self.j * self.t

    @property
    def exponent(self) -> float:
        """``-log(ratio) / (2^j t)`` (the decay rate in units of ``2^j``)."""
        if self.t == 0:
            return float("nan")
        return -math.log(self.ratio) / self.decade


def block_semigroup_bounds(u0: Field, j: int, t: float, partition: DyadicPartition) -> BlockDecay:
    """Measured ``||phi_j exp(-t Lambda) u0||_inf / ||phi_j u0||_inf``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    partition.check_block(j)
    sym = partition.phi_hat(j)
    b0 = apply_symbol(u0, sym)
    a0 = sup_norm(b0)
    if a0 <= 1e-14 * max(sup_norm(u0), 1e-300):
        raise ZeroBlockError(f"block {j} of the initial data is zero")
    if t == 0:
        return BlockDecay(j, 0.0, 1.0)
    bt = apply_symbol(b0, poisson_symbol(u0.grid, t))
    return BlockDecay(j, float(t), sup_norm(bt) / a0)


def fit_block_constants(decays) -> dict:
    """Envelope constants for ``c e^{-C t 2^j} <= ratio <= C e^{-c t 2^j}``.

    ``c_rate``/``C_rate`` are the extreme measured exponents; the prefactors
    are 1 because every measured ratio lies between the two exponentials.
    """
    ex = np.array([d.exponent for d in decays if d.t > 0])
    return {
        "c_rate": float(ex.min()),
        "C_rate": float(ex.max()),
        "count": int(ex.size),
    }
