"""Named initial-data generators, addressable from experiment specs."""

from __future__ import annotations

import inspect
import math
from dataclasses import dataclass

import numpy as np

from .kernels import poisson_periodic_eval
from .spectral import Field, Grid, _irfftn


@dataclass(frozen=True)
class Generator:
    name: str
    dim: int
    func: object
    summary: str

    def params(self) -> dict:
        sig = inspect.signature(self.func)
        return {k: p.default for k, p in list(sig.parameters.items())[1:]}


GENERATORS: dict = {}


def _register(dim: int):
    def wrap(func):
        doc = (func.__doc__ or "").strip().splitlines()
        GENERATORS[func.__name__] = Generator(func.__name__, dim, func, doc[0] if doc else "")
        return func

    return wrap


def _require(grid: Grid, dim: int, name: str):
    if grid.dim != dim:
        raise ValueError(f"generator {name} needs a {dim}D grid, got {grid.dim}D")


@_register(1)
def gaussian(grid: Grid, a: float = 1.0, sigma: float = 1.0, x0: float = 0.0) -> Field:
    """a exp(-((x - x0) / sigma)^2); mass a sigma sqrt(pi)."""
    _require(grid, 1, "gaussian")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return Field(grid, a * np.exp(-(((grid.x - x0) / sigma) ** 2)))


@_register(1)
def dipole(grid: Grid, a: float = 1.0, sigma: float = 1.0, x0: float = 0.0) -> Field:
    """Odd, zero-mass pulse a sqrt(2e) z exp(-z^2), z = (x - x0) / sigma; peak value a."""
    _require(grid, 1, "dipole")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    z = (grid.x - x0) / sigma
    return Field(grid, a * math.sqrt(2.0 * math.e) * z * np.exp(-z * z))


@_register(1)
def poisson_profile(grid: Grid, a: float = 0.5, mass: float = 1.0) -> Field:
    """mass * P_a, the periodized Poisson kernel at time a."""
    _require(grid, 1, "poisson_profile")
    return Field(grid, mass * poisson_periodic_eval(a, grid.x, grid.L))


@_register(1)
def sine(grid: Grid, amplitude: float = 1.0, mode: int = 1, phase: float = 0.0) -> Field:
    """amplitude sin(xi x + phase) with xi = mode pi / L; negative amplitude gives a steep front at 0."""
    _require(grid, 1, "sine")
    xi = int(mode) * math.pi / grid.L
    return Field(grid, amplitude * np.sin(xi * grid.x + phase))


def _random_coefficients(grid: Grid, seed: int, j_lo: float, j_hi: float, decay: float) -> np.ndarray:
    if j_hi < j_lo:
        raise ValueError("j_hi must be >= j_lo")
    rng = np.random.default_rng(int(seed))
    r = grid.rxi_abs
    band = (r >= 2.0 ** j_lo) & (r <= 2.0 ** j_hi)
    band &= grid.dealias_mask(half=True)
    if not band.any():
        raise ValueError(f"no resolved modes with 2^{j_lo} <= |xi| <= 2^{j_hi}")
    env = np.zeros(grid.half_shape)
    env[band] = (r[band] / 2.0 ** j_lo) ** (-float(decay))
    phases = rng.uniform(0.0, 2.0 * math.pi, size=grid.half_shape)
    return env * np.exp(1j * phases)


def _scaled(grid: Grid, coeffs: np.ndarray, amplitude: float) -> Field:
    u = _irfftn(coeffs, grid)
    peak = np.max(np.abs(u))
    return Field(grid, amplitude * u / peak)


@_register(1)
def random_band(grid: Grid, seed: int = 0, j_lo: float = 0.0, j_hi: float = 3.0,
                amplitude: float = 1.0, decay: float = 1.0) -> Field:
    """Seeded random phases on 2^j_lo <= |xi| <= 2^j_hi, envelope |xi|^-decay, grid max = amplitude."""
    _require(grid, 1, "random_band")
    return _scaled(grid, _random_coefficients(grid, seed, j_lo, j_hi, decay), amplitude)


@_register(2)
def gaussian2d(grid: Grid, a: float = 1.0, sigma1: float = 1.0, sigma2: float | None = None,
               x0: float = 0.0, y0: float = 0.0) -> Field:
    """a exp(-((x - x0)/sigma1)^2 - ((y - y0)/sigma2)^2); anisotropic when sigma2 differs."""
    _require(grid, 2, "gaussian2d")
    sigma2 = sigma1 if sigma2 is None else sigma2
    if not (sigma1 > 0 and sigma2 > 0):
        raise ValueError("sigmas must be positive")
    x, y = grid.coords
    return Field(grid, a * np.exp(-(((x - x0) / sigma1) ** 2) - ((y - y0) / sigma2) ** 2))


@_register(2)
def random_band2d(grid: Grid, seed: int = 0, j_lo: float = 0.0, j_hi: float = 3.0,
                  amplitude: float = 1.0, decay: float = 1.0) -> Field:
    """Seeded random phases on an annulus of |xi|, envelope |xi|^-decay, grid max = amplitude."""
    _require(grid, 2, "random_band2d")
    c = _random_coefficients(grid, seed, j_lo, j_hi, decay)
    # the half spectrum stores both kx signs on the k_y = 0 column; keep it conjugate symmetric
    c[:, 0] = 0.5 * (c[:, 0] + np.conj(c[grid.mirror_index[0].ravel(), 0]))
    return _scaled(grid, c, amplitude)


def make_initial(grid: Grid, name: str, params: dict | None = None) -> Field:
    """Build initial data from a registered generator and its keyword parameters."""
    if name not in GENERATORS:
        raise KeyError(f"unknown generator {name!r}; known: {sorted(GENERATORS)}")
    gen = GENERATORS[name]
    params = dict(params or {})
    unknown = set(params) - set(gen.params())
    if unknown:
        raise ValueError(f"generator {name} does not take {sorted(unknown)}")
    return gen.func(grid, **params)


def boundary_mass_fraction(f: Field, width: float = 0.1) -> float:
    """Share of ``int |f|`` within ``width * L`` of the torus boundary (truncation indicator)."""
    g = f.grid
    a = np.abs(f.samples)
    near = np.zeros(g.shape, dtype=bool)
    for c in g.coords:
        near |= np.abs(c) >= (1.0 - width) * g.L
    tot = a.sum()
    return float(a[near].sum() / tot) if tot > 0 else 0.0
