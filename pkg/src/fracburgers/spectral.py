"""Periodic grids, fields, Fourier multipliers, dealiasing and grid norms.

The torus is ``[-L, L)^dim`` sampled at ``n`` points per axis. Transforms use
the unnormalized forward / ``1/n`` inverse convention, so for a 1D field

    sum_j |f_j|^2 dx = (dx / n) sum_k |F_k|^2.

Frequencies are ``xi_k = pi k / L`` for ``k`` in the usual FFT ordering.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Callable, Union

import numpy as np
import scipy.fft as sfft

from . import _kernels

#: Worker threads handed to scipy.fft; capped by FRACBURGERS_NUM_THREADS.
FFT_WORKERS = max(1, int(os.environ.get("FRACBURGERS_NUM_THREADS", "1") or 1))

Multiplier = Union[Callable[..., np.ndarray], np.ndarray]


class NonRealSpectrumError(ValueError):
    """A multiplier broke the conjugate symmetry required for real output."""


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-L, L)^dim`` with ``n`` points per axis."""

    n: int
    L: float
    dim: int = 1

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 8 and _is_pow2(int(self.n))):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if not (self.L > 0 and np.isfinite(self.L)):
            raise ValueError(f"half period L must be positive, got {self.L}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "L", float(self.L))

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim

    @property
    def half_shape(self) -> tuple:
        return (self.n,) * (self.dim - 1) + (self.n // 2 + 1,)

    @property
    def cell(self) -> float:
        return self.dx ** self.dim

    @property
    def xi_min(self) -> float:
        """Smallest positive resolved frequency."""
        return np.pi / self.L

    @property
    def xi_nyquist(self) -> float:
        return self.n // 2 * np.pi / self.L

    @cached_property
    def x(self) -> np.ndarray:
        """Axis coordinates ``-L + j dx``."""
        return -self.L + self.dx * np.arange(self.n)

    @cached_property
    def coords(self) -> tuple:
        if self.dim == 1:
            return (self.x,)
        return tuple(np.meshgrid(self.x, self.x, indexing="ij"))

    @cached_property
    def k_axis(self) -> np.ndarray:
        """Integer wavenumbers in FFT order, ``[0, ..., n/2-1, -n/2, ..., -1]``."""
        return np.fft.fftfreq(self.n, 1.0 / self.n).astype(np.int64)

    @cached_property
    def xi_axis(self) -> np.ndarray:
        return np.pi * self.k_axis / self.L

    @cached_property
    def xi(self) -> tuple:
        """Full-spectrum frequency arrays, broadcastable to ``shape``."""
        if self.dim == 1:
            return (self.xi_axis,)
        return (self.xi_axis[:, None], self.xi_axis[None, :])

    @cached_property
    def xi_abs(self) -> np.ndarray:
        if self.dim == 1:
            return np.abs(self.xi_axis)
        a, b = self.xi
        return np.sqrt(a * a + b * b)

    @cached_property
    def rxi(self) -> tuple:
        """Half-spectrum (rfft) frequency arrays."""
        half = np.pi * np.arange(self.n // 2 + 1) / self.L
        if self.dim == 1:
            return (half,)
        return (self.xi_axis[:, None], half[None, :])

    @cached_property
    def rxi_abs(self) -> np.ndarray:
        if self.dim == 1:
            return self.rxi[0].copy()
        a, b = self.rxi
        return np.sqrt(a * a + b * b)

    @cached_property
    def rweights(self) -> np.ndarray:
        """Multiplicity of each rfft mode in the full spectrum (1 or 2)."""
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        if self.dim == 1:
            return w
        return np.broadcast_to(w[None, :], self.half_shape)

    def dealias_mask(self, half: bool = False) -> np.ndarray:
        """Boolean mask of retained modes (``|k| <= n/3`` on every axis)."""
        kmax = self.n // 3
        ka = np.abs(self.k_axis) <= kmax
        if half:
            kh = np.arange(self.n // 2 + 1) <= kmax
            if self.dim == 1:
                return kh
            return ka[:, None] & kh[None, :]
        if self.dim == 1:
            return ka
        return ka[:, None] & ka[None, :]

    @cached_property
    def _rmask(self) -> np.ndarray:
        return self.dealias_mask(half=True)

    @cached_property
    def mirror_index(self) -> tuple:
        """Index arrays sending mode ``k`` to mode ``-k`` on the full spectrum."""
        idx = (-np.arange(self.n)) % self.n
        if self.dim == 1:
            return (idx,)
        return np.ix_(idx, idx)

    @cached_property
    def centering_phase(self) -> np.ndarray:
        """``exp(-i xi_k L)`` factors relating the grid origin ``-L`` to ``x = 0``."""
        p = np.where(self.k_axis % 2 == 0, 1.0, -1.0)
        if self.dim == 1:
            return p
        return p[:, None] * p[None, :]


def _rfftn(a):
    return sfft.rfftn(a, workers=FFT_WORKERS)


def _irfftn(c, grid: Grid):
    return sfft.irfftn(c, s=grid.shape, workers=FFT_WORKERS)


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples on a grid with lazily cached spectra. Treat as immutable."""

    grid: Grid
    samples: np.ndarray
    t: float = 0.0
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.float64)
        if s.shape != self.grid.shape:
            raise ValueError(f"samples shape {s.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("field samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @cached_property
    def spectral(self) -> np.ndarray:
        """Full unnormalized DFT (read-only)."""
        c = sfft.fftn(self.samples, workers=FFT_WORKERS)
        c.setflags(write=False)
        return c

    @cached_property
    def rspectral(self) -> np.ndarray:
        """Half-spectrum rfft (read-only)."""
        c = _rfftn(self.samples)
        c.setflags(write=False)
        return c

    @classmethod
    def from_rspectral(cls, grid: Grid, coeffs: np.ndarray, t: float = 0.0) -> "Field":
        return cls(grid, _irfftn(coeffs, grid), t)

    def with_time(self, t: float) -> "Field":
        return Field(self.grid, self.samples, t, dict(self.meta))

    def _check(self, other: "Field"):
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return Field(self.grid, self.samples + other.samples, self.t)
        return Field(self.grid, self.samples + other, self.t)

    def __sub__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return Field(self.grid, self.samples - other.samples, self.t)
        return Field(self.grid, self.samples - other, self.t)

    def __mul__(self, other):
        if isinstance(other, Field):
            self._check(other)
            return Field(self.grid, self.samples * other.samples, self.t)
        return Field(self.grid, self.samples * other, self.t)

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.samples, self.t)


def field_from_function(grid: Grid, func, t: float = 0.0) -> Field:
    """Sample ``func(*coords)`` on the grid."""
    return Field(grid, func(*grid.coords), t)


def zeros(grid: Grid, t: float = 0.0) -> Field:
    return Field(grid, np.zeros(grid.shape), t)


def to_spectral(f: Field) -> np.ndarray:
    """Full-spectrum unnormalized DFT of a field."""
    return f.spectral


def to_physical(coeffs: np.ndarray, grid: Grid, t: float = 0.0, rtol: float = 1e-12) -> Field:
    """Inverse DFT; complex output beyond ``rtol`` raises NonRealSpectrumError."""
    coeffs = np.asarray(coeffs)
    if coeffs.shape != grid.shape:
        raise ValueError(f"coefficient shape {coeffs.shape} does not match grid {grid.shape}")
    z = sfft.ifftn(coeffs, workers=FFT_WORKERS)
    scale = np.max(np.abs(z)) if z.size else 0.0
    if np.max(np.abs(z.imag)) > rtol * scale + 1e-300:
        raise NonRealSpectrumError("inverse transform is not real; spectrum lacks conjugate symmetry")
    return Field(grid, z.real, t)


def _evaluate_multiplier(grid: Grid, m: Multiplier, half: bool = False) -> np.ndarray:
    if callable(m):
        freqs = grid.rxi if half else grid.xi
        return np.asarray(m(*freqs))
    arr = np.asarray(m)
    return arr


def conjugate_symmetry_error(grid: Grid, coeffs: np.ndarray) -> float:
    """Max of ``|c_k - conj(c_{-k})|`` relative to ``max |c|``."""
    mirrored = np.conj(coeffs[grid.mirror_index])
    scale = np.max(np.abs(coeffs))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(coeffs - mirrored)) / scale)


def apply_multiplier(f: Field, m: Multiplier, rtol: float = 1e-12) -> Field:
    """Return the real field with spectrum ``m(xi) * F(xi)``.

    ``m`` is either a callable taking the frequency arrays (``xi`` in 1D,
    ``xi1, xi2`` in 2D, broadcastable) or an array on the full spectrum.
    """
    mult = np.broadcast_to(_evaluate_multiplier(f.grid, m), f.grid.shape)
    if not np.all(np.isfinite(mult)):
        raise ValueError("multiplier is not finite on the resolved frequencies")
    out = mult * f.spectral
    if conjugate_symmetry_error(f.grid, out) > rtol:
        raise NonRealSpectrumError("multiplier output is not conjugate symmetric")
    z = sfft.ifftn(out, workers=FFT_WORKERS)
    return Field(f.grid, z.real, f.t)


def apply_symbol(f: Field, symbol_half: np.ndarray) -> Field:
    """Fast path: multiply the rfft spectrum by a symbol given on the half spectrum.

    The symbol must come from a conjugate-symmetric multiplier; no check is made.
    """
    return Field(f.grid, _irfftn(symbol_half * f.rspectral, f.grid), f.t)


def derivative_symbol(grid: Grid, axis: int = 0, order: int = 1, half: bool = True) -> np.ndarray:
    """``(i xi_axis)^order`` with the Nyquist mode zeroed for odd orders."""
    freqs = (grid.rxi if half else grid.xi)[axis]
    sym = (1j * freqs) ** order
    if order % 2 == 1:
        nyq = np.isclose(np.abs(freqs), grid.xi_nyquist)
        sym = np.where(nyq, 0.0, sym)
    shape = grid.half_shape if half else grid.shape
    return np.broadcast_to(sym, shape)


def derivative(f: Field, axis: int = 0, order: int = 1) -> Field:
    return apply_symbol(f, derivative_symbol(f.grid, axis, order))


def dealias(f: Field) -> Field:
    """Zero every mode with ``|k| > n/3`` on some axis."""
    return Field(f.grid, _irfftn(np.where(f.grid._rmask, f.rspectral, 0.0), f.grid), f.t)


def lp_norm(f: Field, p: float) -> float:
    """Uniform-grid quadrature of the L^p norm; ``p = inf`` is the sample max."""
    if p < 1:
        raise ValueError(f"p must be in [1, inf], got {p}")
    a = np.abs(f.samples)
    if np.isinf(p):
        return float(a.max())
    if p == 1:
        return float(a.sum() * f.grid.cell)
    if p == 2:
        return float(np.sqrt(np.sum(a * a) * f.grid.cell))
    return float((np.sum(a ** p) * f.grid.cell) ** (1.0 / p))


def spectral_l2_squared(f: Field, symbol_half: np.ndarray | None = None) -> float:
    """``||f||_2^2`` from the half spectrum (optionally weighted by ``|symbol|^2``)."""
    c = f.rspectral
    w = f.grid.rweights
    e = w * (c.real ** 2 + c.imag ** 2)
    if symbol_half is not None:
        e = e * np.abs(symbol_half) ** 2
    return float(e.sum() * f.grid.cell / f.grid.n ** f.grid.dim)


def mean_value(f: Field) -> float:
    return float(f.samples.mean())


def integral(f: Field) -> float:
    """Grid quadrature of ``int f`` (equals ``(2L)^dim`` times the mean)."""
    return float(f.samples.sum() * f.grid.cell)


def from_transform(grid: Grid, F: Multiplier, t: float = 0.0) -> Field:
    """Field whose Fourier series coefficients sample the continuous transform ``F``.

    With ``F(xi) = int f(x) exp(-i x xi) dx`` this returns the samples of the
    periodization of ``f``; ``F`` is given on the full spectrum.
    """
    vals = np.broadcast_to(_evaluate_multiplier(grid, F), grid.shape)
    coeffs = vals * grid.centering_phase * (grid.n / (2.0 * grid.L)) ** grid.dim
    z = sfft.ifftn(coeffs, workers=FFT_WORKERS)
    return Field(grid, z.real, t)


# --- refined supremum -------------------------------------------------------


def _local_max_candidates(a: np.ndarray, count: int) -> np.ndarray:
    """Flat indices of the largest periodic local maxima of ``a``."""
    if a.ndim == 1:
        is_max = (a >= np.roll(a, 1)) & (a >= np.roll(a, -1))
    else:
        is_max = np.ones(a.shape, dtype=bool)
        for ax in range(a.ndim):
            is_max &= (a >= np.roll(a, 1, axis=ax)) & (a >= np.roll(a, -1, axis=ax))
    idx = np.flatnonzero(is_max)
    if idx.size == 0:
        idx = np.array([int(np.argmax(a))])
    vals = a.ravel()[idx]
    order = np.argsort(vals)[::-1][:count]
    return idx[order]


def _sup_1d(f: Field, candidates: int, iters: int) -> float:
    g = f.grid
    c = f.rspectral * (g.rweights / g.n)
    freqs = g.rxi[0]
    a = np.abs(f.samples)
    best = float(a.max())
    for i in _local_max_candidates(a, candidates):
        s0 = g.x[i] + g.L
        sign = 1.0 if f.samples[i] >= 0 else -1.0
        s = s0
        for _ in range(iters):
            v, d1, d2 = _kernels.trig_eval(c, freqs, s)
            if sign * d2 >= 0:
                break
            step = -d1 / d2
            s_new = min(max(s + step, s0 - g.dx), s0 + g.dx)
            if abs(s_new - s) < 1e-14 * g.L:
                s = s_new
                break
            s = s_new
        v, _, _ = _kernels.trig_eval(c, freqs, s)
        best = max(best, abs(v))
    return best


def _sup_2d(f: Field, candidates: int, iters: int) -> float:
    g = f.grid
    C = f.rspectral * (g.rweights / g.n ** 2)
    k1 = g.xi_axis
    k2 = g.rxi[1][0]
    a = np.abs(f.samples)
    best = float(a.max())
    for flat in _local_max_candidates(a, candidates):
        i, j = np.unravel_index(flat, a.shape)
        s0 = np.array([g.x[i] + g.L, g.x[j] + g.L])
        sign = 1.0 if f.samples[i, j] >= 0 else -1.0
        s = s0.copy()
        for _ in range(iters):
            e1 = np.exp(1j * k1 * s[0])
            e2 = np.exp(1j * k2 * s[1])
            A = e1 @ C
            B = (1j * k1 * e1) @ C
            D11 = (-(k1 ** 2) * e1) @ C
            grad = np.array([(B @ e2).real, (A @ (1j * k2 * e2)).real])
            H = np.array(
                [
                    [(D11 @ e2).real, (B @ (1j * k2 * e2)).real],
                    [(B @ (1j * k2 * e2)).real, (A @ (-(k2 ** 2) * e2)).real],
                ]
            )
            if np.trace(sign * H) >= 0:
                break
            # ridges (plane waves) give a singular Hessian; pinv steps across them
            step = -np.linalg.pinv(H, rcond=1e-10) @ grad
            s_new = np.clip(s + step, s0 - g.dx, s0 + g.dx)
            done = np.max(np.abs(s_new - s)) < 1e-14 * g.L
            s = s_new
            if done:
                break
        e1 = np.exp(1j * k1 * s[0])
        e2 = np.exp(1j * k2 * s[1])
        v = ((e1 @ C) @ e2).real
        best = max(best, abs(v))
    return best


def sup_norm(f: Field, candidates: int = 3, iters: int = 12) -> float:
    """Supremum of the trigonometric interpolant of ``f``.

    Starts from the largest grid maxima of ``|f|`` and polishes each with
    Newton steps on the interpolant; never smaller than the sample max.
    """
    if f.grid.dim == 1:
        return _sup_1d(f, candidates, iters)
    return _sup_2d(f, candidates, iters)
