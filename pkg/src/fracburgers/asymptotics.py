"""Large-time profiles, decay-rate fits and analyticity-radius estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .kernels import poisson_tail_mass
from .lp import BesovIndex, besov_norm, default_partition
from .spectral import Field, Grid, _irfftn, _rfftn, derivative_symbol, from_transform, integral, lp_norm, sup_norm
from .trajectory import Trajectory


def mass(u0: Field) -> float:
    """``int u0`` by grid quadrature (``2L`` times the mean in 1D)."""
    return integral(u0)


def first_moment(u0: Field) -> float:
    """``int y u0(y) dy`` (1D)."""
    if u0.grid.dim != 1:
        raise ValueError("first moment is 1D only")
    return float(np.sum(u0.grid.x * u0.samples) * u0.grid.cell)


def _norm(f: Field, p: float) -> float:
    return sup_norm(f) if math.isinf(p) else lp_norm(f, p)


def _abs_xi(xi) -> np.ndarray:
    if len(xi) == 1:
        return np.abs(xi[0])
    return np.sqrt(xi[0] ** 2 + xi[1] ** 2)


def poisson_profile_field(grid: Grid, t: float, M: float) -> Field:
    """``M P_t`` periodized onto the grid."""
    return from_transform(grid, lambda *xi: M * np.exp(-t * _abs_xi(xi)), t)


@dataclass
class ProfileSeries:
    t: np.ndarray
    value: np.ndarray
    scale_exponent: float
    tail_mass: np.ndarray
    flagged: bool
    note: str = ""

    def at(self, t: float) -> float:
        i = int(np.argmin(np.abs(self.t - t)))
        if abs(self.t[i] - t) > 1e-6 * max(1.0, t):
            raise KeyError(f"no sample at t={t}")
        return float(self.value[i])


def profile_error_first(traj: Trajectory, p: float = math.inf, d: int | None = None,
                        M: float | None = None, tail_tol: float = 0.05) -> ProfileSeries:
    """``t^{d(1-1/p)} ||u(t) - M P_t||_p`` per snapshot with ``t > 0``.

    The Poisson profile is periodized like the solution. ``flagged`` is set
    when the whole-space kernel puts more than ``tail_tol`` of its mass
    outside the box at some sampled time.
    """
    d = traj.grid.dim if d is None else d
    M = mass(traj.initial) if M is None else M
    e = d * (1.0 - (0.0 if math.isinf(p) else 1.0 / p))
    ts, vals, tails = [], [], []
    for f in traj.snapshots:
        if f.t <= 0:
            continue
        err = _norm(f - poisson_profile_field(f.grid, f.t, M), p)
        ts.append(f.t)
        vals.append(f.t ** e * err)
        tails.append(poisson_tail_mass(d, f.t, f.grid.L))
    tails = np.array(tails)
    flagged = bool(tails.size and tails.max() > tail_tol)
    note = f"kernel tail mass up to {tails.max():.3g} outside the box" if flagged else ""
    return ProfileSeries(np.array(ts), np.array(vals), e, tails, flagged, note)


# --- second-order expansion (1D) ---------------------------------------------------


def _dx_poisson(grid: Grid, t: float) -> Field:
    return from_transform(grid, lambda xi: 1j * xi * np.exp(-t * np.abs(xi)), t)


def convolution_correction(grid: Grid, t: float, M: float) -> Field:
    """``int_0^t (d_x P_{t-s}) * (M P_{s+1})^2 ds`` in closed form.

    Uses ``FT[(P_s)^2](xi) = (|xi| + 1/s) e^{-s|xi|} / (2 pi)``, so the time
    integral equals ``i xi M^2 e^{-(t+1)|xi|} (t |xi| + log(1+t)) / (2 pi)``.
    """
    c = M * M / (2.0 * math.pi)
    L1 = math.log1p(t)
    return from_transform(
        grid, lambda xi: 1j * xi * c * np.exp(-(t + 1.0) * np.abs(xi)) * (t * np.abs(xi) + L1), t
    )


def convolution_correction_quadrature(grid: Grid, t: float, M: float, nodes: int = 400) -> Field:
    """Same term by Gauss-Legendre quadrature in ``s`` of the transform (cross-check)."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    s = 0.5 * t * (x + 1.0)
    w = 0.5 * t * w
    c = M * M / (2.0 * math.pi)

    def F(xi):
        a = np.abs(xi)
        acc = np.zeros_like(a, dtype=complex)
        for sk, wk in zip(s, w):
            acc += wk * np.exp(-(t - sk) * a) * (a + 1.0 / (sk + 1.0)) * np.exp(-(sk + 1.0) * a)
        return 1j * xi * c * acc

    return from_transform(grid, F, t)


def squared_profile_mass_integral(t: float, M: float) -> float:
    """``int_0^t int (M P_{s+1})^2 dy ds = M^2 log(1+t) / (2 pi)``."""
    return M * M * math.log1p(t) / (2.0 * math.pi)


def _snapshot_energy_integral(snaps: list, times: np.ndarray) -> np.ndarray:
    ts = np.array([f.t for f in snaps])
    e = np.array([np.sum(f.samples ** 2) * f.grid.cell for f in snaps])
    cum = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(ts) * (e[1:] + e[:-1]))])
    return np.interp(times, ts, cum)


def _energy_integral(traj: Trajectory, times: np.ndarray) -> np.ndarray:
    """``int_0^t ||u||_2^2`` at the requested times.

    The solver's running integral is used when present; otherwise the
    trapezoid rule over snapshots, rejected if dropping every other snapshot
    moves it by more than 2%.
    """
    if traj.diagnostics and not np.isnan(traj.diagnostics[-1]["energy_integral"]):
        return np.interp(times, traj.column("t"), traj.column("energy_integral"))
    full = _snapshot_energy_integral(traj.snapshots, times)
    half = _snapshot_energy_integral(traj.snapshots[::2] + traj.snapshots[-1:], times)
    rel = float(np.max(np.abs(half - full) / np.maximum(np.abs(full), 1e-300)))
    if rel > 0.02:
        raise ValueError(f"snapshots too sparse for the time integral (halving moves it by {rel:.1%})")
    return full


def expansion_residual(f: Field, M: float, m1: float, Q: float) -> Field:
    """``u - M P_t + m1 dP_t + Q/2 dP_t + conv/2 - (Z/2) dP_t`` at time ``f.t``.

    ``Q = int_0^t int u^2``; ``Z`` is the squared-profile counterpart.
    """
    t = f.t
    g = f.grid
    dP = _dx_poisson(g, t)
    Z = squared_profile_mass_integral(t, M)
    conv = convolution_correction(g, t, M)
    lin = poisson_profile_field(g, t, M)
    s = f.samples - lin.samples + (m1 + 0.5 * Q - 0.5 * Z) * dP.samples + 0.5 * conv.samples
    return Field(g, s, t)


def profile_error_second(traj: Trajectory, p: float = math.inf) -> ProfileSeries:
    """``t^{1+(1-1/p)}`` times the norm of the second-order expansion residual (1D)."""
    if traj.grid.dim != 1:
        raise ValueError("second-order expansion is 1D only")
    u0 = traj.initial
    M = mass(u0)
    m1 = first_moment(u0)
    e = 1.0 + (1.0 - (0.0 if math.isinf(p) else 1.0 / p))
    snaps = [f for f in traj.snapshots if f.t > 0]
    times = np.array([f.t for f in snaps])
    Q = _energy_integral(traj, times)
    vals = np.array([f.t ** e * _norm(expansion_residual(f, M, m1, q), p) for f, q in zip(snaps, Q)])
    tails = np.array([poisson_tail_mass(1, t, traj.grid.L) for t in times])
    return ProfileSeries(times, vals, e, tails, False)


# --- decay fits -------------------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    t_a: float
    t_b: float
    slope: float
    intercept: float
    residual: float  # rms of the log-log residuals
    stderr: float
    samples: int

    @property
    def ci95(self) -> tuple:
        return (self.slope - 1.96 * self.stderr, self.slope + 1.96 * self.stderr)


def decay_rate_fit(t, values, window: tuple) -> DecayFit:
    """Least-squares slope of ``log value`` against ``log t`` on ``window``."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    t_a, t_b = float(window[0]), float(window[1])
    if not t_b >= 2.0 * t_a:
        raise ValueError(f"window must satisfy t_b >= 2 t_a, got [{t_a}, {t_b}]")
    sel = (t >= t_a * (1 - 1e-12)) & (t <= t_b * (1 + 1e-12))
    if sel.sum() < 8:
        raise ValueError(f"need at least 8 samples in the window, got {int(sel.sum())}")
    if np.any(v[sel] <= 0):
        raise ValueError("decay fit needs positive values")
    x = np.log(t[sel])
    y = np.log(v[sel])
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    n = x.size
    s2 = float(res @ res) / max(n - 2, 1)
    se = math.sqrt(s2 / float(np.sum((x - x.mean()) ** 2)))
    return DecayFit(t_a, t_b, float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(res ** 2))), se, int(n))


def fractional_derivative_norm(f: Field, alpha: float, p: float = math.inf) -> float:
    """``|| |nabla|^alpha f ||_p`` (refined supremum for ``p = inf``)."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if alpha == 0:
        return _norm(f, p)
    g = Field(f.grid, _irfftn(f.grid.rxi_abs ** alpha * f.rspectral, f.grid), f.t)
    return _norm(g, p)


def norm_series(traj: Trajectory, alpha: float = 0.0, p: float = math.inf) -> tuple:
    """``(t, || |nabla|^alpha u(t) ||_p)`` over the snapshots."""
    ts = traj.times
    return ts, np.array([fractional_derivative_norm(f, alpha, p) for f in traj.snapshots])


# --- analyticity radius --------------------------------------------------------------


@dataclass(frozen=True)
class AnalyticityEstimate:
    t: float
    radius: float
    xi_lo: float
    xi_hi: float
    noise_floor: float
    r_squared: float
    intercept: float

    @property
    def decades(self) -> float:
        return math.log10(self.xi_hi / self.xi_lo)


def spectral_profile(f: Field) -> tuple:
    """``(xi, |F(xi)|)`` on positive frequencies; 2D uses the shell maximum."""
    g = f.grid
    c = np.abs(f.rspectral) * (2.0 * g.L / g.n) ** g.dim
    if g.dim == 1:
        return g.rxi[0][1:], c[1:]
    r = g.rxi_abs
    shell = np.rint(r / g.xi_min).astype(int)
    kmax = g.n // 2
    prof = np.zeros(kmax + 1)
    np.maximum.at(prof, np.clip(shell, 0, kmax).ravel(), c.ravel())
    k = np.arange(1, kmax + 1)
    return k * g.xi_min, prof[1:]


def _noise_floor(f: Field, xi: np.ndarray, amp: np.ndarray) -> float:
    g = f.grid
    cut = (g.n // 3) * g.xi_min
    above = amp[xi > cut * (1 + 1e-12)]
    resid = float(above.max()) if above.size else 0.0
    return max(1e-14 * float(amp.max()), resid)


def analyticity_radius(f: Field, min_decades: float = 1.5, r2_min: float = 0.995,
                       floor_factor: float = 1e3) -> AnalyticityEstimate:
    """Fit ``log |F(xi)| = a - r |xi|`` on the longest stretch with ``R^2 >= r2_min``.

    Candidates are restricted to coefficients above ``floor_factor`` times the
    noise floor ``max(1e-14 peak, largest coefficient beyond the dealiasing cut)``.
    """
    xi, amp = spectral_profile(f)
    floor = _noise_floor(f, xi, amp)
    ok = amp > floor_factor * floor
    # fit band: the leading run of resolved coefficients
    if not ok[0]:
        raise ValueError("lowest coefficient already below the noise floor")
    stop = int(np.argmin(ok)) if not ok.all() else ok.size
    x = xi[:stop]
    y = np.log(amp[:stop])
    n = x.size
    if n < 4 or math.log10(x[-1] / x[0]) < min_decades:
        raise ValueError(f"usable band spans {math.log10(x[-1] / x[0]) if n else 0:.2f} decades, need {min_decades}")
    # all windows [i, k] in O(n^2) through prefix sums
    step = max(1, n // 600)
    idx = np.arange(0, n, step)
    if idx[-1] != n - 1:
        idx = np.append(idx, n - 1)
    px = np.concatenate([[0.0], np.cumsum(x)])
    py = np.concatenate([[0.0], np.cumsum(y)])
    pxx = np.concatenate([[0.0], np.cumsum(x * x)])
    pyy = np.concatenate([[0.0], np.cumsum(y * y)])
    pxy = np.concatenate([[0.0], np.cumsum(x * y)])
    I = idx[:, None]
    K = idx[None, :] + 1
    m = (K - I).astype(float)
    with np.errstate(invalid="ignore", divide="ignore"):
        sx = px[K] - px[I]
        sy = py[K] - py[I]
        sxx = pxx[K] - pxx[I] - sx * sx / m
        syy = pyy[K] - pyy[I] - sy * sy / m
        sxy = pxy[K] - pxy[I] - sx * sy / m
        r2 = np.where(syy > 0, sxy * sxy / (sxx * syy), 1.0)
        span = np.log10(x[K - 1] / x[I])
    good = (m >= 4) & (r2 >= r2_min) & (span >= min_decades) & (sxy < 0)
    if not good.any():
        raise ValueError("no log-linear stretch long enough above the noise floor")
    length = np.where(good, x[K - 1] - x[I], -np.inf)
    a, b = np.unravel_index(int(np.argmax(length)), length.shape)
    i0, k0 = int(I[a, 0]), int(K[0, b])
    slope = float(sxy[a, b] / sxx[a, b])
    intercept = float((sy[a, b] - slope * sx[a, b]) / m[a, b])
    return AnalyticityEstimate(f.t, max(0.0, -slope), float(x[i0]), float(x[k0 - 1]), floor,
                               float(r2[a, b]), intercept)


# --- weighted derivatives --------------------------------------------------------------


def time_derivatives(u: Field, order: int, gamma: float = 1.0, dealias: bool = True) -> list:
    """``[u, u_t, ..., d_t^order u]`` by differentiating the equation.

    ``u_{k+1} = -Lambda^gamma u_k - (1/2) d_x sum_i C(k, i) u_i u_{k-i}``.
    """
    g = u.grid
    lam = g.rxi_abs ** gamma
    flux = -0.5 * derivative_symbol(g, 0, 1)
    if dealias:
        flux = np.where(g.dealias_mask(half=True), flux, 0.0)
    coeffs = [u.rspectral.copy()]
    phys = [u.samples]
    for k in range(order):
        prod = np.zeros(g.shape)
        for i in range(k + 1):
            prod += math.comb(k, i) * phys[i] * phys[k - i]
        nxt = -lam * coeffs[k] + flux * _rfftn(prod)
        coeffs.append(nxt)
        phys.append(_irfftn(nxt, g))
    return [Field(g, p_, u.t) for p_ in phys]


def _dx(f: Field, m: int) -> Field:
    if m == 0:
        return f
    return Field(f.grid, _irfftn(derivative_symbol(f.grid, 0, m) * f.rspectral, f.grid), f.t)


@dataclass
class WeightedDerivativeReport:
    b: dict  # (alpha_t, alpha_x) -> sup_t t^|alpha| ||d^alpha u||_{B^0_{inf,1}}
    C0: float
    C1: float
    growth: dict  # |alpha| -> max (b / alpha!)^(1/|alpha|)
    ratio_test: dict  # |alpha| -> max b^(1/|alpha|) / |alpha|
    bounded: bool
    notes: list = field(default_factory=list)


def weighted_derivative_check(traj: Trajectory, alpha_max: int = 4, gamma: float | None = None,
                              times=None) -> WeightedDerivativeReport:
    """Sup over snapshots of ``t^|alpha| ||d_t^a d_x^b u||`` in the homogeneous B^0_{inf,1} norm."""
    if not 1 <= alpha_max <= 6:
        raise ValueError("alpha_max must lie in [1, 6]")
    gamma = traj.gamma if gamma is None else gamma
    part = default_partition(traj.grid)
    idx = BesovIndex(0.0, math.inf, 1.0)
    snaps = [f for f in traj.snapshots if f.t > 0]
    if times is not None:
        snaps = [traj.snapshot_at(t) for t in times]
    b = {}
    for f in snaps:
        dts = time_derivatives(f, alpha_max, gamma)
        for at in range(alpha_max + 1):
            for ax in range(alpha_max + 1 - at):
                if at + ax == 0:
                    continue
                val = f.t ** (at + ax) * besov_norm(_dx(dts[at], ax), idx, part)
                key = (at, ax)
                b[key] = max(b.get(key, 0.0), val)
    order = {}
    for (at, ax), v in b.items():
        m = at + ax
        y = math.log(max(v, 1e-300)) - gammaln(at + 1) - gammaln(ax + 1) + 4.0 * math.log1p(m)
        order.setdefault(m, []).append(y)
    ms = np.array(sorted(order))
    ys = np.array([max(order[m]) for m in ms])
    if ms.size >= 2:
        K = float(np.polyfit(ms, ys, 1)[0])
    else:
        K = float(ys[0])
    A = float(np.max(ys - K * ms))
    C0 = math.exp(-A)
    C1 = math.exp(K) / C0
    growth = {}
    ratio = {}
    for (at, ax), v in b.items():
        m = at + ax
        fac = math.exp(gammaln(at + 1) + gammaln(ax + 1))
        growth[m] = max(growth.get(m, 0.0), (v / fac) ** (1.0 / m))
        ratio[m] = max(ratio.get(m, 0.0), v ** (1.0 / m) / m)
    gs = [growth[m] for m in sorted(growth)]
    bounded = bool(max(gs) <= 4.0 * gs[0]) if gs else True
    return WeightedDerivativeReport(dict(sorted(b.items())), C0, C1, growth, ratio, bounded)


def time_derivative_fd_check(traj: Trajectory, k: int, gamma: float | None = None) -> float:
    """Relative L^inf gap between the equation's ``u_t`` and a central difference at snapshot ``k``."""
    gamma = traj.gamma if gamma is None else gamma
    s = traj.snapshots
    if not 0 < k < len(s) - 1:
        raise IndexError("central difference needs neighbours on both sides")
    h1 = s[k].t - s[k - 1].t
    h2 = s[k + 1].t - s[k].t
    if abs(h1 - h2) > 1e-9 * max(h1, h2):
        raise ValueError("central difference needs equal spacing")
    fd = (s[k + 1].samples - s[k - 1].samples) / (2 * h1)
    ut = time_derivatives(s[k], 1, gamma)[1].samples
    return float(np.max(np.abs(fd - ut)) / np.max(np.abs(ut)))
