"""Pure-numpy reference implementations of the compiled kernels.

Every function here has a twin with the same signature in ``_core.pyx``.
"""

import numpy as np


def second_difference_sum(g, weights, periodic=True):
    """Return ``out[i] = sum_m weights[m-1] * (2 g[i] - g[i+m] - g[i-m])``.

    ``m`` runs from 1 to ``len(weights)``. With ``periodic=False`` samples
    outside the array are treated as zero.
    """
    g = np.ascontiguousarray(g, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    n = g.shape[0]
    out = np.zeros(n)
    if periodic:
        for m, w in enumerate(weights, start=1):
            out += w * (2.0 * g - np.roll(g, -m) - np.roll(g, m))
        return out
    padded = np.zeros(n + 2 * len(weights))
    M = len(weights)
    padded[M:M + n] = g
    for m, w in enumerate(weights, start=1):
        out += w * (2.0 * g - padded[M + m:M + m + n] - padded[M - m:M - m + n])
    return out


def circular_convolve(f, kernel):
    """Direct O(n^2) circular convolution ``out[i] = sum_m kernel[m] f[i-m]``."""
    f = np.ascontiguousarray(f, dtype=np.float64)
    kernel = np.ascontiguousarray(kernel, dtype=np.float64)
    out = np.zeros_like(f)
    for m in np.flatnonzero(kernel):
        out += kernel[m] * np.roll(f, m)
    return out


def trig_eval(coeffs, freqs, s):
    """Evaluate ``Re sum_k c_k (i xi_k)^m exp(i xi_k s)`` for m = 0, 1, 2."""
    phase = np.exp(1j * freqs * s) * coeffs
    f0 = phase.real.sum()
    f1 = (1j * freqs * phase).real.sum()
    f2 = -(freqs * freqs * phase).real.sum()
    return float(f0), float(f1), float(f2)
