import os
import subprocess
import sys

import numpy as np
import pytest

from fracburgers import _kernels

BACKENDS = _kernels.backends()


def _naive_second_difference(g, w, periodic):
    n = g.size
    out = np.zeros(n)
    for i in range(n):
        for m, wm in enumerate(w, start=1):
            if periodic:
                a, b = g[(i + m) % n], g[(i - m) % n]
            else:
                a = g[i + m] if i + m < n else 0.0
                b = g[i - m] if i - m >= 0 else 0.0
            out[i] += wm * (2 * g[i] - a - b)
    return out


def test_fallback_always_available():
    assert "python" in BACKENDS
    assert _kernels.BACKEND in ("compiled", "python")


@pytest.mark.parametrize("name", sorted(BACKENDS))
@pytest.mark.parametrize("periodic", [True, False])
def test_second_difference_sum_against_loop(name, periodic):
    rng = np.random.default_rng(0)
    g = rng.standard_normal(37)
    w = rng.random(25)
    got = BACKENDS[name].second_difference_sum(g, w, periodic)
    assert np.allclose(got, _naive_second_difference(g, w, periodic), rtol=1e-13, atol=1e-12)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_circular_convolve_against_fft(name):
    rng = np.random.default_rng(1)
    f = rng.standard_normal(64)
    k = rng.standard_normal(64)
    ref = np.fft.ifft(np.fft.fft(f) * np.fft.fft(k)).real
    assert np.allclose(BACKENDS[name].circular_convolve(f, k), ref, atol=1e-12)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_trig_eval_derivatives(name):
    rng = np.random.default_rng(2)
    c = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    xi = np.arange(9) * 0.7
    s = 0.37
    e = c * np.exp(1j * xi * s)
    ref = (e.real.sum(), (1j * xi * e).real.sum(), (-(xi ** 2) * e).real.sum())
    assert np.allclose(BACKENDS[name].trig_eval(c, xi, s), ref, rtol=1e-13, atol=1e-13)


def test_backends_agree():
    if len(BACKENDS) < 2:
        pytest.skip("compiled extension not built")
    rng = np.random.default_rng(3)
    g = rng.standard_normal(500)
    w = rng.random(250)
    a = BACKENDS["compiled"].second_difference_sum(g, w, True)
    b = BACKENDS["python"].second_difference_sum(g, w, True)
    assert np.max(np.abs(a - b)) < 1e-11


def test_pure_python_switch_selects_fallback():
    env = dict(os.environ, FRACBURGERS_PURE_PYTHON="1")
    code = "from fracburgers import _kernels; print(_kernels.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
