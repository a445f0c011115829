"""Integrating-factor RK4 on half-spectrum coefficients.

Solves ``v' = -A v + N(v)`` with ``A`` a real diagonal symbol; the linear part
is carried by the exact factor ``exp(-A h)``, so purely linear problems are
advanced without error.
"""

from __future__ import annotations

import numpy as np


class IFRK4:
    def __init__(self, symbol: np.ndarray, nonlinear, enabled: bool = True):
        self.symbol = np.asarray(symbol, dtype=float)
        self.nonlinear = nonlinear
        self.enabled = enabled
        self._h = None
        self._E = None
        self._E2 = None

    def _factors(self, h: float):
        if h != self._h:
            self._h = h
            self._E = np.exp(-0.5 * h * self.symbol)
            self._E2 = self._E * self._E
        return self._E, self._E2

    def rate(self, v: np.ndarray, n: np.ndarray | None = None) -> np.ndarray:
        """``dv/dt``; pass a cached ``N(v)`` to skip one evaluation."""
        if not self.enabled:
            return -self.symbol * v
        if n is None:
            n = self.nonlinear(v)
        return -self.symbol * v + n

    def step(self, v: np.ndarray, h: float, k1: np.ndarray | None = None) -> np.ndarray:
        E, E2 = self._factors(h)
        if not self.enabled:
            return E2 * v
        if k1 is None:
            k1 = self.nonlinear(v)
        k2 = self.nonlinear(E * (v + 0.5 * h * k1))
        k3 = self.nonlinear(E * v + 0.5 * h * k2)
        k4 = self.nonlinear(E2 * v + h * E * k3)
        return E2 * v + (h / 6.0) * (E2 * k1 + 2.0 * E * (k2 + k3) + k4)
