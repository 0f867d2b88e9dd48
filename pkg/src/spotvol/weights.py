"""
Pre-averaging weight functions and the constants derived from them.

A weight ``g`` on [0, 1] vanishes at both ends. The pre-averaging estimators
are invariant to rescaling ``g``; the asymptotic constants ``Phi_ij`` below are
returned for ``g`` as given and must be divided by ``(int g^2)^2`` before they
are plugged into variance formulas written for a unit-norm weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .kernels import _quad


@dataclass(frozen=True, eq=False)
class WeightFn:
    id: str
    g: Callable[[np.ndarray], np.ndarray]
    g_prime: Callable[[np.ndarray], np.ndarray]
    breakpoints: tuple[float, ...] = ()
    scale: float = 1.0

    def __call__(self, x):
        return self.scale * self.g(np.asarray(x, dtype=float))

    def derivative(self, x):
        return self.scale * self.g_prime(np.asarray(x, dtype=float))

    def scaled(self, c: float) -> "WeightFn":
        if not c > 0:
            raise ValueError("scale must be positive")
        return WeightFn(self.id, self.g, self.g_prime, self.breakpoints, self.scale * c)

    @property
    def norm2(self) -> float:
        """``int_0^1 g(s)^2 ds``."""
        return _norm2(self.id, self.g, self.breakpoints) * self.scale**2


def _tri(x):
    return np.minimum(x, 1.0 - x)


def _tri_prime(x):
    return np.where(x < 0.5, 1.0, -1.0)


def triangular() -> WeightFn:
    """``g(x) = min(x, 1 - x)``."""
    return WeightFn("triangular", _tri, _tri_prime, (0.5,))


def custom_weight(g, g_prime, breakpoints=(), name: str = "custom") -> WeightFn:
    """Wrap user-supplied ``g`` and ``g'``; checks the boundary conditions
    and finite-difference consistency of the derivative."""
    w = WeightFn(name, lambda x: np.asarray(g(x), dtype=float),
                 lambda x: np.asarray(g_prime(x), dtype=float), tuple(sorted(breakpoints)))
    ends = w(np.array([0.0, 1.0]))
    if np.max(np.abs(ends)) > 1e-12:
        raise ValueError("weight function must vanish at 0 and 1")
    h = 1e-4
    xs = np.linspace(h, 1 - h, 401)
    bps = np.asarray(w.breakpoints)
    if len(bps):
        xs = xs[np.min(np.abs(xs[:, None] - bps[None, :]), axis=1) > 2 * h]
    fd = (w(xs + h) - w(xs - h)) / (2 * h)
    if np.max(np.abs(fd - w.derivative(xs))) > 1e-3:
        raise ValueError("g_prime is inconsistent with g")
    return w


@lru_cache(maxsize=32)
def _norm2(wid, g, bps):
    return _quad(lambda s: float(g(s)) ** 2, 0.0, 1.0, bps)


@lru_cache(maxsize=32)
def _phi_matrix_unit(wid, g, gp, bps):
    def phi1(s):
        pts = bps + tuple(b + s for b in bps)
        return _quad(lambda u: float(gp(u)) * float(gp(u - s)), s, 1.0, pts)

    def phi2(s):
        pts = bps + tuple(b + s for b in bps)
        return _quad(lambda u: float(g(u)) * float(g(u - s)), s, 1.0, pts)

    # phi_i are smooth except where a breakpoint of g(u) meets one of g(u - s)
    outer = tuple(sorted({abs(a - b) for a in bps + (0.0, 1.0) for b in bps + (0.0, 1.0)}))
    p11 = _quad(lambda s: phi1(s) ** 2, 0.0, 1.0, outer)
    p12 = _quad(lambda s: phi1(s) * phi2(s), 0.0, 1.0, outer)
    p22 = _quad(lambda s: phi2(s) ** 2, 0.0, 1.0, outer)
    return p11, p12, p22


def phi_matrix(weight: WeightFn) -> tuple[float, float, float]:
    """``(Phi11, Phi12, Phi22)`` with ``Phi_ij = int_0^1 phi_i phi_j``,
    ``phi_1(s) = int_s^1 g'(u) g'(u-s) du`` and ``phi_2(s) = int_s^1 g(u) g(u-s) du``."""
    p11, p12, p22 = _phi_matrix_unit(weight.id, weight.g, weight.g_prime, weight.breakpoints)
    c4 = weight.scale**4
    return p11 * c4, p12 * c4, p22 * c4


def window_length(theta: float, delta_n: float) -> int:
    """``k_n = round(1 / (theta sqrt(delta_n)))``, at least 2."""
    if not theta > 0:
        raise ValueError("theta must be positive")
    return max(2, int(round(1.0 / (theta * math.sqrt(delta_n)))))


@dataclass(frozen=True, eq=False)
class PreAvgScheme:
    """Weight function, window length and the derived discrete sums."""

    weight: WeightFn
    k_n: int
    theta: float
    phi_kn: float = field(init=False)
    phi_prime_kn: float = field(init=False)
    Phi11: float = field(init=False)
    Phi12: float = field(init=False)
    Phi22: float = field(init=False)

    def __post_init__(self):
        if self.k_n < 2:
            raise ValueError("k_n must be at least 2")
        gi = self.g_values
        object.__setattr__(self, "phi_kn", float(np.sum(gi[1:] ** 2)))
        object.__setattr__(self, "phi_prime_kn", float(np.sum(np.diff(gi) ** 2)))
        p11, p12, p22 = phi_matrix(self.weight)
        object.__setattr__(self, "Phi11", p11)
        object.__setattr__(self, "Phi12", p12)
        object.__setattr__(self, "Phi22", p22)

    @classmethod
    def from_theta(cls, weight: WeightFn, theta: float, delta_n: float) -> "PreAvgScheme":
        return cls(weight, window_length(theta, delta_n), theta)

    @property
    def g_values(self) -> np.ndarray:
        """``g(i / k_n)`` for ``i = 0..k_n``."""
        return self.weight(np.arange(self.k_n + 1) / self.k_n)

    def normalized_phis(self) -> tuple[float, float, float]:
        """``Phi_ij`` of the unit-norm weight ``g / |g|_2``."""
        n2 = self.weight.norm2**2
        return self.Phi11 / n2, self.Phi12 / n2, self.Phi22 / n2
