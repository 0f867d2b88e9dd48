"""
Kernel spot-variance estimators for noise-free observations.

    c_hat(tau) = sum_i K_b(t_{i-1} - tau) (Delta_i X)^2 [1{|Delta_i X| <= v_n}]

with ``b = m_n * Delta_n`` and, for the truncated version, ``v_n = alpha
Delta_n^varpi``.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .config import RegimeReport, TruncationRule, beta_class
from .errors import InsufficientDataError
from .kernels import KernelSpec, smooth
from .series import TickSeries, VolPath


def bipower_level(series: TickSeries) -> float:
    """Jump-robust variance rate ``(pi/2) sum |dX_i||dX_{i-1}| / T``."""
    dx = np.abs(series.increments)
    if len(dx) < 2:
        raise InsufficientDataError("need at least two increments")
    return float(0.5 * math.pi * np.sum(dx[1:] * dx[:-1]) * len(dx) / (len(dx) - 1) / series.T)


def truncation_level(series: TickSeries, rule: TruncationRule) -> float:
    """Resolve ``v_n`` for the noise-free estimator."""
    if rule.regime != "no_noise":
        rule = TruncationRule(rule.alpha, rule.varpi, "no_noise", rule.multiplier)
    alpha = rule.alpha if rule.alpha is not None else rule.multiplier * math.sqrt(bipower_level(series))
    return rule.level(series.delta_n, alpha=alpha)


def _summands(series: TickSeries, truncation: Optional[TruncationRule]) -> np.ndarray:
    dx = series.increments
    sq = dx * dx
    if truncation is not None:
        sq = np.where(np.abs(dx) <= truncation_level(series, truncation), sq, 0.0)
    return sq


def spot_vol_kernel_path(series: TickSeries, kernel: KernelSpec, m_n: float, taus=None,
                         truncation: Optional[TruncationRule] = None,
                         edge_adjust: bool = False) -> VolPath:
    """Evaluate the (optionally truncated) kernel estimator at every ``tau``.

    ``taus`` defaults to the observation grid ``t_0..t_n``. ``m_n`` may be
    fractional; the bandwidth is ``m_n * delta_n``.
    """
    if not m_n > 0:
        raise ValueError("m_n must be positive")
    if series.n < 1:
        raise InsufficientDataError("need at least one increment")
    taus = series.times if taus is None else np.atleast_1d(np.asarray(taus, dtype=float))
    b = m_n * series.delta_n
    vals = smooth(kernel, b, series.t0, series.delta_n, _summands(series, truncation), taus,
                  edge_adjust=edge_adjust)
    return VolPath(taus, vals)


def spot_vol_kernel(series: TickSeries, kernel: KernelSpec, m_n: float,
                    truncation: Optional[TruncationRule] = None, tau: float = 0.5,
                    edge_adjust: bool = False) -> float:
    """Single-point version of :func:`spot_vol_kernel_path`; ``tau`` must be
    interior to the sampling window."""
    if not series.t0 < tau < series.t_end:
        raise ValueError(f"tau={tau} outside ({series.t0}, {series.t_end})")
    return float(spot_vol_kernel_path(series, kernel, m_n, [tau], truncation, edge_adjust).values[0])


def validate_regime_no_noise(m_n_law: tuple[float, float], r: float, varpi: float,
                             delta_n: float) -> RegimeReport:
    """Check ``m_n = coef * Delta_n^{-a}`` against the noise-free CLT conditions.

    The plain estimator needs ``r < 4/3`` or ``4/3 <= r < 2/(1+a)`` with
    ``a < 1/2``; the truncated one needs ``r < 2/(1 + a^(1-a))`` and
    ``varpi > (a^(1-a)) / (2(2-r))``.
    """
    coef, a = m_n_law
    if not 0.0 < a < 1.0:
        raise ValueError("bandwidth exponent a must lie in (0, 1)")
    if not 0.0 <= r <= 2.0:
        raise ValueError("jump activity r must lie in [0, 2]")
    rep = RegimeReport()
    m_n = coef * delta_n ** (-a)
    rep.values.update(a=a, beta_prime=coef, m_n=m_n, r=r, varpi=varpi)
    if a == 0.5:
        beta = coef
    elif a < 0.5:
        beta = 0.0
    else:
        beta = math.inf
    rep.values["beta"] = beta
    rep.values["beta_n"] = m_n * math.sqrt(delta_n)
    rep.notes["clt_case"] = "(i) finite beta" if beta_class(beta) != "infinite" else "(ii) infinite beta"

    amin = min(a, 1.0 - a)
    plain = r < 4.0 / 3.0 or (4.0 / 3.0 <= r < 2.0 / (1.0 + a) and a < 0.5)
    rep.add("plain_estimator_valid", plain,
            f"needs r < 4/3, or 4/3 <= r < 2/(1+a) = {2.0 / (1.0 + a):.6g} with a < 1/2")
    r_bound = 2.0 / (1.0 + amin)
    w_bound = amin / (2.0 * (2.0 - r)) if r < 2 else math.inf
    rep.values["truncated_r_bound"] = r_bound
    rep.values["varpi_lower_bound"] = w_bound
    rep.add("truncated_jump_activity", r < r_bound, f"needs r < 2/(1 + min(a,1-a)) = {r_bound:.6g}")
    rep.add("truncated_varpi", varpi > w_bound and 0.0 < varpi < 0.5,
            f"needs {w_bound:.6g} < varpi < 1/2")
    return rep
