"""
Pre-averaging kernel estimators of spot variance under microstructure noise.

For a window ``k_n`` and weight ``g`` the pre-averaged increments are

    Ybar_j = sum_{l=1}^{k_n-1} g(l/k_n) Delta_{j+l-1} Y
    Yhat_j = sum_{l=1}^{k_n} (g(l/k_n) - g((l-1)/k_n))^2 (Delta_{j+l-1} Y)^2

for ``j = 1..n-k_n+1`` (every increment index then stays within ``1..n``),
and the estimator is

    c_hat(tau) = 1/phi_kn sum_j K_b(t_{j-1} - tau) (Ybar_j^2 1{|Ybar_j| <= v_n} - Yhat_j / 2).

The truncation compares ``|Ybar_j| / |g|_2`` with ``v_n`` so that the whole
estimator, thresholding included, is invariant to rescaling ``g``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from .config import EstimatorConfig, RegimeReport, TruncationRule
from .errors import InsufficientDataError
from .kernels import smooth
from .series import TickSeries, VolPath
from .weights import PreAvgScheme, WeightFn, custom_weight, phi_matrix, triangular, window_length

__all__ = [
    "PreAvgScheme", "PreAvgSeries", "WeightFn", "custom_weight", "phi_matrix", "triangular",
    "window_length", "preaverage", "variance_proxy", "spot_vol_preavg", "spot_vol_preavg_path",
    "validate_regime_noise",
]

# median of a chi-square(1) variable
_CHI2_MEDIAN = 0.454936423119572


@dataclass(frozen=True, eq=False)
class PreAvgSeries:
    bar: np.ndarray
    hat: np.ndarray


def preaverage(series: TickSeries, scheme: PreAvgScheme) -> PreAvgSeries:
    """Pre-averaged increments ``Ybar`` and de-biasing terms ``Yhat``."""
    k = scheme.k_n
    n = series.n
    if n < k + 1:
        raise InsufficientDataError(f"series of {n} increments is shorter than window k_n={k} plus one")
    gi = scheme.g_values
    dy = series.increments
    # bar_j (0-based j) = sum_{l=1}^{k-1} g_l dy[j + l - 1]
    bar = np.correlate(dy, gi[1:k], mode="valid")[: n - k + 1]
    hat = np.correlate(dy * dy, np.diff(gi) ** 2, mode="valid")
    return PreAvgSeries(bar, hat)


def variance_proxy(series: TickSeries, scheme: PreAvgScheme, pre: Optional[PreAvgSeries] = None) -> float:
    """Robust global spot-variance level used to set the default threshold.

    ``median(Ybar^2)`` is insensitive to the few windows hit by a jump, as
    is a 1%-trimmed mean of ``Yhat``; after removing the noise contribution
    and dividing by ``phi_kn Delta_n`` it estimates the average variance rate.
    """
    pre = preaverage(series, scheme) if pre is None else pre
    total = float(np.median(pre.bar**2)) / _CHI2_MEDIAN
    level = (total - 0.5 * float(stats.trim_mean(pre.hat, 0.01))) / (scheme.phi_kn * series.delta_n)
    floor = 1e-3 * total / (scheme.phi_kn * series.delta_n)
    return max(level, floor, np.finfo(float).tiny)


def truncation_level(series: TickSeries, scheme: PreAvgScheme, rule: TruncationRule,
                     pre: Optional[PreAvgSeries] = None) -> float:
    """``v_n = alpha (k_n Delta_n)^varpi`` for a unit-norm weight."""
    if rule.regime != "noise":
        rule = TruncationRule(rule.alpha, rule.varpi, "noise", rule.multiplier)
    alpha = rule.alpha
    if alpha is None:
        alpha = rule.multiplier * math.sqrt(variance_proxy(series, scheme, pre))
    return rule.level(series.delta_n, scheme.k_n, alpha=alpha)


def _summands(series: TickSeries, scheme: PreAvgScheme, truncation: Optional[TruncationRule],
              debias: bool = True) -> np.ndarray:
    pre = preaverage(series, scheme)
    sq = pre.bar * pre.bar
    if truncation is not None:
        v = truncation_level(series, scheme, truncation, pre) * math.sqrt(scheme.weight.norm2)
        sq = np.where(np.abs(pre.bar) <= v, sq, 0.0)
    if debias:
        sq = sq - 0.5 * pre.hat
    return sq / scheme.phi_kn


def spot_vol_preavg_path(series: TickSeries, config: EstimatorConfig, taus=None,
                         truncate: bool = False, edge_adjust: bool = False, debias: bool = True,
                         floor: bool = False, strict: bool = False) -> VolPath:
    """Pre-averaging kernel estimates at each of ``taus`` (default: all
    observation times ``t_0..t_n``).

    ``truncate`` applies ``config.truncation`` (or the default rule when none
    is configured). ``floor`` clips negative estimates at zero; by default they
    are returned unchanged.
    """
    if strict:
        validate_regime_noise(config, series.n, series.T).raise_if_failed()
    scheme = config.scheme(series.delta_n)
    rule = (config.truncation or TruncationRule()) if truncate else None
    x = _summands(series, scheme, rule, debias)
    taus = series.times if taus is None else np.atleast_1d(np.asarray(taus, dtype=float))
    b = config.bandwidth_for(series.delta_n)
    vals = smooth(config.kernel, b, series.t0, series.delta_n, x, taus, edge_adjust=edge_adjust)
    if floor:
        vals = np.maximum(vals, 0.0)
    return VolPath(taus, vals)


def spot_vol_preavg(series: TickSeries, config: EstimatorConfig, tau: float, truncate: bool = True,
                    edge_adjust: bool = False, debias: bool = True, strict: bool = False) -> float:
    """Pre-averaging kernel estimate of ``c_tau`` for ``tau`` inside the window."""
    if not series.t0 < tau < series.t_end:
        raise ValueError(f"tau={tau} outside ({series.t0}, {series.t_end})")
    path = spot_vol_preavg_path(series, config, [tau], truncate=truncate, edge_adjust=edge_adjust,
                                debias=debias, strict=strict)
    return float(path.values[0])


def validate_regime_noise(config: EstimatorConfig, n: int, T: float = 1.0,
                          varpi: Optional[float] = None) -> RegimeReport:
    """Check the bandwidth, jump activity and threshold exponent against the
    noisy-data CLT conditions.

    With ``b = beta * Delta_n^rate`` we have ``m_n Delta_n^a -> beta`` for
    ``a = 1 - rate``. Requirements: ``a`` in (1/2, 1),
    ``r < 5/2 - 2 min(a - 1/4, 1 - a + 1/4)`` and
    ``varpi >= (min(a - 1/4, 1 - (a - 1/4)) - 1/4) / (2 - r)`` with varpi in (0, 1/2).
    """
    delta_n = T / n
    rep = RegimeReport()
    r = config.jump_activity
    a = 1.0 - config.rate if config.bandwidth is None else None
    b = config.bandwidth_for(delta_n)
    if a is None:
        # explicit bandwidth: read off the implied exponent at this n
        a = 1.0 - math.log(b) / math.log(delta_n)
    if varpi is None:
        varpi = (config.truncation or TruncationRule()).varpi
    m_n = b / delta_n
    beta_prime = m_n * delta_n**a
    rep.values.update(a=a, beta_prime=beta_prime, m_n=m_n, r=r, varpi=varpi)
    if abs(a - 0.75) < 1e-12:
        beta = beta_prime
    else:
        beta = 0.0 if a < 0.75 else math.inf
    rep.values["beta"] = beta
    rep.values["beta_n"] = m_n * delta_n**0.75
    rep.notes["clt_case"] = "(i) finite beta" if math.isfinite(beta) else "(ii) infinite beta"

    rep.add("bandwidth_exponent", 0.5 < a < 1.0, f"needs a in (1/2, 1), got a={a:.6g}")
    lead = min(a - 0.25, 1.0 - a + 0.25)
    r_bound = 2.5 - 2.0 * lead
    rep.values["r_bound"] = r_bound
    rep.add("jump_activity", r < r_bound, f"needs r < 5/2 - 2 min(a-1/4, 5/4-a) = {r_bound:.6g}, got r={r:.6g}")
    w_lead = min(a - 0.25, 1.0 - (a - 0.25)) - 0.25
    w_bound = w_lead / (2.0 - r) if r < 2 else math.inf
    rep.values["varpi_lower_bound"] = w_bound
    rep.add("varpi_range", 0.0 < varpi < 0.5, "needs varpi in the open interval (0, 1/2)")
    rep.add("varpi_lower", varpi >= w_bound, f"needs varpi >= {w_bound:.6g}")
    k_target = 1.0 / (config.theta * math.sqrt(delta_n))
    k_n = window_length(config.theta, delta_n)
    slack = abs(k_n - k_target)
    rep.values.update(k_n=k_n, k_n_target=k_target, k_n_slack_scaled=slack * delta_n**0.25)
    rep.add("window_length", slack <= 0.5 + 1e-9,
            f"k_n={k_n} deviates from 1/(theta sqrt(Delta_n))={k_target:.6g} by more than rounding")
    return rep
