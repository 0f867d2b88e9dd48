"""
Data-driven tuning of the pre-averaging kernel estimator.

The limit law of the estimation error at the optimal rate ``b = beta
Delta_n^{1/4}`` has conditional variance ``delta1^2 / beta + beta delta2^2``:

    delta1^2 = 4 (Phi22 c^2 / theta + 2 Phi12 c gamma theta + Phi11 gamma^2 theta^3) int K^2
    delta2^2 = vvol * int L^2

(``gamma`` the noise variance, ``vvol`` the squared volatility of the
variance). The ``Phi_ij`` are those of the unit-norm weight. Minimising over
``beta`` and ``theta`` yields the closed-form optima below; plugging in
estimates of the noise variance, integrated variance, quarticity and
integrated vol-of-vol gives the iterative procedure :func:`iterate_tune`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .config import EstimatorConfig
from .errors import InsufficientDataError
from .kernels import KernelSpec, moments, smooth
from .preavg import _summands, spot_vol_preavg_path, variance_proxy
from .series import TickSeries, VolPath
from .weights import PreAvgScheme

__all__ = [
    "AsymptoticInputs", "TunedConfig", "delta_squared", "theta_functional", "optimal_theta",
    "optimal_bandwidth", "optimal_asymptotic_variance", "noise_variance", "integrated_vvol",
    "integrated_moments", "iterate_tune", "variance_proxy", "spot_vol_preavg_local",
]

THETA_BOUNDS = (0.1, 50.0)


@dataclass(frozen=True)
class AsymptoticInputs:
    """Spot and integrated nuisance quantities entering the limit variance."""

    c_tau: float = 0.0
    gamma_tau: float = 0.0
    vvol_tau: float = 0.0
    int_c: float = 0.0
    int_c2: float = 0.0
    int_cgamma: float = 0.0
    int_gamma2: float = 0.0
    int_vvol: float = 0.0
    T: float = 1.0

    def __post_init__(self):
        for name, val in self.__dict__.items():
            if np.any(np.asarray(val) < 0):
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def constant(cls, c: float, gamma: float, vvol: float, T: float = 1.0) -> "AsymptoticInputs":
        """Inputs for time-constant spot variance, noise variance and vol-of-vol."""
        return cls(c, gamma, vvol, c * T, c * c * T, c * gamma * T, gamma * gamma * T, vvol * T, T)

    def cauchy_schwarz_ok(self, tol: float = 1e-9) -> bool:
        return self.int_cgamma**2 <= self.int_c2 * self.int_gamma2 * (1.0 + tol) + tol


@dataclass
class TunedConfig:
    theta_star: float
    bandwidth: Union[float, np.ndarray]
    kernel: KernelSpec
    iterations_used: int
    config: EstimatorConfig
    path: VolPath
    diagnostics: list[dict] = field(default_factory=list)

    def bandwidth_at(self, tau: float) -> float:
        if np.ndim(self.bandwidth) == 0:
            return float(self.bandwidth)
        return float(np.interp(tau, self.path.times, self.bandwidth))


# ---------------------------------------------------------------------------
# asymptotic variance


def theta_functional(inputs: AsymptoticInputs, theta: float, scheme: PreAvgScheme,
                     local: bool = False):
    """``Theta(theta)`` (integrated) or its spot version ``Theta_tau(theta)``."""
    p11, p12, p22 = scheme.normalized_phis()
    if local:
        c, g = inputs.c_tau, inputs.gamma_tau
        return p22 * c * c / theta + 2.0 * p12 * c * g * theta + p11 * g * g * theta**3
    return (p22 * inputs.int_c2 / theta + 2.0 * p12 * inputs.int_cgamma * theta
            + p11 * inputs.int_gamma2 * theta**3)


def delta_squared(inputs: AsymptoticInputs, theta: float, scheme: PreAvgScheme,
                  kernel: KernelSpec) -> tuple[float, float]:
    """Spot limit variances ``(delta1^2, delta2^2)`` at ``tau``."""
    if not theta > 0:
        raise ValueError("theta must be positive")
    mom = moments(kernel)
    d1 = 4.0 * theta_functional(inputs, theta, scheme, local=True) * mom.int_K2
    d2 = inputs.vvol_tau * mom.int_L2
    return d1, d2


def integrated_delta_squared(inputs: AsymptoticInputs, theta: float, scheme: PreAvgScheme,
                             kernel: KernelSpec) -> tuple[float, float]:
    """``(int delta1^2, int delta2^2)`` over ``[0, T]``."""
    mom = moments(kernel)
    return (4.0 * theta_functional(inputs, theta, scheme) * mom.int_K2,
            inputs.int_vvol * mom.int_L2)


def optimal_theta(inputs: AsymptoticInputs, scheme: PreAvgScheme, mode: str = "integrated") -> float:
    """Minimiser of the (integrated or spot) asymptotic variance over theta.

    Returns ``inf`` when the noise variance vanishes. The local formula
    divides by the squared noise variance; for constant inputs it is not the
    specialisation of the integrated one.
    """
    p11, p12, p22 = scheme.normalized_phis()
    mode = mode.lower()
    if mode == "integrated":
        if inputs.int_gamma2 <= 0:
            return math.inf
        a = p12 * inputs.int_cgamma
        num = math.sqrt(a * a + 3.0 * p11 * p22 * inputs.int_gamma2 * inputs.int_c2) - a
        return math.sqrt(num / (3.0 * p11 * inputs.int_gamma2))
    if mode == "local":
        if inputs.gamma_tau <= 0:
            return math.inf
        num = inputs.c_tau * (math.sqrt(p12 * p12 + 3.0 * p11 * p22) - p12)
        return math.sqrt(num / (3.0 * p11 * inputs.gamma_tau**2))
    raise ValueError("mode must be 'integrated' or 'local'")


def optimal_bandwidth(inputs: AsymptoticInputs, theta: float, scheme: PreAvgScheme,
                      kernel: KernelSpec, delta_n: float, mode: str = "homogeneous_noise"):
    """Variance-minimising bandwidth.

    ``homogeneous_noise``: one bandwidth for the whole window, from integrated
    quantities. ``local_noise``: spot version (array-valued if the spot inputs
    are arrays). ``local_no_noise``: optimal ``b`` for the noise-free
    estimator, ``Delta_n^{1/2} sqrt(2 c^2 int K^2 / (vvol int L^2))``.
    Returns ``inf`` when the vol-of-vol is zero.
    """
    mom = moments(kernel)
    mode = mode.lower()
    with np.errstate(divide="ignore"):
        if mode == "homogeneous_noise":
            if inputs.int_vvol <= 0:
                return math.inf
            th = theta_functional(inputs, theta, scheme)
            return delta_n**0.25 * math.sqrt(4.0 * th * mom.int_K2 / (inputs.int_vvol * mom.int_L2))
        if mode == "local_noise":
            th = np.asarray(theta_functional(inputs, theta, scheme, local=True), dtype=float)
            vv = np.asarray(inputs.vvol_tau, dtype=float)
            out = delta_n**0.25 * np.sqrt(4.0 * th * mom.int_K2 / (vv * mom.int_L2))
            return float(out) if out.ndim == 0 else out
        if mode == "local_no_noise":
            c = np.asarray(inputs.c_tau, dtype=float)
            vv = np.asarray(inputs.vvol_tau, dtype=float)
            out = delta_n**0.5 * np.sqrt(2.0 * c * c * mom.int_K2 / (vv * mom.int_L2))
            return float(out) if out.ndim == 0 else out
    raise ValueError("mode must be homogeneous_noise, local_noise or local_no_noise")


def optimal_asymptotic_variance(inputs: AsymptoticInputs, theta: float, scheme: PreAvgScheme,
                                kernel: KernelSpec, mode: str = "homogeneous_noise") -> float:
    """Limit variance attained at the optimal bandwidth:
    ``4 sqrt(Theta int vvol int K^2 int L^2)`` (integrated) or its spot analogue."""
    mom = moments(kernel)
    if mode == "homogeneous_noise":
        return 4.0 * math.sqrt(theta_functional(inputs, theta, scheme) * inputs.int_vvol
                               * mom.int_K2 * mom.int_L2)
    if mode == "local_noise":
        return 4.0 * math.sqrt(theta_functional(inputs, theta, scheme, local=True) * inputs.vvol_tau
                               * mom.int_K2 * mom.int_L2)
    raise ValueError("mode must be homogeneous_noise or local_noise")


# ---------------------------------------------------------------------------
# nuisance estimators


def noise_variance(series: TickSeries) -> float:
    """``sum (Y_i - Y_{i-1})^2 / (2n)``."""
    dy = series.increments
    return float(np.dot(dy, dy) / (2.0 * len(dy)))


def integrated_vvol(spot_path: VolPath, sparsity_p: int = 300) -> float:
    """Realised variance of the spot-variance path sampled every ``p`` points."""
    if sparsity_p < 1:
        raise ValueError("sparsity must be a positive integer")
    v = spot_path.values
    if len(v) < 2 * sparsity_p:
        raise InsufficientDataError("path shorter than twice the sparsity")
    n = len(v) - 1
    sparse = v[: (n // sparsity_p) * sparsity_p + 1: sparsity_p]
    return float(np.sum(np.diff(sparse) ** 2))


def integrated_moments(spot_path: VolPath, trim_fraction: float = 0.0) -> tuple[float, float]:
    """Riemann-sum estimates of ``int c`` and ``int c^2``.

    Negative estimates are floored at zero before squaring. With trimming
    only the interior points are averaged and the result is rescaled to the
    full window.
    """
    v = spot_path.values
    t = spot_path.times
    if len(v) < 2:
        raise InsufficientDataError("need at least two path points")
    if trim_fraction < 0:
        raise ValueError("trim_fraction must be non-negative")
    n = len(v) - 1
    lo = max(int(math.floor(trim_fraction * n)), 1)
    hi = n - int(math.floor(trim_fraction * n))
    inner = v[lo: hi + 1]
    if hi < lo or len(inner) == 0:
        raise InsufficientDataError("no path points left after trimming")
    span = t[-1] - t[0]
    pos = np.maximum(inner, 0.0)
    return float(np.mean(inner) * span), float(np.mean(pos * pos) * span)


# ---------------------------------------------------------------------------
# local bandwidth evaluation


def spot_vol_preavg_local(series: TickSeries, config: EstimatorConfig, bandwidths, taus=None,
                          truncate: bool = False, edge_adjust: bool = True,
                          resolution: float = 0.005) -> VolPath:
    """Pre-averaging estimates with a different bandwidth at every ``tau``.

    Bandwidths are snapped to a geometric grid of relative spacing
    ``resolution`` and one full path is computed per distinct level.
    """
    taus = series.times if taus is None else np.atleast_1d(np.asarray(taus, dtype=float))
    bw = np.broadcast_to(np.asarray(bandwidths, dtype=float), taus.shape)
    if np.any(~(bw > 0)):
        raise ValueError("bandwidths must be positive")
    scheme = config.scheme(series.delta_n)
    from .config import TruncationRule
    rule = (config.truncation or TruncationRule()) if truncate else None
    x = _summands(series, scheme, rule)
    step = math.log1p(resolution)
    level = np.rint(np.log(bw) / step).astype(np.int64)
    out = np.empty(len(taus))
    for lv in np.unique(level):
        sel = level == lv
        out[sel] = smooth(config.kernel, math.exp(lv * step), series.t0, series.delta_n, x,
                          taus[sel], edge_adjust=edge_adjust)
    return VolPath(taus, out)


# ---------------------------------------------------------------------------
# iterative procedure


def iterate_tune(series: TickSeries, init: Optional[EstimatorConfig] = None, max_iter: int = 1,
                 freeze_vvol_after: int = 1, mode: str = "homogeneous", tune_theta: bool = True,
                 sparsity_p: int = 300, truncate: bool = False, edge_adjust: bool = True,
                 gamma: Optional[float] = None, vvol: Optional[float] = None) -> TunedConfig:
    """Alternate between estimating the spot-variance path and re-estimating
    the optimal (homogeneous or local) bandwidth.

    Each iteration: estimate the path with the current bandwidth; estimate
    the noise variance, integrated vol-of-vol (sparse realised variance of
    the path, frozen after ``freeze_vvol_after`` iterations), integrated
    variance and quarticity; update theta (if ``tune_theta``) and the
    bandwidth. ``gamma``/``vvol`` override the corresponding estimates
    (semi-oracle use).
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    if mode not in ("homogeneous", "local"):
        raise ValueError("mode must be 'homogeneous' or 'local'")
    cfg = init or EstimatorConfig()
    delta_n = series.delta_n
    T = series.T
    gamma_hat = noise_variance(series) if gamma is None else gamma
    path = spot_vol_preavg_path(series, cfg, truncate=truncate, edge_adjust=edge_adjust)
    ivv = None
    diags = []
    bandwidth: Union[float, np.ndarray] = cfg.bandwidth_for(delta_n)
    theta = cfg.theta
    for it in range(1, max_iter + 1):
        int_c, int_c2 = integrated_moments(path)
        if ivv is None or it <= freeze_vvol_after:
            ivv = integrated_vvol(path, sparsity_p) if vvol is None else vvol
        inputs = AsymptoticInputs(
            c_tau=0.0, gamma_tau=gamma_hat, vvol_tau=ivv / T, int_c=int_c, int_c2=int_c2,
            int_cgamma=gamma_hat * int_c, int_gamma2=gamma_hat**2 * T, int_vvol=ivv, T=T,
        )
        diag = {"iteration": it, "gamma_hat": gamma_hat, "int_vvol": ivv, "int_c": int_c,
                "int_c2": int_c2, "theta_capped": False, "bandwidth_capped": False}
        if tune_theta:
            th = optimal_theta(inputs, cfg.scheme(delta_n))
            lo, hi = THETA_BOUNDS
            if not lo <= th <= hi:
                diag["theta_capped"] = True
                th = min(max(th, lo), hi)
            theta = th
            cfg = cfg.with_(theta=theta)
        scheme = cfg.scheme(delta_n)
        if mode == "homogeneous":
            b = optimal_bandwidth(inputs, theta, scheme, cfg.kernel, delta_n, "homogeneous_noise")
            if not b <= T / 2:
                diag["bandwidth_capped"] = True
                b = T / 2
            bandwidth = float(b)
            cfg = cfg.with_(bandwidth=bandwidth)
            path = spot_vol_preavg_path(series, cfg, truncate=truncate, edge_adjust=edge_adjust)
            diag["bandwidth"] = bandwidth
            diag["beta_equiv"] = bandwidth / delta_n**0.25
        else:
            spot = AsymptoticInputs(
                c_tau=np.maximum(path.values, 0.0), gamma_tau=gamma_hat, vvol_tau=ivv / T, T=T)
            b = np.asarray(optimal_bandwidth(spot, theta, scheme, cfg.kernel, delta_n, "local_noise"))
            # zero preliminary estimates would give a zero bandwidth
            floor = 0.05 * delta_n**0.25
            capped = (b > T / 2) | ~(b >= floor)
            diag["bandwidth_capped"] = bool(np.any(capped))
            b = np.clip(np.nan_to_num(b, nan=floor, posinf=T / 2), floor, T / 2)
            bandwidth = b
            path = spot_vol_preavg_local(series, cfg, b, truncate=truncate, edge_adjust=edge_adjust)
            diag["bandwidth"] = float(np.median(b))
            diag["beta_equiv"] = float(np.median(b)) / delta_n**0.25
        diag["theta"] = theta
        diags.append(diag)
    return TunedConfig(theta, bandwidth, cfg.kernel, max_iter, cfg, path, diags)
