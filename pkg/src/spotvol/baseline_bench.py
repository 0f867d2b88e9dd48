"""
Error metrics, the two-scale realised spot variance baseline, the limiting
error density, and Monte Carlo experiment drivers.

A path's average squared error is taken over observation indices ``l..n-l``
with ``l = floor(trim * n)``; the RMSE of a batch is the square root of the
mean ASE.
"""

from __future__ import annotations

import math
import multiprocessing
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .config import EstimatorConfig, TruncationRule
from .errors import GridMismatchError, InsufficientDataError, SpotVolError
from .kernels import get_kernel
from .preavg import spot_vol_preavg_path
from .raw_estimator import spot_vol_kernel_path
from .series import TickSeries, VolPath, fmt, write_table
from .simulate import SimPath, SimScenario, heston_paper, heston_paper_jumps, iter_batch
from .tuning import (AsymptoticInputs, delta_squared, iterate_tune, optimal_bandwidth,
                     spot_vol_preavg_local)

METHODS = ("preavg_plain", "preavg_trunc", "preavg_tuned", "preavg_oracle", "raw", "tsrsv")
REPORT_HEADER = ["label", "paths", "rmse", "rmse_stderr", "mean_bias", "runtime_s"]
HIST_HEADER = ["bin_left", "bin_right", "count", "theoretical_pdf_midpoint"]


# ---------------------------------------------------------------------------
# metrics


def _trim_bounds(n_points: int, trim_fraction: float) -> tuple[int, int]:
    if not 0.0 <= trim_fraction < 0.5:
        raise ValueError("trim_fraction must lie in [0, 1/2)")
    n = n_points - 1
    lo = int(math.floor(trim_fraction * n))
    hi = n - lo
    if hi < lo or n_points < 1:
        raise InsufficientDataError("trimming leaves no points")
    return lo, hi


def ase(estimated: VolPath, truth: VolPath, trim_fraction: float = 0.1) -> float:
    """Mean squared error over indices ``l..n-l`` (``n + 1`` points)."""
    truth.check_aligned(estimated)
    lo, hi = _trim_bounds(len(truth.values), trim_fraction)
    err = estimated.values[lo: hi + 1] - truth.values[lo: hi + 1]
    return float(np.mean(err * err))


def rmse(ases: Sequence[float]) -> tuple[float, float]:
    """``(sqrt(mean ASE), delta-method standard error)``."""
    a = np.asarray(ases, dtype=float)
    if a.size == 0:
        return math.nan, math.nan
    r = math.sqrt(float(np.mean(a)))
    if a.size < 2 or r == 0:
        return r, 0.0 if a.size >= 2 else math.nan
    return r, float(np.std(a, ddof=1) / math.sqrt(a.size) / (2.0 * r))


# ---------------------------------------------------------------------------
# two-scale realised spot variance


@dataclass(frozen=True)
class TSRSVParams:
    """Tuning of the two-scale realised spot variance.

    The local window has length ``h * n^(-window_rate) * T`` (centred on tau,
    shifted inwards near the edges) and the slow scale subsamples every
    ``ceil(K * n^(2/3))`` observations, ``n`` being the total number of
    increments. With ``window_rate = 1/6`` both error sources balance at
    the ``n^(-1/12)`` rate.
    """

    K: float = 0.1
    h: float = 4.0
    window_rate: float = 1.0 / 6.0
    small_sample: bool = True

    def __post_init__(self):
        if not (self.K > 0 and self.h > 0 and self.window_rate > 0):
            raise ValueError("TSRSV parameters must be positive")

    @property
    def label(self) -> str:
        return f"tsrsv(K={self.K:g},h={self.h:g})"


def tsrsv(series: TickSeries, params: TSRSVParams = TSRSVParams(), taus=None) -> VolPath:
    """Two-scale realised variance on a local window, divided by its length.

    ``TSRV = [Y,Y]^(K) - (nbar/N) [Y,Y]^(1)`` where ``[Y,Y]^(K)`` averages the
    ``K`` sparse realised variances on the window, ``N`` is the number of
    increments in it and ``nbar = (N - K + 1)/K``. With ``small_sample`` the
    result is divided by ``1 - nbar/N``.
    """
    y = series.values
    n = series.n
    T = series.T
    d = series.delta_n
    N = min(int(round(params.h * n ** (-params.window_rate) * T / d)), n)
    Kn = max(1, int(math.ceil(params.K * n ** (2.0 / 3.0))))
    if N < 2 * Kn:
        raise InsufficientDataError(f"window of {N} increments is too short for subsampling K={Kn}")
    dy = np.diff(y)
    s1 = np.concatenate([[0.0], np.cumsum(dy * dy)])
    dk = y[Kn:] - y[:-Kn]
    sk = np.concatenate([[0.0], np.cumsum(dk * dk)])
    taus = series.times if taus is None else np.atleast_1d(np.asarray(taus, dtype=float))
    centre = np.rint((taus - series.t0) / d).astype(np.int64)
    a = np.clip(centre - N // 2, 0, n - N)
    b = a + N
    rv = s1[b] - s1[a]
    rvk = (sk[b - Kn + 1] - sk[a]) / Kn
    nbar = (N - Kn + 1) / Kn
    est = rvk - nbar / N * rv
    if params.small_sample:
        est = est / (1.0 - nbar / N)
    return VolPath(taus, est / (N * d))


# ---------------------------------------------------------------------------
# limiting density


@dataclass(frozen=True, eq=False)
class DensityCurve:
    x: np.ndarray
    pdf: np.ndarray
    sd: float
    regime: str
    flagged: bool = False

    def at(self, x) -> np.ndarray:
        return _normal_pdf(np.asarray(x, dtype=float), self.sd)


def _normal_pdf(x, sd):
    return np.exp(-0.5 * (x / sd) ** 2) / (sd * math.sqrt(2.0 * math.pi))


def limiting_sd(config: EstimatorConfig, inputs: AsymptoticInputs, delta_n: float) -> tuple[float, str]:
    """Standard deviation of the limiting raw-scale error ``c_hat - c``.

    At the optimal rate the CLT-normalised variance ``delta1^2 + beta^2
    delta2^2`` is divided by ``m_n Delta_n^{1/2}``. For ``b >> Delta^{1/4}``
    only the target-approximation term survives (``delta2^2 b``); for
    ``b << Delta^{1/4}`` only the noise term (``delta1^2 Delta^{1/2} / b``).
    """
    scheme = config.scheme(delta_n)
    d1, d2 = delta_squared(inputs, config.theta, scheme, config.kernel)
    b = config.bandwidth_for(delta_n)
    m_n = b / delta_n
    if config.bandwidth is not None or config.rate == 0.25:
        beta = b / delta_n**0.25
        return math.sqrt((d1 + beta * beta * d2) / (m_n * math.sqrt(delta_n))), "finite"
    if config.rate < 0.25:
        return math.sqrt(d2 * m_n * delta_n), "infinite"
    return math.sqrt(d1 / (m_n * math.sqrt(delta_n))), "zero"


def limiting_density(config: EstimatorConfig, inputs: AsymptoticInputs, delta_n: float,
                     at_tau: float = 0.5, n_points: int = 801, width: float = 8.0) -> DensityCurve:
    """Centred normal density of the limiting error at ``at_tau``, sampled on
    ``±width`` standard deviations. Non-finite ``beta`` regimes are flagged."""
    sd, regime = limiting_sd(config, inputs, delta_n)
    if not sd > 0:
        raise SpotVolError("degenerate limiting variance")
    x = np.linspace(-width * sd, width * sd, n_points)
    return DensityCurve(x, _normal_pdf(x, sd), sd, regime, regime != "finite")


def heston_inputs(scenario: SimScenario, c_tau: float) -> AsymptoticInputs:
    """Spot inputs of the limit law for the Heston design at variance ``c_tau``."""
    gamma = scenario.noise_sd**2
    return AsymptoticInputs(c_tau=c_tau, gamma_tau=gamma, vvol_tau=scenario.gamma_vvol**2 * c_tau,
                            T=scenario.T)


def histogram_table(errors, pdf: Callable[[np.ndarray], np.ndarray], sd: float, bins: int = 60,
                    width: float = 6.0) -> list[tuple[float, float, int, float]]:
    """Histogram rows ``(left, right, count, pdf(midpoint))`` on a symmetric
    range of ``±width*sd`` widened to contain every error."""
    errors = np.asarray(errors, dtype=float)
    span = max(width * sd, float(np.max(np.abs(errors))) * (1 + 1e-9) if errors.size else 0.0)
    edges = np.linspace(-span, span, bins + 1)
    counts, _ = np.histogram(errors, edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    dens = pdf(mids)
    return [(float(edges[i]), float(edges[i + 1]), int(counts[i]), float(dens[i])) for i in range(bins)]


# ---------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class TuneOptions:
    mode: str = "homogeneous"
    max_iter: int = 1
    tune_theta: bool = False


@dataclass(frozen=True)
class EstimatorSpec:
    """One estimator column of an experiment."""

    label: str
    method: str
    config: EstimatorConfig = field(default_factory=EstimatorConfig)
    tsrsv: Optional[TSRSVParams] = None
    tune: TuneOptions = field(default_factory=TuneOptions)
    edge_adjust: bool = True
    source: str = "observed"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {', '.join(METHODS)}")
        if self.source not in ("observed", "efficient"):
            raise ValueError("source must be 'observed' or 'efficient'")


@dataclass(frozen=True)
class ExperimentSpec:
    scenario: SimScenario
    estimators: tuple
    paths: int
    trim_fraction: float = 0.1
    output: Optional[str] = None
    seed_stream: Optional[int] = None
    hist_tau: Optional[float] = None
    label: str = ""
    timing: bool = True

    def __post_init__(self):
        if self.paths < 1:
            raise ValueError("paths must be at least 1")
        if not 0.0 <= self.trim_fraction < 0.5:
            raise ValueError("trim_fraction must lie in [0, 1/2)")
        labels = [e.label for e in self.estimators]
        if len(set(labels)) != len(labels):
            raise ValueError("estimator labels must be unique")

    @property
    def stream(self) -> int:
        return self.scenario.seed if self.seed_stream is None else self.seed_stream


@dataclass
class EstimatorResult:
    label: str
    ases: np.ndarray
    mean_errors: np.ndarray
    tau_errors: Optional[np.ndarray]
    tau_truth: Optional[np.ndarray]
    failures: list
    runtime_s: float

    @property
    def paths(self) -> int:
        return len(self.ases)

    @property
    def rmse(self) -> float:
        return rmse(self.ases)[0]

    @property
    def rmse_stderr(self) -> float:
        return rmse(self.ases)[1]

    @property
    def mean_bias(self) -> float:
        return float(np.mean(self.mean_errors)) if len(self.mean_errors) else math.nan


@dataclass
class BenchReport:
    label: str
    results: dict
    runtime_s: float
    spec: ExperimentSpec

    def __getitem__(self, label: str) -> EstimatorResult:
        return self.results[label]

    def rows(self) -> list[list[str]]:
        out = []
        for r in self.results.values():
            name = f"{self.label}/{r.label}" if self.label else r.label
            rt = fmt(r.runtime_s) if self.spec.timing else "nan"
            out.append([name, str(r.paths), fmt(r.rmse), fmt(r.rmse_stderr), fmt(r.mean_bias), rt])
        return out


def _estimate(est: EstimatorSpec, path: SimPath, scenario: SimScenario, taus: np.ndarray) -> np.ndarray:
    series = path.observed() if est.source == "observed" else path.efficient()
    cfg = est.config
    if est.method in ("preavg_plain", "preavg_trunc"):
        return spot_vol_preavg_path(series, cfg, taus, truncate=est.method == "preavg_trunc",
                                    edge_adjust=est.edge_adjust).values
    if est.method == "raw":
        m_n = cfg.bandwidth_for(series.delta_n) / series.delta_n
        rule = cfg.truncation
        if rule is not None and rule.regime != "no_noise":
            rule = TruncationRule(rule.alpha, rule.varpi, "no_noise", rule.multiplier)
        return spot_vol_kernel_path(series, cfg.kernel, m_n, taus, rule, est.edge_adjust).values
    if est.method == "tsrsv":
        return tsrsv(series, est.tsrsv or TSRSVParams(), taus).values
    if est.method == "preavg_tuned":
        opt = est.tune
        res = iterate_tune(series, cfg, max_iter=opt.max_iter, mode=opt.mode,
                           tune_theta=opt.tune_theta, edge_adjust=est.edge_adjust)
        return np.interp(taus, res.path.times, res.path.values)
    # oracle bandwidth from the simulated variance path and the true parameters
    c = path.c
    T = scenario.T
    gamma = scenario.noise_sd**2
    vv = scenario.gamma_vvol**2
    int_c = float(np.mean(c[1:]) * T)
    int_c2 = float(np.mean(c[1:] ** 2) * T)
    scheme = cfg.scheme(series.delta_n)
    if est.tune.mode == "homogeneous":
        inputs = AsymptoticInputs(int_c=int_c, int_c2=int_c2, int_cgamma=gamma * int_c,
                                  int_gamma2=gamma * gamma * T, int_vvol=vv * int_c, T=T)
        b = min(optimal_bandwidth(inputs, cfg.theta, scheme, cfg.kernel, series.delta_n), T / 2)
        return spot_vol_preavg_path(series, cfg.with_(bandwidth=b), taus,
                                    edge_adjust=est.edge_adjust).values
    ct = np.interp(taus, path.times, c)
    inputs = AsymptoticInputs(c_tau=ct, gamma_tau=gamma, vvol_tau=vv * np.maximum(ct, 1e-300), T=T)
    b = np.asarray(optimal_bandwidth(inputs, cfg.theta, scheme, cfg.kernel, series.delta_n, "local_noise"))
    b = np.clip(b, 0.05 * series.delta_n**0.25, T / 2)
    return spot_vol_preavg_local(series, cfg, b, taus, edge_adjust=est.edge_adjust).values


def _evaluate_block(spec: ExperimentSpec, indices: Sequence[int]) -> list[dict]:
    out = []
    n = spec.scenario.n
    lo, hi = _trim_bounds(n + 1, spec.trim_fraction)
    hist_idx = None
    if spec.hist_tau is not None:
        hist_idx = int(round((spec.hist_tau - 0.0) / spec.scenario.delta_n))
    for index, path in iter_batch(spec.scenario, indices, spec.stream):
        taus = path.times[lo: hi + 1]
        truth = path.c[lo: hi + 1]
        rec = {"index": index, "est": {}}
        for est in spec.estimators:
            t0 = time.perf_counter()
            try:
                vals = _estimate(est, path, spec.scenario, taus)
                if not np.all(np.isfinite(vals)):
                    raise SpotVolError("non-finite estimates")
                err = vals - truth
                item = {"ase": float(np.mean(err * err)), "mean_err": float(np.mean(err))}
                if hist_idx is not None:
                    item["tau_err"] = float(err[hist_idx - lo])
                    item["tau_truth"] = float(truth[hist_idx - lo])
            except (SpotVolError, ValueError, FloatingPointError) as exc:
                item = {"failure": f"{type(exc).__name__}: {exc}"}
            item["time"] = time.perf_counter() - t0
            rec["est"][est.label] = item
        out.append(rec)
    return out


_WORKER_SPEC: Optional[ExperimentSpec] = None


def _worker(indices):
    return _evaluate_block(_WORKER_SPEC, indices)


def default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def run_experiment(spec: ExperimentSpec, workers: int = 1, block: int = 64,
                   progress: Optional[Callable[[int], None]] = None) -> BenchReport:
    """Simulate ``spec.paths`` paths and evaluate every estimator on each.

    Path ``i`` always comes from stream ``(seed_stream, i)``; results are
    reduced in path order, so the report does not depend on ``workers``.
    Estimator failures are recorded per path and excluded from the RMSE.
    """
    global _WORKER_SPEC
    if spec.hist_tau is not None:
        lo, hi = _trim_bounds(spec.scenario.n + 1, spec.trim_fraction)
        k = int(round(spec.hist_tau / spec.scenario.delta_n))
        if not lo <= k <= hi:
            raise ValueError("hist_tau must lie inside the trimmed window")
    start = time.perf_counter()
    blocks = [list(range(s, min(s + block, spec.paths))) for s in range(0, spec.paths, block)]
    records: list[dict] = []
    if workers <= 1 or len(blocks) == 1:
        for b in blocks:
            records.extend(_evaluate_block(spec, b))
            if progress:
                progress(len(records))
    else:
        _WORKER_SPEC = spec
        try:
            ctx = multiprocessing.get_context("fork")
            with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
                for recs in pool.map(_worker, blocks):
                    records.extend(recs)
                    if progress:
                        progress(len(records))
        finally:
            _WORKER_SPEC = None
    records.sort(key=lambda r: r["index"])
    results = {}
    for est in spec.estimators:
        items = [(r["index"], r["est"][est.label]) for r in records]
        ok = [it for _, it in items if "failure" not in it]
        fails = [(i, it["failure"]) for i, it in items if "failure" in it]
        tau_err = np.array([it["tau_err"] for it in ok]) if spec.hist_tau is not None else None
        tau_truth = np.array([it["tau_truth"] for it in ok]) if spec.hist_tau is not None else None
        results[est.label] = EstimatorResult(
            est.label, np.array([it["ase"] for it in ok]), np.array([it["mean_err"] for it in ok]),
            tau_err, tau_truth, fails, float(sum(it["time"] for _, it in items)))
    report = BenchReport(spec.label, results, time.perf_counter() - start, spec)
    if spec.output:
        write_reports([report], spec.output)
    return report


def write_reports(reports: Sequence[BenchReport], path, stream=None) -> None:
    rows = [row for r in reports for row in r.rows()]
    write_table(path, REPORT_HEADER, rows, stream)


# ---------------------------------------------------------------------------
# presets


def _pre(kernel="exp", **kw) -> EstimatorConfig:
    return EstimatorConfig(kernel=get_kernel(kernel), **kw)


def preset(name: str, paths: int, seed: int = 2024, timing: bool = True) -> list[ExperimentSpec]:
    """Experiment specs reproducing the simulation tables at desk scale.

    ``table1``: plain estimator on continuous paths, plain and truncated on
    jump paths. ``table2``: four kernels at ``beta=1`` and after one tuning
    iteration (rho = 0). ``table3``: bandwidth laws ``beta Delta^{1/4}``,
    ``Delta^{0.28}``, ``Delta^{0.3}`` for beta = 1..4. ``table4``: tuning
    iterations, oracle bandwidths. ``table5``: tuned estimator against TSRSV.
    ``fig1``: errors at tau = 0.5 for the histogram.
    """
    common = dict(paths=paths, timing=timing)
    if name == "table1":
        plain = EstimatorSpec("preavg_plain", "preavg_plain", _pre())
        trunc = EstimatorSpec("preavg_trunc", "preavg_trunc", _pre())
        return [
            ExperimentSpec(heston_paper(seed=seed), (plain,), label="continuous", **common),
            ExperimentSpec(heston_paper_jumps(seed=seed + 1), (plain, trunc), label="jumps", **common),
        ]
    if name == "table2":
        ests = []
        for k in ("exp", "unif2", "k1", "k2"):
            ests.append(EstimatorSpec(f"{k}_beta1", "preavg_plain", _pre(k)))
            ests.append(EstimatorSpec(f"{k}_tuned", "preavg_tuned", _pre(k)))
        return [ExperimentSpec(heston_paper(rho=0.0, seed=seed), tuple(ests), label="rho0", **common)]
    if name == "table3":
        ests = [EstimatorSpec(f"beta{b}_rate{r}", "preavg_plain", _pre(beta=float(b), rate=r))
                for b in (1, 2, 3, 4) for r in (0.25, 0.28, 0.3)]
        return [ExperimentSpec(heston_paper(seed=seed), tuple(ests), label="rates", **common)]
    if name == "table4":
        ests = (
            EstimatorSpec("initial_beta1", "preavg_plain", _pre()),
            EstimatorSpec("homogeneous_iter1", "preavg_tuned", _pre(), tune=TuneOptions("homogeneous", 1)),
            EstimatorSpec("homogeneous_iter2", "preavg_tuned", _pre(), tune=TuneOptions("homogeneous", 2)),
            EstimatorSpec("homogeneous_oracle", "preavg_oracle", _pre(), tune=TuneOptions("homogeneous")),
            EstimatorSpec("local_iter1", "preavg_tuned", _pre(), tune=TuneOptions("local", 1)),
            EstimatorSpec("local_iter2", "preavg_tuned", _pre(), tune=TuneOptions("local", 2)),
            EstimatorSpec("local_oracle", "preavg_oracle", _pre(), tune=TuneOptions("local")),
        )
        return [ExperimentSpec(heston_paper(seed=seed), ests, label="tuning", **common)]
    if name == "table5":
        ests = [EstimatorSpec("preavg_tuned", "preavg_tuned", _pre())]
        for K, h in ((0.1, 4.0), (0.3, 3.3), (0.3, 3.6)):
            p = TSRSVParams(K, h)
            ests.append(EstimatorSpec(p.label, "tsrsv", tsrsv=p))
        return [ExperimentSpec(heston_paper(seed=seed), tuple(ests), label="baseline", **common)]
    if name == "fig1":
        est = EstimatorSpec("preavg_exp", "preavg_plain", _pre(), edge_adjust=False)
        return [ExperimentSpec(heston_paper(seed=seed), (est,), label="fig1", hist_tau=0.5, **common)]
    raise ValueError(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}")


PRESETS = ("table1", "table2", "table3", "table4", "table5", "fig1")


@dataclass
class Fig1Result:
    errors: np.ndarray
    sds: np.ndarray
    truth: np.ndarray
    curve: DensityCurve

    @property
    def standardized(self) -> np.ndarray:
        return self.errors / self.sds

    def mixture_pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.mean([_normal_pdf(x, s) for s in self.sds], axis=0)


def fig1_errors(paths: int, seed: int = 2024, config: Optional[EstimatorConfig] = None,
                tau: float = 0.5, workers: int = 1, debias: bool = True) -> Fig1Result:
    """Errors ``c_hat(tau) - c(tau)`` over ``paths`` continuous Heston paths,
    together with each path's limiting standard deviation (true parameters,
    true ``c_tau``) and the density at the cross-path mean of ``c_tau``."""
    cfg = config or EstimatorConfig()
    sc = heston_paper(seed=seed)
    est = EstimatorSpec("fig1", "preavg_plain", cfg, edge_adjust=False)
    spec = ExperimentSpec(sc, (est,), paths, trim_fraction=0.1, hist_tau=tau, timing=False)
    if debias:
        rep = run_experiment(spec, workers=workers)
        res = rep["fig1"]
        errors, truth = res.tau_errors, res.tau_truth
    else:
        errors, truth = _nodebias_errors(spec, cfg, tau)
    sds = np.array([limiting_sd(cfg, heston_inputs(sc, max(c, 1e-300)), sc.delta_n)[0] for c in truth])
    curve = limiting_density(cfg, heston_inputs(sc, float(np.mean(truth))), sc.delta_n, tau)
    return Fig1Result(errors, sds, truth, curve)


def _nodebias_errors(spec: ExperimentSpec, cfg: EstimatorConfig, tau: float):
    k = int(round(tau / spec.scenario.delta_n))
    errs, truth = [], []
    for _, path in iter_batch(spec.scenario, range(spec.paths), spec.stream):
        s = path.observed()
        v = spot_vol_preavg_path(s, cfg, [path.times[k]], debias=False).values[0]
        errs.append(v - path.c[k])
        truth.append(path.c[k])
    return np.array(errs), np.array(truth)


def kernel_variance_ratio(kernel_a: str, kernel_b: str) -> float:
    """Ratio of limiting variances at ``beta = 1`` for two kernels (same inputs)."""
    sc = heston_paper()
    inp = heston_inputs(sc, sc.c0)
    va = limiting_sd(_pre(kernel_a), inp, sc.delta_n)[0] ** 2
    vb = limiting_sd(_pre(kernel_b), inp, sc.delta_n)[0] ** 2
    return va / vb


def write_histogram(rows, path=None, stream=None) -> None:
    write_table(path, HIST_HEADER, [[fmt(a), fmt(b), str(c), fmt(d)] for a, b, c, d in rows], stream)


def write_density(curve: DensityCurve, path=None, stream=None) -> None:
    write_table(path, ["x", "pdf"], [[fmt(x), fmt(p)] for x, p in zip(curve.x, curve.pdf)], stream)


__all__ = [
    "ase", "rmse", "TSRSVParams", "tsrsv", "DensityCurve", "limiting_sd", "limiting_density",
    "heston_inputs", "histogram_table", "TuneOptions", "EstimatorSpec", "ExperimentSpec",
    "EstimatorResult", "BenchReport", "run_experiment", "write_reports", "preset", "PRESETS",
    "fig1_errors", "Fig1Result", "write_histogram", "write_density", "default_workers",
    "GridMismatchError",
]
