"""
Command-line front end.

    spotvol simulate --preset heston-paper --paths 2 --seed 7 --out d/
    spotvol estimate --input path_0000.csv --method preavg --kernel exp
    spotvol tune     --input path_0000.csv --iterations 2
    spotvol bench    --preset table5 --paths 300
    spotvol plotdata --preset fig1 --paths 500 --out hist.csv

Every option may also come from an INI file given with ``--config``: one
section per subcommand, keys spelled like the long flags (``noise-sd`` or
``noise_sd``). Flags override the file, the file overrides the defaults.
Exit codes: 0 ok, 2 usage/validation, 3 data error, 4 numeric or regime
failure.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import baseline_bench as bb
from .config import EstimatorConfig, TruncationRule
from .errors import GridMismatchError, InsufficientDataError, RegimeError, SpotVolError
from .kernels import get_kernel
from .preavg import spot_vol_preavg_path, validate_regime_noise
from .raw_estimator import spot_vol_kernel_path, validate_regime_no_noise
from .series import DataError, fmt, series_from_csv, write_csv, write_table
from .simulate import (PriceJumps, SimScenario, VarJumps, heston_paper, heston_paper_jumps, iter_batch,
                       simulate_batch, write_batch)
from .tuning import iterate_tune

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


# ---------------------------------------------------------------------------
# option tables


def _bool(s) -> bool:
    if isinstance(s, bool):
        return s
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _positive(x):
    return None if x > 0 else "must be positive"


def _nonneg(x):
    return None if x >= 0 else "must be non-negative"


def _at_least(k):
    return lambda x: None if x >= k else f"must be at least {k}"


def _within(lo, hi, open_=False):
    def check(x):
        ok = lo < x < hi if open_ else lo <= x <= hi
        br = "()" if open_ else "[]"
        return None if ok else f"must lie in {br[0]}{lo}, {hi}{br[1]}"
    return check


def _choice(*vals):
    return lambda x: None if x in vals else f"must be one of {', '.join(vals)}"


@dataclass(frozen=True)
class Opt:
    name: str
    type: Callable = str
    default: Any = None
    check: Optional[Callable] = None
    help: str = ""
    flag: bool = False        # store_true style switch
    required: bool = False

    @property
    def dest(self) -> str:
        return self.name.replace("-", "_")


_COMMON = [
    Opt("seed", int, 0, _nonneg, "seed stream for the random number generator"),
    Opt("threads", int, None, _at_least(1), "worker processes (default: all cores)"),
]

_SCENARIO = [
    Opt("preset", str, "heston-paper", _choice("heston-paper", "heston-paper-jumps"), "scenario preset"),
    Opt("n", int, None, _at_least(2), "observations per path"),
    Opt("T", float, None, _positive, "horizon in days"),
    Opt("mu", float, None, None, "drift per day"),
    Opt("kappa", float, None, _nonneg, "mean reversion speed"),
    Opt("alpha-mean", float, None, _nonneg, "long-run variance"),
    Opt("gamma-vvol", float, None, _nonneg, "vol of variance"),
    Opt("rho", float, None, _within(-1.0, 1.0), "leverage correlation"),
    Opt("x0", float, None, None, "initial log price"),
    Opt("c0", float, None, _nonneg, "initial spot variance"),
    Opt("noise-sd", float, None, _nonneg, "microstructure noise standard deviation"),
    Opt("no-jumps", _bool, False, None, "drop price and variance jumps", flag=True),
    Opt("price-jump-intensity", float, None, _nonneg, "price jumps per day"),
    Opt("price-jump-mean", float, None, None, "mean price jump"),
    Opt("price-jump-sd", float, None, _nonneg, "price jump sd"),
    Opt("var-jump-intensity", float, None, _nonneg, "variance jumps per day"),
    Opt("var-jump-log-mean", float, None, None, "mean of log variance jump"),
    Opt("var-jump-log-sd", float, None, _nonneg, "sd of log variance jump"),
    Opt("var-jump-scale", float, None, _nonneg, "multiplier on variance jumps"),
]

_ESTIMATOR = [
    Opt("kernel", str, "exp", None, "exp, unif2, unif_right, k1, k2 or custom:<csv>"),
    Opt("theta", float, 5.0, _positive, "pre-averaging window constant"),
    Opt("beta", float, 1.0, _positive, "bandwidth constant: b = beta * Delta^rate"),
    Opt("rate", float, 0.25, _within(0.0, 1.0, True), "bandwidth exponent"),
    Opt("bandwidth", float, None, _positive, "explicit bandwidth (overrides beta/rate)"),
    Opt("jump-activity", float, 1.0, _within(0.0, 2.0), "assumed jump activity index r"),
    Opt("no-edge-adjust", _bool, False, None, "disable boundary renormalisation", flag=True),
]

SUBCOMMANDS = {
    "simulate": _SCENARIO + [
        Opt("paths", int, 1, _at_least(1), "number of paths"),
        Opt("out", str, None, None, "output directory", required=True),
    ] + _COMMON,
    "estimate": [
        Opt("input", str, None, None, "CSV with a t column and a price column", required=True),
        Opt("column", str, "y", None, "price column"),
        Opt("method", str, "preavg", _choice("preavg", "raw", "tsrsv"), "estimator"),
        Opt("truncate", str, None, None,
            "jump truncation: 'auto' or 'alpha=A,varpi=W' (A in units of the estimated volatility; "
            "alpha_abs=A for an absolute level)"),
        Opt("no-debias", _bool, False, None, "drop the de-biasing term", flag=True),
        Opt("tau-step", int, 1, _at_least(1), "evaluate at every k-th observation time"),
        Opt("tsrsv-K", float, 0.1, _positive, "TSRSV subsampling constant"),
        Opt("tsrsv-h", float, 4.0, _positive, "TSRSV window constant"),
        Opt("strict", _bool, False, None, "fail on regime-condition violations", flag=True),
        Opt("out", str, None, None, "output CSV (default: stdout)"),
    ] + _ESTIMATOR,
    "tune": [
        Opt("input", str, None, None, "CSV with a t column and a price column", required=True),
        Opt("column", str, "y", None, "price column"),
        Opt("iterations", int, 1, _at_least(1), "tuning iterations"),
        Opt("mode", str, "homogeneous", _choice("homogeneous", "local"), "bandwidth type"),
        Opt("tune-theta", _bool, False, None, "also update theta", flag=True),
        Opt("sparsity", int, 300, _at_least(1), "sparse sampling step for the vol-of-vol"),
        Opt("freeze-vvol-after", int, 1, _at_least(1), "iterations after which vol-of-vol is fixed"),
        Opt("out", str, None, None, "write the tuned path (t,c_hat) here"),
    ] + _ESTIMATOR,
    "bench": [
        Opt("preset", str, "table1", _choice(*bb.PRESETS), "experiment preset"),
        Opt("paths", int, 300, _at_least(1), "Monte Carlo paths"),
        Opt("out", str, None, None, "report CSV (default: stdout)"),
        Opt("hist-out", str, None, None, "histogram CSV (fig1 preset)"),
        Opt("no-timing", _bool, False, None, "write runtime_s as nan (byte-reproducible)", flag=True),
    ] + _COMMON,
    "plotdata": [
        Opt("preset", str, "fig1", _choice("fig1", "fig2-debias", "fig2-kernels", "fig3"), "figure"),
        Opt("paths", int, 500, _at_least(1), "Monte Carlo paths"),
        Opt("bins", int, 60, _at_least(2), "histogram bins"),
        Opt("gamma-vvol", float, None, _nonneg, "vol of variance (fig3)"),
        Opt("out", str, None, None, "output CSV (default: stdout)"),
        Opt("density-out", str, None, None, "density curve CSV (x,pdf)"),
    ] + _COMMON,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spotvol", description="Spot volatility estimation toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, opts in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"{name} subcommand", description=f"spotvol {name}")
        p.add_argument("--config", help="INI file with a [%s] section" % name)
        for o in opts:
            if o.flag:
                p.add_argument(f"--{o.name}", dest=o.dest, action="store_const", const=True,
                               default=None, help=o.help)
            else:
                p.add_argument(f"--{o.name}", dest=o.dest, default=None, help=o.help)
    return parser


def resolve(command: str, ns: argparse.Namespace) -> dict:
    """Merge flags > config file > defaults, convert and range-check.

    Collects every problem before raising :class:`UsageError`.
    """
    opts = {o.dest: o for o in SUBCOMMANDS[command]}
    problems: list[str] = []
    file_vals: dict[str, str] = {}
    if getattr(ns, "config", None):
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        try:
            with open(ns.config, encoding="utf-8") as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise UsageError([f"config file: {exc}"]) from None
        for section in cp.sections():
            if section not in SUBCOMMANDS:
                problems.append(f"config file: unknown section [{section}]")
        if cp.has_section(command):
            for key, val in cp.items(command):
                dest = key.strip().replace("-", "_")
                if dest not in opts:
                    problems.append(f"config file: unknown key {key!r} in [{command}]")
                else:
                    file_vals[dest] = val
    out = {}
    for dest, o in opts.items():
        raw = getattr(ns, dest, None)
        origin = "--" + o.name
        if raw is None and dest in file_vals:
            raw, origin = file_vals[dest], f"config key {o.name}"
        if raw is None:
            if o.required:
                problems.append(f"--{o.name} is required")
            out[dest] = o.default
            continue
        try:
            val = o.type(raw)
        except (TypeError, ValueError):
            problems.append(f"{origin}: cannot parse {raw!r} as {o.type.__name__.lstrip('_')}")
            continue
        if isinstance(val, float) and not math.isfinite(val):
            problems.append(f"{origin}: must be finite")
            continue
        msg = o.check(val) if o.check else None
        if msg:
            problems.append(f"{origin}: {msg}")
        out[dest] = val
    if problems:
        raise UsageError(problems)
    return out


# ---------------------------------------------------------------------------
# helpers


def _scenario(cfg: dict) -> SimScenario:
    base = heston_paper_jumps() if cfg["preset"] == "heston-paper-jumps" else heston_paper()
    fields = {"n": "n", "T": "T", "mu": "mu", "kappa": "kappa", "alpha_mean": "alpha_mean",
              "gamma_vvol": "gamma_vvol", "rho": "rho", "x0": "x0", "c0": "c0", "noise_sd": "noise_sd"}
    changes = {f: cfg[k] for k, f in fields.items() if cfg.get(k) is not None}
    pj, vj = base.price_jumps, base.var_jumps
    pj_over = {k: cfg[f"price_jump_{k}"] for k in ("intensity", "mean", "sd") if cfg[f"price_jump_{k}"] is not None}
    vj_over = {k: cfg[f"var_jump_{k}"] for k in ("intensity", "log_mean", "log_sd", "scale")
               if cfg[f"var_jump_{k}"] is not None}
    if pj_over:
        pj = PriceJumps(**{**(pj.__dict__ if pj else PriceJumps().__dict__), **pj_over})
    if vj_over:
        vj = VarJumps(**{**(vj.__dict__ if vj else VarJumps().__dict__), **vj_over})
    if cfg["no_jumps"]:
        pj = vj = None
    return base.with_(price_jumps=pj, var_jumps=vj, seed=cfg["seed"], **changes)


def _estimator_config(cfg: dict) -> EstimatorConfig:
    try:
        kernel = get_kernel(cfg["kernel"])
    except ValueError as exc:
        raise UsageError([f"--kernel: {exc}"]) from None
    return EstimatorConfig(kernel=kernel, beta=cfg["beta"], rate=cfg["rate"], bandwidth=cfg["bandwidth"],
                           theta=cfg["theta"], jump_activity=cfg["jump_activity"])


def _truncation(spec: Optional[str], regime: str) -> Optional[TruncationRule]:
    """``auto`` or comma-separated ``alpha=A`` (multiple of the estimated
    volatility level), ``alpha_abs=A`` (absolute level) and ``varpi=W``."""
    if spec is None:
        return None
    if spec.strip().lower() in ("auto", "on", "true", "yes"):
        return TruncationRule(regime=regime)
    parts = {}
    problems = []
    for item in spec.split(","):
        if "=" not in item:
            problems.append(f"--truncate: expected key=value, got {item!r}")
            continue
        k, v = (s.strip() for s in item.split("=", 1))
        if k not in ("alpha", "alpha_abs", "varpi"):
            problems.append(f"--truncate: unknown key {k!r} (expected alpha, alpha_abs, varpi)")
            continue
        try:
            parts[k] = float(v)
        except ValueError:
            problems.append(f"--truncate: cannot parse {v!r}")
    if "alpha" in parts and "alpha_abs" in parts:
        problems.append("--truncate: give either alpha or alpha_abs, not both")
    if problems:
        raise UsageError(problems)
    try:
        return TruncationRule(alpha=parts.get("alpha_abs"), varpi=parts.get("varpi", 0.49), regime=regime,
                              multiplier=parts.get("alpha", 5.0))
    except ValueError as exc:
        raise UsageError([f"--truncate: {exc}"]) from None


def _workers(cfg: dict) -> int:
    return cfg.get("threads") or bb.default_workers()


def _emit(path, header, rows):
    write_table(path, header, rows, sys.stdout if path is None else None)


def _report(rep, stream=None):
    for k, v in rep.rows():
        print(f"regime {k} = {v}", file=stream or sys.stderr)


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(cfg: dict) -> int:
    sc = _scenario(cfg)
    out = Path(cfg["out"])
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        print(f"error: cannot write to {out}: {exc}", file=sys.stderr)
        return EXIT_DATA
    paths = simulate_batch(sc, cfg["paths"], seed_stream=cfg["seed"], workers=_workers(cfg))
    files = write_batch(paths, sc, cfg["seed"], out)
    print(f"wrote {len(files)} path(s) and manifest.json to {out}", file=sys.stderr)
    return EXIT_OK


def cmd_estimate(cfg: dict) -> int:
    series = series_from_csv(cfg["input"], cfg["column"])
    ecfg = _estimator_config(cfg)
    method = cfg["method"]
    taus = series.times[:: cfg["tau_step"]]
    edge = not cfg["no_edge_adjust"]
    if method == "preavg":
        rule = _truncation(cfg["truncate"], "noise")
        ecfg = ecfg.with_(truncation=rule)
        rep = validate_regime_noise(ecfg, series.n, series.T)
        _report(rep)
        if cfg["strict"]:
            rep.raise_if_failed()
        path = spot_vol_preavg_path(series, ecfg, taus, truncate=rule is not None, edge_adjust=edge,
                                    debias=not cfg["no_debias"])
    elif method == "raw":
        rule = _truncation(cfg["truncate"], "no_noise")
        b = ecfg.bandwidth_for(series.delta_n)
        if cfg["bandwidth"] is None:
            law = (cfg["beta"], 1.0 - cfg["rate"])
        else:
            law = (1.0, 1.0 - math.log(b) / math.log(series.delta_n))
        varpi = rule.varpi if rule else 0.49
        rep = validate_regime_no_noise(law, cfg["jump_activity"], varpi, series.delta_n)
        _report(rep)
        if cfg["strict"]:
            rep.raise_if_failed()
        path = spot_vol_kernel_path(series, ecfg.kernel, b / series.delta_n, taus, rule, edge)
    else:
        path = bb.tsrsv(series, bb.TSRSVParams(cfg["tsrsv_K"], cfg["tsrsv_h"]), taus)
    _emit(cfg["out"], ["tau", "c_hat"], [[fmt(t), fmt(v)] for t, v in zip(path.times, path.values)])
    return EXIT_OK


def cmd_tune(cfg: dict) -> int:
    series = series_from_csv(cfg["input"], cfg["column"])
    ecfg = _estimator_config(cfg)
    res = iterate_tune(series, ecfg, max_iter=cfg["iterations"], freeze_vvol_after=cfg["freeze_vvol_after"],
                       mode=cfg["mode"], tune_theta=cfg["tune_theta"], sparsity_p=cfg["sparsity"],
                       edge_adjust=not cfg["no_edge_adjust"])
    bw = res.bandwidth
    summary = [("theta_star", fmt(res.theta_star)), ("kernel", res.kernel.id),
               ("iterations_used", str(res.iterations_used)),
               ("bandwidth", fmt(bw) if np.ndim(bw) == 0 else "local"),
               ("bandwidth_median", fmt(float(np.median(bw))))]
    _emit(None, ["key", "value"], summary)
    keys = ["iteration", "gamma_hat", "int_vvol", "int_c", "int_c2", "theta", "bandwidth",
            "beta_equiv", "theta_capped", "bandwidth_capped"]
    sys.stdout.write("\n")
    _emit(None, keys, [[d[k] for k in keys] for d in res.diagnostics])
    if cfg["out"]:
        write_csv(cfg["out"], ["t", "c_hat"], [res.path.times, res.path.values])
    return EXIT_OK


def cmd_bench(cfg: dict) -> int:
    specs = bb.preset(cfg["preset"], cfg["paths"], seed=cfg["seed"], timing=not cfg["no_timing"])
    reports = []
    for spec in specs:
        reports.append(bb.run_experiment(spec, workers=_workers(cfg)))
    for r in reports:
        for res in r.results.values():
            if res.failures:
                print(f"warning: {r.label}/{res.label}: {len(res.failures)} path(s) failed and were "
                      f"excluded (first: path {res.failures[0][0]}: {res.failures[0][1]})", file=sys.stderr)
    bb.write_reports(reports, cfg["out"], sys.stdout if cfg["out"] is None else None)
    if cfg["hist_out"]:
        if cfg["preset"] != "fig1":
            raise UsageError(["--hist-out is only available with --preset fig1"])
        _fig1_hist(cfg, cfg["hist_out"], None)
    return EXIT_OK


def _fig1_hist(cfg, out, density_out, debias=True):
    res = bb.fig1_errors(cfg["paths"], seed=cfg["seed"], workers=_workers(cfg), debias=debias)
    rows = bb.histogram_table(res.errors, res.curve.at, res.curve.sd, bins=cfg.get("bins", 60))
    bb.write_histogram(rows, out, sys.stdout if out is None else None)
    if density_out:
        bb.write_density(res.curve, density_out)


def cmd_plotdata(cfg: dict) -> int:
    preset = cfg["preset"]
    if preset in ("fig1", "fig2-debias"):
        _fig1_hist(cfg, cfg["out"], cfg["density_out"], debias=preset == "fig1")
        return EXIT_OK
    if preset == "fig2-kernels":
        sc = heston_paper()
        inp = bb.heston_inputs(sc, sc.c0)
        ce = bb.limiting_density(EstimatorConfig(kernel=get_kernel("exp")), inp, sc.delta_n)
        cu = bb.limiting_density(EstimatorConfig(kernel=get_kernel("unif2")), inp, sc.delta_n)
        x = np.linspace(-8 * cu.sd, 8 * cu.sd, 801)
        _emit(cfg["out"], ["x", "pdf_exp", "pdf_unif2"],
              [[fmt(a), fmt(b), fmt(c)] for a, b, c in zip(x, ce.at(x), cu.at(x))])
        return EXIT_OK
    # fig3: MSE against beta at a few fixed times
    gv = cfg["gamma_vvol"] if cfg["gamma_vvol"] is not None else 0.5 / 252
    rows = mse_surface(cfg["paths"], cfg["seed"], gamma_vvol=gv)
    _emit(cfg["out"], ["beta", "tau", "mse"], [[fmt(b), fmt(t), fmt(m)] for b, t, m in rows])
    return EXIT_OK


def mse_surface(paths: int, seed: int, gamma_vvol: float = 0.5 / 252,
                betas: Sequence[float] = tuple(np.linspace(0.5, 5.5, 11)),
                taus: Sequence[float] = (0.25, 0.5, 0.75)) -> list[tuple[float, float, float]]:
    """Monte Carlo MSE of the exponential-kernel estimator at fixed times over
    a grid of ``beta`` (bandwidth ``beta Delta^{1/4}``)."""
    sc = heston_paper(gamma_vvol=gamma_vvol, seed=seed)
    idx = [int(round(t / sc.delta_n)) for t in taus]
    acc = np.zeros((len(betas), len(taus)))
    for _, path in iter_batch(sc, range(paths), seed):
        s = path.observed()
        for i, b in enumerate(betas):
            est = spot_vol_preavg_path(s, EstimatorConfig(beta=float(b)), path.times[idx]).values
            acc[i] += (est - path.c[idx]) ** 2
    acc /= paths
    return [(float(b), float(t), float(acc[i, j])) for i, b in enumerate(betas) for j, t in enumerate(taus)]


COMMANDS = {"simulate": cmd_simulate, "estimate": cmd_estimate, "tune": cmd_tune,
            "bench": cmd_bench, "plotdata": cmd_plotdata}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve(ns.command, ns)
        return COMMANDS[ns.command](cfg)
    except UsageError as exc:
        for p in exc.problems:
            print(f"error: {p}", file=sys.stderr)
        return EXIT_USAGE
    except RegimeError as exc:
        print(f"error: regime conditions violated: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, InsufficientDataError, GridMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SpotVolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
