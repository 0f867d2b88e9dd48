"""
Smoothing kernels for spot-variance estimation.

A kernel ``K`` integrates to one and is evaluated at scale ``b`` as
``K_b(x) = K(x / b) / b``. Besides the kernel itself the asymptotic theory
needs the tail functional

    L(t) =  int_t^inf K(u) du          for t > 0
    L(t) = -int_{-inf}^t K(u) du       for t <= 0

and the moments ``int K^2`` and ``int L^2``. Their product ``I(K)`` governs
the asymptotic variance at the optimal bandwidth and is minimised by the
two-sided exponential (Laplace) kernel, ``I = 1/16``.

The module also hosts :func:`kernel_sums`, the workhorse used by every
estimator to evaluate ``sum_j K_b(s_j - tau) v_j`` over an equispaced node
grid. The exponential kernel uses an O(n) two-sided recursion; grid-aligned
evaluation points use FFT convolution; anything else falls back to a direct
windowed sum.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, signal

from .errors import DegenerateWindowError, NonIntegrableKernelError

KERNEL_IDS = ("exp", "unif2", "unif_right", "k1", "k2")

# discarded tail mass of K^2 when building discrete weights
TAIL_MASS = 1e-12
# smallest in-window kernel mass accepted by the boundary correction
MIN_WINDOW_MASS = 1e-9

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(4)


@dataclass(frozen=True)
class KernelMoments:
    int_K2: float
    int_L2: float
    int_absK: float
    i_functional: float

    def __post_init__(self):
        for name in ("int_K2", "int_L2", "int_absK", "i_functional"):
            if not getattr(self, name) > 0:
                raise NonIntegrableKernelError(f"{name} must be strictly positive")


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """A kernel function together with the metadata needed to integrate it.

    Use the module-level constructors (:func:`exponential`, :func:`uniform`,
    ...) or :func:`get_kernel` rather than building one by hand.
    """

    id: str
    func: Callable[[np.ndarray], np.ndarray]
    support: tuple[float, float]
    lipschitz_bound: float
    breakpoints: tuple[float, ...] = ()
    # piecewise-linear representation (x_left, x_right, k_left, k_right) for
    # tabulated kernels; enables exact moment integration
    segments: Optional[np.ndarray] = field(default=None, repr=False)
    _l_closed: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    _moments_closed: Optional[KernelMoments] = field(default=None, repr=False)

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float))

    def scaled(self, x, bandwidth: float):
        """``K_b(x) = K(x / b) / b``."""
        return self(np.asarray(x, dtype=float) / bandwidth) / bandwidth

    @property
    def is_builtin(self) -> bool:
        return self.id in KERNEL_IDS

    @property
    def is_exponential(self) -> bool:
        return self.id == "exp"

    @property
    def cutoff(self) -> float:
        """Half-width (in kernel units) outside of which weights are dropped."""
        lo, hi = self.support
        if math.isfinite(lo) and math.isfinite(hi):
            return max(abs(lo), abs(hi))
        if self.is_exponential:
            # 1/4 e^{-2R} < TAIL_MASS
            return 0.5 * math.log(0.25 / TAIL_MASS)
        return _numeric_cutoff(self)


# ---------------------------------------------------------------------------
# built-in kernels


def _exp(x):
    return 0.5 * np.exp(-np.abs(x))


def _unif2(x):
    return np.where(np.abs(x) < 1.0, 0.5, 0.0)


def _unif_right(x):
    return np.where((x >= 0.0) & (x < 1.0), 1.0, 0.0)


def _k1(x):
    # |1 - x| 1{|x| < 1} halved so that it integrates to one
    return np.where(np.abs(x) < 1.0, 0.5 * np.abs(1.0 - x), 0.0)


def _k2(x):
    return np.where(np.abs(x) < 1.0, 0.75 * (1.0 - x * x), 0.0)


def _l_exp(t):
    return np.where(t > 0, 0.5 * np.exp(-np.abs(t)), -0.5 * np.exp(-np.abs(t)))


def _l_unif2(t):
    return np.where(t > 0, 0.5 * np.clip(1.0 - t, 0.0, None), -0.5 * np.clip(1.0 + t, 0.0, None))


def _l_unif_right(t):
    return np.where(t > 0, np.clip(1.0 - t, 0.0, None), 0.0)


def _l_k1(t):
    tp = np.clip(t, 0.0, 1.0)
    tn = np.clip(t, -1.0, 0.0)
    return np.where(t > 0, 0.25 * (1.0 - tp) ** 2, -0.25 * (tn + 1.0) * (3.0 - tn))


def _l_k2(t):
    a = np.clip(np.abs(t), 0.0, 1.0)
    val = 0.25 * (2.0 - 3.0 * a + a**3)
    return np.where(t > 0, val, -val)


def exponential() -> KernelSpec:
    """Two-sided exponential kernel ``K(x) = exp(-|x|) / 2``."""
    return KernelSpec(
        "exp", _exp, (-math.inf, math.inf), 0.5, (0.0,), None, _l_exp,
        KernelMoments(0.25, 0.25, 1.0, 1.0 / 16.0),
    )


def uniform() -> KernelSpec:
    """Two-sided uniform kernel on (-1, 1)."""
    return KernelSpec(
        "unif2", _unif2, (-1.0, 1.0), math.inf, (-1.0, 0.0, 1.0), None, _l_unif2,
        KernelMoments(0.5, 1.0 / 6.0, 1.0, 1.0 / 12.0),
    )


def uniform_right() -> KernelSpec:
    """One-sided (forward looking) uniform kernel on [0, 1)."""
    return KernelSpec(
        "unif_right", _unif_right, (0.0, 1.0), math.inf, (0.0, 1.0), None, _l_unif_right,
        KernelMoments(1.0, 1.0 / 3.0, 1.0, 1.0 / 3.0),
    )


def k1() -> KernelSpec:
    """``|1 - x| / 2`` on (-1, 1)."""
    return KernelSpec(
        "k1", _k1, (-1.0, 1.0), math.inf, (-1.0, 0.0, 1.0), None, _l_k1,
        KernelMoments(2.0 / 3.0, 7.0 / 30.0, 1.0, (2.0 / 3.0) * (7.0 / 30.0)),
    )


def epanechnikov() -> KernelSpec:
    """``3/4 (1 - x^2)`` on (-1, 1)."""
    return KernelSpec(
        "k2", _k2, (-1.0, 1.0), 1.5, (-1.0, 0.0, 1.0), None, _l_k2,
        KernelMoments(0.6, 33.0 / 280.0, 1.0, 0.6 * 33.0 / 280.0),
    )


_BUILTINS = {
    "exp": exponential,
    "unif2": uniform,
    "unif_right": uniform_right,
    "k1": k1,
    "k2": epanechnikov,
}


def get_kernel(name: str) -> KernelSpec:
    """Look up a kernel by its CLI id (``exp``, ``unif2``, ``unif_right``,
    ``k1``, ``k2`` or ``custom:<path-to-csv>``)."""
    if name.startswith("custom:"):
        return from_csv(name.split(":", 1)[1])
    try:
        return _BUILTINS[name]()
    except KeyError:
        raise ValueError(
            f"unknown kernel {name!r}; expected one of {', '.join(KERNEL_IDS)} or custom:<path>"
        ) from None


# ---------------------------------------------------------------------------
# custom kernels


def from_table(xs: Sequence[float], ks: Sequence[float], normalize: bool = False,
               name: str = "custom") -> KernelSpec:
    """Kernel given by linear interpolation of tabulated ``(x, K(x))`` pairs.

    Values beyond the table are zero. With ``normalize`` the table is rescaled
    to unit mass; otherwise a mass differing from one by more than 1e-8 is an
    error.
    """
    xs = np.asarray(xs, dtype=float)
    ks = np.asarray(ks, dtype=float)
    if xs.ndim != 1 or xs.shape != ks.shape or len(xs) < 2:
        raise ValueError("kernel table needs matching 1-d x and K columns of length >= 2")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("kernel table x values must be strictly increasing")
    if not np.all(np.isfinite(ks)):
        raise NonIntegrableKernelError("kernel table contains non-finite values")
    mass = float(np.sum(0.5 * (ks[1:] + ks[:-1]) * np.diff(xs)))
    if normalize:
        if mass <= 0:
            raise NonIntegrableKernelError("kernel table has non-positive mass")
        ks = ks / mass
    elif abs(mass - 1.0) > 1e-8:
        raise NonIntegrableKernelError(f"kernel table integrates to {mass!r}, not 1")

    xs_c, ks_c = xs.copy(), ks.copy()

    def func(x):
        return np.interp(x, xs_c, ks_c, left=0.0, right=0.0)

    segs = [(xs[i], xs[i + 1], ks[i], ks[i + 1]) for i in range(len(xs) - 1)]
    # cover the origin so that L can be integrated on both half lines
    if xs[0] > 0:
        segs.insert(0, (0.0, xs[0], 0.0, 0.0))
    if xs[-1] < 0:
        segs.append((xs[-1], 0.0, 0.0, 0.0))
    split = []
    for a, b, ka, kb in segs:
        if a < 0.0 < b:
            k0 = ka + (kb - ka) * (-a) / (b - a)
            split += [(a, 0.0, ka, k0), (0.0, b, k0, kb)]
        else:
            split.append((a, b, ka, kb))
    slopes = np.abs(np.diff(ks) / np.diff(xs))
    lip = float(slopes.max()) if abs(ks[0]) < 1e-15 and abs(ks[-1]) < 1e-15 else math.inf
    return KernelSpec(name, func, (float(xs[0]), float(xs[-1])), lip,
                      tuple(float(x) for x in xs), np.array(split, dtype=float))


def from_csv(path) -> KernelSpec:
    """Read a two-column ``x,k`` table (header optional)."""
    path = Path(path)
    try:
        raw = np.genfromtxt(path, delimiter=",", dtype=float)
    except OSError as exc:
        raise ValueError(f"cannot read kernel table {path}: {exc}") from exc
    raw = np.atleast_2d(raw)
    raw = raw[~np.isnan(raw).any(axis=1)]
    if raw.shape[1] != 2:
        raise ValueError(f"kernel table {path} must have exactly two columns")
    return from_table(raw[:, 0], raw[:, 1], name=f"custom:{path}")


def custom(func: Callable, support=(-math.inf, math.inf), breakpoints=(),
           lipschitz_bound: float = math.inf, name: str = "custom") -> KernelSpec:
    """Wrap an arbitrary vectorised function as a kernel.

    Mass is checked by adaptive quadrature; moments and ``L`` are then always
    obtained numerically.
    """
    spec = KernelSpec(name, lambda x: np.asarray(func(x), dtype=float),
                      (float(support[0]), float(support[1])), lipschitz_bound,
                      tuple(sorted(float(b) for b in breakpoints)))
    mass = _integrate(spec, spec.support[0], spec.support[1])
    if abs(mass - 1.0) > 1e-8:
        raise NonIntegrableKernelError(f"kernel integrates to {mass!r}, not 1")
    return spec


# ---------------------------------------------------------------------------
# quadrature


def _quad(f, a, b, points=()):
    """Adaptive Gauss-Kronrod over [a, b], split at interior ``points``.

    Infinite ranges are handled by QUADPACK's variable transformation.
    """
    if a == b:
        return 0.0
    cuts = [a] + [p for p in sorted(points) if a < p < b] + [b]
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            try:
                val, _ = integrate.quad(f, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=400)
            except integrate.IntegrationWarning as exc:
                raise NonIntegrableKernelError(f"quadrature failed on [{lo}, {hi}]: {exc}") from exc
            if not math.isfinite(val):
                raise NonIntegrableKernelError(f"integral diverges on [{lo}, {hi}]")
            total += val
    return total


def _integrate(kernel: KernelSpec, a: float, b: float, power: int = 1) -> float:
    f = (lambda x: float(kernel(x))) if power == 1 else (lambda x: float(kernel(x)) ** power)
    return _quad(f, a, b, kernel.breakpoints)


def _numeric_cutoff(kernel: KernelSpec) -> float:
    r = 1.0
    while r < 1e6:
        tail = _quad(lambda x: float(kernel(x)) ** 2, r, math.inf) + \
            _quad(lambda x: float(kernel(x)) ** 2, -math.inf, -r)
        if tail < TAIL_MASS:
            return r
        r *= 2.0
    raise NonIntegrableKernelError("kernel tail does not decay")


# ---------------------------------------------------------------------------
# L-functional and moments


def l_function(kernel: KernelSpec, t):
    """Evaluate the tail functional ``L(t)`` (scalar or array input)."""
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if kernel._l_closed is not None:
        out = kernel._l_closed(t)
    else:
        out = np.array([_l_numeric(kernel, ti) for ti in t])
    return float(out[0]) if scalar else out


def _l_numeric(kernel: KernelSpec, t: float) -> float:
    lo, hi = kernel.support
    if t > 0:
        return _integrate(kernel, max(t, lo), hi) if t < hi else 0.0
    return -_integrate(kernel, lo, min(t, hi)) if t > lo else 0.0


def moments(kernel: KernelSpec, method: str = "auto") -> KernelMoments:
    """``int K^2``, ``int L^2``, ``int |K|`` and ``I(K) = int K^2 * int L^2``.

    ``method="auto"`` returns closed forms for built-ins; ``"quad"`` forces
    numerical integration (used to cross-check the closed forms).
    """
    if method not in ("auto", "quad"):
        raise ValueError("method must be 'auto' or 'quad'")
    if method == "auto" and kernel._moments_closed is not None:
        return kernel._moments_closed
    if kernel.segments is not None:
        k2, l2, absk = _piecewise_linear_moments(kernel.segments)
    else:
        lo, hi = kernel.support
        k2 = _integrate(kernel, lo, hi, power=2)
        absk = _quad(lambda x: abs(float(kernel(x))), lo, hi, kernel.breakpoints)
        # int_0^inf L^2 = 2 int_0^inf t K(t) L(t) dt, likewise on the negative side
        lfun = (lambda t: _l_numeric(kernel, t))
        l2 = 0.0
        if hi > 0:
            l2 += _quad(lambda t: 2.0 * t * float(kernel(t)) * lfun(t), 0.0, hi, kernel.breakpoints)
        if lo < 0:
            l2 += _quad(lambda t: 2.0 * t * float(kernel(t)) * lfun(t), lo, 0.0, kernel.breakpoints)
    return KernelMoments(k2, l2, absk, k2 * l2)


def _piecewise_linear_moments(segs: np.ndarray) -> tuple[float, float, float]:
    a, b, ka, kb = segs.T
    h = b - a
    k2 = float(np.sum(h * (ka * ka + ka * kb + kb * kb) / 3.0))
    mass = 0.5 * h * (ka + kb)
    # |K| on a segment whose ends have opposite sign
    absk = 0.0
    for hi_, x, y in zip(h, ka, kb):
        if x * y >= 0:
            absk += 0.5 * hi_ * (abs(x) + abs(y))
        else:
            absk += 0.5 * hi_ * (x * x + y * y) / (abs(x) + abs(y))
    total = float(mass.sum())
    cum = np.concatenate([[0.0], np.cumsum(mass)])  # F at segment left ends
    l2 = 0.0
    for i in range(len(segs)):
        s = 0.5 * h[i] * (_GL_NODES + 1.0)
        f = cum[i] + ka[i] * s + (kb[i] - ka[i]) * s * s / (2.0 * h[i])
        mid = a[i] + 0.5 * h[i]
        lval = (total - f) if mid > 0 else -f
        l2 += 0.5 * h[i] * float(np.dot(_GL_WEIGHTS, lval * lval))
    return k2, l2, absk


def first_abs_moment(kernel: KernelSpec) -> float:
    """``int |x K(x)| dx`` (finite for every admissible kernel)."""
    lo, hi = kernel.support
    return _quad(lambda x: abs(x * float(kernel(x))), lo, hi, kernel.breakpoints)


# ---------------------------------------------------------------------------
# discrete weights


def edge_adjusted_weights(kernel: KernelSpec, bandwidth: float, grid_times, tau: float,
                          upper_index: Optional[int] = None) -> np.ndarray:
    """Boundary-corrected weights ``K_b(t_{j-1} - tau) / (Delta sum_j K_b(t_{j-1} - tau))``.

    ``grid_times`` are the observation times ``t_0, ..., t_n``; weights are
    returned for ``j = 1 .. upper_index`` so that ``Delta * sum(w) == 1``.
    """
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    t = np.asarray(grid_times, dtype=float)
    if len(t) < 2:
        raise ValueError("need at least two grid times")
    delta = t[1] - t[0]
    if upper_index is None:
        upper_index = len(t) - 1
    if not 1 <= upper_index <= len(t):
        raise ValueError("upper_index out of range")
    raw = kernel.scaled(t[:upper_index] - tau, bandwidth)
    denom = delta * raw.sum()
    if not denom > MIN_WINDOW_MASS:
        raise DegenerateWindowError(f"no kernel mass inside the window at tau={tau}")
    return raw / denom


def kernel_sums(kernel: KernelSpec, bandwidth: float, s0: float, delta: float,
                values, taus) -> np.ndarray:
    """``out[q, ...] = sum_j K_b(s0 + j*delta - taus[q]) * values[j, ...]``.

    ``values`` may be 1-d or 2-d (columns are smoothed independently).
    """
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    v = np.asarray(values, dtype=float)
    squeeze = v.ndim == 1
    if squeeze:
        v = v[:, None]
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    if kernel.is_exponential:
        out = _exp_sums(bandwidth, s0, delta, v, taus)
    else:
        pos = (taus - s0) / delta
        q = np.rint(pos)
        if len(taus) > 8 and np.all(np.abs(pos - q) < 1e-9):
            out = _grid_sums(kernel, bandwidth, delta, v, q.astype(np.int64))
        else:
            out = _direct_sums(kernel, bandwidth, s0, delta, v, taus)
    return out[:, 0] if squeeze else out


def _exp_sums(b, s0, delta, v, taus):
    # forward / backward first-order recursions: A_i = rho A_{i-1} + v_i,
    # R_i = rho R_{i+1} + v_i with rho = exp(-delta / b)
    n = v.shape[0]
    rho = math.exp(-delta / b)
    fwd = signal.lfilter([1.0], [1.0, -rho], v, axis=0)
    bwd = signal.lfilter([1.0], [1.0, -rho], v[::-1], axis=0)[::-1]
    idx = np.floor((taus - s0) / delta).astype(np.int64)
    idx = np.clip(idx, -1, n - 1)
    out = np.zeros((len(taus), v.shape[1]))
    inner = (idx >= 0)
    if np.any(inner):
        i = idx[inner]
        d = (taus[inner] - (s0 + i * delta))[:, None]
        left = fwd[i] * np.exp(-d / b)
        right = np.zeros_like(left)
        has_right = i + 1 < n
        if np.any(has_right):
            ir = i[has_right] + 1
            dr = ((s0 + ir * delta) - taus[inner][has_right])[:, None]
            right[has_right] = bwd[ir] * np.exp(-dr / b)
        out[inner] = left + right
    if np.any(~inner):
        d = (s0 - taus[~inner])[:, None]
        out[~inner] = bwd[0] * np.exp(-d / b)
    return out / (2.0 * b)


def _grid_sums(kernel, b, delta, v, q):
    n = v.shape[0]
    half = int(math.ceil(kernel.cutoff * b / delta)) + 1
    half = min(half, n + int(np.abs(q).max()) + 1)
    e = np.arange(-half, half + 1)
    # h[e + half] = K_b(-e * delta); conv[t] = sum_j v[j] h[t - j], q = t - half
    h = kernel.scaled(-e * delta, b)
    conv = signal.oaconvolve(v, h[:, None], mode="full", axes=0)
    out = np.zeros((len(q), v.shape[1]))
    t = q + half
    ok = (t >= 0) & (t < conv.shape[0])
    out[ok] = conv[t[ok]]
    return out


def _direct_sums(kernel, b, s0, delta, v, taus):
    n = v.shape[0]
    reach = kernel.cutoff * b
    out = np.zeros((len(taus), v.shape[1]))
    for q, tau in enumerate(taus):
        lo = max(int(math.floor((tau - reach - s0) / delta)), 0)
        hi = min(int(math.ceil((tau + reach - s0) / delta)) + 1, n)
        if hi <= lo:
            continue
        w = kernel.scaled(s0 + np.arange(lo, hi) * delta - tau, b)
        out[q] = w @ v[lo:hi]
    return out


def smooth(kernel: KernelSpec, bandwidth: float, s0: float, delta: float, values, taus,
           edge_adjust: bool = False) -> np.ndarray:
    """Kernel-weighted sums of ``values``; with ``edge_adjust`` each weight is
    divided by ``delta * sum_j K_b(s_j - tau)`` (boundary correction)."""
    v = np.asarray(values, dtype=float)
    if not edge_adjust:
        return kernel_sums(kernel, bandwidth, s0, delta, v, taus)
    both = kernel_sums(kernel, bandwidth, s0, delta, np.column_stack([v, np.ones_like(v)]), taus)
    # fraction of kernel mass inside the window; FFT round-off can leave
    # ~1e-17 where the exact value is zero
    denom = delta * both[:, 1]
    bad_mask = ~(denom > MIN_WINDOW_MASS)
    if np.any(bad_mask):
        bad = np.atleast_1d(np.asarray(taus, dtype=float))[bad_mask][0]
        raise DegenerateWindowError(f"no kernel mass inside the window at tau={bad}")
    return both[:, 0] / denom
