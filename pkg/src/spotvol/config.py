"""Estimator configuration, truncation rules and regime reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import RegimeError
from .kernels import KernelSpec, exponential
from .weights import PreAvgScheme, WeightFn, triangular


@dataclass(frozen=True)
class TruncationRule:
    """Jump threshold ``v_n = alpha * Delta_n^varpi`` (``regime="no_noise"``)
    or ``v_n = alpha * (k_n Delta_n)^varpi`` (``regime="noise"``).

    ``alpha=None`` selects a data-driven level: ``multiplier`` times the
    square root of a robust preliminary variance estimate.
    """

    alpha: Optional[float] = None
    varpi: float = 0.49
    regime: str = "noise"
    multiplier: float = 5.0

    def __post_init__(self):
        if not 0.0 < self.varpi < 0.5:
            raise ValueError("varpi must lie in the open interval (0, 1/2)")
        if self.alpha is not None and not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.multiplier > 0:
            raise ValueError("multiplier must be positive")
        if self.regime not in ("noise", "no_noise"):
            raise ValueError("regime must be 'noise' or 'no_noise'")

    def level(self, delta_n: float, k_n: int = 1, alpha: Optional[float] = None) -> float:
        a = self.alpha if alpha is None else alpha
        if a is None:
            raise ValueError("truncation alpha not resolved")
        base = k_n * delta_n if self.regime == "noise" else delta_n
        return a * base**self.varpi


@dataclass(frozen=True)
class EstimatorConfig:
    """Everything an estimator needs besides the data.

    The bandwidth is ``beta * delta_n ** rate`` unless ``bandwidth`` is set
    explicitly. ``jump_activity`` is the assumed index ``r`` used only by the
    regime validators.
    """

    kernel: KernelSpec = field(default_factory=exponential)
    beta: float = 1.0
    rate: float = 0.25
    bandwidth: Optional[float] = None
    theta: float = 5.0
    weight: WeightFn = field(default_factory=triangular)
    truncation: Optional[TruncationRule] = None
    jump_activity: float = 1.0

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")
        if not 0.0 <= self.jump_activity <= 2.0:
            raise ValueError("jump activity r must lie in [0, 2]")

    def bandwidth_for(self, delta_n: float) -> float:
        if self.bandwidth is not None:
            return self.bandwidth
        return self.beta * delta_n**self.rate

    def scheme(self, delta_n: float) -> PreAvgScheme:
        return PreAvgScheme.from_theta(self.weight, self.theta, delta_n)

    def with_(self, **changes) -> "EstimatorConfig":
        return replace(self, **changes)


@dataclass
class RegimeReport:
    """Outcome of checking tuning parameters against the rate conditions."""

    checks: dict[str, bool] = field(default_factory=dict)
    values: dict[str, float] = field(default_factory=dict)
    notes: dict[str, str] = field(default_factory=dict)

    def add(self, name: str, ok: bool, note: str = "") -> None:
        self.checks[name] = bool(ok)
        if note:
            self.notes[name] = note

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def failures(self) -> list[str]:
        return [f"{k}: {self.notes.get(k, 'failed')}" for k, v in self.checks.items() if not v]

    def raise_if_failed(self) -> None:
        if not self.ok:
            raise RegimeError(self)

    def rows(self) -> list[tuple[str, str]]:
        out = [(k, f"{v:.17g}") for k, v in self.values.items()]
        out += [(k, "pass" if v else "FAIL") for k, v in self.checks.items()]
        return out


def beta_class(value: float) -> str:
    if value == 0:
        return "zero"
    if math.isinf(value):
        return "infinite"
    return "finite"
