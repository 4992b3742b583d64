"""Sinusoidal output-voltage reference and its analytic derivatives."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .exceptions import ConfigError


class ReferenceSample(NamedTuple):
    x1_star: float
    dx1_star: float
    ddx1_star: float


@dataclass(frozen=True)
class ReferenceSpec:
    rms_V: float = 230.0
    frequency_f: float = 50.0

    def __post_init__(self):
        # rms_V = 0 is allowed: it gives the trivial regulation-to-zero scenario.
        if not (math.isfinite(self.rms_V) and self.rms_V >= 0):
            raise ConfigError("reference.rms_volts", f"must be a non-negative finite number, got {self.rms_V!r}")
        if not (math.isfinite(self.frequency_f) and self.frequency_f > 0):
            raise ConfigError("reference.frequency_hz", f"must be positive, got {self.frequency_f!r}")

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.frequency_f

    @property
    def peak(self) -> float:
        return self.rms_V * math.sqrt(2.0)

    @property
    def period(self) -> float:
        return 1.0 / self.frequency_f


def reference_eval(spec: ReferenceSpec, t: float) -> ReferenceSample:
    """Return ``(x1*, dx1*/dt, d2x1*/dt2)`` at time ``t``."""
    w = spec.omega
    a = spec.peak
    x = a * math.sin(w * t)
    return ReferenceSample(x, a * w * math.cos(w * t), -w * w * x)
