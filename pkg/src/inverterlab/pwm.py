"""Triangular-carrier PWM turning ``u`` in [-1, 1] into ``mu`` in {-1, +1}."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import ConfigError


@dataclass(frozen=True)
class PwmConfig:
    carrier_frequency: float = 10.0e3

    def __post_init__(self):
        if not (math.isfinite(self.carrier_frequency) and self.carrier_frequency > 0):
            raise ConfigError("pwm.carrier_hz", f"must be positive, got {self.carrier_frequency!r}")

    @property
    def period(self) -> float:
        return 1.0 / self.carrier_frequency


def carrier(t: float, cfg: PwmConfig) -> float:
    """Symmetric triangle: -1 at the start of each period, +1 at half period."""
    phase = (t * cfg.carrier_frequency) % 1.0
    return 4.0 * phase - 1.0 if phase < 0.5 else 3.0 - 4.0 * phase


def modulate(u: float, t: float, cfg: PwmConfig) -> int:
    """Comparator output; ties resolve to +1."""
    if not abs(u) <= 1.0:
        raise ValueError(f"PWM input must lie in [-1, 1], got {u!r}")
    return 1 if u >= carrier(t, cfg) else -1


def switch_orders(mu: int):
    """Split ``mu`` into the complementary binary orders ``(mu1, mu2)``."""
    return (1 + mu) // 2, (1 - mu) // 2
