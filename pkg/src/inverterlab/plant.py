"""Averaged and switched state-space model of the single-phase inverter.

The filter state is the capacitor (output) voltage ``x1`` and the inductor
current ``x2``::

    C dx1/dt = x2 - i_S
    L dx2/dt = u E - x1

``u`` is the per-period mean of the bridge switching signal in the averaged
model, or the switching signal itself (``mu`` in {-1, +1}) in the switched
model. The load is purely resistive, ``i_S = x1 / R``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple

from .exceptions import ConfigError

#: Resistance used to stand in for an open-circuit (no-load) output.
NO_LOAD_OHMS = 1.0e6


@dataclass(frozen=True)
class PlantParams:
    """LC filter and DC-bus parameters (SI units)."""

    inductance_L: float = 3.0e-3
    capacitance_C: float = 30.0e-6
    dc_bus_E: float = 400.0

    def __post_init__(self):
        for name in ("inductance_L", "capacitance_C", "dc_bus_E"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"plant.{name}", f"must be a positive finite number, got {value!r}")

    @property
    def corner_hz(self) -> float:
        return 1.0 / (2.0 * math.pi * math.sqrt(self.inductance_L * self.capacitance_C))


@dataclass(frozen=True)
class PlantState:
    x1: float
    x2: float
    t: float = 0.0

    def is_finite(self) -> bool:
        return math.isfinite(self.x1) and math.isfinite(self.x2)

    def __neg__(self) -> "PlantState":
        return PlantState(-self.x1, -self.x2, self.t)


@dataclass(frozen=True)
class LoadModel:
    """Piecewise-constant resistive load.

    ``segments`` is an ordered sequence of ``(start_time, resistance)``
    pairs. The first segment must start at ``t = 0``. Steps are
    right-continuous: at a step instant the new resistance applies.
    """

    segments: Tuple[Tuple[float, float], ...] = ((0.0, 50.0),)
    _starts: Tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        segs = tuple((float(t0), float(r)) for t0, r in self.segments)
        if not segs:
            raise ConfigError("load.segments", "at least one segment is required")
        if segs[0][0] != 0.0:
            raise ConfigError("load.segments", "first segment must start at t = 0")
        for (ta, _), (tb, _) in zip(segs, segs[1:]):
            if not tb > ta:
                raise ConfigError("load.segments", "start times must be strictly increasing")
        for _, r in segs:
            if not (math.isfinite(r) and r > 0):
                raise ConfigError("load.segments", f"resistance must be positive and finite, got {r!r}")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "_starts", tuple(t0 for t0, _ in segs))

    @classmethod
    def constant(cls, resistance: float) -> "LoadModel":
        return cls(((0.0, resistance),))

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> "LoadModel":
        return cls(tuple((p[0], p[1]) for p in pairs))

    def resistance_at(self, t: float) -> float:
        i = bisect.bisect_right(self._starts, t) - 1
        return self.segments[max(i, 0)][1]

    @property
    def step_times(self) -> Tuple[float, ...]:
        return self._starts[1:]


def load_current(state: PlantState, load: LoadModel) -> float:
    """Current drawn by the resistive load, ``x1 / R``."""
    return state.x1 / load.resistance_at(state.t)


def load_current_rate(state: PlantState, load: LoadModel, params: PlantParams) -> float:
    """Analytic time derivative of the load current.

    With ``i_S = x1 / R`` and ``C dx1/dt = x2 - i_S`` this is
    ``(x2 - x1/R) / (R C)``. At a step instant the post-step ``R`` is used.
    """
    r = load.resistance_at(state.t)
    return (state.x2 - state.x1 / r) / (r * params.capacitance_C)


def derivatives(state: PlantState, u: float, params: PlantParams, load: LoadModel) -> Tuple[float, float]:
    """Right-hand side of the averaged (or switched) filter equations.

    Parameters
    ----------
    state : PlantState
        Current filter state.
    u : float
        Bridge command in [-1, 1]. Saturation must happen upstream.
    params : PlantParams
    load : LoadModel

    Returns
    -------
    (dx1_dt, dx2_dt) : tuple of float
    """
    if not abs(u) <= 1.0:
        raise ValueError(f"bridge command must lie in [-1, 1], got {u!r}")
    i_s = load_current(state, load)
    return (
        (state.x2 - i_s) / params.capacitance_C,
        (u * params.dc_bus_E - state.x1) / params.inductance_L,
    )


def stored_energy(state: PlantState, params: PlantParams) -> float:
    """Energy held in the filter, ``(C x1^2 + L x2^2) / 2``."""
    return 0.5 * (params.capacitance_C * state.x1 ** 2 + params.inductance_L * state.x2 ** 2)
