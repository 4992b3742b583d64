"""Backstepping and sliding-mode voltage controllers.

Both laws map the sampled filter state, the reference triple and the load
current (with its time derivative) to a bridge command ``u`` in [-1, 1].
The tracking error is charge-scaled, ``z = C (x1 - x1*)``, so that its
derivative is a current: ``dz/dt = x2 - i_S - C dx1*/dt``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

from .exceptions import ConfigError, SimulationFault
from .plant import PlantParams, PlantState
from .reference import ReferenceSample


@dataclass(frozen=True)
class ControllerGains:
    """Gains for the two model-based laws.

    ``k1``/``k2`` belong to the backstepping law, ``k``/``beta``/``phi`` to
    the sliding-mode law. ``phi`` is the boundary-layer half-width around the
    sliding surface; ``phi = 0`` gives the pure signum reaching law.
    """

    k1: float = 5.0e3
    k2: float = 5.0e3
    k: float = 5.0e3
    beta: float = 1.0e4
    phi: float = 2.0

    def __post_init__(self):
        for name in ("k1", "k2", "k", "beta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"controller.{name}", f"must be strictly positive, got {value!r}")
        if not (math.isfinite(self.phi) and self.phi >= 0):
            raise ConfigError("controller.phi", f"must be >= 0, got {self.phi!r}")


@dataclass(frozen=True)
class ControlInputs:
    state: PlantState
    ref: ReferenceSample
    i_s: float
    dis_dt: float
    params: PlantParams

    def __neg__(self) -> "ControlInputs":
        return ControlInputs(
            -self.state,
            ReferenceSample(-self.ref.x1_star, -self.ref.dx1_star, -self.ref.ddx1_star),
            -self.i_s,
            -self.dis_dt,
            self.params,
        )


class Command(NamedTuple):
    u: float
    u_raw: float
    saturated: bool
    s: Optional[float] = None
    V2: Optional[float] = None


def sgn_phi(s: float, phi: float) -> float:
    """Signum with an optional linear boundary layer of half-width ``phi``.

    >>> sgn_phi(1.0, 2.0)
    0.5
    >>> sgn_phi(-3.2, 0.0)
    -1.0
    """
    if phi == 0:
        if s > 0:
            return 1.0
        if s < 0:
            return -1.0
        return 0.0
    return min(1.0, max(-1.0, s / phi))


def tracking_error_z(inp: ControlInputs) -> Tuple[float, float]:
    """Charge-scaled voltage error and its derivative, ``(z, dz/dt)``."""
    c = inp.params.capacitance_C
    z = c * (inp.state.x1 - inp.ref.x1_star)
    z_dot = inp.state.x2 - inp.i_s - c * inp.ref.dx1_star
    return z, z_dot


def sliding_surface(z: float, z_dot: float, gains: ControllerGains) -> float:
    return gains.k * z + z_dot


def _finish(u_raw: float, inp: ControlInputs, **diag) -> Command:
    if not math.isfinite(u_raw):
        raise SimulationFault(inp.state.t, f"controller produced non-finite command {u_raw!r}")
    u = min(1.0, max(-1.0, u_raw))
    return Command(u, u_raw, u != u_raw, **diag)


def smc_command(inp: ControlInputs, gains: ControllerGains) -> Command:
    """Sliding-mode law enforcing ``ds/dt = -beta sgn_phi(s)``.

    Solving the surface dynamics for ``u`` gives::

        u = x1/E + (L/E) (-beta sgn_phi(s) - k dz/dt + di_S/dt + C d2x1*/dt2)
    """
    p = inp.params
    z, z_dot = tracking_error_z(inp)
    s = sliding_surface(z, z_dot, gains)
    u_raw = inp.state.x1 / p.dc_bus_E + (p.inductance_L / p.dc_bus_E) * (
        -gains.beta * sgn_phi(s, gains.phi)
        - gains.k * z_dot
        + inp.dis_dt
        + p.capacitance_C * inp.ref.ddx1_star
    )
    return _finish(u_raw, inp, s=s)


def backstep_errors(inp: ControlInputs, gains: ControllerGains) -> Tuple[float, float, float, float]:
    """Return ``(z1, dz1/dt, z2, dx2*/dt)`` for the backstepping design."""
    c = inp.params.capacitance_C
    z1, z1_dot = tracking_error_z(inp)
    x2_star = -gains.k1 * z1 + inp.i_s + c * inp.ref.dx1_star
    z2 = inp.state.x2 - x2_star
    x2_star_dot = -gains.k1 * z1_dot + inp.dis_dt + c * inp.ref.ddx1_star
    return z1, z1_dot, z2, x2_star_dot


def backstep_command(inp: ControlInputs, gains: ControllerGains) -> Command:
    """Backstepping law closing ``z1 + dz2/dt = -k2 z2``."""
    p = inp.params
    z1, _, z2, x2_star_dot = backstep_errors(inp, gains)
    u_raw = inp.state.x1 / p.dc_bus_E + (p.inductance_L / p.dc_bus_E) * (-z1 - gains.k2 * z2 + x2_star_dot)
    return _finish(u_raw, inp, V2=0.5 * z1 * z1 + 0.5 * z2 * z2)


def surface_rate(inp: ControlInputs, u: float, gains: ControllerGains) -> float:
    """Analytic ``ds/dt`` under command ``u``, used to audit the reaching condition."""
    p = inp.params
    _, z_dot = tracking_error_z(inp)
    z_ddot = (u * p.dc_bus_E - inp.state.x1) / p.inductance_L - inp.dis_dt - p.capacitance_C * inp.ref.ddx1_star
    return gains.k * z_dot + z_ddot


def z2_rate(inp: ControlInputs, u: float, gains: ControllerGains) -> float:
    """Analytic ``dz2/dt`` under command ``u``."""
    p = inp.params
    _, _, _, x2_star_dot = backstep_errors(inp, gains)
    return (u * p.dc_bus_E - inp.state.x1) / p.inductance_L - x2_star_dot


class FilteredDifferentiator:
    """First-order filtered backward difference, ``tau dy/dt + y = dx/dt``.

    Stateful: one instance per simulation loop.
    """

    def __init__(self, tau: float, period: float):
        if not tau >= 0:
            raise ConfigError("controller.dis_dt_tau", f"must be >= 0, got {tau!r}")
        self.tau = tau
        self.period = period
        self.reset()

    def reset(self):
        self._prev = None
        self._y = 0.0

    def __call__(self, x: float) -> float:
        if self._prev is None:
            self._prev = x
            return self._y
        raw = (x - self._prev) / self.period
        self._prev = x
        a = self.period / (self.tau + self.period)
        self._y += a * (raw - self._y)
        return self._y
