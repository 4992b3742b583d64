"""Closed-loop scenario engine.

The plant is integrated with fixed-step classical RK4 at step ``h``. The
controller runs every ``Ts = n h`` on the sampled state and its output is
held (zero-order hold) until the next control instant. In the switched model
the held command drives a carrier comparator evaluated at every plant step.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from . import analysis
from .exceptions import ConfigError, SimulationFault
from .fuzzy import FuzzyConfig, RuleTable, default_rule_table, flc_command
from .nlctrl import (
    Command,
    ControlInputs,
    ControllerGains,
    FilteredDifferentiator,
    backstep_command,
    smc_command,
)
from .plant import LoadModel, PlantParams, PlantState
from .pwm import PwmConfig, modulate
from .reference import ReferenceSpec, reference_eval

CONTROLLERS = ("backstepping", "sliding", "fuzzy")
MODELS = ("averaged", "switched")
TRACE_COLUMNS = ("t", "x1", "x1_star", "x2", "i_S", "u_command", "mu", "s", "V2", "saturated")

_REL = 1e-9


def _is_multiple(a: float, b: float) -> Tuple[bool, int]:
    n = round(a / b)
    return n >= 1 and abs(n * b - a) <= _REL * a, int(n)


@dataclass(frozen=True)
class SimConfig:
    duration: float = 0.1
    plant_step_h: float = 1.0e-6
    control_period_Ts: float = 100.0e-6
    model: str = "averaged"
    controller: str = "sliding"
    gains: ControllerGains = field(default_factory=ControllerGains)
    fuzzy: FuzzyConfig = field(default_factory=FuzzyConfig)
    rules: RuleTable = field(default_factory=default_rule_table)
    dis_dt: str = "analytic"
    dis_dt_tau: float = 50.0e-6
    params: PlantParams = field(default_factory=PlantParams)
    load: LoadModel = field(default_factory=LoadModel)
    reference: ReferenceSpec = field(default_factory=ReferenceSpec)
    pwm: PwmConfig = field(default_factory=PwmConfig)
    initial_x1: float = 0.0
    initial_x2: float = 0.0

    def __post_init__(self):
        h, ts = self.plant_step_h, self.control_period_Ts
        if not (math.isfinite(h) and h > 0):
            raise ConfigError("sim.plant_step_h", f"must be positive, got {h!r}")
        if not (math.isfinite(ts) and ts > 0):
            raise ConfigError("sim.control_period_Ts", f"must be positive, got {ts!r}")
        if not _is_multiple(ts, h)[0]:
            raise ConfigError("sim.control_period_Ts", "must be an integer multiple of sim.plant_step_h")
        if not math.isfinite(self.duration) or not _is_multiple(self.duration, ts)[0]:
            raise ConfigError("sim.duration", "must be a positive integer multiple of sim.control_period_Ts")
        if self.duration < 2.0 * self.reference.period * (1 - _REL):
            raise ConfigError("sim.duration", "must cover at least two fundamental periods")
        if self.model not in MODELS:
            raise ConfigError("sim.model", f"must be one of {', '.join(MODELS)}, got {self.model!r}")
        if self.controller not in CONTROLLERS:
            raise ConfigError("controller.type", f"must be one of {', '.join(CONTROLLERS)}, got {self.controller!r}")
        if self.dis_dt not in ("analytic", "filtered"):
            raise ConfigError("controller.dis_dt", f"must be analytic or filtered, got {self.dis_dt!r}")
        if self.params.dc_bus_E <= self.reference.peak:
            raise ConfigError(
                "plant.dc_bus_E",
                f"{self.params.dc_bus_E:g} V does not exceed the reference peak {self.reference.peak:.2f} V",
            )
        if self.pwm.carrier_frequency < 20.0 * self.reference.frequency_f:
            raise ConfigError("pwm.carrier_hz", "must be at least 20x the reference frequency")
        if self.model == "switched" and h > 1.0 / (64.0 * self.pwm.carrier_frequency) * (1 + _REL):
            raise ConfigError("sim.plant_step_h", "switched model needs at least 64 plant steps per carrier period")
        for name in ("initial_x1", "initial_x2"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"sim.{name}", "must be finite")

    @property
    def n_control(self) -> int:
        return _is_multiple(self.duration, self.control_period_Ts)[1]

    @property
    def substeps(self) -> int:
        return _is_multiple(self.control_period_Ts, self.plant_step_h)[1]

    def snapped_load(self) -> LoadModel:
        """Load schedule with step instants moved to the nearest control instant."""
        ts = self.control_period_Ts
        segs = []
        for t0, r in self.load.segments:
            t_snap = round(t0 / ts) * ts
            if segs and t_snap <= segs[-1][0]:
                segs[-1] = (segs[-1][0], r)
            else:
                segs.append((t_snap, r))
        return LoadModel(tuple(segs))

    def with_overrides(self, **kw) -> "SimConfig":
        return replace(self, **kw)


class TraceRecord(NamedTuple):
    t: float
    x1: float
    x1_star: float
    x2: float
    i_S: float
    u_command: float
    mu: Optional[int]
    s: Optional[float]
    V2: Optional[float]
    saturated: bool


@dataclass(frozen=True)
class ScenarioSummary:
    controller: str
    model: str
    thd: float
    rms_error: float
    rms_error_pct: float
    peak_error: float
    settle_time: Optional[float]
    resettle_time: Optional[float]
    saturation_count: int
    output_rms: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class SimResult:
    config: SimConfig
    records: List[TraceRecord]
    summary: ScenarioSummary
    spectrum: analysis.Spectrum

    def column(self, name: str) -> np.ndarray:
        i = TRACE_COLUMNS.index(name)
        return np.array([np.nan if r[i] is None else float(r[i]) for r in self.records])

    def trace_csv(self) -> str:
        buf = io.StringIO()
        write_trace_csv(self.records, buf)
        return buf.getvalue()


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def write_trace_csv(records, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for r in records:
        w.writerow([_fmt(v) for v in r])


def _rk4(x1: float, x2: float, v: float, h: float, L: float, C: float, R: float) -> Tuple[float, float]:
    # v is the bridge voltage u*E, held over the step
    a1 = (x2 - x1 / R) / C
    b1 = (v - x1) / L
    y1 = x1 + 0.5 * h * a1
    y2 = x2 + 0.5 * h * b1
    a2 = (y2 - y1 / R) / C
    b2 = (v - y1) / L
    y1 = x1 + 0.5 * h * a2
    y2 = x2 + 0.5 * h * b2
    a3 = (y2 - y1 / R) / C
    b3 = (v - y1) / L
    y1 = x1 + h * a3
    y2 = x2 + h * b3
    a4 = (y2 - y1 / R) / C
    b4 = (v - y1) / L
    return (
        x1 + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
        x2 + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4),
    )


def rk4_step(state: PlantState, u: float, h: float, params: PlantParams, load: LoadModel) -> PlantState:
    """Advance the plant by one RK4 step with ``u`` and the load held constant."""
    if not abs(u) <= 1.0:
        raise ValueError(f"bridge command must lie in [-1, 1], got {u!r}")
    if not h > 0:
        raise ValueError("step must be positive")
    x1, x2 = _rk4(
        state.x1, state.x2, u * params.dc_bus_E, h,
        params.inductance_L, params.capacitance_C, load.resistance_at(state.t),
    )
    if not (math.isfinite(x1) and math.isfinite(x2)):
        raise SimulationFault(state.t, "non-finite plant state")
    return PlantState(x1, x2, state.t + h)


class FuzzyController:
    """Stateful wrapper: forms the change of error at the control rate."""

    def __init__(self, cfg: FuzzyConfig, table: RuleTable, period: float):
        self.cfg = cfg
        self.table = table
        self.period = period
        self.reset()

    def reset(self):
        self._e_prev = None

    def __call__(self, inp: ControlInputs) -> Command:
        e = inp.ref.x1_star - inp.state.x1
        de = 0.0 if self._e_prev is None else (e - self._e_prev) / self.period
        self._e_prev = e
        u_raw = flc_command(e, de, self.cfg, self.table)
        if self.cfg.feedforward:
            u_raw += inp.ref.x1_star / inp.params.dc_bus_E
        if not math.isfinite(u_raw):
            raise SimulationFault(inp.state.t, "fuzzy controller produced a non-finite command")
        u = min(1.0, max(-1.0, u_raw))
        return Command(u, u_raw, u != u_raw)


def make_controller(cfg: SimConfig):
    if cfg.controller == "sliding":
        return lambda inp: smc_command(inp, cfg.gains)
    if cfg.controller == "backstepping":
        return lambda inp: backstep_command(inp, cfg.gains)
    return FuzzyController(cfg.fuzzy, cfg.rules, cfg.control_period_Ts)


def run_scenario(cfg: SimConfig) -> SimResult:
    """Simulate ``cfg`` and return the per-control-period trace and a summary.

    Raises
    ------
    SimulationFault
        On a non-finite plant state or controller output.
    """
    params, spec = cfg.params, cfg.reference
    L, C, E = params.inductance_L, params.capacitance_C, params.dc_bus_E
    load = cfg.snapped_load()
    ts, h = cfg.control_period_Ts, cfg.plant_step_h
    n_sub = cfg.substeps
    switched = cfg.model == "switched"
    controller = make_controller(cfg)
    diff = FilteredDifferentiator(cfg.dis_dt_tau, ts) if cfg.dis_dt == "filtered" else None

    x1, x2 = cfg.initial_x1, cfg.initial_x2
    records: List[TraceRecord] = []
    for n in range(cfg.n_control):
        t = n * ts
        R = load.resistance_at(t)
        i_s = x1 / R
        dis = diff(i_s) if diff is not None else (x2 - i_s) / (R * C)
        ref = reference_eval(spec, t)
        cmd = controller(ControlInputs(PlantState(x1, x2, t), ref, i_s, dis, params))

        u = cmd.u
        mu = None
        if switched:
            mu = modulate(u, t, cfg.pwm)
        records.append(TraceRecord(t, x1, ref.x1_star, x2, i_s, u, mu, cmd.s, cmd.V2, cmd.saturated))

        if switched:
            for m in range(n_sub):
                mu_m = mu if m == 0 else modulate(u, t + m * h, cfg.pwm)
                x1, x2 = _rk4(x1, x2, mu_m * E, h, L, C, R)
        else:
            v = u * E
            for _ in range(n_sub):
                x1, x2 = _rk4(x1, x2, v, h, L, C, R)
        if not (math.isfinite(x1) and math.isfinite(x2)):
            raise SimulationFault((n + 1) * ts, "plant state diverged to a non-finite value")

    spectrum, summary = summarize(cfg, records)
    return SimResult(cfg, records, summary, spectrum)


def summarize(cfg: SimConfig, records: List[TraceRecord], cycles: int = 2):
    """Steady-state spectrum and tracking summary over the final ``cycles`` periods."""
    spec = cfg.reference
    ts = cfg.control_period_Ts
    t = np.array([r.t for r in records])
    x1 = np.array([r.x1 for r in records])
    x1_ref = np.array([r.x1_star for r in records])
    per_cycle = spec.period / ts
    n_win = int(round(cycles * per_cycle))
    window = x1[-n_win:]
    spectrum = analysis.dft_harmonics(window, 1.0 / ts, spec.frequency_f, analysis.DEFAULT_HARMONICS)
    try:
        thd = analysis.thd(spectrum)
    except analysis.AnalysisError:
        thd = math.nan
    m = analysis.tracking_metrics(t, x1, x1_ref, spec.rms_V, spec.frequency_f, cycles=cycles)
    resettle = None
    steps = cfg.snapped_load().step_times
    if steps:
        resettle = analysis.tracking_metrics(
            t, x1, x1_ref, spec.rms_V, spec.frequency_f, cycles=cycles, start=steps[-1]
        ).settle_time
    summary = ScenarioSummary(
        controller=cfg.controller,
        model=cfg.model,
        thd=thd,
        rms_error=m.rms_error,
        rms_error_pct=m.rms_error_pct,
        peak_error=m.peak_error,
        settle_time=m.settle_time,
        resettle_time=resettle,
        saturation_count=sum(r.saturated for r in records),
        output_rms=analysis.rms(window),
    )
    return spectrum, summary
