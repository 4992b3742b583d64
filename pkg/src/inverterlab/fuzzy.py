"""Mamdani fuzzy controller on (error, change of error).

Seven triangular terms per variable on a normalized [-1, 1] universe,
min activation, max aggregation and grid-based centroid defuzzification.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import IntEnum
from functools import lru_cache
from importlib import resources
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .exceptions import ConfigError

logger = logging.getLogger(__name__)


class Term(IntEnum):
    NB = -3
    NM = -2
    NS = -1
    Z = 0
    PS = 1
    PM = 2
    PB = 3

    @property
    def position(self) -> int:
        """Column/row position 0..6 in the rule grid."""
        return int(self) + 3


TERMS = tuple(Term)


@dataclass(frozen=True)
class MembershipFunction:
    """Triangle with optional shoulder.

    ``shoulder="left"`` keeps membership at 1 for ``x <= center``;
    ``shoulder="right"`` keeps it at 1 for ``x >= center``.
    """

    left: float
    center: float
    right: float
    shoulder: Optional[str] = None

    def __post_init__(self):
        if not self.left <= self.center <= self.right:
            raise ValueError(f"need left <= center <= right, got {self.left}, {self.center}, {self.right}")
        if self.shoulder not in (None, "left", "right"):
            raise ValueError(f"bad shoulder {self.shoulder!r}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.shoulder == "left":
            rise = np.ones_like(x)
        elif self.center > self.left:
            rise = (x - self.left) / (self.center - self.left)
        else:
            rise = np.where(x >= self.left, 1.0, 0.0)
        if self.shoulder == "right":
            fall = np.ones_like(x)
        elif self.right > self.center:
            fall = (self.right - x) / (self.right - self.center)
        else:
            fall = np.where(x <= self.right, 1.0, 0.0)
        return np.clip(np.minimum(rise, fall), 0.0, 1.0)


def uniform_partition() -> Tuple[MembershipFunction, ...]:
    """Seven evenly spaced triangles with 50% overlap on [-1, 1]."""
    centers = [i / 3.0 for i in range(-3, 4)]
    mfs = []
    for i, c in enumerate(centers):
        left = centers[i - 1] if i > 0 else c
        right = centers[i + 1] if i < 6 else c
        shoulder = "left" if i == 0 else "right" if i == 6 else None
        mfs.append(MembershipFunction(left, c, right, shoulder))
    return tuple(mfs)


class RuleTable:
    """7 x 7 map ``(e term, de term) -> output term``.

    ``grid[i, j]`` holds the signed output index for error term at position
    ``i`` and change-of-error term at position ``j``.
    """

    def __init__(self, grid):
        grid = np.asarray(grid, dtype=int)
        if grid.shape != (7, 7):
            raise ConfigError("fuzzy.rules", f"rule table must be 7x7, got shape {grid.shape}")
        if np.any(np.abs(grid) > 3):
            raise ConfigError("fuzzy.rules", "rule outputs must be signed indices in -3..3")
        if not np.array_equal(grid[::-1, ::-1], -grid):
            raise ConfigError("fuzzy.rules", "rule table is not antisymmetric: rule(-i,-j) != -rule(i,j)")
        if np.any(np.diff(grid, axis=0) < 0) or np.any(np.diff(grid, axis=1) < 0):
            raise ConfigError("fuzzy.rules", "rule table rows/columns must be non-decreasing")
        grid.setflags(write=False)
        self.grid = grid

    def __getitem__(self, key: Tuple[Term, Term]) -> Term:
        e, de = key
        return Term(int(self.grid[Term(e).position, Term(de).position]))

    def __eq__(self, other):
        return isinstance(other, RuleTable) and np.array_equal(self.grid, other.grid)

    def __hash__(self):
        return hash(self.grid.tobytes())

    def __repr__(self):
        return f"RuleTable({self.grid.tolist()})"


def parse_rule_table(text: str) -> RuleTable:
    """Parse the plain-text rule file. Blank lines and ``#`` comments are ignored."""
    lines = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    names = [t.name for t in TERMS]
    if len(lines) != 8:
        raise ConfigError("fuzzy.rules", f"expected a header and 7 rows, found {len(lines)} lines")
    header, rows = lines[0], lines[1:]
    if header[1:] != names:
        raise ConfigError("fuzzy.rules", f"header must list columns {' '.join(names)}")
    grid = []
    for expected, row in zip(names, rows):
        if len(row) != 8 or row[0] != expected:
            raise ConfigError("fuzzy.rules", f"malformed row for {expected}: {' '.join(row)}")
        try:
            grid.append([int(Term[cell]) for cell in row[1:]])
        except KeyError as exc:
            raise ConfigError("fuzzy.rules", f"unknown term {exc.args[0]!r} in row {expected}") from None
    return RuleTable(grid)


def default_rule_table() -> RuleTable:
    text = resources.files("inverterlab").joinpath("data/rules.txt").read_text()
    return parse_rule_table(text)


def load_rule_table(path) -> RuleTable:
    with open(path) as fh:
        return parse_rule_table(fh.read())


def fuzzify(x: float, mf_set=None) -> np.ndarray:
    """Membership degree of ``x`` in each of the seven terms."""
    mf_set = mf_set or uniform_partition()
    return np.array([float(mf(x)) for mf in mf_set])


class Aggregate(NamedTuple):
    """Clipped output set: one strength per output term."""

    strengths: np.ndarray
    mf_set: Tuple[MembershipFunction, ...]


def infer(e_mu: np.ndarray, de_mu: np.ndarray, table: RuleTable, mf_set=None) -> Aggregate:
    """Min activation per rule, max aggregation per output term."""
    strengths = np.zeros(7)
    for i in np.flatnonzero(e_mu):
        for j in np.flatnonzero(de_mu):
            out = table.grid[i, j] + 3
            strengths[out] = max(strengths[out], min(e_mu[i], de_mu[j]))
    return Aggregate(strengths, mf_set or uniform_partition())


@lru_cache(maxsize=16)
def _mf_grid(mf_set: Tuple[MembershipFunction, ...], resolution: int):
    grid = np.linspace(-1.0, 1.0, resolution)
    grid = 0.5 * (grid - grid[::-1])  # exact odd symmetry about 0
    mu = np.vstack([mf(grid) for mf in mf_set])
    mirrored = mu[::-1, ::-1]
    if np.allclose(mu, mirrored, atol=1e-12):
        # symmetric partition: remove roundoff asymmetry so odd inputs give exactly odd outputs
        mu = 0.5 * (mu + mirrored)
    return grid, mu


def defuzzify_centroid(aggregate: Aggregate, resolution: int = 1001) -> float:
    """Centroid of the max-envelope of clipped output sets on a uniform grid."""
    if resolution < 101:
        raise ConfigError("fuzzy.resolution", f"must be >= 101, got {resolution}")
    if not np.any(aggregate.strengths > 0):
        logger.warning("no rule fired; defuzzified output set to 0")
        return 0.0
    grid, mu = _mf_grid(tuple(aggregate.mf_set), resolution)
    active = aggregate.strengths > 0
    env = np.minimum(mu[active], aggregate.strengths[active, None]).max(axis=0)
    half = resolution // 2
    # pair +x with -x so a symmetric envelope sums to exactly zero
    num = np.dot(grid[half:], env[half:] - env[: resolution - half][::-1])
    return float(num / env.sum())


@dataclass(frozen=True)
class FuzzyConfig:
    """Scaling and resolution for the fuzzy controller.

    ``ke`` and ``kde`` map error (V) and change of error (V/s) onto the
    normalized universe; ``ku`` scales the defuzzified output. With
    ``feedforward`` the nominal modulation ``x1*/E`` is added to the fuzzy
    correction so that the rule base only has to trim the residual error.
    """

    ke: float = 1.0 / 40.0
    kde: float = 1.0 / 4.0e5
    ku: float = 0.35
    resolution: int = 1001
    feedforward: bool = True
    mf_set: Tuple[MembershipFunction, ...] = field(default_factory=uniform_partition)

    def __post_init__(self):
        for name in ("ke", "kde", "ku"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"fuzzy.{name}", f"must be strictly positive, got {value!r}")
        if int(self.resolution) != self.resolution or self.resolution < 101:
            raise ConfigError("fuzzy.resolution", f"must be an integer >= 101, got {self.resolution!r}")
        if len(self.mf_set) != 7:
            raise ConfigError("fuzzy.mf_set", "exactly seven membership functions are required")


def flc_command(e: float, de: float, cfg: FuzzyConfig, table: RuleTable) -> float:
    """Crisp fuzzy output ``clamp(ku * centroid, -1, 1)`` for error ``e`` and rate ``de``."""
    en = min(1.0, max(-1.0, cfg.ke * e))
    den = min(1.0, max(-1.0, cfg.kde * de))
    agg = infer(fuzzify(en, cfg.mf_set), fuzzify(den, cfg.mf_set), table, cfg.mf_set)
    return min(1.0, max(-1.0, cfg.ku * defuzzify_centroid(agg, cfg.resolution)))
