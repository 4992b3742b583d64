"""Harmonic analysis and tracking-quality metrics."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .exceptions import AnalysisError

DEFAULT_HARMONICS = 50


@dataclass(frozen=True)
class Spectrum:
    """Peak amplitude per harmonic of ``fundamental_hz``.

    ``magnitudes[n - 1]`` is harmonic ``n``.
    """

    fundamental_hz: float
    magnitudes: np.ndarray
    dc_component: float

    def __post_init__(self):
        if len(self.magnitudes) < 2:
            raise AnalysisError("a spectrum needs at least two harmonics")

    @property
    def n_harmonics(self) -> int:
        return len(self.magnitudes)

    def harmonic(self, n: int) -> float:
        return float(self.magnitudes[n - 1])

    def csv_text(self) -> str:
        """``harmonic,magnitude_volts`` rows; harmonic 0 carries the DC component."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["harmonic", "magnitude_volts"])
        w.writerow([0, repr(float(self.dc_component))])
        for n, m in enumerate(self.magnitudes, start=1):
            w.writerow([n, repr(float(m))])
        return buf.getvalue()


def _cycles(n_samples: int, samples_per_cycle: float) -> int:
    cycles = n_samples / samples_per_cycle
    k = round(cycles)
    if k < 1 or abs(cycles - k) > 1e-6:
        raise AnalysisError(f"window covers {cycles:.6g} fundamental cycles; an integer count is required")
    return k


def dft_harmonics(samples, sample_rate: float, f0: float, n_harmonics: int = DEFAULT_HARMONICS) -> Spectrum:
    """Harmonic magnitudes by direct DFT summation.

    Parameters
    ----------
    samples : array_like
        Uniformly spaced samples spanning an integer number (>= 2) of
        fundamental periods.
    sample_rate : float
        Samples per second.
    f0 : float
        Fundamental frequency in Hz.
    n_harmonics : int
        Highest harmonic index ``H``. Needs ``len(samples) >= 2H + 1``.
    """
    x = np.asarray(samples, dtype=float)
    n = len(x)
    if n_harmonics < 2:
        raise AnalysisError("need at least two harmonics")
    if n < 2 * n_harmonics + 1:
        raise AnalysisError(f"{n} samples cannot resolve {n_harmonics} harmonics")
    cycles = _cycles(n, sample_rate / f0)
    if cycles < 2:
        raise AnalysisError("window must span at least two fundamental cycles")
    k = np.arange(n)
    bins = cycles * np.arange(1, n_harmonics + 1)
    basis = np.exp(-2j * np.pi * np.outer(bins, k) / n)
    mags = np.abs(basis @ x) * (2.0 / n)
    return Spectrum(f0, mags, float(x.mean()))


def thd(spectrum: Spectrum) -> float:
    """Harmonic content relative to the fundamental, ``sqrt(sum_{n>=2} M_n^2) / M_1``."""
    fund = spectrum.harmonic(1)
    # DFT roundoff leaves ~1e-16 relative residue in empty bins
    scale = max(abs(spectrum.dc_component), float(np.max(spectrum.magnitudes)))
    if not fund > 1e-12 * scale:
        raise AnalysisError("THD is undefined for a zero fundamental")
    return float(np.sqrt(np.sum(spectrum.magnitudes[1:] ** 2)) / fund)


def rms(samples) -> float:
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise AnalysisError("RMS of an empty series")
    return float(np.sqrt(np.mean(x * x)))


@dataclass(frozen=True)
class TrackingMetrics:
    rms_error: float
    rms_error_pct: float
    peak_error: float
    settle_time: Optional[float]


def tracking_metrics(
    t: Sequence[float],
    x1: Sequence[float],
    x1_ref: Sequence[float],
    rms_V: float,
    frequency_hz: float,
    cycles: int = 2,
    start: float = 0.0,
    band: float = 0.05,
) -> TrackingMetrics:
    """Steady-state tracking error over the final ``cycles`` fundamental periods.

    ``settle_time`` is measured from ``start``: the first instant after which
    ``|x1 - x1*|`` stays below ``band`` times the reference peak. It is
    ``None`` when the trace never settles.
    """
    t = np.asarray(t, dtype=float)
    err = np.asarray(x1, dtype=float) - np.asarray(x1_ref, dtype=float)
    if t.size < 2:
        raise AnalysisError("trace too short")
    dt = t[1] - t[0]
    per_cycle = 1.0 / (frequency_hz * dt)
    n_win = int(round(cycles * per_cycle))
    if n_win > t.size or abs(n_win - cycles * per_cycle) > 1e-6:
        raise AnalysisError("trace does not hold an integer number of final cycles")
    tail = err[-n_win:]
    rms_err = rms(tail)
    rms_pct = 100.0 * rms_err / rms_V if rms_V > 0 else math.nan

    mask = t >= start - 0.5 * dt
    tt, ee = t[mask], np.abs(err[mask])
    limit = band * rms_V * math.sqrt(2.0)
    outside = np.flatnonzero(ee > limit)
    if outside.size == 0:
        settle = 0.0
    elif tt[-1] - tt[outside[-1]] < 1.0 / frequency_hz:
        # a final in-band stretch shorter than one cycle is not evidence of settling
        settle = None
    else:
        settle = float(tt[outside[-1] + 1] - tt[0])
    return TrackingMetrics(rms_err, rms_pct, float(np.max(np.abs(tail))), settle)
