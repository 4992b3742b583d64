class InverterLabError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(InverterLabError, ValueError):
    """A scenario value failed validation. ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class SimulationFault(InverterLabError, RuntimeError):
    """The closed loop produced a non-finite state or controller output."""

    def __init__(self, t: float, message: str):
        self.t = t
        super().__init__(f"t={t:.9g} s: {message}")


class AnalysisError(InverterLabError, ValueError):
    """Spectral or tracking analysis was asked for an undefined quantity."""
