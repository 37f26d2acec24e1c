"""Exception hierarchy shared by all modules."""


class AvwaveError(Exception):
    """Base class for every error raised by :mod:`avwave`."""


class SingularityError(AvwaveError, ZeroDivisionError):
    """Transfer denominator vanishes (undamped resonance)."""


class AcausalStageError(AvwaveError, ValueError):
    """A stage has non-negative phase, i.e. the follower leads its leader."""


class QuadratureError(AvwaveError, ArithmeticError):
    """Numerical integration failed to reach the requested accuracy."""


class NoCrossoverError(AvwaveError, ValueError):
    """The weaker component can never overtake the dominant one."""


class SimulationError(AvwaveError, ArithmeticError):
    """Time integration diverged."""

    def __init__(self, message, vehicle=None, time=None):
        super().__init__(message)
        self.vehicle = vehicle
        self.time = time


class StepSizeError(AvwaveError, ValueError):
    """Integration step too coarse for the fastest time scale."""


class NoExtremaError(AvwaveError, ValueError):
    """No usable extrema in a trajectory (oscillation below noise floor)."""


class BoundsActiveError(AvwaveError, ValueError):
    """A linear-regime result was requested where saturation is active."""


class ConfigError(AvwaveError, ValueError):
    """Invalid experiment configuration."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno
