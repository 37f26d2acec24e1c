"""Describing function of a car-following stage with speed saturation.

The follower's speed deviation is the linear response clipped to
``[-v_e, v_free - v_e]``.  For a leader input ``A sin(theta)`` the clipped
output is projected onto ``sin`` and ``cos`` over one period; the ratio of
that first harmonic to the input gives the describing-function transfer.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import QuadratureError
from .freq import FrequencyResponse
from .model import Equilibrium

__all__ = [
    "SpeedBounds",
    "BoundaryCase",
    "FirstHarmonic",
    "ClippedSine",
    "classify_boundary_case",
    "clipped_output",
    "first_harmonic",
    "describing_transfer",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SpeedBounds:
    """Admissible band of the speed deviation; ``lower < 0 < upper``."""

    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < 0 < self.upper:
            raise ValueError(f"need lower < 0 < upper, got ({self.lower}, {self.upper})")

    @classmethod
    def from_equilibrium(cls, eq: Equilibrium) -> SpeedBounds:
        return cls(-eq.v_e, eq.v_free - eq.v_e)

    @classmethod
    def symmetric(cls, limit: float) -> SpeedBounds:
        return cls(-limit, limit)

    @property
    def is_symmetric(self) -> bool:
        return self.upper == -self.lower


class BoundaryCase(enum.Enum):
    INACTIVE = "Inactive"
    UPPER_ACTIVE = "UpperActive"
    LOWER_ACTIVE = "LowerActive"
    BOTH_ACTIVE = "BothActive"

    @property
    def active(self) -> bool:
        return self is not BoundaryCase.INACTIVE


@dataclass(frozen=True)
class FirstHarmonic:
    """Fundamental Fourier pair: ``y11 * sin(theta) + y12 * cos(theta)``."""

    y11: float
    y12: float

    @property
    def amplitude(self) -> float:
        return math.hypot(self.y11, self.y12)

    @property
    def phase(self) -> float:
        return math.atan2(self.y12, self.y11)


def classify_boundary_case(linear: FrequencyResponse, input_amplitude: float,
                           bounds: SpeedBounds) -> BoundaryCase:
    if not input_amplitude > 0:
        raise ValueError(f"input amplitude must be positive, got {input_amplitude}")
    out = linear.magnitude * input_amplitude
    up = out > bounds.upper
    low = out > -bounds.lower
    if up and low:
        return BoundaryCase.BOTH_ACTIVE
    if up:
        return BoundaryCase.UPPER_ACTIVE
    if low:
        return BoundaryCase.LOWER_ACTIVE
    return BoundaryCase.INACTIVE


@dataclass(frozen=True)
class ClippedSine:
    """Waveform ``theta -> clip(amplitude * sin(theta + shift), lower, upper)``.

    Callable on scalars or arrays.  :attr:`breakpoints` lists the phase
    angles in ``[0, 2*pi)`` where the sinusoid meets a bound, which is where
    the waveform has kinks.
    """

    amplitude: float
    shift: float
    lower: float
    upper: float

    def __call__(self, theta):
        return np.clip(self.amplitude * np.sin(np.asarray(theta) + self.shift),
                       self.lower, self.upper)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        pts = []
        if self.amplitude > self.upper:
            b = math.asin(self.upper / self.amplitude)
            pts += [b, math.pi - b]
        if self.amplitude > -self.lower:
            b = math.asin(-self.lower / self.amplitude)
            pts += [math.pi + b, _TWO_PI - b]
        return tuple(sorted((p - self.shift) % _TWO_PI for p in pts))


def clipped_output(linear: FrequencyResponse, input_amplitude: float,
                   bounds: SpeedBounds) -> ClippedSine:
    """Steady-state clipped follower speed for leader input ``A sin(theta)``."""
    if not input_amplitude > 0:
        raise ValueError(f"input amplitude must be positive, got {input_amplitude}")
    return ClippedSine(linear.magnitude * input_amplitude, linear.phase,
                       bounds.lower, bounds.upper)


def _segment_edges(wave, start):
    inner = sorted({(p - start) % _TWO_PI for p in getattr(wave, "breakpoints", ())})
    return [start] + [start + p for p in inner if 0.0 < p < _TWO_PI] + [start + _TWO_PI]


def first_harmonic(wave, reference_phase: float = 0.0, *, rel_tol: float = 1e-11) -> FirstHarmonic:
    """Project a 2*pi-periodic waveform onto ``sin`` and ``cos``.

    The integrals run over ``[reference_phase, reference_phase + 2*pi]``.
    Waveforms exposing a ``breakpoints`` attribute are integrated piecewise
    between their kinks; each piece is smooth so adaptive Gauss-Kronrod
    converges to near machine precision.

    Raises
    ------
    QuadratureError
        If the reported error estimate exceeds ``1e-9`` of the waveform scale.
    """
    edges = _segment_edges(wave, float(reference_phase))
    probe = np.linspace(edges[0], edges[-1], 64)
    scale = max(max(abs(float(wave(th))) for th in probe), 1e-300)
    tol = 1e-9 * scale
    y11 = y12 = 0.0
    err = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            for a, b in zip(edges[:-1], edges[1:]):
                if b - a <= 0.0:
                    continue
                v, e = integrate.quad(lambda th: float(wave(th)) * math.sin(th), a, b,
                                      epsabs=tol * 1e-3, epsrel=rel_tol, limit=200)
                y11 += v
                err += e
                v, e = integrate.quad(lambda th: float(wave(th)) * math.cos(th), a, b,
                                      epsabs=tol * 1e-3, epsrel=rel_tol, limit=200)
                y12 += v
                err += e
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"first-harmonic quadrature did not converge: {exc}") from exc
    if err / math.pi > tol:
        raise QuadratureError(f"quadrature error estimate {err / math.pi:.3e} exceeds {tol:.3e}")
    return FirstHarmonic(y11 / math.pi, y12 / math.pi)


def describing_transfer(linear: FrequencyResponse, input_amplitude: float,
                        bounds: SpeedBounds) -> FrequencyResponse:
    """Describing-function transfer of a stage whose output speed saturates.

    Returns ``linear`` itself when no bound is reached.  Otherwise the
    magnitude is the first-harmonic amplitude of the clipped output over
    ``input_amplitude`` and the phase is its angle against the input, put on
    the same 2*pi branch as ``linear.phase``.
    """
    case = classify_boundary_case(linear, input_amplitude, bounds)
    if case is BoundaryCase.INACTIVE:
        return linear
    fh = first_harmonic(clipped_output(linear, input_amplitude, bounds))
    # clipping moves the phase by much less than pi, so stay near the linear branch
    d = fh.phase - linear.phase
    phase = linear.phase + (d + math.pi) % _TWO_PI - math.pi
    return FrequencyResponse.from_polar(linear.omega, fh.amplitude / input_amplitude, phase)
