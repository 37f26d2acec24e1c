"""Linear frequency response of one car-following stage.

The stage transfer (follower over leader, for position, speed or
acceleration alike) is

    G(jw) = (f_p + j w f_lead) / ((f_p - w**2) + j (w f_self - phi w**3))

Magnitude and phase are always taken from this complex value.  The phase is
continued continuously in ``w`` starting from ``G(0) = 1``, so that the
response time ``-phase / w`` is smooth along a sweep even when the phase
passes below ``-pi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularityError
from .model import LinearGains

__all__ = [
    "FrequencyResponse",
    "FrequencySweep",
    "DEFAULT_OMEGA_GRID",
    "transfer_at",
    "transfer_sweep",
    "newell_transfer",
    "string_stability_margin",
    "evaluate_rational",
]

DEFAULT_OMEGA_GRID = np.logspace(-3, 2, 2000)


@dataclass(frozen=True)
class FrequencyResponse:
    """Complex transfer value at one angular frequency.

    ``phase`` is the continuous (unwrapped) phase; it agrees with
    ``numpy.angle(value)`` modulo 2*pi.  Use :attr:`principal_phase` for the
    value folded into (-pi, pi].
    """

    omega: float
    value: complex
    phase: float

    @classmethod
    def from_value(cls, omega: float, value: complex) -> FrequencyResponse:
        return cls(float(omega), complex(value), float(np.angle(value)))

    @classmethod
    def from_polar(cls, omega: float, magnitude: float, phase: float) -> FrequencyResponse:
        return cls(float(omega), complex(magnitude * np.exp(1j * phase)), float(phase))

    @property
    def magnitude(self) -> float:
        return abs(self.value)

    @property
    def principal_phase(self) -> float:
        p = math.atan2(self.value.imag, self.value.real)
        return math.pi if p == -math.pi else p

    @property
    def response_time(self) -> float:
        return -self.phase / self.omega


@dataclass(frozen=True)
class FrequencySweep:
    """Frequency response over a sorted grid (arrays of equal length)."""

    omega: np.ndarray
    value: np.ndarray
    phase: np.ndarray

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.value)

    @property
    def response_time(self) -> np.ndarray:
        return -self.phase / self.omega

    def __len__(self):
        return len(self.omega)

    def __getitem__(self, k) -> FrequencyResponse:
        return FrequencyResponse(float(self.omega[k]), complex(self.value[k]), float(self.phase[k]))


def evaluate_rational(gains: LinearGains, s):
    """Evaluate the stage transfer at arbitrary complex ``s``."""
    s = np.asarray(s, dtype=complex)
    num = gains.f_p + gains.f_lead * s
    den = ((gains.phi * s + 1.0) * s + gains.f_self) * s + gains.f_p
    return num / den


def _denominator_roots(gains: LinearGains) -> np.ndarray:
    return np.roots([gains.phi, 1.0, gains.f_self, gains.f_p])


def _root_angle(omega, root):
    # arg(j*omega - root) on a branch that is continuous in omega
    z = 1j * omega - root
    ang = np.angle(z)
    if root.real > 0:
        ang = np.mod(ang, 2 * np.pi)
    return ang


def _continuous_phase(gains: LinearGains, omega: np.ndarray) -> np.ndarray:
    omega = np.asarray(omega, dtype=float)
    num = np.arctan2(omega * gains.f_lead, gains.f_p)
    den = np.zeros_like(omega)
    den0 = 0.0
    for r in _denominator_roots(gains):
        den = den + _root_angle(omega, r)
        den0 += float(_root_angle(0.0, r))
    # leading coefficient phi > 0 contributes nothing; G(0) = 1 fixes the branch
    shift = 2 * np.pi * round(-den0 / (2 * np.pi))
    return num - den - shift


def transfer_sweep(gains: LinearGains, omega) -> FrequencySweep:
    """Frequency response over an array of positive frequencies."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any(omega <= 0):
        raise ValueError("frequencies must be strictly positive")
    num = gains.f_p + 1j * omega * gains.f_lead
    den = (gains.f_p - omega**2) + 1j * (omega * gains.f_self - gains.phi * omega**3)
    if np.any(den == 0):
        bad = omega[den == 0][0]
        raise SingularityError(f"transfer denominator vanishes at omega={bad}")
    value = num / den
    phase = _continuous_phase(gains, omega)
    return FrequencySweep(omega, value, phase)


def transfer_at(gains: LinearGains, omega: float) -> FrequencyResponse:
    """Linear stage transfer ``G(j*omega)``.

    Raises
    ------
    ValueError
        If ``omega`` is not strictly positive.
    SingularityError
        If the denominator is exactly zero.
    """
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    return transfer_sweep(gains, [omega])[0]


def newell_transfer(displacement: float, omega: float) -> FrequencyResponse:
    """Pure time shift: unit magnitude, phase ``-omega * displacement``."""
    if not displacement > 0:
        raise ValueError(f"displacement must be positive, got {displacement}")
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    phase = -omega * displacement
    return FrequencyResponse(float(omega), complex(math.cos(phase), math.sin(phase)), phase)


def string_stability_margin(gains, omega_grid=None):
    """Largest stage magnitude over a frequency grid.

    Parameters
    ----------
    gains : LinearGains or callable
        Either linear gains, or a callable mapping an omega array to complex
        transfer values (e.g. a Newell delay).
    omega_grid : array_like, optional
        Sorted positive frequencies; defaults to :data:`DEFAULT_OMEGA_GRID`.

    Returns
    -------
    sup_magnitude, argmax_omega : float, float
        ``sup_magnitude <= 1`` means linear string stability over the band.
    """
    grid = DEFAULT_OMEGA_GRID if omega_grid is None else np.asarray(omega_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty frequency grid")
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("frequency grid must be positive and strictly increasing")
    if isinstance(gains, LinearGains):
        mag = transfer_sweep(gains, grid).magnitude
    else:
        mag = np.abs(gains(grid))
    k = int(np.argmax(mag))
    return float(mag[k]), float(grid[k])
