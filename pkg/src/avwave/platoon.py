"""Oscillation spectra propagated through a string of followers.

Vehicle 0 is the leader; vehicles ``1..N`` follow in order.  A leader
position oscillation ``sum_m A_m sin(w_m t + phi_m)`` reaches vehicle ``i``
with amplitude ``A_m * prod_{h<=i} |G_h(w_m)|`` and phase
``phi_m + sum_{h<=i} angle G_h(w_m)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dfa import SpeedBounds, classify_boundary_case, describing_transfer
from .errors import AvwaveError, NoCrossoverError
from .freq import FrequencyResponse, newell_transfer, transfer_at
from .model import ControllerSpec, Equilibrium, NewellSpec, equilibrium_spacing, linearize

__all__ = [
    "OscComponent",
    "PlatoonSpec",
    "VehicleSpectrum",
    "stage_transfer",
    "propagate_spectrum",
    "analytic_position",
    "analytic_speed",
    "analytic_acceleration",
    "predominant_component",
    "crossover_index",
]


@dataclass(frozen=True)
class OscComponent:
    """One sinusoidal component of the leader's position oscillation."""

    amplitude: float
    omega: float
    phase0: float = 0.0

    def __post_init__(self):
        if not self.amplitude >= 0:
            raise ValueError(f"amplitude must be non-negative, got {self.amplitude}")
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")

    @classmethod
    def from_speed_amplitude(cls, speed_amplitude: float, omega: float,
                             phase0: float = 0.0) -> OscComponent:
        """Build a component from the amplitude of its speed oscillation."""
        return cls(speed_amplitude / omega, omega, phase0)

    @property
    def speed_amplitude(self) -> float:
        return self.amplitude * self.omega


@dataclass(frozen=True)
class PlatoonSpec:
    """Ordered followers sharing one equilibrium.

    ``vehicles[0]`` is vehicle 1 (the first follower); the leader carries
    no controller.
    """

    vehicles: tuple
    equilibrium: Equilibrium = field(default_factory=Equilibrium)
    bounds_enabled: bool = False

    def __post_init__(self):
        object.__setattr__(self, "vehicles", tuple(self.vehicles))
        if not self.vehicles:
            raise ValueError("platoon needs at least one follower")
        for k, v in enumerate(self.vehicles, start=1):
            if not isinstance(v, (ControllerSpec, NewellSpec)):
                raise TypeError(f"vehicle {k}: unsupported spec {type(v).__name__}")

    @classmethod
    def homogeneous(cls, spec, n_followers: int, equilibrium: Equilibrium | None = None,
                    bounds_enabled: bool = False) -> PlatoonSpec:
        return cls((spec,) * n_followers, equilibrium or Equilibrium(), bounds_enabled)

    @property
    def n_followers(self) -> int:
        return len(self.vehicles)

    @property
    def speed_bounds(self) -> SpeedBounds:
        return SpeedBounds.from_equilibrium(self.equilibrium)

    def vehicle(self, i: int):
        """Controller of vehicle ``i`` (``i >= 1``)."""
        if not 1 <= i <= self.n_followers:
            raise IndexError(f"vehicle index {i} outside 1..{self.n_followers}")
        return self.vehicles[i - 1]

    def spacing(self, i: int) -> float:
        """Equilibrium spacing between vehicles ``i - 1`` and ``i``."""
        return equilibrium_spacing(self.vehicle(i), self.equilibrium.v_e)

    def cumulative_spacing(self, i: int) -> float:
        return math.fsum(self.spacing(h) for h in range(1, i + 1))


@dataclass(frozen=True)
class VehicleSpectrum:
    """Oscillation of one vehicle, one entry per input component.

    ``stage_magnitude`` / ``stage_phase`` describe the transfer from vehicle
    ``index - 1`` into this vehicle (1 and 0 for the leader).  ``clipped``
    marks components whose stage hit a speed bound; ``approximate`` is set
    when clipping happened with more than one component, where per-component
    superposition is only an approximation.
    """

    index: int
    omega: np.ndarray
    phase0: np.ndarray
    amplitude: np.ndarray
    phase: np.ndarray
    stage_magnitude: np.ndarray
    stage_phase: np.ndarray
    clipped: np.ndarray
    approximate: bool = False

    @property
    def n_components(self) -> int:
        return len(self.omega)

    @property
    def bounds_active(self) -> bool:
        return bool(np.any(self.clipped))

    def stage(self, m: int) -> FrequencyResponse:
        return FrequencyResponse.from_polar(self.omega[m], self.stage_magnitude[m],
                                            self.stage_phase[m])


def stage_transfer(spec, omega: float) -> FrequencyResponse:
    """Linear transfer of one follower at ``omega``."""
    if isinstance(spec, NewellSpec):
        return newell_transfer(spec.tau, omega)
    return transfer_at(linearize(spec), omega)


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def propagate_spectrum(platoon: PlatoonSpec, components) -> list[VehicleSpectrum]:
    """Spectrum of every vehicle ``0..N`` for the given leader oscillation.

    With ``platoon.bounds_enabled`` each stage uses the describing function
    evaluated at the speed amplitude arriving from its predecessor;
    otherwise the linear transfer.
    """
    components = list(components)
    if not components:
        raise ValueError("need at least one oscillation component")
    omega = np.array([c.omega for c in components], dtype=float)
    if len(np.unique(omega)) != len(omega):
        raise ValueError("oscillation components must have distinct frequencies")
    phase0 = np.array([c.phase0 for c in components], dtype=float)
    amp = np.array([c.amplitude for c in components], dtype=float)
    phase = phase0.copy()
    M = len(components)

    spectra = [VehicleSpectrum(0, _frozen(omega), _frozen(phase0), _frozen(amp), _frozen(phase),
                               _frozen(np.ones(M)), _frozen(np.zeros(M)),
                               _frozen(np.zeros(M, bool), bool))]
    bounds = platoon.speed_bounds if platoon.bounds_enabled else None
    any_clipped = False
    for i, spec in enumerate(platoon.vehicles, start=1):
        mag = np.empty(M)
        ph = np.empty(M)
        clipped = np.zeros(M, bool)
        for m in range(M):
            try:
                g = stage_transfer(spec, omega[m])
                if bounds is not None and amp[m] > 0:
                    speed_in = amp[m] * omega[m]
                    if classify_boundary_case(g, speed_in, bounds).active:
                        clipped[m] = True
                        g = describing_transfer(g, speed_in, bounds)
            except AvwaveError as exc:
                raise type(exc)(f"vehicle {i}, omega={omega[m]:g}: {exc}") from exc
            mag[m] = g.magnitude
            ph[m] = g.phase
        amp = amp * mag
        phase = phase + ph
        any_clipped = any_clipped or bool(clipped.any())
        spectra.append(VehicleSpectrum(
            i, spectra[0].omega, spectra[0].phase0, _frozen(amp), _frozen(phase),
            _frozen(mag), _frozen(ph), _frozen(clipped, bool),
            approximate=any_clipped and M > 1))
    return spectra


def _oscillation(spec: VehicleSpectrum, t, order: int):
    t = np.asarray(t, dtype=float)
    out = np.zeros(np.shape(t))
    for a, w, p in zip(spec.amplitude, spec.omega, spec.phase):
        arg = w * t + p
        if order == 0:
            out = out + a * np.sin(arg)
        elif order == 1:
            out = out + a * w * np.cos(arg)
        else:
            out = out - a * w * w * np.sin(arg)
    return out if out.ndim else float(out)


def analytic_position(platoon: PlatoonSpec, spectra, i: int, t, p0_origin: float = 0.0):
    """Steady-state position of vehicle ``i`` at time(s) ``t``."""
    nominal = p0_origin - platoon.cumulative_spacing(i) + platoon.equilibrium.v_e * np.asarray(t)
    return nominal + _oscillation(spectra[i], t, 0)


def analytic_speed(platoon: PlatoonSpec, spectra, i: int, t, p0_origin: float = 0.0):
    """Time derivative of :func:`analytic_position`, term by term."""
    return platoon.equilibrium.v_e + _oscillation(spectra[i], t, 1)


def analytic_acceleration(platoon: PlatoonSpec, spectra, i: int, t, p0_origin: float = 0.0):
    return _oscillation(spectra[i], t, 2)


def predominant_component(spectrum: VehicleSpectrum) -> int:
    """Index of the largest component; ties go to the lower frequency."""
    if spectrum.n_components == 0:
        raise ValueError("empty spectrum")
    # lexsort: last key is primary
    order = np.lexsort((spectrum.omega, -spectrum.amplitude))
    return int(order[0])


def crossover_index(a_dominant: float, a_other: float, g_dominant: float, g_other: float) -> int:
    """Smallest vehicle index at which the weaker component becomes larger.

    That is the least ``i`` with ``a_other * g_other**i > a_dominant * g_dominant**i``,
    where the ``g`` are per-vehicle stage magnitudes of a homogeneous string.
    """
    if not a_dominant >= a_other > 0:
        raise ValueError("need a_dominant >= a_other > 0")
    if not g_dominant > 0:
        raise ValueError("stage magnitudes must be positive")
    if not g_other > g_dominant:
        raise NoCrossoverError("no crossover: other component never grows relative to the dominant one")

    def flipped(i):
        try:
            lhs = a_other * g_other**i
            rhs = a_dominant * g_dominant**i
        except OverflowError:
            lhs = rhs = math.inf
        if 0.0 < lhs < math.inf and 0.0 < rhs < math.inf:
            return lhs > rhs
        # powers over/underflowed: compare logarithms instead
        return (math.log(a_other) + i * math.log(g_other)
                > math.log(a_dominant) + i * math.log(g_dominant))

    i = max(math.floor(math.log(a_dominant / a_other) / math.log(g_other / g_dominant)) + 1, 0)
    while i > 0 and flipped(i - 1):
        i -= 1
    while not flipped(i):
        i += 1
    return i
