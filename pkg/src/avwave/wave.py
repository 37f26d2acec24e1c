"""Wave travel time, shifted distance, and wave speed between followers.

A wave leaves the leader at emission time ``t`` and reaches vehicle ``i``
after ``sum_{h<=i} dt_h`` with ``dt_h = -angle G_h / w``.  Because that
delay cancels the accumulated phase of the trajectories, the shifted
distance of pair ``(i-1, i)`` is

    h_i(t) = s_e,i - v_e * dt_i + A_{i-1} * (1 - |G_i|) * sin(w t + phi_0)

and the wave speed is ``W_i = h_i / dt_i`` (positive: moving upstream).
With several components, the predominant one at vehicle ``i - 1`` is used.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import AcausalStageError, BoundsActiveError
from .freq import FrequencyResponse
from .platoon import PlatoonSpec, VehicleSpectrum, predominant_component

__all__ = [
    "WaveSample",
    "pair_wave_travel_time",
    "pair_shifted_distance",
    "pair_wave_speed",
    "platoon_aggregate_wave",
    "wave_speed_series",
    "wave_series_csv",
    "neglected_fraction",
]

APPROXIMATE = "approximate"
DFA_APPROXIMATE = "dfa-approximate"
TRADITIONAL = "traditional"


@dataclass(frozen=True)
class WaveSample:
    """One wave passage over pair ``(pair - 1, pair)``."""

    pair: int
    emission_time: float
    travel_time: float
    shifted_distance: float
    speed: float
    flags: frozenset = frozenset()


def pair_wave_travel_time(stage_transfer: FrequencyResponse) -> float:
    """Per-pair delay ``-phase / omega``.

    Raises
    ------
    AcausalStageError
        If the stage phase is not negative.
    """
    if not stage_transfer.phase < 0:
        raise AcausalStageError(
            f"acausal stage: phase {stage_transfer.phase:g} >= 0 at omega={stage_transfer.omega:g}")
    return -stage_transfer.phase / stage_transfer.omega


def _pick_component(spectra, i, component):
    if component is not None:
        return component, spectra[0].n_components > 1
    if spectra[0].n_components == 1:
        return 0, False
    return predominant_component(spectra[i - 1]), True


def neglected_fraction(spectrum: VehicleSpectrum, component: int) -> float:
    """Share of total oscillation amplitude not carried by ``component``."""
    total = float(np.sum(spectrum.amplitude))
    if total == 0.0:
        return 0.0
    return 1.0 - float(spectrum.amplitude[component]) / total


def _check_pair(platoon, spectra, i):
    if not 1 <= i <= platoon.n_followers:
        raise IndexError(f"pair index {i} outside 1..{platoon.n_followers}")
    if len(spectra) != platoon.n_followers + 1:
        raise ValueError("spectra do not match the platoon length")


def _pair_terms(platoon, spectra, i, component):
    _check_pair(platoon, spectra, i)
    m, approx = _pick_component(spectra, i, component)
    stage = spectra[i].stage(m)
    dt = pair_wave_travel_time(stage)
    osc = spectra[i - 1].amplitude[m] * (1.0 - stage.magnitude)
    return m, approx, dt, osc


def pair_shifted_distance(platoon: PlatoonSpec, spectra, i: int, emission_time, component=None):
    """Shifted distance ``h`` of pair ``(i-1, i)`` for waves emitted at ``emission_time``."""
    m, _, dt, osc = _pair_terms(platoon, spectra, i, component)
    w = spectra[0].omega[m]
    p0 = spectra[0].phase0[m]
    t = np.asarray(emission_time, dtype=float)
    h = platoon.spacing(i) - platoon.equilibrium.v_e * dt + osc * np.sin(w * t + p0)
    return h if h.ndim else float(h)


def pair_wave_speed(platoon: PlatoonSpec, spectra, i: int, emission_time, component=None):
    """Wave speed ``h / dt`` of pair ``(i-1, i)``; positive means upstream."""
    m, _, dt, _ = _pair_terms(platoon, spectra, i, component)
    return pair_shifted_distance(platoon, spectra, i, emission_time, m) / dt


def platoon_aggregate_wave(platoon: PlatoonSpec, spectra, sub_range, emission_time,
                           component=None):
    """Travel time, shifted distance and mean speed across vehicles ``start..end``.

    The range ``(start, end)`` covers pairs ``start+1 .. end``.  Only valid
    in the linear regime.

    Returns
    -------
    total_travel_time, total_shifted_distance, average_speed
    """
    start, end = sub_range
    if not 0 <= start < end <= platoon.n_followers:
        raise ValueError(f"invalid vehicle range {sub_range}")
    if any(spectra[i].bounds_active for i in range(start + 1, end + 1)):
        raise BoundsActiveError("speed bounds active inside the range; aggregation needs the linear regime")
    if component is None:
        component = 0 if spectra[0].n_components == 1 else predominant_component(spectra[start])
    pairs = range(start + 1, end + 1)
    dts = [pair_wave_travel_time(spectra[i].stage(component)) for i in pairs]
    t_w = math.fsum(dts)
    w = spectra[0].omega[component]
    p0 = spectra[0].phase0[component]
    # oscillation terms telescope to A_start - A_end
    osc = spectra[start].amplitude[component] - spectra[end].amplitude[component]
    t = np.asarray(emission_time, dtype=float)
    h = (math.fsum(platoon.spacing(i) for i in pairs) - platoon.equilibrium.v_e * t_w
         + osc * np.sin(w * t + p0))
    if not h.ndim:
        h = float(h)
    return t_w, h, h / t_w


def _traditional_times(w, p0, t_lo, t_hi):
    # instants where w*t + p0 = +-pi/2 (extreme acceleration deviation)
    out = []
    for target in (0.5 * math.pi, -0.5 * math.pi):
        k0 = math.ceil((w * t_lo + p0 - target) / (2 * math.pi))
        k1 = math.floor((w * t_hi + p0 - target) / (2 * math.pi))
        out += [(target + 2 * math.pi * k - p0) / w for k in range(k0, k1 + 1)]
    return sorted(out)


def wave_speed_series(platoon: PlatoonSpec, spectra, pairs, time_grid,
                      component=None) -> list[WaveSample]:
    """Dense wave samples for each pair over a sorted grid of emission times.

    Samples at the extreme-acceleration instants of the leader inside the
    grid span are appended and flagged ``"traditional"``.
    """
    grid = np.asarray(time_grid, dtype=float)
    if grid.size and np.any(np.diff(grid) < 0):
        raise ValueError("time grid must be sorted")
    rows = []
    for i in pairs:
        m, approx, dt, _ = _pair_terms(platoon, spectra, i, component)
        flags = set()
        if approx:
            flags.add(APPROXIMATE)
        if spectra[i].clipped[m] or spectra[i].approximate:
            flags.add(DFA_APPROXIMATE)
        w = spectra[0].omega[m]
        extra = (_traditional_times(w, spectra[0].phase0[m], grid[0], grid[-1])
                 if grid.size else [])
        times = [(float(t), frozenset(flags)) for t in grid]
        times += [(t, frozenset(flags | {TRADITIONAL})) for t in extra]
        times.sort(key=lambda x: (x[0], len(x[1])))
        ts = np.array([t for t, _ in times])
        h = np.atleast_1d(pair_shifted_distance(platoon, spectra, i, ts, m))
        for (t, f), hv in zip(times, h):
            rows.append(WaveSample(i, t, dt, float(hv), float(hv) / dt, f))
    return rows


def wave_series_csv(samples) -> str:
    """Render samples as CSV ``pair,emission_time,travel_time,shifted_distance,speed,flags``."""
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["pair", "emission_time", "travel_time", "shifted_distance", "speed", "flags"])
    for s in samples:
        wr.writerow([s.pair, f"{s.emission_time:.9g}", f"{s.travel_time:.9g}",
                     f"{s.shifted_distance:.9g}", f"{s.speed:.9g}", ";".join(sorted(s.flags))])
    return buf.getvalue()
