"""Time-domain oracle: fixed-step RK4 integration of the follower string.

Each follower obeys ``p' = v``, ``v' = a``, ``phi * a' = u - a`` with the
spacing-policy command ``u``.  The leader is not integrated; it follows its
analytic oscillatory trajectory exactly.  With bounds enabled, follower
speeds are projected onto ``[0, v_free]`` after every step and the
acceleration is zeroed in the direction that would leave the band.

States are integrated as deviations from the nominal (constant-speed)
trajectories, which keeps spacing differences free of cancellation error.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import NoExtremaError, SimulationError, StepSizeError
from .model import ControllerSpec
from .platoon import (PlatoonSpec, analytic_acceleration, analytic_position, analytic_speed,
                      propagate_spectrum)
from .wave import WaveSample

__all__ = [
    "SimConfig",
    "Trajectory",
    "simulate_platoon",
    "fit_first_harmonic",
    "empirical_wave_estimate",
    "analytic_reference",
]

BLOWUP_ACCEL = 1e3


@dataclass(frozen=True)
class SimConfig:
    """Integration settings.

    ``dt=None`` picks ``min(phi, 2*pi/omega_max) / 20``, the coarsest step
    allowed.  Durations are counted in periods of the slowest component.
    """

    dt: float | None = None
    warmup_periods: int = 10
    measure_periods: int = 4
    integrator: str = "rk4"

    def __post_init__(self):
        if self.integrator != "rk4":
            raise ValueError(f"unsupported integrator {self.integrator!r}")
        if int(self.warmup_periods) != self.warmup_periods or self.warmup_periods < 5:
            raise ValueError("warmup_periods must be an integer >= 5")
        if int(self.measure_periods) != self.measure_periods or self.measure_periods < 2:
            raise ValueError("measure_periods must be an integer >= 2")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")

    def max_step(self, platoon: PlatoonSpec, omega_max: float) -> float:
        phi = min(v.phi for v in platoon.vehicles)
        return min(phi, 2 * math.pi / omega_max) / 20.0

    def step_for(self, platoon: PlatoonSpec, omega_max: float) -> float:
        limit = self.max_step(platoon, omega_max)
        if self.dt is None:
            return limit
        if self.dt > limit * (1 + 1e-12):
            raise StepSizeError(f"dt={self.dt} exceeds the stability limit {limit:.6g}")
        return self.dt


@dataclass(frozen=True)
class Trajectory:
    """Sampled states of vehicles ``0..N``; arrays have shape ``(N+1, n)``."""

    t: np.ndarray
    position: np.ndarray
    speed: np.ndarray
    acceleration: np.ndarray
    warmup_end: float = 0.0

    @property
    def n_vehicles(self) -> int:
        return self.position.shape[0]

    @classmethod
    def from_analytic(cls, platoon: PlatoonSpec, spectra, t, p0_origin: float = 0.0,
                      warmup_end: float = 0.0) -> Trajectory:
        """Sample the closed-form steady-state trajectories."""
        t = np.asarray(t, dtype=float)
        n = platoon.n_followers + 1
        pos = np.array([analytic_position(platoon, spectra, i, t, p0_origin) for i in range(n)])
        spd = np.array([np.broadcast_to(analytic_speed(platoon, spectra, i, t), t.shape)
                        for i in range(n)])
        acc = np.array([np.broadcast_to(analytic_acceleration(platoon, spectra, i, t), t.shape)
                        for i in range(n)])
        return cls(t, pos, spd, acc, warmup_end)

    def steady(self):
        """Boolean mask of post-warmup samples."""
        return self.t >= self.warmup_end - 1e-12

    def to_csv(self, every: int = 1) -> str:
        """CSV text ``t,vehicle,position,speed,acceleration`` (9 significant digits)."""
        idx = np.arange(0, len(self.t), every)
        n = self.n_vehicles
        rows = np.empty((len(idx) * n, 5))
        rows[:, 0] = np.repeat(self.t[idx], n)
        rows[:, 1] = np.tile(np.arange(n), len(idx))
        rows[:, 2] = self.position[:, idx].T.ravel()
        rows[:, 3] = self.speed[:, idx].T.ravel()
        rows[:, 4] = self.acceleration[:, idx].T.ravel()
        buf = io.StringIO()
        buf.write("t,vehicle,position,speed,acceleration\n")
        np.savetxt(buf, rows, fmt=["%.9g", "%d", "%.9g", "%.9g", "%.9g"], delimiter=",")
        return buf.getvalue()


def _leader(components, t):
    x = np.zeros_like(t)
    y = np.zeros_like(t)
    a = np.zeros_like(t)
    for c in components:
        arg = c.omega * t + c.phase0
        s, co = np.sin(arg), np.cos(arg)
        x += c.amplitude * s
        y += c.amplitude * c.omega * co
        a -= c.amplitude * c.omega**2 * s
    return x, y, a


def simulate_platoon(platoon: PlatoonSpec, components, config: SimConfig | None = None,
                     p0_origin: float = 0.0, record_every: int = 1) -> Trajectory:
    """Integrate the platoon from equilibrium under an oscillating leader.

    Followers start at their equilibrium spacings with speed ``v_e`` and
    zero acceleration.  The run lasts ``warmup_periods + measure_periods``
    periods of the slowest component.

    Raises
    ------
    StepSizeError
        If ``config.dt`` is too coarse.
    SimulationError
        If any follower acceleration exceeds 1e3 m/s^2.
    """
    config = config or SimConfig()
    components = list(components)
    if not components:
        raise ValueError("need at least one oscillation component")
    for k, v in enumerate(platoon.vehicles, start=1):
        if not isinstance(v, ControllerSpec):
            raise TypeError(f"vehicle {k}: only ControllerSpec followers can be simulated")
    w_min = min(c.omega for c in components)
    w_max = max(c.omega for c in components)
    dt = config.step_for(platoon, w_max)
    period = 2 * math.pi / w_min
    n_steps = int(math.ceil((config.warmup_periods + config.measure_periods) * period / dt - 1e-9))
    # end on a recorded sample so the last window is complete
    n_steps = -(-n_steps // record_every) * record_every

    N = platoon.n_followers
    ks = np.array([v.k_s for v in platoon.vehicles])
    kv = np.array([v.k_v for v in platoon.vehicles])
    tau = np.array([v.tau for v in platoon.vehicles])
    inv_phi = 1.0 / np.array([v.phi for v in platoon.vehicles])
    v_e = platoon.equilibrium.v_e

    # linear part, state z = [x (N), y (N), a (N)] of deviations
    M = np.zeros((3 * N, 3 * N))
    X, Y, A = slice(0, N), slice(N, 2 * N), slice(2 * N, 3 * N)
    M[X, Y] = np.eye(N)
    M[Y, A] = np.eye(N)
    M[A, X] = np.diag(-ks * inv_phi) + np.diag(ks[1:] * inv_phi[1:], -1)
    M[A, Y] = np.diag(-(kv + ks * tau) * inv_phi) + np.diag(kv[1:] * inv_phi[1:], -1)
    M[A, A] = -np.diag(inv_phi)
    lead_x_gain = ks[0] * inv_phi[0]
    lead_y_gain = kv[0] * inv_phi[0]

    clamp = platoon.bounds_enabled
    lo, hi = -v_e, platoon.equilibrium.v_free - v_e

    t_half = (np.arange(2 * n_steps + 1)) * (0.5 * dt)
    lx, ly, la = _leader(components, t_half)
    forcing = lead_x_gain * lx + lead_y_gain * ly

    def deriv(z, f):
        dz = M @ z
        dz[2 * N] += f
        if clamp:
            y, a = z[Y], z[A]
            stuck = ((y >= hi) & (a > 0)) | ((y <= lo) & (a < 0))
            if stuck.any():
                dz[N:2 * N][stuck] = 0.0
        return dz

    n_rec = n_steps // record_every + 1
    rec = np.empty((n_rec, 3 * N))
    z = np.zeros(3 * N)
    rec[0] = z
    r = 1
    h = dt
    for n in range(n_steps):
        f0, f1, f2 = forcing[2 * n], forcing[2 * n + 1], forcing[2 * n + 2]
        k1 = deriv(z, f0)
        k2 = deriv(z + 0.5 * h * k1, f1)
        k3 = deriv(z + 0.5 * h * k2, f1)
        k4 = deriv(z + h * k3, f2)
        z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if clamp:
            y = z[Y]
            top = y > hi
            bot = y < lo
            if top.any() or bot.any():
                a = z[A]
                a[top] = np.minimum(a[top], 0.0)
                a[bot] = np.maximum(a[bot], 0.0)
                np.clip(y, lo, hi, out=y)
        amax = np.abs(z[A]).max()
        if not amax <= BLOWUP_ACCEL:
            k = int(np.argmax(np.abs(z[A]))) + 1
            raise SimulationError(f"numerical blow-up at vehicle {k}, t={(n + 1) * dt:.6g} s",
                                  vehicle=k, time=(n + 1) * dt)
        if (n + 1) % record_every == 0:
            rec[r] = z
            r += 1

    steps = np.arange(0, n_steps + 1, record_every)[:r]
    t = steps * dt
    offsets = np.concatenate(([0.0], np.cumsum([platoon.spacing(i) for i in range(1, N + 1)])))
    nominal = p0_origin - offsets[:, None] + v_e * t[None, :]
    pos = np.empty((N + 1, r))
    spd = np.empty((N + 1, r))
    acc = np.empty((N + 1, r))
    pos[0], spd[0], acc[0] = lx[2 * steps], ly[2 * steps], la[2 * steps]
    pos[1:] = rec[:r, X].T
    spd[1:] = rec[:r, Y].T
    acc[1:] = rec[:r, A].T
    return Trajectory(t, pos + nominal, spd + v_e, acc, warmup_end=config.warmup_periods * period)


def fit_first_harmonic(t, series, omega: float, periods: int, start: float | None = None,
                       warmup_end: float = 0.0, detrend: bool = False):
    """Least-squares sinusoid ``R sin(omega t + psi)`` over a whole-period window.

    The window is ``[start, start + periods * T]``; by default it is the last
    ``periods`` periods of the series.  A constant (and with ``detrend`` a
    linear trend) is fitted alongside.

    Returns
    -------
    amplitude, phase : float, float
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(series, dtype=float)
    if int(periods) != periods or periods < 1:
        raise ValueError("window must span a positive integer number of periods")
    span = periods * 2 * math.pi / omega
    eps = 1e-9 * max(1.0, abs(t[-1]))
    if start is None:
        start = t[-1] - span
    if start < warmup_end - eps:
        raise ValueError(f"window start {start:.6g} lies inside the warmup (ends {warmup_end:.6g})")
    if start < t[0] - eps or start + span > t[-1] + eps:
        raise ValueError("series too short for the requested window")
    sel = (t >= start - eps) & (t <= start + span + eps)
    ts = t[sel]
    cols = [np.sin(omega * ts), np.cos(omega * ts), np.ones_like(ts)]
    if detrend:
        cols.append(ts - ts.mean())
    coef, *_ = np.linalg.lstsq(np.column_stack(cols), y[sel], rcond=None)
    return float(math.hypot(coef[0], coef[1])), float(math.atan2(coef[1], coef[0]))


def _extrema(t, x):
    """Refined interior extrema of a sampled signal: (times, values, is_max)."""
    d0 = x[1:-1] - x[:-2]
    d1 = x[2:] - x[1:-1]
    k = np.nonzero(((d0 > 0) & (d1 <= 0)) | ((d0 < 0) & (d1 >= 0)))[0] + 1
    if k.size == 0:
        return np.empty(0), np.empty(0), np.empty(0, bool)
    ym, y0, yp = x[k - 1], x[k], x[k + 1]
    denom = ym - 2 * y0 + yp
    off = np.where(denom != 0, 0.5 * (ym - yp) / np.where(denom != 0, denom, 1), 0.0)
    h = t[1] - t[0]
    tt = t[k] + off * h
    vv = y0 - 0.25 * (ym - yp) * off
    return tt, vv, denom < 0


def empirical_wave_estimate(traj: Trajectory, pair: int, rel_floor: float = 1e-6) -> list[WaveSample]:
    """Wave samples measured at the instants of extreme acceleration.

    Every acceleration extremum of the platoon leader in the post-warmup
    window is followed downstream: at each vehicle the next extremum of the
    same kind is taken as the arrival of that wave.  For pair
    ``(pair-1, pair)`` the travel time is the difference of the arrival
    instants and the shifted distance the position drop between them.

    Raises
    ------
    NoExtremaError
        If the leader's acceleration oscillation is below the noise floor.
    """
    if not 1 <= pair < traj.n_vehicles:
        raise IndexError(f"pair {pair} outside 1..{traj.n_vehicles - 1}")
    mask = traj.steady()
    t = traj.t[mask]
    acc = traj.acceleration[:, mask]
    scale = max(1.0, float(np.max(np.abs(traj.speed[:, mask]))))
    events = []
    for i in range(pair + 1):
        tt, vv, is_max = _extrema(t, acc[i])
        swing = 0.5 * (acc[i].max() - acc[i].min())
        if swing <= rel_floor * scale:
            raise NoExtremaError(f"no extrema: vehicle {i} acceleration is flat")
        centre = 0.5 * (acc[i].max() + acc[i].min())
        keep = np.abs(vv - centre) > 0.5 * swing
        events.append((tt[keep], is_max[keep]))
    if events[0][0].size == 0:
        raise NoExtremaError("no extrema found for the leader")

    splines = [CubicHermiteSpline(t, traj.position[i, mask], traj.speed[i, mask])
               for i in (pair - 1, pair)]
    out = []
    for t0, kind in zip(*events[0]):
        chain = [t0]
        for i in range(1, pair + 1):
            ti, ki = events[i]
            later = np.nonzero((ti > chain[-1]) & (ki == kind))[0]
            if later.size == 0:
                break
            chain.append(ti[later[0]])
        if len(chain) != pair + 1:
            continue
        ta, tb = chain[-2], chain[-1]
        dist = float(splines[0](ta) - splines[1](tb))
        out.append(WaveSample(pair, float(t0), tb - ta, dist, dist / (tb - ta),
                              frozenset({"empirical", "max" if kind else "min"})))
    if not out:
        raise NoExtremaError("no complete extremum chains in the steady window")
    return out


def analytic_reference(platoon: PlatoonSpec, components, traj: Trajectory, p0_origin: float = 0.0):
    """Closed-form trajectory sampled on ``traj.t``, for oracle comparisons."""
    return Trajectory.from_analytic(platoon, propagate_spectrum(platoon, components), traj.t,
                                    p0_origin, traj.warmup_end)
