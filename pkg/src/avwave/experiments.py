"""Experiment runners behind the command line.

Every runner maps an :class:`ExperimentConfig` to ``{filename: csv_text}``
without touching the filesystem, so output can be written all at once and
compared byte for byte.
"""

from __future__ import annotations

import io
import itertools
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .config import CONTROLLER_KEYS, ExperimentConfig, dump_config
from .dfa import SpeedBounds, classify_boundary_case, describing_transfer
from .freq import transfer_sweep
from .model import linearize
from .platoon import OscComponent, PlatoonSpec, propagate_spectrum, stage_transfer
from .sim import fit_first_harmonic, simulate_platoon
from .wave import pair_wave_travel_time, wave_series_csv, wave_speed_series

__all__ = ["run_experiment", "FIG5_10_SWEEPS", "wave_speed_amplitudes"]

FIG5_10_SWEEPS = (
    ("k_s_per_s2", (0.2, 0.6, 1.0, 1.4)),
    ("k_v_per_s", (0.2, 0.6, 1.0, 1.4)),
    ("tau_s", (0.6, 0.8, 1.0, 1.2, 1.4)),
)


def _g(x):
    return f"{x:.9g}"


def _table(header, rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(c if isinstance(c, str) else _g(c) for c in r) + "\n")
    return buf.getvalue()


def _omega_grid(cfg):
    lo, hi, n = cfg.omega_grid
    return np.logspace(math.log10(lo), math.log10(hi), n)


def _time_grid(cfg):
    return np.linspace(*cfg.time_grid)


def _components(cfg):
    return [OscComponent.from_speed_amplitude(a, w, p)
            for a, w, p in zip(cfg.speed_amplitudes, cfg.omegas, cfg.phases)]


def _platoon(cfg, **changes):
    vehicles = cfg.vehicles()
    if changes:
        vehicles = tuple(v.replace(**changes) for v in vehicles)
    return PlatoonSpec(vehicles, cfg.equilibrium, cfg.bounds)


def _freq_rows(gains, grid, prefix=()):
    sw = transfer_sweep(gains, grid)
    return [(*prefix, w, m, p, r) for w, m, p, r in
            zip(sw.omega, sw.magnitude, sw.phase, sw.response_time)]


def frequency_response_csv(cfg):
    rows = _freq_rows(linearize(cfg.controller), _omega_grid(cfg))
    return _table(["omega", "magnitude", "phase", "response_time"], rows)


def spectrum_csv(spectra):
    rows = []
    for s in spectra:
        for m in range(s.n_components):
            rows.append((str(s.index), str(m), s.omega[m], s.amplitude[m], s.phase[m],
                         s.stage_magnitude[m], s.stage_phase[m], str(int(s.clipped[m]))))
    return _table(["vehicle", "component", "omega", "amplitude", "phase",
                   "stage_magnitude", "stage_phase", "clipped"], rows)


def _prefixed(prefix_header, prefix, csv_text):
    lines = csv_text.rstrip("\n").split("\n")
    head = ",".join(prefix_header) + "," + lines[0]
    pre = ",".join(_g(x) for x in prefix)
    return [head] + [pre + "," + ln for ln in lines[1:]]


def _join_prefixed(blocks):
    out = []
    for k, lines in enumerate(blocks):
        out += lines if k == 0 else lines[1:]
    return "\n".join(out) + "\n"


def wave_speed_amplitudes(platoon, spectra, component=0):
    """Analytic half peak-to-peak wave-speed oscillation of every pair."""
    out = []
    for i in range(1, platoon.n_followers + 1):
        stage = spectra[i].stage(component)
        dt = pair_wave_travel_time(stage)
        out.append(abs(spectra[i - 1].amplitude[component] * (1.0 - stage.magnitude)) / dt)
    return out


def _run_freq_response(cfg, workers):
    return {"frequency_response.csv": frequency_response_csv(cfg)}


def _dfa_rows(cfg, with_sim):
    eq = cfg.equilibrium
    bounds = SpeedBounds.from_equilibrium(eq)
    v_bound = min(eq.v_e, eq.v_free - eq.v_e)
    w = cfg.omegas[0]
    spec = cfg.vehicles()[0]
    g = stage_transfer(spec, w)
    rows = []
    for r in cfg.amplitude_ratios:
        amp = r * v_bound
        case = classify_boundary_case(g, amp, bounds)
        gnl = describing_transfer(g, amp, bounds)
        row = [r, amp, case.value, gnl.magnitude, gnl.phase, gnl.response_time]
        if with_sim:
            pl = PlatoonSpec((spec,), eq, bounds_enabled=True)
            tr = simulate_platoon(pl, [OscComponent.from_speed_amplitude(amp, w)], cfg.sim)
            a0, p0 = fit_first_harmonic(tr.t, tr.speed[0], w, cfg.sim.measure_periods,
                                        warmup_end=tr.warmup_end)
            a1, p1 = fit_first_harmonic(tr.t, tr.speed[1], w, cfg.sim.measure_periods,
                                        warmup_end=tr.warmup_end)
            d = p1 - p0
            d = gnl.phase + (d - gnl.phase + math.pi) % (2 * math.pi) - math.pi
            row += [a1 / a0, d]
        rows.append(row)
    header = ["ratio", "input_amplitude", "case", "magnitude", "phase", "response_time"]
    if with_sim:
        header += ["sim_magnitude", "sim_phase"]
    return header, rows


def _run_dfa(cfg, workers):
    header, rows = _dfa_rows(cfg, cfg.dfa_simulate)
    return {"describing_function.csv": _table(header, rows)}


def _run_platoon(cfg, workers):
    return {"spectrum.csv": spectrum_csv(propagate_spectrum(_platoon(cfg), _components(cfg)))}


def _wave_csv(cfg, platoon):
    spectra = propagate_spectrum(platoon, _components(cfg))
    pairs = range(1, platoon.n_followers + 1)
    return wave_series_csv(wave_speed_series(platoon, spectra, pairs, _time_grid(cfg)))


def _run_wave(cfg, workers):
    return {"wave_speed.csv": _wave_csv(cfg, _platoon(cfg))}


def _run_simulate(cfg, workers):
    tr = simulate_platoon(_platoon(cfg), _components(cfg), cfg.sim, record_every=cfg.record_every)
    return {"trajectory.csv": tr.to_csv()}


def _sweep_rows(cfg, sweep, grid, workers):
    names = [n for n, _ in sweep]
    points = list(itertools.product(*[vals for _, vals in sweep]))

    def one(point):
        spec = cfg.controller.replace(**{CONTROLLER_KEYS[n]: v for n, v in zip(names, point)})
        return _freq_rows(linearize(spec), grid, point)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(one, points))
    else:
        results = [one(p) for p in points]
    rows = sorted(itertools.chain.from_iterable(results))
    return names + ["omega", "magnitude", "phase", "response_time"], rows


def _run_sweep(cfg, workers):
    header, rows = _sweep_rows(cfg, cfg.sweep, _omega_grid(cfg), workers)
    return {"sweep.csv": _table(header, rows)}


def _run_fig4(cfg, workers):
    out = _run_freq_response(cfg, workers)
    out.update(_run_platoon(cfg, workers))
    out.update(_run_wave(cfg, workers))
    out.update(_run_simulate(cfg, workers))
    return out


def _run_fig5_10(cfg, workers):
    out = {}
    grid = _omega_grid(cfg)
    t = _time_grid(cfg)
    amp = cfg.speed_amplitudes[0]
    for name, vals in FIG5_10_SWEEPS:
        attr = CONTROLLER_KEYS[name]
        header, rows = _sweep_rows(cfg, ((name, vals),), grid, workers)
        out[f"sweep_{attr}.csv"] = _table(header, rows)
        wrows = []
        for v in vals:
            pl = PlatoonSpec((cfg.controller.replace(**{attr: v}),), cfg.equilibrium, False)
            for f in cfg.wave_frequencies_hz:
                w = 2 * math.pi * f
                spectra = propagate_spectrum(pl, [OscComponent.from_speed_amplitude(amp, w)])
                for s in wave_speed_series(pl, spectra, [1], t):
                    if "traditional" not in s.flags:
                        wrows.append((v, f, s.emission_time, s.speed))
        out[f"wave_{attr}.csv"] = _table([name, "frequency_hz", "emission_time", "speed"], wrows)
    return out


def _run_fig11(cfg, workers):
    name, vals = cfg.sweep[0] if cfg.sweep else ("k_v_per_s", (0.2, 1.0))
    attr = CONTROLLER_KEYS[name]
    blocks = []
    amp_rows = []
    for v in vals:
        pl = _platoon(cfg, **{attr: v})
        spectra = propagate_spectrum(pl, _components(cfg))
        samples = wave_speed_series(pl, spectra, range(1, pl.n_followers + 1), _time_grid(cfg))
        blocks.append(_prefixed([name], [v], wave_series_csv(samples)))
        for i, a in enumerate(wave_speed_amplitudes(pl, spectra), start=1):
            amp_rows.append((v, str(i), spectra[i].stage_magnitude[0], a))
    return {"wave_speed.csv": _join_prefixed(blocks),
            "wave_amplitude.csv": _table([name, "pair", "stage_magnitude", "wave_speed_amplitude"],
                                         amp_rows)}


def _run_fig12(cfg, workers):
    header, rows = _dfa_rows(cfg, cfg.dfa_simulate)
    v_bound = min(cfg.equilibrium.v_e, cfg.equilibrium.v_free - cfg.equilibrium.v_e)
    blocks = []
    for r in cfg.amplitude_ratios:
        pl = PlatoonSpec(cfg.vehicles(), cfg.equilibrium, bounds_enabled=True)
        comp = [OscComponent.from_speed_amplitude(r * v_bound, cfg.omegas[0])]
        spectra = propagate_spectrum(pl, comp)
        samples = wave_speed_series(pl, spectra, range(1, pl.n_followers + 1), _time_grid(cfg))
        blocks.append(_prefixed(["ratio"], [r], wave_series_csv(samples)))
    return {"describing_function.csv": _table(header, rows),
            "wave_speed.csv": _join_prefixed(blocks)}


RUNNERS = {
    "freq-response": _run_freq_response,
    "dfa": _run_dfa,
    "platoon": _run_platoon,
    "wave": _run_wave,
    "simulate": _run_simulate,
    "sweep": _run_sweep,
    "fig4": _run_fig4,
    "fig5-10": _run_fig5_10,
    "fig11": _run_fig11,
    "fig12": _run_fig12,
}


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> dict[str, str]:
    """Run ``cfg`` and return ``{filename: text}``, including a ``config.ini`` echo."""
    out = RUNNERS[cfg.kind](cfg, workers)
    out["config.ini"] = dump_config(cfg)
    return out
