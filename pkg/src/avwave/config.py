"""Experiment configuration: INI text with unit-suffixed keys.

Example::

    [experiment]
    kind = fig4

    [controller]
    k_s_per_s2 = 1
    tau_s = 1.2

    [input]
    speed_amplitude_mps = 15
    omega_radps = 0.5026548245743669

Arrays are comma-separated.  Per-vehicle overrides go in ``[vehicle.<i>]``
sections using the ``[controller]`` keys.  :func:`dump_config` writes the
fully resolved configuration back, and loading that text reproduces the
same run.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field

from .errors import ConfigError
from .model import ControllerSpec, Equilibrium
from .sim import SimConfig

__all__ = ["ExperimentConfig", "KINDS", "PRESETS", "load_config", "dump_config", "preset"]

KINDS = ("freq-response", "dfa", "platoon", "wave", "simulate", "sweep",
         "fig4", "fig5-10", "fig11", "fig12")

CONTROLLER_KEYS = {
    "k_s_per_s2": "k_s",
    "k_v_per_s": "k_v",
    "tau_s": "tau",
    "phi_s": "phi",
    "s_0_m": "s_0",
}

# section -> allowed keys
SCHEMA = {
    "experiment": {"kind"},
    "controller": set(CONTROLLER_KEYS),
    "equilibrium": {"v_e_mps", "v_free_mps"},
    "input": {"speed_amplitude_mps", "omega_radps", "frequency_hz", "phase_rad"},
    "platoon": {"n_followers", "bounds"},
    "sim": {"dt_s", "warmup_periods", "measure_periods", "record_every"},
    "grid": {"omega_min_radps", "omega_max_radps", "omega_points"},
    "time": {"t_start_s", "t_end_s", "t_points"},
    "sweep": {"param1", "values1", "param2", "values2", "wave_frequencies_hz"},
    "dfa": {"amplitude_ratios", "simulate"},
}

MAX_GRID_POINTS = 10**6


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "fig4"
    controller: ControllerSpec = field(default_factory=ControllerSpec)
    overrides: tuple = ()  # ((vehicle index, ControllerSpec), ...)
    equilibrium: Equilibrium = field(default_factory=Equilibrium)
    speed_amplitudes: tuple = (15.0,)
    omegas: tuple = (0.16 * math.pi,)
    phases: tuple = (0.0,)
    n_followers: int = 5
    bounds: bool = False
    sim: SimConfig = field(default_factory=SimConfig)
    record_every: int = 10
    omega_grid: tuple = (1e-3, 1e2, 2000)
    time_grid: tuple = (0.0, 25.0, 501)
    sweep: tuple = ()  # ((param key, (values...)), ...)
    wave_frequencies_hz: tuple = (0.02, 0.05, 0.1, 0.15, 0.2)
    amplitude_ratios: tuple = (0.8, 0.9, 1.0)
    dfa_simulate: bool = True

    def vehicles(self):
        over = dict(self.overrides)
        return tuple(over.get(i, self.controller) for i in range(1, self.n_followers + 1))


def _key_lines(text):
    """Map (section, key) -> 1-based line number, plus section -> line."""
    lines = {}
    section = None
    for n, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s or s[0] in "#;":
            continue
        m = re.match(r"\[(.+)\]$", s)
        if m:
            section = m.group(1).strip()
            lines.setdefault((section, None), n)
            continue
        m = re.match(r"([^=:]+)[=:]", s)
        if m and section is not None:
            lines[(section, m.group(1).strip().lower())] = n
    return lines


def _floats(raw):
    return tuple(float(x) for x in raw.split(",") if x.strip())


def _bool(raw):
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _int(raw):
    f = float(raw)
    if f != int(f):
        raise ValueError(f"not an integer: {raw!r}")
    return int(f)


def _controller(section, base, read):
    kw = {attr: read(key) for key, attr in CONTROLLER_KEYS.items() if key in section}
    return base.replace(**kw)


def load_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse and validate configuration text.

    Raises
    ------
    ConfigError
        With the offending line number where one can be attributed.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError(f"{source}: cannot parse", lineno) from exc
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigError(f"{source}: {exc.message}", exc.lineno) from exc
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"{source}: key outside any section", exc.lineno) from exc
    lines = _key_lines(text)

    for sec in cp.sections():
        base = "vehicle" if re.fullmatch(r"vehicle\.\d+", sec) else sec
        allowed = CONTROLLER_KEYS.keys() if base == "vehicle" else SCHEMA.get(base)
        if allowed is None:
            raise ConfigError(f"{source}: unknown section [{sec}]", lines.get((sec, None)))
        for key in cp[sec]:
            if key not in allowed:
                raise ConfigError(f"{source}: unknown key {key!r} in [{sec}]", lines.get((sec, key)))

    def get(sec, key, conv, default):
        if not cp.has_option(sec, key):
            return default
        raw = cp.get(sec, key)
        try:
            return conv(raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{source}: [{sec}] {key}: {exc}", lines.get((sec, key))) from exc

    def build(sec, fn):
        try:
            return fn()
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{source}: [{sec}]: {exc}", lines.get((sec, None))) from exc

    d = ExperimentConfig()
    kind = get("experiment", "kind", str.strip, d.kind)
    if kind not in KINDS:
        raise ConfigError(f"{source}: unknown experiment kind {kind!r}",
                          lines.get(("experiment", "kind")))

    ctrl = build("controller", lambda: _controller(cp["controller"], d.controller,
                                                    lambda k: get("controller", k, float, None))
                 if cp.has_section("controller") else d.controller)
    n_followers = get("platoon", "n_followers", _int, d.n_followers)
    if n_followers < 1:
        raise ConfigError(f"{source}: n_followers must be >= 1", lines.get(("platoon", "n_followers")))
    overrides = []
    for sec in cp.sections():
        m = re.fullmatch(r"vehicle\.(\d+)", sec)
        if m:
            idx = int(m.group(1))
            if not 1 <= idx <= n_followers:
                raise ConfigError(f"{source}: [{sec}] outside 1..{n_followers}", lines.get((sec, None)))
            overrides.append((idx, build(sec, lambda s=sec: _controller(
                cp[s], ctrl, lambda k: get(s, k, float, None)))))
    overrides.sort()

    eq = build("equilibrium", lambda: Equilibrium(
        get("equilibrium", "v_e_mps", float, d.equilibrium.v_e),
        get("equilibrium", "v_free_mps", float, d.equilibrium.v_free)))

    amps = get("input", "speed_amplitude_mps", _floats, d.speed_amplitudes)
    if cp.has_option("input", "omega_radps") and cp.has_option("input", "frequency_hz"):
        raise ConfigError(f"{source}: give either omega_radps or frequency_hz",
                          lines.get(("input", "frequency_hz")))
    omegas = get("input", "omega_radps", _floats, None)
    if omegas is None:
        hz = get("input", "frequency_hz", _floats, None)
        omegas = d.omegas if hz is None else tuple(2 * math.pi * f for f in hz)
    phases = get("input", "phase_rad", _floats, tuple(0.0 for _ in omegas))
    if not (len(amps) == len(omegas) == len(phases)) or not omegas:
        raise ConfigError(f"{source}: input lists must be nonempty and of equal length",
                          lines.get(("input", None)))
    if any(w <= 0 for w in omegas) or any(a < 0 for a in amps):
        raise ConfigError(f"{source}: need omega > 0 and amplitude >= 0", lines.get(("input", None)))
    if len(set(omegas)) != len(omegas):
        raise ConfigError(f"{source}: input frequencies must be distinct", lines.get(("input", None)))

    dt = get("sim", "dt_s", float, None)
    sim = build("sim", lambda: SimConfig(
        dt=dt,
        warmup_periods=get("sim", "warmup_periods", _int, d.sim.warmup_periods),
        measure_periods=get("sim", "measure_periods", _int, d.sim.measure_periods)))
    record_every = get("sim", "record_every", _int, d.record_every)
    if record_every < 1:
        raise ConfigError(f"{source}: record_every must be >= 1", lines.get(("sim", "record_every")))

    og = (get("grid", "omega_min_radps", float, d.omega_grid[0]),
          get("grid", "omega_max_radps", float, d.omega_grid[1]),
          get("grid", "omega_points", _int, d.omega_grid[2]))
    if not (0 < og[0] < og[1]) or og[2] < 2:
        raise ConfigError(f"{source}: invalid frequency grid", lines.get(("grid", None)))
    tg = (get("time", "t_start_s", float, d.time_grid[0]),
          get("time", "t_end_s", float, d.time_grid[1]),
          get("time", "t_points", _int, d.time_grid[2]))
    if not tg[0] < tg[1] or tg[2] < 2:
        raise ConfigError(f"{source}: invalid time grid", lines.get(("time", None)))

    sweep = []
    for k in ("1", "2"):
        name = get("sweep", "param" + k, str.strip, "")
        if not name:
            continue
        if name not in CONTROLLER_KEYS:
            raise ConfigError(f"{source}: cannot sweep {name!r}", lines.get(("sweep", "param" + k)))
        vals = get("sweep", "values" + k, _floats, ())
        if not vals:
            raise ConfigError(f"{source}: empty sweep range for {name}",
                              lines.get(("sweep", "values" + k), lines.get(("sweep", "param" + k))))
        for v in vals:
            build("sweep", lambda v=v: ctrl.replace(**{CONTROLLER_KEYS[name]: v}))
        sweep.append((name, vals))
    if kind == "sweep" and not sweep:
        raise ConfigError(f"{source}: sweep needs [sweep] param1/values1", lines.get(("sweep", None)))
    if len(sweep) == 2 and sweep[0][0] == sweep[1][0]:
        raise ConfigError(f"{source}: sweep parameters must differ", lines.get(("sweep", "param2")))
    npts = og[2]
    for _, vals in sweep:
        npts *= len(vals)
    if npts > MAX_GRID_POINTS:
        raise ConfigError(f"{source}: sweep grid of {npts} points exceeds {MAX_GRID_POINTS}",
                          lines.get(("sweep", None)))
    wf = get("sweep", "wave_frequencies_hz", _floats, d.wave_frequencies_hz)
    if any(f <= 0 for f in wf):
        raise ConfigError(f"{source}: wave frequencies must be positive",
                          lines.get(("sweep", "wave_frequencies_hz")))

    ratios = get("dfa", "amplitude_ratios", _floats, d.amplitude_ratios)
    if any(r <= 0 for r in ratios):
        raise ConfigError(f"{source}: amplitude ratios must be positive",
                          lines.get(("dfa", "amplitude_ratios")))

    return ExperimentConfig(
        kind=kind, controller=ctrl, overrides=tuple(overrides), equilibrium=eq,
        speed_amplitudes=amps, omegas=omegas, phases=phases, n_followers=n_followers,
        bounds=get("platoon", "bounds", _bool, d.bounds), sim=sim, record_every=record_every,
        omega_grid=og, time_grid=tg, sweep=tuple(sweep), wave_frequencies_hz=wf,
        amplitude_ratios=ratios, dfa_simulate=get("dfa", "simulate", _bool, d.dfa_simulate))


def _fmt(x):
    return repr(float(x))


def _list(xs):
    return ", ".join(_fmt(x) for x in xs)


def _controller_lines(spec):
    return [f"{key} = {_fmt(getattr(spec, attr))}" for key, attr in CONTROLLER_KEYS.items()]


def dump_config(cfg: ExperimentConfig) -> str:
    """Resolved configuration as INI text (floats in round-trip ``repr`` form)."""
    out = ["[experiment]", f"kind = {cfg.kind}", "", "[controller]"]
    out += _controller_lines(cfg.controller)
    for idx, spec in cfg.overrides:
        out += ["", f"[vehicle.{idx}]"] + _controller_lines(spec)
    out += ["", "[equilibrium]", f"v_e_mps = {_fmt(cfg.equilibrium.v_e)}",
            f"v_free_mps = {_fmt(cfg.equilibrium.v_free)}",
            "", "[input]", f"speed_amplitude_mps = {_list(cfg.speed_amplitudes)}",
            f"omega_radps = {_list(cfg.omegas)}", f"phase_rad = {_list(cfg.phases)}",
            "", "[platoon]", f"n_followers = {cfg.n_followers}",
            f"bounds = {'true' if cfg.bounds else 'false'}", "", "[sim]"]
    if cfg.sim.dt is not None:
        out.append(f"dt_s = {_fmt(cfg.sim.dt)}")
    out += [f"warmup_periods = {cfg.sim.warmup_periods}",
            f"measure_periods = {cfg.sim.measure_periods}",
            f"record_every = {cfg.record_every}",
            "", "[grid]", f"omega_min_radps = {_fmt(cfg.omega_grid[0])}",
            f"omega_max_radps = {_fmt(cfg.omega_grid[1])}", f"omega_points = {cfg.omega_grid[2]}",
            "", "[time]", f"t_start_s = {_fmt(cfg.time_grid[0])}",
            f"t_end_s = {_fmt(cfg.time_grid[1])}", f"t_points = {cfg.time_grid[2]}",
            "", "[sweep]"]
    for k, (name, vals) in enumerate(cfg.sweep, start=1):
        out += [f"param{k} = {name}", f"values{k} = {_list(vals)}"]
    out += [f"wave_frequencies_hz = {_list(cfg.wave_frequencies_hz)}",
            "", "[dfa]", f"amplitude_ratios = {_list(cfg.amplitude_ratios)}",
            f"simulate = {'true' if cfg.dfa_simulate else 'false'}", ""]
    return "\n".join(out)


PRESETS = {
    # homogeneous string, single oscillation at 0.16*pi rad/s
    "fig4": """
[experiment]
kind = fig4
[input]
speed_amplitude_mps = 15
omega_radps = 0.5026548245743669
[platoon]
n_followers = 5
[time]
t_start_s = 0
t_end_s = 25
t_points = 501
""",
    # one-at-a-time sweeps of k_s, k_v, tau around the defaults
    "fig5-10": """
[experiment]
kind = fig5-10
[input]
speed_amplitude_mps = 15
omega_radps = 0.5026548245743669
[time]
t_start_s = 0
t_end_s = 100
t_points = 1001
[grid]
omega_min_radps = 0.001
omega_max_radps = 10
omega_points = 2000
[sweep]
wave_frequencies_hz = 0.02, 0.05, 0.1, 0.15, 0.2
""",
    # five vehicles at f = 0.05 Hz, string-unstable vs string-stable k_v
    "fig11": """
[experiment]
kind = fig11
[input]
speed_amplitude_mps = 15
frequency_hz = 0.05
[platoon]
n_followers = 4
[time]
t_start_s = 0
t_end_s = 40
t_points = 801
[sweep]
param1 = k_v_per_s
values1 = 0.2, 1.0
""",
    # speed saturation: v_e = v_free - v_e = 10, tau = 0.5
    "fig12": """
[experiment]
kind = fig12
[controller]
tau_s = 0.5
[equilibrium]
v_e_mps = 10
v_free_mps = 20
[input]
speed_amplitude_mps = 10
omega_radps = 1.0
[platoon]
n_followers = 1
bounds = true
[time]
t_start_s = 0
t_end_s = 12.566370614359172
t_points = 401
[dfa]
amplitude_ratios = 0.8, 0.9, 1.0
simulate = true
""",
}


def preset(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}")
    return load_config(PRESETS[name], source=f"preset:{name}")
