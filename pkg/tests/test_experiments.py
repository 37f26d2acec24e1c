import csv
import io
from dataclasses import replace

import pytest

from avwave.config import ExperimentConfig, preset
from avwave.experiments import run_experiment


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_fig11_outputs():
    out = run_experiment(preset("fig11"))
    amp = rows(out["wave_amplitude.csv"])
    assert [r["k_v_per_s"] for r in amp] == ["0.2"] * 4 + ["1"] * 4
    speed = rows(out["wave_speed.csv"])
    assert {r["k_v_per_s"] for r in speed} == {"0.2", "1"}


def test_fig12_outputs():
    out = run_experiment(preset("fig12"))
    df = rows(out["describing_function.csv"])
    assert [r["case"] for r in df] == ["Inactive", "Inactive", "BothActive"]
    assert float(df[0]["magnitude"]) == float(df[1]["magnitude"]) > float(df[2]["magnitude"])
    flags = {r["flags"] for r in rows(out["wave_speed.csv"]) if r["ratio"] == "1"}
    assert any("dfa-approximate" in f for f in flags)


def test_wave_and_platoon_kinds():
    cfg = replace(ExperimentConfig(), kind="wave", n_followers=2)
    out = run_experiment(cfg)
    assert set(out) == {"wave_speed.csv", "config.ini"}
    out = run_experiment(replace(cfg, kind="platoon"))
    assert len(rows(out["spectrum.csv"])) == 3


def test_dfa_kind_without_simulation():
    cfg = replace(preset("fig12"), kind="dfa", dfa_simulate=False)
    header = run_experiment(cfg)["describing_function.csv"].splitlines()[0]
    assert header == "ratio,input_amplitude,case,magnitude,phase,response_time"
