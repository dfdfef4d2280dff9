import math
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from plasmawave.cli import main
from plasmawave.config import (ConfigError, ExperimentConfig, format_config,
                               load_config, parse_config)
from plasmawave.dynamics import RunConfig

REPO = Path(__file__).resolve().parents[1]

FAST_CFG = """
label = fast
seed = 7
scattering = true
num_points = 256
box_length = 40*pi
amplitude = 0.01
packet_width = 3
carrier = 1
dt = 0.2
t_final = 12
formulation = h
electric_field = true
diag_interval = 0.5
n_sob = 6
n1_sob = 5
p0 = 0.001
"""


def test_parse_round_trip():
    cfg = parse_config(FAST_CFG)
    assert cfg.label == "fast"
    assert cfg.run.box_length == 40 * math.pi
    text = format_config(cfg)
    again = parse_config(text)
    assert again == cfg


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config("label = x\nbogus_key = 3\n")


def test_bad_value_named():
    with pytest.raises(ConfigError, match="dt"):
        parse_config("dt = fast\n")


def test_unsafe_label_rejected():
    cfg = parse_config(FAST_CFG.replace("label = fast", "label = a/b"))
    with pytest.raises(ConfigError):
        cfg.validate()


def _write_cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_simulate_artifacts_and_determinism(tmp_path):
    cfgp = _write_cfg(tmp_path, FAST_CFG)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["simulate", "--config", str(cfgp), "--out", str(out1)]) == 0
    assert main(["simulate", "--config", str(cfgp), "--out", str(out2)]) == 0
    d1 = (out1 / "fast" / "diagnostics.csv").read_text().splitlines()
    d2 = (out2 / "fast" / "diagnostics.csv").read_text().splitlines()
    # identical from the header line on (the comment line carries metadata)
    assert d1[1:] == d2[1:]
    for name in ("config_echo.cfg", "checkpoint_final.epkg", "report.txt"):
        assert (out1 / "fast" / name).exists()


def test_simulate_bad_config_exit_code(tmp_path):
    cfgp = _write_cfg(tmp_path, "label = x\nnope = 1\n")
    assert main(["simulate", "--config", str(cfgp), "--out", str(tmp_path)]) == 2


def test_bundled_ep_small(tmp_path):
    rc = main(["simulate", "--config", str(REPO / "configs" / "ep_small.cfg"),
               "--out", str(tmp_path)])
    assert rc == 0
    csv = (tmp_path / "ep_small" / "diagnostics.csv").read_text().splitlines()
    assert len(csv) >= 100 + 2   # comment + header + >= 100 records
    assert (tmp_path / "ep_small" / "scattering_report.txt").exists()


def test_checkpoint_resume_matches_straight(tmp_path):
    from plasmawave.harness import read_checkpoint, write_checkpoint
    from plasmawave.dynamics import run

    cfg = parse_config(FAST_CFG).run
    half = RunConfig(**{**cfg.__dict__, "t_final": 6.0})
    res_half = run(half)
    ck = tmp_path / "half.epkg"
    write_checkpoint(ck, res_half.final_state)
    resumed = run(cfg, state=read_checkpoint(ck))
    straight = run(cfg)
    diff = np.abs(resumed.final_state.h - straight.final_state.h).max()
    assert diff <= 1e-12 * max(1.0, np.abs(straight.final_state.h).max())


def test_checkpoint_bit_exact(tmp_path):
    from plasmawave.harness import read_checkpoint, write_checkpoint
    from plasmawave.dynamics import initial_state

    cfg = parse_config(FAST_CFG).run
    st = initial_state(cfg)
    p = tmp_path / "s.epkg"
    write_checkpoint(p, st)
    back = read_checkpoint(p)
    assert np.array_equal(back.h, st.h)
    assert back.t == st.t and back.grid == st.grid


def test_verify_cli_exit_codes():
    assert main(["verify", "--suite", "symbols"]) == 0
    assert main(["verify", "--suite", "identities"]) == 0


def test_sweep_single_cell_equals_simulate(tmp_path):
    cfgp = _write_cfg(tmp_path, FAST_CFG)
    rc = main(["sweep", "--config", str(cfgp), "--out", str(tmp_path)])
    assert rc == 0
    table = (tmp_path / "fast_sweep" / "sweep_results.csv").read_text().splitlines()
    assert table[0] == "label,amplitude,carrier,packet_width,status,detector_time,decay_slope"
    assert len(table) == 2
    assert "clean" in table[1]


def test_sweep_cell_limit(tmp_path):
    cfgp = _write_cfg(tmp_path, FAST_CFG)
    amps = ",".join(str(0.001 * i) for i in range(1, 10))
    cars = ",".join(str(0.5 + 0.1 * i) for i in range(9))
    rc = main(["sweep", "--config", str(cfgp), "--amplitudes", amps,
               "--carriers", cars, "--out", str(tmp_path)])
    assert rc == 2


def test_export_plotdata(tmp_path):
    cfgp = _write_cfg(tmp_path, FAST_CFG)
    main(["simulate", "--config", str(cfgp), "--out", str(tmp_path)])
    rundir = tmp_path / "fast"
    rc = main(["export-plotdata", "--run", str(rundir)])
    assert rc == 0
    bundle = rundir / "plotdata"
    decay = (bundle / "decay_curve.csv").read_text()
    assert decay.splitlines()[0] == "t,sup_abs_h,max_grad_n"
    spec = (bundle / "spectrum_snapshot.csv").read_text()
    assert spec.splitlines()[0] == "xi,abs_spectrum"
    conv = (bundle / "scattering_convergence.csv").read_text()
    assert conv.splitlines()[0] == "t,d_corrected,d_control,band_corrected,band_control"
    assert (bundle / "annotations.txt").exists()
    # idempotent re-export
    before = {p.name: p.read_bytes() for p in bundle.iterdir()}
    assert main(["export-plotdata", "--run", str(rundir)]) == 0
    after = {p.name: p.read_bytes() for p in bundle.iterdir()}
    assert before == after


def test_export_plotdata_missing_run(tmp_path):
    assert main(["export-plotdata", "--run", str(tmp_path / "nothing")]) == 2


def test_env_output_root(tmp_path, monkeypatch):
    cfgp = _write_cfg(tmp_path, FAST_CFG)
    monkeypatch.setenv("PLASMAWAVE_OUT", str(tmp_path / "envroot"))
    assert main(["simulate", "--config", str(cfgp)]) == 0
    assert (tmp_path / "envroot" / "fast" / "diagnostics.csv").exists()
