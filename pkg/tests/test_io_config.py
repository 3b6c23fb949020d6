import json

import numpy as np
import pytest

from primeq.cli import cli_main
from primeq.config import ConfigError, load_config
from primeq.diagnostics import records_for_states, records_to_csv
from primeq.grid import Grid, PhysParams
from primeq.snapshots import read_snapshot, write_snapshot
from primeq.solver import Caches, Forcing, State
from primeq.testfields import random_smooth_state

GRID = Grid(8, 8, 4)


def _state(seed=0):
    rng = np.random.default_rng(seed)
    v, tau, sigma = random_smooth_state(GRID, rng)
    st = State.initial(v, tau, sigma)
    return State(0.75, st.v, st.tau, st.sigma, st.pi_s)


def test_snapshot_roundtrip_bit_exact(tmp_path):
    path = tmp_path / "state.snap"
    state = _state()
    params = PhysParams(alpha=2.0, beta_tau=0.5, beta_sigma=1.5)
    write_snapshot(path, state, params)
    back, params2 = read_snapshot(path)
    assert params2 == params
    assert back.t == state.t
    for a, b in ((back.v.v1, state.v.v1), (back.v.v2, state.v.v2),
                 (back.tau, state.tau), (back.sigma, state.sigma)):
        assert np.array_equal(a.values, b.values)


def test_snapshot_rejects_truncation_and_garbage(tmp_path):
    path = tmp_path / "state.snap"
    write_snapshot(path, _state(), PhysParams())
    blob = path.read_bytes()
    (tmp_path / "short.snap").write_bytes(blob[:-8])
    with pytest.raises(ValueError):
        read_snapshot(tmp_path / "short.snap")
    (tmp_path / "bad.snap").write_bytes(b"NOTMAGIC" + blob[8:])
    with pytest.raises(ValueError):
        read_snapshot(tmp_path / "bad.snap")


def test_csv_deterministic_and_schema():
    caches = Caches.build(GRID, PhysParams())
    states = [_state(0)]
    recs1 = records_for_states(states, Forcing.zero(), caches)
    recs2 = records_for_states(states, Forcing.zero(), caches)
    text1, text2 = records_to_csv(recs1), records_to_csv(recs2)
    assert text1 == text2
    header = text1.splitlines()[0]
    assert header == ("t,E_v,E_tau,E_sigma,D_v,D_zeta,robin_term,mean_sigma,"
                      "dtv_norm,lapv_norm,gradpi_norm,energy_residual")


def test_config_defaults():
    cfg = load_config()
    assert (cfg.nx, cfg.ny, cfg.nz) == (32, 32, 16)
    assert cfg.h == 1.0 and cfg.alpha == 1.0
    assert cfg.dt == 1e-3 and cfg.scheme == "imex"


def test_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"grid": {"nx": 16, "resolution": 3}}))
    with pytest.raises(ConfigError, match="unknown key"):
        load_config(path)
    path.write_text(json.dumps({"mesh": {}}))
    with pytest.raises(ConfigError, match="unknown section"):
        load_config(path)


def test_config_overrides():
    cfg = load_config(None, ["grid.nx=64", "time.dt=1e-4",
                             "time.scheme=picard"])
    assert cfg.nx == 64 and cfg.dt == 1e-4 and cfg.scheme == "picard"
    with pytest.raises(ConfigError):
        load_config(None, ["grid.nx"])
    with pytest.raises(ConfigError):
        load_config(None, ["nx=64"])


def test_config_validates_positivity():
    with pytest.raises(ConfigError):
        load_config(None, ["grid.h=-1"])
    with pytest.raises(ConfigError):
        load_config(None, ["time.scheme=leapfrog"])


def test_cli_malformed_config_exits_2(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{ not json")
    code = cli_main(["--config", str(path), "verify"])
    assert code == 2
    assert "configuration error" in capsys.readouterr().err


def test_cli_classify_runs(capsys):
    code = cli_main(["--set", "grid.nx=8", "--set", "grid.ny=8",
                     "--set", "grid.nz=4", "classify"])
    assert code == 0
    out = capsys.readouterr().out
    assert "velocity band" in out


def test_cli_simulate_writes_outputs(tmp_path, capsys):
    csv = tmp_path / "diag.csv"
    snap = tmp_path / "final.snap"
    code = cli_main(["--set", "grid.nx=8", "--set", "grid.ny=8",
                     "--set", "grid.nz=4", "--set", "time.t_end=0.005",
                     "--set", f"output.csv={csv}",
                     "--set", f"output.snapshot={snap}", "simulate"])
    assert code == 0
    assert csv.exists() and snap.exists()
    state, params = read_snapshot(snap)
    assert state.t == pytest.approx(0.005)
    # the snapshot restarts cleanly
    code = cli_main(["--set", "grid.nx=8", "--set", "grid.ny=8",
                     "--set", "grid.nz=4", "--set", "time.t_end=0.001",
                     "--set", f"initial.snapshot={snap}", "simulate"])
    assert code == 0


def test_cli_snapshot_grid_mismatch_exits_2(tmp_path):
    snap = tmp_path / "final.snap"
    write_snapshot(snap, _state(), PhysParams())
    code = cli_main(["--set", "grid.nx=16", "--set", "grid.ny=16",
                     "--set", "grid.nz=4",
                     "--set", f"initial.snapshot={snap}", "simulate"])
    assert code == 2
