import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_solenoidal
from lpns import cli
from lpns.config import RunConfig, build_config, load_config
from lpns.driver import analyze_directory, new_ledger, run
from lpns.io import (
    HEADER_SIZE,
    ConfigError,
    SnapshotError,
    list_snapshots,
    parse_config_text,
    read_key_values,
    read_snapshot,
    snapshot_name,
    snapshot_size,
    write_snapshot,
)
from lpns.report import CRITERIA_COLUMNS, read_csv, time_series_columns, write_report
from lpns.scenarios import RNG_NAME, counter_uniform, ic_random_spectrum, splitmix64
from lpns.solver import SolverState
from lpns.spectral import energy, make_grid


def small_cfg(tmp_path, **kw):
    base = dict(n=8, t_end=0.02, dt=2e-3, sample_every=2, out_dir=str(tmp_path / "out"))
    base.update(kw)
    return RunConfig(**base).validate()


# -- snapshots ---------------------------------------------------------------


def test_snapshot_size():
    assert HEADER_SIZE == 44
    assert snapshot_size(32) == 44 + 3 * 32**3 * 16 == 1572908
    assert snapshot_size(8) == 44 + 3 * 512 * 16


def test_snapshot_roundtrip(tmp_path, grid8):
    u = random_solenoidal(grid8, 2)
    path = write_snapshot(tmp_path / snapshot_name(12), SolverState(u, 0.375, 0.5, 12))
    assert path.name == "snap_00000012.lpns"
    assert path.stat().st_size == snapshot_size(8)
    back = read_snapshot(path)
    assert back.t == 0.375 and back.nu == 0.5 and back.u.grid.n == 8
    assert back.u.coeffs.tobytes() == u.coeffs.tobytes()
    assert not list(tmp_path.glob("*.part"))


def test_snapshot_errors(tmp_path, grid8):
    path = write_snapshot(tmp_path / "s.lpns", SolverState(random_solenoidal(grid8, 1), 0.0, 1.0))
    data = path.read_bytes()
    bad = tmp_path / "bad.lpns"
    bad.write_bytes(data[:-16])
    with pytest.raises(SnapshotError, match="payload"):
        read_snapshot(bad)
    bad.write_bytes(b"XXXX" + data[4:])
    with pytest.raises(SnapshotError, match="magic"):
        read_snapshot(bad)
    bad.write_bytes(data[:4] + struct.pack("<I", 7) + data[8:])
    with pytest.raises(SnapshotError, match="version"):
        read_snapshot(bad)
    bad.write_bytes(data[:10])
    with pytest.raises(SnapshotError, match="header"):
        read_snapshot(bad)
    with pytest.raises(SnapshotError):
        list_snapshots(tmp_path / "missing")


# -- random initial data ---------------------------------------------------


def test_counter_rng_is_pure():
    a = counter_uniform(5, np.arange(10, dtype=np.uint64), 0)
    b = counter_uniform(5, np.arange(10, dtype=np.uint64), 0)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, counter_uniform(6, np.arange(10, dtype=np.uint64), 0))
    assert np.all((a >= 0) & (a < 1))
    # reference value of the SplitMix64 finalizer for input 0
    assert int(splitmix64(0)) == 0xE220A8397B1DCDAF
    assert RNG_NAME == "splitmix64-counter"


def test_random_field_grid_independent():
    u16 = ic_random_spectrum(make_grid(16), 3, -5 / 3, 2.0)
    u32 = ic_random_spectrum(make_grid(32), 3, -5 / 3, 2.0)
    # modes with |k| <= 5 exist on both grids with the same raw draws
    k = make_grid(16).wavenumbers
    idx16 = np.ix_(range(3), *(np.flatnonzero(np.abs(k) <= 5),) * 3)
    idx32 = np.ix_(range(3), *((k[np.abs(k) <= 5]) % 32,) * 3)
    a, b = u16.coeffs[idx16], u32.coeffs[idx32]
    # both normalised to unit energy; the tails differ so compare shapes only
    assert np.abs(a / np.abs(a).max() - b / np.abs(b).max()).max() < 1e-3
    assert energy(u16) == pytest.approx(1.0) and energy(u32) == pytest.approx(1.0)


def test_random_field_rejects_peak():
    with pytest.raises(ValueError):
        ic_random_spectrum(make_grid(8), 0, -5 / 3, 3.0)


# -- configuration ---------------------------------------------------------


def test_config_text_parsing():
    vals = parse_config_text("# comment\nn = 16  # trailing\nt-end=0.5\n\n")
    assert vals == {"n": "16", "t_end": "0.5"}
    with pytest.raises(ConfigError):
        parse_config_text("n 16")


def test_config_defaults_and_validation():
    cfg = build_config()
    assert cfg.q_max == 3 and cfg.monitored_p == (0, 1, 2)
    assert cfg.c_bkm_value == 16.0
    with pytest.raises(ConfigError):
        build_config({"n": "12"})
    with pytest.raises(ConfigError):
        build_config({"bogus": "1"})
    with pytest.raises(ConfigError):
        build_config({"m": "3.5"})
    with pytest.raises(ConfigError):
        build_config({"sample_every": "40"})  # too coarse for the top window
    with pytest.raises(ConfigError):
        build_config({"nu": "x"})


@given(
    st.one_of(st.none(), st.integers(1, 3)),
    st.one_of(st.none(), st.integers(1, 3)),
)
def test_config_precedence(file_every, flag_every):
    file_values = {} if file_every is None else {"sample_every": str(file_every)}
    cfg = build_config(file_values, {"sample_every": flag_every})
    expect = flag_every if flag_every is not None else (file_every if file_every is not None else 2)
    assert cfg.sample_every == expect


def test_config_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("n = 8\nic = taylor-green\nm = 2, 2.5\ngraded = yes\n")
    cfg = load_config(p, {"nu": 0.5})
    assert cfg.n == 8 and cfg.ic == "taylor-green" and cfg.m == (2.0, 2.5) and cfg.graded and cfg.nu == 0.5


def test_graded_stride():
    cfg = RunConfig(n=16, t_end=1.0, dt=1e-3, sample_every=16, graded=True)
    assert cfg.sample_stride(0.0) == 16
    assert cfg.sample_stride(1.0 - 0.02) == 2
    assert cfg.sample_stride(1.0 - 0.004) == 1


# -- run / report ----------------------------------------------------------


def test_report_columns(tmp_path):
    cfg = small_cfg(tmp_path)
    res = run(cfg, snapshots=False)
    assert len(res.ledger) == 6  # t = 0, 0.004, ..., 0.02
    ts, cr, meta = write_report(res.ledger, tmp_path, cfg.items())
    header, rows = read_csv(ts)
    assert header == time_series_columns(cfg.monitored_p)
    assert len(header) == 5 + 5 * len(cfg.monitored_p)
    assert len(rows) == 6
    header, rows = read_csv(cr)
    assert tuple(header) == CRITERIA_COLUMNS
    assert len(rows) == len(cfg.monitored_p) + 1 and rows[-1][0] == "alpha_fit"
    m = read_key_values(meta)
    assert m["rng"] == RNG_NAME and m["monitored_p"] == "0,1"
    assert float(m["t_ref"]) == pytest.approx(0.02)


def test_run_is_deterministic(tmp_path):
    a = run(small_cfg(tmp_path, seed=4), snapshots=False)
    b = run(small_cfg(tmp_path, seed=4), snapshots=False)
    assert np.array_equal(a.state.u.coeffs, b.state.u.coeffs)
    write_report(a.ledger, tmp_path / "a")
    write_report(b.ledger, tmp_path / "b")
    for name in ("time_series.csv", "criteria.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_empty_ledger_report(tmp_path):
    ledger = new_ledger(RunConfig(n=8))
    ts, cr, _ = write_report(ledger, tmp_path)
    assert ts.read_text().count("\n") == 1
    assert cr.read_text().count("\n") == 1


def test_zero_length_run(tmp_path):
    cfg = small_cfg(tmp_path, t_end=0.0)
    res = run(cfg)
    assert res.state.t == 0.0 and len(res.ledger) == 1 and len(res.snapshots) == 1


def test_snapshots_reanalysed(tmp_path):
    cfg = small_cfg(tmp_path, ic="taylor-green")
    res = run(cfg)
    assert len(res.snapshots) == len(res.ledger)
    led = analyze_directory(tmp_path / "out" / "snapshots", cfg.monitored_p, cfg.b, cfg.c_bkm_value, cfg.m)
    assert np.allclose(led.times, res.ledger.times, rtol=0, atol=1e-15)
    assert np.array_equal(led.series("band_e", 0), res.ledger.series("band_e", 0))


def test_cfl_mode_reaches_end(tmp_path):
    cfg = small_cfg(tmp_path, cfl=0.3)
    res = run(cfg, snapshots=False)
    assert res.state.t == pytest.approx(0.02, abs=1e-12)


# -- command line ------------------------------------------------------------


def test_cli_run_and_analyze(tmp_path, capsys):
    out = tmp_path / "run"
    code = cli.main(["run", "--n", "8", "--t-end", "0.02", "--ic", "taylor-green", "--out-dir", str(out), "--no-figures"])
    assert code == 0
    for name in ("time_series.csv", "criteria.csv", "run_meta.txt"):
        assert (out / name).is_file()
    assert len(list((out / "snapshots").glob("*.lpns"))) == 6
    re = tmp_path / "re"
    code = cli.main(["analyze", "--snapshots", str(out / "snapshots"), "--out-dir", str(re), "--no-figures"])
    assert code == 0
    assert (re / "criteria.csv").read_bytes() == (out / "criteria.csv").read_bytes()


def test_cli_figures(tmp_path):
    out = tmp_path / "fig"
    assert cli.main(["run", "--n", "8", "--t-end", "0.02", "--out-dir", str(out), "--no-snapshots"]) == 0
    for name in ("time_series.png", "leray_monitor.png", "criteria.png"):
        assert (out / name).stat().st_size > 0


def test_cli_exit_codes(tmp_path, capsys):
    assert cli.main([]) == 1
    assert cli.main(["run", "--bogus"]) == 1
    assert cli.main(["run", "--n", "12", "--out-dir", str(tmp_path)]) == 1
    assert cli.main(["run", "--m", "4", "--out-dir", str(tmp_path)]) == 1
    assert cli.main(["analyze", "--snapshots", str(tmp_path / "none"), "--out-dir", str(tmp_path / "x")]) == 3
    bad = tmp_path / "snaps"
    bad.mkdir()
    (bad / "snap_00000000.lpns").write_bytes(b"garbage")
    assert cli.main(["analyze", "--snapshots", str(bad), "--out-dir", str(tmp_path / "y")]) == 3
    err = capsys.readouterr().err
    assert "I/O error" in err


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_cli_numeric_failure(tmp_path, capsys):
    out = tmp_path / "blow"
    args = ["run", "--n", "8", "--nu", "1e-6", "--amplitude", "1e200", "--dt", "0.01", "--t-end", "0.1"]
    args += ["--sample-every", "1", "--p-max", "0", "--out-dir", str(out), "--no-figures"]
    assert cli.main(args) == 2
    assert (out / "criteria.csv").is_file()
    assert read_key_values(out / "run_meta.txt")["status"] == "aborted"
    assert list((out / "snapshots").glob("*.lpns"))


def test_cli_verify(capsys):
    assert cli.main(["verify", "--n", "8"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 9
