"""CLI surface: commands, exit codes, artifact determinism, sweep resume."""

import json
import math
import subprocess
import sys

import pytest

from scatterspin.cli import config_hash, main, normalize_config
from scatterspin.errors import ConfigError


def run_cli(args, **kwargs):
    return subprocess.run(
        [sys.executable, "-m", "scatterspin.cli", *args],
        capture_output=True, text=True, **kwargs,
    )


def test_rates_command_prints_branching():
    result = run_cli(["rates"])
    assert result.returncode == 0
    assert "leak 94.5%" in result.stdout
    assert "elastic 1.6%" in result.stdout
    assert "raman 3.9%" in result.stdout


def test_ghz_zero_rates_summary():
    result = run_cli(["ghz", "--n", "8", "--j", "1.0", "--rates", "zero"])
    assert result.returncode == 0
    assert "f_total" in result.stdout
    assert "overhead      1" in result.stdout


def test_oracle_verify_passes():
    result = run_cli(["oracle-verify", "--n", "2", "--seed", "7", "--cases", "2"])
    assert result.returncode == 0
    assert "PASS" in result.stdout


def test_oracle_verify_spin_echo():
    result = run_cli(
        ["oracle-verify", "--n", "2", "--seed", "3", "--cases", "2", "--mode", "spin-echo"]
    )
    assert result.returncode == 0
    assert "PASS" in result.stdout


def test_unknown_experiment_exit_code():
    result = run_cli(["frobnicate"])
    assert result.returncode == 2


def test_missing_couplings_file_exit_code(tmp_path):
    result = run_cli(
        ["ghz", "--couplings-file", str(tmp_path / "absent.json"), "--rates", "zero"]
    )
    assert result.returncode == 3  # unreadable input surfaces as validation


def test_schema_violation_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"n": 2, "upper": [[0, 1, NaN]]}')
    result = run_cli(["ghz", "--couplings-file", str(bad), "--rates", "zero"])
    assert result.returncode == 3


def test_config_error_exit_code():
    result = run_cli(["ghz", "--rates", "zero"])  # no couplings source at all
    assert result.returncode == 2


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "couplings": {"equal": {"n": 6, "j": 1.0}},
        "rates": {"zero": True},
    }))
    out = tmp_path / "ghz.csv"
    result = run_cli(["ghz", "--config", str(cfg), "--out", str(out)])
    assert result.returncode == 0
    text = out.read_text()
    assert text.startswith("n,t_cat,")
    assert text.rstrip().splitlines()[-1].startswith("# config_hash=")


def test_hash_stable_under_field_order():
    a = normalize_config({
        "experiment": "ghz",
        "couplings": {"equal": {"n": 4, "j": 1.0}},
        "rates": {"zero": True},
    })
    b = normalize_config({
        "rates": {"zero": True},
        "couplings": {"equal": {"j": 1.0, "n": 4}},
        "experiment": "ghz",
    })
    assert config_hash(a) == config_hash(b)


def test_normalize_rejects_two_sources():
    with pytest.raises(ConfigError):
        normalize_config({
            "experiment": "ghz",
            "couplings": {"equal": {"n": 4, "j": 1.0}, "file": "x.json"},
            "rates": {"zero": True},
        })


def test_normalize_rejects_inverted_sweep():
    with pytest.raises(ConfigError):
        normalize_config({
            "experiment": "ghz",
            "couplings": {"equal": {"n": 4, "j": 1.0}},
            "rates": {"zero": True},
            "sweep": {"parameter": "n", "min": 10, "max": 4, "points": 3},
        })


def test_deterministic_output(tmp_path):
    args = ["squeezing", "--n", "8", "--j", "12566.0", "--rates", "ca",
            "--scan-min", "0.05", "--scan-max", "0.5", "--scan-points", "6"]
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli(args + ["--out", str(out1)]).returncode == 0
    assert run_cli(args + ["--out", str(out2)]).returncode == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_json_format(tmp_path):
    out = tmp_path / "ghz.json"
    result = run_cli(["ghz", "--n", "4", "--j", "1.0", "--rates", "zero",
                      "--format", "json", "--out", str(out)])
    assert result.returncode == 0
    doc = json.loads(out.read_text())
    assert doc["artifact_version"] == 1
    assert doc["rows"][0]["f_total"] == pytest.approx(1.0)
    assert "config_hash" in doc


def test_sweep_rows_and_resume(tmp_path):
    out = tmp_path / "sweep.csv"
    args = ["squeezing", "--n", "10", "--j", "12566.0", "--rates", "zero",
            "--scan-min", "0.1", "--scan-max", "0.4", "--scan-points", "4",
            "--sweep", "n:6:10:3", "--out", str(out)]
    assert run_cli(args).returncode == 0
    full = out.read_bytes()
    lines = out.read_text().splitlines()
    assert lines[0].startswith("n,")
    assert len([ln for ln in lines if not ln.startswith("#") and ln]) == 4  # header + 3 rows

    # drop the middle row; a rerun must regenerate only it and reproduce bytes
    kept = [lines[0], lines[1], lines[3], lines[-1]]
    out.write_text("\n".join(kept) + "\n")
    assert run_cli(args).returncode == 0
    assert out.read_bytes() == full


def test_sweep_parallel_jobs_match_serial(tmp_path):
    base = ["ghz", "--n", "4", "--j", "1.0", "--rates", "ca",
            "--sweep", "n:4:8:3"]
    serial, parallel = tmp_path / "s.csv", tmp_path / "p.csv"
    assert run_cli(base + ["--out", str(serial)]).returncode == 0
    assert run_cli(base + ["--out", str(parallel), "--jobs", "2"]).returncode == 0
    assert serial.read_bytes() == parallel.read_bytes()


def test_sweep_time_axis_correlations(tmp_path):
    out = tmp_path / "corr.csv"
    result = run_cli([
        "correlations", "--n", "6", "--j", "4712.0", "--rates", "ca", "--m", "1",
        "--sweep", "t:0.0002:0.001:5", "--out", str(out),
    ])
    assert result.returncode == 0
    lines = [ln for ln in out.read_text().splitlines() if ln and not ln.startswith("#")]
    assert lines[0].split(",")[:3] == ["t", "t_arm", "exact"]
    assert len(lines) == 6


def test_plot_writes_png(tmp_path):
    out = tmp_path / "sq.csv"
    result = run_cli(["squeezing", "--n", "6", "--j", "12566.0", "--rates", "zero",
                      "--scan-min", "0.1", "--scan-max", "0.5", "--scan-points", "4",
                      "--out", str(out), "--plot"])
    assert result.returncode == 0
    png = tmp_path / "sq.png"
    assert png.exists()
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_units_hz_inline():
    # the same physics expressed in Hz must match the rad/s run
    a = run_cli(["ghz", "--n", "4", "--j", "1000.0", "--rates", "zero", "--units", "hz"])
    b = run_cli(["ghz", "--n", "4", "--j", str(2 * math.pi * 1000.0), "--rates", "zero"])
    pick = lambda s: [ln for ln in s.splitlines() if ln.startswith("4,")][0]
    assert pick(a.stdout) == pick(b.stdout)


def test_main_entrypoint_in_process(tmp_path, capsys):
    rc = main(["ghz", "--n", "4", "--j", "1.0", "--rates", "zero"])
    assert rc == 0
    assert "f_total" in capsys.readouterr().out
