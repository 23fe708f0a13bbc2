#!/usr/bin/env python3
"""
Tests for the hydroblow command line
"""

import csv
import json
import math
from types import SimpleNamespace

import numpy as np
import pytest

from hydroblow.cli import EXIT_CONFIG, EXIT_OK, EXIT_USAGE, dispatch, main
from hydroblow.output_writer import MANIFEST_FILE, NORMS_FILE, NORMS_HEADER, VERDICTS_FILE


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


def test_no_command_is_a_usage_error():
    assert main([]) == EXIT_USAGE


def test_unknown_command_is_a_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["bogus"])
    assert info.value.code == EXIT_USAGE
    assert dispatch("bogus", SimpleNamespace()) == EXIT_USAGE


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert "hydroblow" in capsys.readouterr().out


def test_profile_table_for_smooth_branch(tmp_path):
    out = tmp_path / "profile.csv"
    assert main(["profile", "--beta", "0", "--zmax", "5", "--points", "6", "--out", str(out)]) == EXIT_OK
    rows = read_rows(out)
    assert rows[0] == ["z", "phi", "phi_prime", "psi", "residual"]
    assert len(rows) == 7
    for k, row in enumerate(rows[1:]):
        z, phi = float(row[0]), float(row[1])
        assert z == pytest.approx(float(k))
        assert phi == pytest.approx(math.exp(-z), rel=1e-15)
    assert rows[1][4] == "nan"
    assert all(abs(float(row[4])) < 1e-14 for row in rows[2:])


def test_profile_cusp_row(tmp_path):
    out = tmp_path / "profile.csv"
    assert main(["profile", "--beta", "0.5", "--zmax", "2", "--points", "3", "--out", str(out)]) == EXIT_OK
    first = read_rows(out)[1]
    assert first[1] == "1" and first[2] == "-inf"


def test_profile_rejects_negative_beta(capsys):
    assert main(["profile", "--beta", "-1"]) == EXIT_CONFIG
    assert "beta" in capsys.readouterr().err


def test_profile_rejects_single_point():
    assert main(["profile", "--beta", "0", "--points", "1"]) == EXIT_CONFIG


def test_simulate_writes_outputs(tmp_path):
    config = tmp_path / "steady.cfg"
    config.write_text("kind = steady_state\nname = cli_steady\nhorizon = 0.1\ngrid.n = 32\n", encoding="utf-8")
    out = tmp_path / "run"
    assert main(["simulate", "--config", str(config), "--out", str(out)]) == EXIT_OK
    manifest = json.loads((out / MANIFEST_FILE).read_text(encoding="utf-8"))
    assert manifest["command"] == "simulate"
    assert json.loads((out / VERDICTS_FILE).read_text(encoding="utf-8")) == []
    assert read_rows(out / NORMS_FILE)[0] == NORMS_HEADER


def test_simulate_uses_output_root(tmp_path, isolated_output):
    config = tmp_path / "steady.cfg"
    config.write_text("kind = steady_state\nname = rooted\nhorizon = 0.05\ngrid.n = 32\n", encoding="utf-8")
    assert main(["simulate", "--config", str(config)]) == EXIT_OK
    assert (isolated_output / "outputs" / "rooted" / MANIFEST_FILE).is_file()


def test_bad_config_exits_with_config_code(tmp_path, capsys):
    config = tmp_path / "bad.cfg"
    config.write_text("kind = steady_state\nwarp = 9\n", encoding="utf-8")
    assert main(["scenario", "--config", str(config)]) == EXIT_CONFIG
    assert "line 2" in capsys.readouterr().err


def test_missing_config_exits_with_config_code(tmp_path):
    assert main(["scenario", "--config", str(tmp_path / "absent.cfg")]) == EXIT_CONFIG


def test_stop_below_initial_sup_is_a_config_error(tmp_path):
    config = tmp_path / "low_stop.cfg"
    config.write_text("kind = smooth\nlambda0 = 1e-4\ngrid.n = 32\nsolver.sup_norm_stop = 10\n", encoding="utf-8")
    assert main(["simulate", "--config", str(config), "--out", str(tmp_path / "run")]) == EXIT_CONFIG


def test_fit_from_norms_csv(tmp_path):
    ts = np.linspace(0.0, 1.9, 40)
    norms = tmp_path / "norms.csv"
    lines = [",".join(NORMS_HEADER)]
    lines += [f"{float(t)!r},{float(1.0 / (2.0 - t))!r},0,0,0" for t in ts]
    norms.write_text("\n".join(lines) + "\n", encoding="utf-8")
    out = tmp_path / "fits.json"
    assert main(["fit", "--norms", str(norms), "--out", str(out)]) == EXIT_OK
    fits = json.loads(out.read_text(encoding="utf-8"))
    assert fits["T"] == pytest.approx(2.0, rel=1e-10)
    assert fits["beta_hat"] is None
