import csv
import json
import logging

import numpy as np
import pytest

from gie_lab import ExperimentGeometry, PhysicalConstants
from gie_lab.cli import EXIT_INVALID, EXIT_IO, EXIT_OK, first_crossing, main


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_witness_defaults_write_all_formats(tmp_path):
    stem = tmp_path / "w"
    assert main(["witness", "--out", str(stem)]) == EXIT_OK
    rows = read_csv(stem.with_suffix(".csv"))
    assert rows[0] == ["t", "W_N", "W_NS", "W_NSB"]
    assert len(rows) == 2001
    assert float(rows[1][0]) == 0 and float(rows[-1][0]) == 4.0
    meta = json.loads(stem.with_suffix(".json").read_text())
    assert meta["parameters"]["d"] == 450e-6
    assert meta["constants"]["G"] == 6.674e-11
    assert meta["summary"]["W_N"]["min"] < -0.05
    svg = stem.with_suffix(".svg").read_text()
    assert svg.startswith("<?xml") and "<polyline" in svg and "<metadata>" in svg


def test_witness_values_have_twelve_significant_digits(tmp_path):
    stem = tmp_path / "w"
    assert main(["witness", "--t-max", "1", "--samples", "2", "--models", "NS", "--format", "csv", "--out", str(stem)]) == 0
    rows = read_csv(stem.with_suffix(".csv"))
    assert rows[0] == ["t", "W_NS"]
    expected = 1 - np.cos(ExperimentGeometry().gamma(PhysicalConstants()) * (1 / 700e-6 - 1 / 200e-6)) ** 2
    assert rows[2][1] == f"{expected:.12g}"


def test_witness_zero_horizon(tmp_path):
    stem = tmp_path / "w"
    assert main(["witness", "--t-max", "0", "--format", "csv", "--out", str(stem)]) == 0
    assert read_csv(stem.with_suffix(".csv"))[1:] == [["0", "0", "0", "0"]]


def test_witness_rejects_bad_geometry(tmp_path, capsys):
    assert main(["witness", "--d", "1e-4", "--delta", "2e-4", "--out", str(tmp_path / "w")]) == EXIT_INVALID
    assert "d > delta" in capsys.readouterr().err
    assert main(["witness", "--models", "X"]) == EXIT_INVALID
    assert main(["witness", "--t-max", "-1"]) == EXIT_INVALID


def test_witness_unwritable_target(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["witness", "--out", str(blocker / "sub" / "w")]) == EXIT_IO


def test_outputs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a" / "w", tmp_path / "b" / "w"
    main(["witness", "--out", str(a)])
    main(["witness", "--out", str(b)])
    assert a.with_suffix(".csv").read_bytes() == b.with_suffix(".csv").read_bytes()
    assert a.with_suffix(".svg").read_bytes().replace(str(a).encode(), b"") == b.with_suffix(".svg").read_bytes().replace(
        str(b).encode(), b""
    )
    main(["witness", "--out", str(a)])
    first = a.with_suffix(".json").read_bytes()
    main(["witness", "--out", str(a)])
    assert a.with_suffix(".json").read_bytes() == first
    assert b"\r\n" not in first


def test_sweep_flags_invalid_rows(tmp_path):
    stem = tmp_path / "s"
    assert main(["sweep", "--var", "delta", "--start", "100e-6", "--stop", "500e-6", "--num", "5", "--out", str(stem)]) == 0
    rows = read_csv(stem.with_suffix(".csv"))
    assert rows[0][0] == "delta" and rows[0][2] == "status"
    status = [r[2] for r in rows[1:]]
    assert status == ["ok", "ok", "ok", "ok", "invalid"]
    assert json.loads(stem.with_suffix(".json").read_text())["invalid_rows"] == 1


def test_sweep_num_zero_is_invalid(tmp_path):
    assert main(["sweep", "--var", "d", "--start", "1e-3", "--stop", "2e-3", "--num", "0", "--out", str(tmp_path / "s")]) == 2
    assert main(["sweep", "--var", "d", "--start", "0", "--stop", "2e-3", "--spacing", "log", "--out", str(tmp_path / "s")]) == 2


def test_sweep_crossing_time_falls_with_mass(tmp_path):
    stem = tmp_path / "s"
    args = ["sweep", "--var", "m", "--start", "1e-14", "--stop", "4e-14", "--num", "4", "--objective", "first-crossing"]
    assert main(args + ["--out", str(stem)]) == 0
    rows = read_csv(stem.with_suffix(".csv"))[1:]
    m = np.array([float(r[0]) for r in rows])
    tc = np.array([float(r[1]) for r in rows])
    assert np.all(np.diff(tc) < 0)
    np.testing.assert_allclose(tc * m**2, tc[0] * m[0] ** 2, rtol=1e-9)


def test_sweep_thread_count_does_not_change_output(tmp_path, monkeypatch):
    args = ["sweep", "--var", "d", "--start", "300e-6", "--stop", "900e-6", "--num", "7"]
    monkeypatch.setenv("GIE_LAB_THREADS", "1")
    main(args + ["--out", str(tmp_path / "one")])
    monkeypatch.setenv("GIE_LAB_THREADS", "4")
    main(args + ["--out", str(tmp_path / "four")])
    assert (tmp_path / "one.csv").read_bytes() == (tmp_path / "four.csv").read_bytes()


def test_first_crossing_brackets_level():
    geom, consts = ExperimentGeometry(), PhysicalConstants()
    from gie_lab.diagnostics import witness_closed_newton

    tc = first_crossing(geom, consts, -0.05, 4.0)
    assert 0 < tc < 2
    assert witness_closed_newton(geom, consts, tc) == pytest.approx(-0.05, abs=1e-12)
    assert np.isnan(first_crossing(geom, consts, -5.0, 4.0))


def test_config_file_and_flag_precedence(tmp_path, caplog):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# geometry\nt-max = 2\nsamples=3\nsamples = 5  # wins\nformat=csv\n")
    stem = tmp_path / "w"
    with caplog.at_level(logging.WARNING):
        assert main(["--config", str(cfg), "witness", "--out", str(stem)]) == 0
    assert "duplicate" in caplog.text
    rows = read_csv(stem.with_suffix(".csv"))
    assert len(rows) == 6 and float(rows[-1][0]) == 2.0
    assert main(["--config", str(cfg), "witness", "--t-max", "1", "--out", str(stem)]) == 0
    assert float(read_csv(stem.with_suffix(".csv"))[-1][0]) == 1.0


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("dd = 1\n")
    assert main(["--config", str(cfg), "witness", "--out", str(tmp_path / "w")]) == EXIT_INVALID
    err = capsys.readouterr().err
    assert "dd" in err and "t-max" in err


def test_config_empty_and_missing(tmp_path):
    cfg = tmp_path / "empty.cfg"
    cfg.write_text("")
    assert main(["--config", str(cfg), "witness", "--format", "csv", "--out", str(tmp_path / "w")]) == 0
    assert main(["--config", str(tmp_path / "nope.cfg"), "witness"]) == EXIT_IO


def test_pde_verify_frozen_phases(tmp_path, capsys):
    stem = tmp_path / "p"
    code = main(["pde-verify", "--scenario", "si-frozen-phases", "--n", "128", "--out", str(stem)])
    assert code == EXIT_OK
    verdict = json.loads(stem.with_suffix(".json").read_text())
    assert verdict["pass"] is True and verdict["scenario"] == "si-frozen-phases"
    assert read_csv(stem.with_suffix(".csv"))[0] == ["run", "t", "norm", "entropy", "X1", "X2", "energy"]
    assert "PASS" in capsys.readouterr().out


def test_pde_verify_unknown_scenario():
    assert main(["pde-verify", "--scenario", "nope"]) == EXIT_INVALID


def test_module_entry_point_version(capsys):
    assert main(["--version"]) == 0
    assert capsys.readouterr().out.strip() == "0.1.0"
