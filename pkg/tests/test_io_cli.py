from __future__ import annotations

import csv
import json
import math

import numpy as np
import pytest

from fracschrod import cli, io


def _ini(tmp_path, text):
    p = tmp_path / "run.ini"
    p.write_text(text)
    return str(p)


def _run(tmp_path, command, text="", *extra):
    out = tmp_path / "out"
    argv = [command, "--out", str(out)]
    if text:
        argv += ["--config", _ini(tmp_path, text)]
    return cli.main(argv + list(extra)), out


def test_format_value_17_digits():
    assert io.format_value(0.1) == "0.10000000000000001"
    assert io.format_value(math.inf) == "inf"
    assert io.format_value(True) == "true"
    assert float(io.format_value(1 / 3)) == 1 / 3


def test_csv_lf_and_header():
    text = io.csv_text(["a", "b"], [[1.0, "x"], {"a": 2.5, "b": "y"}])
    assert "\r" not in text
    assert text.splitlines() == ["a,b", "1,x", "2.5,y"]


def test_json_sorted_keys_and_floats():
    text = io.json_text({"b": 0.1, "a": [np.float64(2.0), math.inf], "c": np.int64(3)})
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert "0.10000000000000001" in text
    back = json.loads(text)
    assert back["a"] == [2.0, "inf"] and back["c"] == 3


def test_atomic_write_leaves_no_temp(tmp_path):
    target = tmp_path / "sub" / "f.txt"
    io.atomic_write_bytes(target, b"one")
    io.atomic_write_bytes(target, b"two")
    assert target.read_bytes() == b"two"
    assert [p.name for p in target.parent.iterdir()] == ["f.txt"]


def test_config_roundtrip():
    text = "[spec]\nalpha = 0.7\nbeta=3\n[hfunc]\nz = 0.5+1i, 2j\n"
    a = cli.RunConfig.from_text("hfunc", text)
    b = cli.RunConfig.from_text("hfunc", a.to_text())
    assert a == b and a.to_text() == b.to_text()
    assert a.complexes("hfunc", "z") == [0.5 + 1j, 2j]
    assert a.num("spec", "alpha") == 0.7


def test_config_rejects_unknown_keys():
    with pytest.raises(cli.InputError):
        cli.RunConfig.from_text("hfunc", "[spec]\ngamma = 1\n")
    with pytest.raises(cli.InputError):
        cli.RunConfig.from_text("hfunc", "[bogus]\nx = 1\n")


def test_hfunc_cli(tmp_path):
    code, out = _run(tmp_path, "hfunc", "[hfunc]\nz = 0.1i, 1i\n")
    assert code == 0
    rows = list(csv.DictReader((out / "hfunc.csv").open(newline="")))
    assert [r["method"] for r in rows] == ["series_small", "contour"]
    assert set(rows[0]) == {"z_re", "z_im", "re_H", "im_H", "method", "error_estimate"}


def test_hfunc_empty_list_and_zero(tmp_path):
    code, out = _run(tmp_path, "hfunc")
    assert code == 0 and (out / "hfunc.csv").read_text() == "z_re,z_im,re_H,im_H,method,error_estimate\n"
    code, _ = _run(tmp_path, "hfunc", "[hfunc]\nz = 0\n")
    assert code == 2


def test_kernel_cli(tmp_path):
    code, out = _run(tmp_path, "kernel", "[kernel]\nr = 1\n")
    assert code == 0
    rows = list(csv.DictReader((out / "kernel.csv").open()))
    assert len(rows) == 1 and float(rows[0]["abs"]) > 0


def test_decay_input_errors(tmp_path):
    assert _run(tmp_path, "decay", "[decay]\ns = 0.5\n")[0] == 2
    assert _run(tmp_path, "decay", "[decay]\ns = 2\ntimes = 1\n")[0] == 2
    assert _run(tmp_path, "decay", "[decay]\nkernel = Q\n")[0] == 2


def test_decay_cli(tmp_path):
    code, out = _run(tmp_path, "decay", "[decay]\ns = 2\ntimes = 0.5, 1, 2, 5\n")
    assert code == 0
    rows = list(csv.DictReader((out / "decay.csv").open()))
    assert list(rows[0]) == ["s", "t", "measured", "predicted_exponent", "fitted_exponent", "margin"]
    assert json.loads((out / "decay_summary.json").read_text())["all_pass"] is True


def test_triplet_cli(tmp_path):
    code, out = _run(tmp_path, "triplet", "[triplet]\np = 4\nr = 2\n")
    assert code == 0
    rep = json.loads((out / "triplet.json").read_text())
    assert rep["admissible"]["member"] is True and abs(rep["relation_residual"]) < 1e-14


def test_solve_cli_and_exit_codes(tmp_path):
    base = "[solve]\nt = 0.25\nsteps = 8\n[grid]\npoints = 64\nl = 10\n"
    code, out = _run(tmp_path, "solve", base)
    assert code == 0
    rep = json.loads((out / "solve_report.json").read_text())
    assert rep["converged"] is True
    side = json.loads((out / "trajectory.json").read_text())
    assert side["shape"] == [9, 64]
    assert _run(tmp_path, "solve", "[solve]\nt = 0\n")[0] == 2
    assert _run(tmp_path, "solve", base + "[designated_triplet]\nq = 3\nr = 2\n")[0] == 2
    assert _run(tmp_path, "solve", "[solve]\nt = 2\nsteps = 16\n[grid]\npoints = 64\nl = 10\n"
                "[initial]\namplitude = 5\n")[0] == 3


def test_determinism(tmp_path):
    text = "[hfunc]\nz = 0.3i, 2+1i\n[spec]\nbeta = 3\n"
    cli.main(["hfunc", "--config", _ini(tmp_path, text), "--out", str(tmp_path / "a")])
    cli.main(["hfunc", "--config", _ini(tmp_path, text), "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "hfunc.csv").read_bytes() == (tmp_path / "b" / "hfunc.csv").read_bytes()


def test_threads_flag(tmp_path, monkeypatch):
    monkeypatch.setenv("OMP_NUM_THREADS", "7")
    assert cli.main(["triplet", "--threads", "1", "--out", str(tmp_path)]) == 0
    assert _run(tmp_path, "triplet", "", "--threads", "0")[0] == 2


def test_validate_list(capsys):
    assert cli.main(["validate", "--list"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 10 and lines[0].startswith("special_identities")


def test_validate_fault_injection(tmp_path, capsys):
    out = str(tmp_path)
    assert cli.main(["validate", "--check", "special_identities", "--out", out]) == 0
    capsys.readouterr()
    code = cli.main(["validate", "--check", "special_identities", "--inject-fault", "ml_tolerance", "--out", out])
    assert code == 1
    assert json.loads(capsys.readouterr().out)["failed"] == ["special_identities"]
    assert cli.main(["validate", "--inject-fault", "nope", "--out", out]) == 2
    assert cli.main(["validate", "--check", "nope", "--out", out]) == 2
