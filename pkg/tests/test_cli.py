import hashlib
import json
import os

import pytest

from relu_landscape.cli import EXIT_CONVERGENCE, EXIT_DOMAIN, EXIT_OK, EXIT_USAGE, main, parse_grid


def run(tmp_path, *argv):
    return main(["--out", str(tmp_path), *argv])


def load(tmp_path, name):
    with open(tmp_path / name) as fh:
        return json.load(fh)


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_parse_grid():
    assert parse_grid("10:1000:3") == pytest.approx([10, 100, 1000])
    assert parse_grid("12") == [12.0]
    assert parse_grid("10.2:30.7:2", integer=True) == [10, 31]
    for bad in ("a:b", "0:10", "1:2:3:4"):
        with pytest.raises(Exception):
            parse_grid(bad)


def test_solve_writes_point_and_manifest(tmp_path):
    assert run(tmp_path, "solve", "--type", "II", "--p", "1", "--m", "1", "--d", "50") == EXIT_OK
    out = load(tmp_path, "solve.json")
    assert out["schema_version"] == 1
    man = load(tmp_path, "manifest.json")
    assert man["command"] == "solve" and man["parameters"]["d"] == 50
    assert any(p.endswith("solve.json") for p in man["outputs"])


def test_usage_errors(tmp_path, capsys):
    assert run(tmp_path, "solve", "--type", "II", "--p", "0", "--m", "0", "--d", "10") == EXIT_USAGE
    assert run(tmp_path, "solve", "--type", "III", "--p", "1", "--m", "0", "--d", "10") == EXIT_USAGE
    assert run(tmp_path, "interlace", "--d-grid", "x:y") == EXIT_USAGE
    assert main([]) == EXIT_USAGE


def test_domain_error_exit_code(tmp_path):
    assert run(tmp_path, "spectrum", "--type", "II", "--p", "1", "--m", "0", "--d", "80", "--method", "dense") == EXIT_DOMAIN


def test_convergence_error_exit_code(tmp_path):
    code = run(tmp_path, "solve", "--type", "II", "--p", "1", "--m", "0", "--d", "10", "--tol", "1e-30")
    assert code in (EXIT_OK, EXIT_CONVERGENCE)


def test_spectrum_outputs(tmp_path):
    assert run(tmp_path, "spectrum", "--type", "I", "--p", "1", "--m", "1", "--d", "10", "--method", "dense") == EXIT_OK
    js = load(tmp_path, "spectrum.json")
    assert js["schema_version"] == 1
    assert (tmp_path / "spectrum.csv").read_text().startswith("d,irrep,value,multiplicity")


def test_fps_direct(tmp_path):
    assert run(tmp_path, "fps", "--type", "II", "--p", "1", "--m", "2", "--order", "4") == EXIT_OK
    js = load(tmp_path, "fps.json")
    vals = {(c["coordinate"], c["order"]): c["value"] for c in js["direct"]}
    assert vals[(0, 3)] == pytest.approx(-0.5748287640041449, abs=1e-12)


def test_table2_and_xavier_are_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for target in (a, b):
        assert run(target, "table2", "--d", "10") == EXIT_OK
        assert run(target, "xavier", "--d", "4", "--samples", "5000", "--seed", "7") == EXIT_OK
    for name in ("table2.json", "table2.csv", "xavier.json"):
        assert digest(a / name) == digest(b / name)
    assert load(a, "manifest.json")["seed"] == 7


def test_fossil_and_interlace(tmp_path):
    assert run(tmp_path, "fossil", "--k", "3", "--d", "2", "--samples", "10") == EXIT_OK
    fossil = load(tmp_path, "fossil.json")
    assert fossil["n_vertices"] == 6 and fossil["n_edges"] == 6
    assert run(tmp_path, "interlace", "--d-grid", "20:40:3") == EXIT_OK
    assert len(load(tmp_path, "interlace.json")["samples"]) == 3


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("RELU_LANDSCAPE_OUT", str(tmp_path / "env"))
    assert main(["xavier", "--d", "3", "--samples", "2000"]) == EXIT_OK
    assert os.path.exists(tmp_path / "env" / "xavier.json")


def test_threads_flag_sets_environment(tmp_path, monkeypatch):
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        monkeypatch.delenv(var, raising=False)
    assert main(["--threads", "2", "--out", str(tmp_path), "xavier", "--d", "3", "--samples", "2000"]) == EXIT_OK
    assert os.environ["OMP_NUM_THREADS"] == "2"
