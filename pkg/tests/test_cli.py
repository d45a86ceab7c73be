import json
import math

import numpy as np
import pytest

from geoprop.cli import EXIT_FAILED, EXIT_INVALID, EXIT_IO, EXIT_OK, main, parse_coeffs
from geoprop.errors import ValidationError
from geoprop.waves import read_wavefunction


@pytest.fixture
def gauss(tmp_path):
    path = tmp_path / "g.json"
    assert main(["generate", "-o", str(path), "--center", "0.5", "--momentum", "0.3"]) == EXIT_OK
    return path


@pytest.fixture
def unit_gauss(tmp_path):
    path = tmp_path / "u.json"
    assert main(["generate", "-o", str(path), "--self-conjugate", "--n", "1024", "--dimensionless",
                 "--sigma", str(1 / (2 * math.sqrt(math.pi))), "--center", "0.3"]) == EXIT_OK
    return path


def _same(a, b):
    return np.array_equal(read_wavefunction(a).values, read_wavefunction(b).values)


def test_galilei_zero_is_identity(gauss, tmp_path):
    out = tmp_path / "o.json"
    assert main(["transform", "galilei", "-i", str(gauss), "-o", str(out), "--coeffs", "0"]) == EXIT_OK
    assert _same(gauss, out)


def test_frft_compare_fourier(unit_gauss, tmp_path, capsys):
    out = tmp_path / "o.json"
    code = main(["transform", "frft", "-i", str(unit_gauss), "-o", str(out), "--gamma", str(math.pi / 2),
                 "--compare-fourier", "--tolerance", "1e-8"])
    assert code == EXIT_OK
    assert float(capsys.readouterr().out) >= 1 - 1e-8


def test_frft_compare_fourier_fails_above_tolerance(unit_gauss, tmp_path):
    out = tmp_path / "o.json"
    code = main(["transform", "frft", "-i", str(unit_gauss), "-o", str(out), "--gamma", "1.5",
                 "--compare-fourier", "--tolerance", "1e-8"])
    assert code == EXIT_FAILED


def test_bad_coeffs(gauss, tmp_path, capsys):
    code = main(["transform", "galilei", "-i", str(gauss), "-o", str(tmp_path / "o.json"), "--coeffs", "1,x"])
    assert code == EXIT_INVALID
    assert "'x'" in capsys.readouterr().err
    with pytest.raises(ValidationError):
        parse_coeffs("")


def test_negative_scale(gauss, tmp_path):
    code = main(["transform", "dilate", "-i", str(gauss), "-o", str(tmp_path / "o.json"), "--scale", "-2"])
    assert code == EXIT_INVALID


def test_propagate_zero_time_is_identity(gauss, tmp_path):
    out = tmp_path / "o.json"
    assert main(["propagate", "-i", str(gauss), "-o", str(out), "--system", "free", "--t", "0"]) == EXIT_OK
    assert _same(gauss, out)


def test_singular_time_reports_safe_times(gauss, tmp_path, capsys):
    args = ["propagate", "-i", str(gauss), "-o", str(tmp_path / "o.json"), "--system", "oscillator",
            "--t", repr(math.pi)]
    assert main(args) == EXIT_INVALID
    assert "safe times" in capsys.readouterr().err
    assert main(args + ["--substep"]) == EXIT_OK


def test_two_routes_from_cli(gauss, tmp_path, capsys):
    code = main(["propagate", "-i", str(gauss), "-o", str(tmp_path / "o.json"), "--system", "efield",
                 "--t", "1.0", "--route", "both", "--tolerance", "1e-8"])
    assert code == EXIT_OK
    assert float(capsys.readouterr().out) >= 1 - 1e-8


def test_map_reports_tau(gauss, tmp_path, capsys):
    code = main(["map", "-i", str(gauss), "-o", str(tmp_path / "o.json"), "--to", "oscillator", "--t", "1"])
    assert code == EXIT_OK
    assert float(capsys.readouterr().out) == pytest.approx(math.pi / 4, rel=1e-15)


def test_map_bfield_out_of_domain(tmp_path):
    plane = tmp_path / "p.json"
    assert main(["generate", "-o", str(plane), "--dims", "2", "--n", "64", "--half-width", "8"]) == EXIT_OK
    code = main(["map", "-i", str(plane), "-o", str(tmp_path / "o.json"), "--to", "bfield", "--t", "1e7"])
    assert code == EXIT_INVALID


def test_export_csv(gauss, tmp_path):
    out = tmp_path / "g.csv"
    assert main(["export", "-i", str(gauss), "-o", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "x,re,im,abs2"
    assert len(lines) == 1025
    psi = read_wavefunction(gauss)
    x, re, im, _ = (float(v) for v in lines[100].split(","))
    assert x == psi.grid.points[99] and complex(re, im) == psi.values[99]


def test_missing_file_is_io_error(tmp_path):
    code = main(["transform", "dilate", "-i", str(tmp_path / "nope.json"), "-o", str(tmp_path / "o.json"),
                 "--scale", "2"])
    assert code == EXIT_IO


def test_usage_error_is_invalid(gauss, tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["propagate", "-i", str(gauss), "-o", str(tmp_path / "o.json"), "--system", "rotor", "--t", "1"])
    assert info.value.code == EXIT_INVALID


def test_verify_holonomy_report(tmp_path, capsys):
    report = tmp_path / "r.json"
    assert main(["verify", "holonomy", "-o", str(report)]) == EXIT_OK
    doc = json.loads(report.read_text())
    assert doc == json.loads(capsys.readouterr().out)
    assert all({"name", "value", "tolerance", "pass"} <= set(c) for c in doc["checks"])
