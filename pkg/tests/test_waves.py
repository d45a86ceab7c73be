import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoprop.errors import (
    EdgeWarning,
    EmptyTargetGrid,
    GridMismatch,
    ModeTooHigh,
    ValidationError,
    ZeroNorm,
)
from geoprop.waves import (
    Grid1D,
    WaveFunction1D,
    WaveFunction2D,
    expectation_momentum,
    expectation_position,
    fidelity,
    from_json_dict,
    gaussian,
    gaussian_2d,
    hermite_gauss,
    inner,
    interpolate,
    norm,
    random_packets,
    read_wavefunction,
    resample,
    to_json_dict,
    write_wavefunction,
)

GRID = Grid1D.symmetric(8.0, 1024)
HG_GRID = Grid1D.symmetric(6.0, 1024)


@pytest.mark.parametrize("args", [(0.0, 0.0, 4), (0.0, -1.0, 4), (0.0, 0.1, 1), (0.0, 0.1, 2.5)])
def test_grid_validation(args):
    with pytest.raises(ValidationError):
        Grid1D(*args)


def test_grid_helpers():
    g = Grid1D.symmetric(2.0, 5)
    assert np.allclose(g.points, [-2, -1, 0, 1, 2])
    assert g.x_last == 2.0 and g.center == 0.0 and g.max_abs == 2.0
    assert g.reflected().isclose(g)
    sc = Grid1D.self_conjugate(256)
    assert sc.conjugate(1 / (2 * math.pi)).isclose(sc)


def test_values_are_read_only():
    psi = gaussian(GRID, 1.0)
    with pytest.raises(ValueError):
        psi.values[0] = 1.0


def test_shape_mismatch():
    with pytest.raises(ValidationError):
        WaveFunction1D(GRID, np.zeros(10), 1.0)


def test_norm_zero():
    assert norm(WaveFunction1D(GRID, np.zeros(GRID.n), 1.0)) == 0.0


def test_gaussian_unit_norm():
    # +-8 sigma window
    assert norm(gaussian(GRID, 1.0)) == pytest.approx(1.0, abs=1e-10)


def test_norm_homogeneous():
    psi = gaussian(GRID, 1.0, 0.3, 0.4)
    assert norm(psi.with_values(2 * psi.values)) == 2 * norm(psi)


def test_fidelity_self_and_phase():
    psi = gaussian(GRID, 1.0, 0.3, 0.4)
    assert fidelity(psi, psi) == pytest.approx(1.0, abs=1e-15)
    assert fidelity(psi, psi.with_values(np.exp(2.1j) * psi.values)) == pytest.approx(1.0, abs=1e-15)


def test_fidelity_errors():
    psi = gaussian(GRID, 1.0)
    with pytest.raises(GridMismatch):
        fidelity(psi, gaussian(Grid1D.symmetric(8.0, 512), 1.0))
    with pytest.raises(GridMismatch):
        inner(psi, gaussian(GRID, 1.0, hbar=2.0))
    with pytest.raises(ZeroNorm):
        fidelity(psi, psi.with_values(np.zeros(GRID.n)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_fidelity_symmetric_and_bounded(seed):
    a, b = random_packets(GRID, 2, seed)
    f = fidelity(a, b)
    assert 0.0 <= f <= 1.0
    assert f == pytest.approx(fidelity(b, a), abs=1e-14)


# -- Hermite-Gauss -----------------------------------------------------------------


def test_hermite_ground_mode():
    h0 = hermite_gauss(0, HG_GRID)
    x = HG_GRID.points
    assert np.allclose(h0.values, 2**0.25 * np.exp(-math.pi * x * x), atol=1e-15)
    assert norm(h0) == pytest.approx(1.0, abs=1e-12)


def test_hermite_parity():
    h1 = hermite_gauss(1, HG_GRID).values
    assert np.array_equal(h1[::-1], -h1)


def test_hermite_orthonormal():
    modes = [hermite_gauss(k, HG_GRID) for k in range(6)]
    gram = np.array([[inner(a, b) for b in modes] for a in modes])
    assert np.abs(gram - np.eye(6)).max() <= 1e-8
    assert fidelity(modes[0], modes[1]) <= 1e-10


def test_hermite_recurrence():
    xi = math.sqrt(2 * math.pi) * HG_GRID.points
    h = [hermite_gauss(k, HG_GRID).values.real for k in range(7)]
    for k in range(1, 6):
        # xi h_k = sqrt((k+1)/2) h_{k+1} + sqrt(k/2) h_{k-1}
        res = xi * h[k] - math.sqrt((k + 1) / 2) * h[k + 1] - math.sqrt(k / 2) * h[k - 1]
        assert np.abs(res).max() <= 1e-8


def test_hermite_cap():
    hermite_gauss(20, HG_GRID)
    with pytest.raises(ModeTooHigh):
        hermite_gauss(21, HG_GRID)


# -- resampling ------------------------------------------------------------------------


def test_resample_same_grid_is_identity():
    psi = gaussian(GRID, 1.0, 0.2, 0.5)
    assert resample(psi, GRID) is psi


def test_resample_refinement_matches_analytic():
    wide = Grid1D.symmetric(12.0, 1024)
    psi = gaussian(wide, 1.0, 0.2, 0.5)
    fine = Grid1D(wide.x0, wide.dx / 2, 2 * wide.n - 1)
    out = resample(psi, fine)
    assert norm(out) == pytest.approx(1.0, abs=1e-8)
    assert np.abs(out.values - gaussian(fine, 1.0, 0.2, 0.5).values).max() < 1e-10


def test_resample_with_carrier():
    p0 = 20.0  # beyond the band of a plain interpolation on this grid
    grid = Grid1D.symmetric(8.0, 512)
    psi = gaussian(grid, 1.0, 0.0, p0)
    target = Grid1D(-3.0, 0.0137, 400)
    with pytest.warns(EdgeWarning):
        out = resample(psi, target, carrier=p0)
    assert np.abs(out.values - gaussian(target, 1.0, 0.0, p0).values).max() < 1e-9


def test_resample_edge_warning():
    psi = gaussian(GRID, 1.0, 3.0)
    with pytest.warns(EdgeWarning):
        resample(psi, Grid1D.symmetric(1.0, 100))


def test_resample_empty_target():
    with pytest.raises(EmptyTargetGrid):
        resample(gaussian(GRID, 1.0), Grid1D(100.0, 0.1, 10))


def test_refinement_invariance_of_fidelity():
    wide = Grid1D.symmetric(12.0, 1024)
    a = gaussian(wide, 1.0, 0.3, 0.2)
    b = gaussian(wide, 1.2, -0.4, 0.1)
    fine = Grid1D.symmetric(12.0, 2047)
    fa, fb = resample(a, fine), resample(b, fine)
    assert fidelity(fa, fb) == pytest.approx(fidelity(a, b), abs=1e-6)
    assert norm(fa) == pytest.approx(norm(a), abs=1e-6)


def test_interpolate_matches_samples_and_zero_outside():
    psi = gaussian(GRID, 1.0, 0.2, 0.5)
    pts = np.array([-1.2345, 0.0, 0.777, 50.0])
    got = interpolate(psi, pts)
    x = pts[:3]
    exact = (2 * math.pi) ** -0.25 * np.exp(-((x - 0.2) ** 2) / 4 + 0.5j * (x - 0.2))
    assert np.abs(got[:3] - exact).max() < 1e-10
    assert got[3] == 0.0


def test_resample_2d():
    g = Grid1D.symmetric(11.0, 128)
    psi = gaussian_2d(g, g, 1.0, (0.5, -0.3), (0.4, 0.2))
    target = Grid1D.symmetric(6.0, 80)
    out = resample(psi, target, target)
    ref = gaussian_2d(target, target, 1.0, (0.5, -0.3), (0.4, 0.2))
    assert np.abs(out.values - ref.values).max() < 1e-9


# -- moments ---------------------------------------------------------------------------


def test_moments_of_gaussian():
    psi = gaussian(GRID, 0.9, 0.7, -0.4, hbar=1.3)
    assert expectation_position(psi) == pytest.approx(0.7, abs=1e-12)
    assert expectation_momentum(psi) == pytest.approx(-0.4, abs=1e-12)


def test_moments_2d():
    g = Grid1D.symmetric(8.0, 128)
    psi = gaussian_2d(g, g, 1.0, (0.5, -0.3), (0.4, 0.2))
    assert np.allclose(expectation_position(psi), (0.5, -0.3), atol=1e-12)
    assert np.allclose(expectation_momentum(psi), (0.4, 0.2), atol=1e-12)


# -- files ------------------------------------------------------------------------------


def test_json_round_trip_bit_exact(tmp_path):
    psi = random_packets(GRID, 1, seed=4)[0]
    path = tmp_path / "psi.json"
    write_wavefunction(psi, path)
    back = read_wavefunction(path)
    assert back.grid == psi.grid and back.hbar == psi.hbar
    assert np.array_equal(back.values, psi.values)
    doc = json.loads(path.read_text())
    assert set(doc) == {"hbar", "grid", "values"}
    assert set(doc["grid"]) == {"x0", "dx", "n"}


def test_json_round_trip_2d(tmp_path):
    g = Grid1D.symmetric(4.0, 8)
    gy = Grid1D.symmetric(3.0, 5)
    vals = np.arange(40).reshape(8, 5) * (1 + 0.5j)
    psi = WaveFunction2D(g, gy, vals, 0.5)
    path = tmp_path / "psi2.json"
    write_wavefunction(psi, path)
    back = read_wavefunction(path)
    assert np.array_equal(back.values, psi.values)
    assert json.loads(path.read_text())["values"][1] == [1.0, 0.5]


@pytest.mark.parametrize(
    "doc",
    [
        [],
        {"hbar": 1.0, "grid": {"x0": 0, "dx": 1, "n": 2}},
        {"hbar": 1.0, "grid": {"x0": 0, "dx": 1}, "values": [[0, 0], [0, 0]]},
        {"hbar": 1.0, "grid": {"x0": 0, "dx": 1, "n": 3}, "values": [[0, 0], [0, 0]]},
        {"hbar": "a", "grid": {"x0": 0, "dx": 1, "n": 2}, "values": [[0, 0], [0, 0]]},
        {"hbar": 1.0, "grid": {"x0": 0, "dx": 1, "n": 2}, "values": [0, 0]},
    ],
)
def test_json_schema_errors(doc):
    with pytest.raises(ValidationError):
        from_json_dict(doc)


def test_malformed_file_is_io_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(OSError):
        read_wavefunction(path)


def test_to_json_dict_grid_fields():
    doc = to_json_dict(gaussian(Grid1D(0.5, 0.25, 4), 1.0))
    assert doc["grid"] == {"x0": 0.5, "dx": 0.25, "n": 4}


def test_random_packets_reproducible():
    a = random_packets(GRID, 3, seed=9)
    b = random_packets(GRID, 3, seed=9)
    assert all(np.array_equal(x.values, y.values) for x, y in zip(a, b))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert all(norm(x) == pytest.approx(1.0, abs=1e-12) for x in a)
