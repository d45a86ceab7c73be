import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoprop.errors import AliasingRisk, EmptyTestset, NonpositiveScale, ValidationError
from geoprop.kernels import GalileiGenerator
from geoprop.transforms import (
    Dilate,
    Fourier,
    FrFT,
    Galilei,
    InverseFourier,
    classical_composition,
    compose_pipeline,
    cubic_commutator_loop,
    dilate,
    fourier,
    frft,
    frft_fast,
    frft_prefactor,
    galilei,
    holonomy_probe,
    inverse_fourier,
    linear_map_2d,
    parity,
    reduce_angle,
    translate,
)
from geoprop.waves import (
    DIMENSIONLESS_WIDTH,
    HBAR_DIMENSIONLESS,
    Grid1D,
    fidelity,
    gaussian,
    gaussian_2d,
    hermite_gauss,
    norm,
    random_packets,
    resample,
)

GRID = Grid1D.symmetric(10.0, 1024)
FRFT_GRID = Grid1D.symmetric(6.0, 1024)


def _dimensionless_states(count, seed):
    return random_packets(FRFT_GRID, count, seed, HBAR_DIMENSIONLESS, unit_width=DIMENSIONLESS_WIDTH)


# -- Galilei ---------------------------------------------------------------------------


def test_galilei_zero_is_identity():
    psi = gaussian(GRID, 1.0)
    assert galilei(psi, GalileiGenerator.zero()) is psi


def test_galilei_additive_and_cancels():
    psi = random_packets(GRID, 1, 3)[0]
    s1 = GalileiGenerator.quadratic(0.3, -0.2)
    s2 = GalileiGenerator.from_powers([0.0, 0.0, 0.05])
    lhs = galilei(psi, s1 + s2).values
    rhs = galilei(galilei(psi, s1), s2).values
    assert np.abs(lhs - rhs).max() < 1e-14
    assert np.array_equal(compose_pipeline([Galilei(s1), Galilei(-s1)], psi).values, psi.values)


def test_galilei_preserves_norm():
    psi = random_packets(GRID, 1, 5)[0]
    assert norm(galilei(psi, GalileiGenerator.quadratic(1.7))) == pytest.approx(norm(psi), abs=1e-14)


def test_galilei_dimension_mismatch():
    with pytest.raises(ValidationError):
        galilei(gaussian(GRID, 1.0), GalileiGenerator.radial(1.0))


# -- Fourier ---------------------------------------------------------------------------


@pytest.mark.parametrize("hbar", [1.0, 0.37])
def test_fourier_of_gaussian(hbar):
    sigma = 0.9
    psi = gaussian(GRID, sigma, 0.0, 0.0, hbar)
    out = fourier(psi)
    p = out.grid.points
    width = hbar / (2 * sigma)
    ref = out.with_values(np.exp(-p * p / (4 * width * width)))
    assert fidelity(out, ref) >= 1 - 1e-10
    assert out.grid.isclose(GRID.conjugate(hbar))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_fourier_parseval(seed):
    psi = random_packets(GRID, 1, seed)[0]
    assert norm(fourier(psi)) == pytest.approx(norm(psi), abs=1e-12)


def test_fourier_twice_is_parity():
    grid = Grid1D.centered(20.0, 1024)
    psi = random_packets(grid, 1, 2)[0]
    twice = fourier(fourier(psi))
    ref = parity(psi)
    twice = resample(twice, ref.grid) if not twice.grid.isclose(ref.grid) else twice
    assert fidelity(twice, ref) >= 1 - 1e-10


def test_inverse_fourier_round_trip():
    psi = random_packets(GRID, 1, 8)[0]
    back = inverse_fourier(fourier(psi), GRID)
    assert np.abs(back.values - psi.values).max() < 1e-12


@pytest.mark.filterwarnings("ignore::geoprop.errors.EdgeWarning")
def test_fourier_target_grid():
    psi = gaussian(GRID, 1.0, 0.5, 0.3)
    target = Grid1D.symmetric(3.0, 300)
    out = fourier(psi, target)
    ref = resample(fourier(psi), target, carrier=-0.5)
    assert out.grid == target
    assert np.abs(out.values - ref.values).max() < 1e-10


def test_fourier_2d_is_separable():
    g = Grid1D.symmetric(8.0, 64)
    psi = gaussian_2d(g, g, 1.0, (0.3, -0.2), (0.1, 0.4))
    out = fourier(psi)
    fx = fourier(gaussian(g, 1.0, 0.3, 0.1)).values
    fy = fourier(gaussian(g, 1.0, -0.2, 0.4)).values
    assert np.abs(out.values - np.outer(fx, fy)).max() < 1e-13


# -- geometric maps ------------------------------------------------------------------------


def test_dilate():
    psi = random_packets(GRID, 1, 1)[0]
    assert dilate(psi, 1.0) is psi
    for s in (0.3, 2.7):
        out = dilate(psi, s)
        assert norm(out) == pytest.approx(norm(psi), rel=1e-15)
        assert out.grid.dx == pytest.approx(GRID.dx / s)
    with pytest.raises(NonpositiveScale):
        dilate(psi, 0.0)
    with pytest.raises(NonpositiveScale):
        Dilate(-1.0)


def test_parity_and_translate():
    psi = gaussian(GRID, 1.0, 1.5, 0.2)
    flipped = parity(psi)
    assert flipped.grid.isclose(GRID)
    assert np.allclose(flipped.values, gaussian(GRID, 1.0, -1.5, -0.2).values, atol=1e-14)
    moved = translate(psi, 0.75)
    assert moved.grid.x0 == GRID.x0 + 0.75
    assert np.array_equal(moved.values, psi.values)


def test_linear_map_2d_rotation():
    # wide enough that rotated target points never leave the source window
    g = Grid1D.symmetric(12.0, 96)
    psi = gaussian_2d(g, g, 1.0, (1.0, 0.0))
    c, s = math.cos(0.6), math.sin(0.6)
    out = linear_map_2d(psi, [[c, -s], [s, c]], g, g)
    ref = gaussian_2d(g, g, 1.0, (c, s))
    assert np.abs(out.values - ref.values).max() < 1e-9


# -- fractional Fourier -------------------------------------------------------------------------


def test_reduce_angle():
    assert reduce_angle(math.pi) == math.pi
    assert reduce_angle(-math.pi) == math.pi
    assert reduce_angle(3 * math.pi / 2) == pytest.approx(-math.pi / 2)


def test_frft_zero_is_identity():
    psi = _dimensionless_states(1, 4)[0]
    assert frft(psi, 0.0) is psi
    assert frft_fast(psi, 0.0) is psi


def test_frft_at_pi_is_parity():
    psi = _dimensionless_states(1, 4)[0]
    assert np.array_equal(frft(psi, math.pi).values, psi.values[::-1])


def test_frft_quarter_turn_keeps_ground_mode():
    h0 = hermite_gauss(0, FRFT_GRID)
    assert fidelity(frft(h0, math.pi / 2), h0) >= 1 - 1e-8


@pytest.mark.parametrize("gamma", [0.4, 1.1, -0.8])
def test_frft_first_mode_eigenvalue(gamma):
    h1 = hermite_gauss(1, FRFT_GRID)
    out = frft(h1, gamma)
    assert np.abs(out.values - cmath.exp(-1j * gamma) * h1.values).max() <= 1e-5


def test_frft_is_unitary():
    for psi in _dimensionless_states(3, 6):
        assert norm(frft(psi, 0.9)) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("gamma", [0.3, 1.0, 2.0, -2.5])
def test_frft_fast_agrees(gamma):
    for psi in _dimensionless_states(3, 7):
        assert 1 - fidelity(frft_fast(psi, gamma), frft(psi, gamma)) <= 1e-6


def test_frft_fast_quarter_turn_matches_fourier():
    psi = _dimensionless_states(1, 9)[0]
    ref = fourier(psi, FRFT_GRID)
    assert 1 - fidelity(frft_fast(psi, math.pi / 2), ref) <= 1e-8


def test_frft_prefactor_modulus():
    g = 0.7
    assert abs(frft_prefactor(g)) == pytest.approx(1 / math.sqrt(math.sin(g)))


def test_frft_aliasing_guard():
    coarse = Grid1D.symmetric(30.0, 256)
    psi = gaussian(coarse, 1.0, hbar=HBAR_DIMENSIONLESS)
    with pytest.raises(AliasingRisk):
        frft(psi, 0.5)
    with pytest.raises(AliasingRisk):
        frft_fast(psi, 0.5)


def test_frft_rejects_2d():
    g = Grid1D.symmetric(3.0, 16)
    with pytest.raises(ValidationError):
        frft(gaussian_2d(g, g, 0.3), 0.5)


# -- pipelines and holonomy -----------------------------------------------------------------------


def test_empty_pipeline():
    psi = gaussian(GRID, 1.0)
    assert compose_pipeline([], psi) is psi


def test_pipeline_group_property():
    psi = _dimensionless_states(1, 10)[0]
    two = compose_pipeline([FrFT(0.7), FrFT(1.1)], psi)
    assert 1 - fidelity(two, frft(psi, 1.8)) <= 1e-6


def test_classical_composition_of_linear_loop():
    loop = [Dilate(1.5), Fourier(), Dilate(1.5), InverseFourier()]
    assert classical_composition(loop).isclose(classical_composition([]), 1e-14)
    assert classical_composition([Galilei(GalileiGenerator.from_powers([0, 0, 1.0]))]) is None


def test_holonomy_linear_loops():
    states = _dimensionless_states(2, 11)
    assert holonomy_probe([FrFT(0.9), FrFT(-0.9)], states) <= 1e-6
    sc = Grid1D.self_conjugate(512)
    sc_states = random_packets(sc, 2, 12, HBAR_DIMENSIONLESS, unit_width=DIMENSIONLESS_WIDTH)
    assert holonomy_probe([Fourier()] * 4, sc_states) <= 1e-8


def test_holonomy_requires_closed_loop():
    with pytest.raises(ValidationError):
        holonomy_probe([Dilate(2.0)], _dimensionless_states(1, 1))


def test_holonomy_empty_testset():
    with pytest.raises(EmptyTestset):
        holonomy_probe([FrFT(0.2), FrFT(-0.2)], [])


def test_cubic_loop_defect_grows():
    states = _dimensionless_states(2, 13)
    small = holonomy_probe(cubic_commutator_loop(0.01), states)
    large = holonomy_probe(cubic_commutator_loop(0.05), states)
    assert 0 < small < large
