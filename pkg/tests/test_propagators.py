import math

import numpy as np
import pytest

from geoprop.errors import EdgeWarning, SingularTime, ValidationError, ZeroTime
from geoprop.oracle import gaussian_free_solution
from geoprop.phasespace import SystemSpec
from geoprop.propagators import (
    apply_kernel,
    bfield_kernel,
    efield_kernel,
    free_kernel,
    oscillator_kernel,
    propagate,
)
from geoprop.waves import (
    Grid1D,
    WaveFunction1D,
    expectation_position,
    fidelity,
    gaussian,
    gaussian_2d,
    norm,
    random_packets,
    resample,
)

GRID = Grid1D.symmetric(20.0, 1024)


def _width2(psi):
    x = psi.grid.points
    rho = np.abs(psi.values) ** 2 * psi.grid.dx
    mean = np.sum(x * rho)
    return np.sum((x - mean) ** 2 * rho)


def test_free_gaussian_spreads():
    m, hbar, sigma, t = 1.0, 1.0, 1.0, 2.0
    out = propagate(gaussian(GRID, sigma), SystemSpec.free(m=m, hbar=hbar), t)
    want = sigma**2 * (1 + (hbar * t / (2 * m * sigma**2)) ** 2)
    assert _width2(out) == pytest.approx(want, abs=1e-6)


def test_free_matches_analytic_packet():
    sys = SystemSpec.free(m=1.3, hbar=0.8)
    out = propagate(gaussian(GRID, 1.0, 0.5, 0.6, hbar=0.8), sys, 1.7, outgrid=GRID)
    ref = gaussian_free_solution(GRID, 1.0, 0.5, 0.6, 1.3, 0.8, 1.7)
    assert np.abs(out.values - ref.values).max() < 1e-9


@pytest.mark.parametrize(
    "sys",
    [SystemSpec.free(), SystemSpec.oscillator(omega=0.7), SystemSpec.efield(force=0.4)],
    ids=["free", "oscillator", "efield"],
)
def test_semigroup(sys):
    psi = random_packets(GRID, 1, 3)[0]
    two = propagate(propagate(psi, sys, 0.6, outgrid=GRID), sys, 0.9, outgrid=GRID)
    one = propagate(psi, sys, 1.5, outgrid=GRID)
    assert 1 - fidelity(two, one) <= 1e-8


def test_zero_force_is_free_kernel():
    a, b = efield_kernel(1.2, 0.0, 0.9, 0.7), free_kernel(1.2, 0.9, 0.7)
    for name in ("a_xx", "a_xpxp", "a_xxp", "b_x", "b_xp"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    assert a.c0 == 0.0 and a.prefactor == b.prefactor


def test_weak_field_approaches_free_plane():
    t = 0.8
    k = bfield_kernel(1.0, 1.0, 1e-4, 1.0, t)
    f = bfield_kernel(1.0, 1.0, 0.0, 1.0, t)
    assert np.allclose(k.a_xx, f.a_xx, atol=1e-8)
    assert np.allclose(k.a_xxp, f.a_xxp, atol=1e-4)
    assert k.prefactor == pytest.approx(f.prefactor, rel=1e-8)


def test_singular_time_without_substep():
    sys = SystemSpec.oscillator(omega=1.0)
    with pytest.raises(SingularTime) as info:
        propagate(gaussian(GRID, 1.0), sys, math.pi, substep=False)
    lo, hi = info.value.safe_times
    assert lo < math.pi < hi
    assert hi - lo == pytest.approx(2e-3)
    with pytest.raises(SingularTime):
        oscillator_kernel(1.0, 1.0, 1.0, 2 * math.pi)


def test_singular_time_with_substep_is_parity():
    sys = SystemSpec.oscillator(omega=1.0)
    psi = gaussian(GRID, 1.0, 1.5, 0.3)
    out = propagate(psi, sys, math.pi, outgrid=GRID)
    flipped = gaussian(GRID, 1.0, -1.5, -0.3)
    assert 1 - fidelity(out, flipped) <= 1e-8


def test_zero_time_kernel():
    with pytest.raises(ZeroTime):
        free_kernel(1.0, 1.0, 0.0)


def test_zero_time_propagation_is_identity():
    psi = gaussian(GRID, 1.0, 0.2, 0.1)
    assert propagate(psi, SystemSpec.oscillator(), 0.0) is psi


def test_zero_input_gives_zero_output():
    psi = WaveFunction1D(GRID, np.zeros(GRID.n), 1.0)
    assert norm(propagate(psi, SystemSpec.efield(force=0.5), 1.0)) == 0.0


def test_bad_arguments():
    psi = gaussian(GRID, 1.0)
    with pytest.raises(ValidationError):
        propagate(psi, SystemSpec.free(), 1.0, route="spectral")
    with pytest.raises(ValidationError):
        propagate(psi, SystemSpec.free(hbar=2.0), 1.0)
    with pytest.raises(ValidationError):
        propagate(psi, SystemSpec.bfield(), 1.0)
    with pytest.raises(ValidationError):
        propagate(psi, SystemSpec.free(), math.inf)


def test_quarter_period_is_scaled_fourier():
    # at omega t = pi/2 the oscillator kernel is a Fourier kernel in x/(m omega)
    sys = SystemSpec.oscillator(m=1.0, omega=1.0)
    psi = gaussian(GRID, 0.8, 1.0, 0.0)
    out = propagate(psi, sys, math.pi / 2, outgrid=GRID)
    ref = gaussian(GRID, 1.0 / (2 * 0.8), 0.0, -1.0)
    assert 1 - fidelity(out, ref) <= 1e-8


def test_full_period_returns_state():
    sys = SystemSpec.oscillator(omega=1.0)
    psi = random_packets(GRID, 1, 4)[0]
    out = propagate(psi, sys, 2 * math.pi, outgrid=GRID)
    assert 1 - fidelity(out, psi) <= 1e-8
    # global phase of one period is -1
    assert np.abs(out.values + psi.values).max() < 1e-6


@pytest.mark.parametrize(
    "sys, t",
    [
        (SystemSpec.free(m=0.9), 1.3),
        (SystemSpec.oscillator(omega=0.8), 1.0),
        (SystemSpec.oscillator(omega=0.8), 2.9),
        (SystemSpec.efield(force=-0.6), 1.4),
    ],
)
def test_two_routes_agree(sys, t):
    psi = random_packets(GRID, 1, 6)[0]
    a = propagate(psi, sys, t, route="kernel")
    b = propagate(psi, sys, t, route="pipeline")
    assert a.grid.isclose(b.grid)
    assert np.abs(a.values - b.values).max() < 1e-8


def test_two_routes_agree_in_plane():
    g = Grid1D.symmetric(8.0, 128)
    psi = gaussian_2d(g, g, 1.0, (0.5, -0.3), (0.4, 0.2))
    sys = SystemSpec.bfield(field=1.0)
    a = propagate(psi, sys, 1.2, route="kernel")
    b = propagate(psi, sys, 1.2, route="pipeline")
    assert 1 - fidelity(a, b) <= 1e-8


def test_efield_centroid_accelerates():
    m, F, t = 1.5, 0.8, 2.0
    psi = gaussian(GRID, 1.0, 0.0, 0.3)
    out = propagate(psi, SystemSpec.efield(m=m, force=F), t)
    want = 0.3 * t / m + F * t * t / (2 * m)
    assert expectation_position(out) == pytest.approx(want, abs=1e-8)


def test_outgrid_matches_resampled_default():
    sys = SystemSpec.efield(force=0.5)
    psi = gaussian(GRID, 1.0)
    target = Grid1D.symmetric(6.0, 300)
    direct = propagate(psi, sys, 1.0, outgrid=target)
    with pytest.warns(EdgeWarning):
        via = resample(propagate(psi, sys, 1.0), target)
    assert np.abs(direct.values - via.values).max() < 1e-8


def test_apply_kernel_dimension_check():
    with pytest.raises(ValidationError):
        apply_kernel(gaussian(GRID, 1.0), bfield_kernel(1.0, 1.0, 1.0, 1.0, 0.5))
