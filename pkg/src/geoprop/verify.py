"""Verification suites behind ``geoprop verify`` and the acceptance tests.

Each check function returns a :class:`Check`.  A check with
``tolerance=None`` is informational and always passes.
"""
from __future__ import annotations

import cmath
import math
import time
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .kernels import GalileiGenerator
from .oracle import (
    PotentialSpec,
    gaussian_free_solution,
    ground_state,
    pde_residual,
    phase_of_overlap,
    polygon_symplectic_area,
    split_step,
)
from .phasespace import (
    LinearFoliation,
    SystemSpec,
    classical_flow,
    kernel_from_foliations,
    propagator_geometry,
    rectangle_vertices,
    symplectic_area,
)
from .propagators import propagate, system_kernel
from .symmetry import (
    TimeMap,
    bfield_to_free,
    efield_to_free,
    free_to_bfield,
    free_to_efield,
    free_to_oscillator,
    oscillator_to_free,
)
from .transforms import (
    Dilate,
    Fourier,
    FrFT,
    Galilei,
    InverseFourier,
    cubic_commutator_loop,
    frft,
    frft_fast,
    holonomy_probe,
)
from .waves import (
    DIMENSIONLESS_WIDTH,
    HBAR_DIMENSIONLESS,
    Grid1D,
    WaveFunction1D,
    WaveFunction2D,
    expectation_momentum,
    expectation_position,
    fidelity,
    gaussian,
    gaussian_2d,
    hermite_gauss,
    random_packets,
    resample,
)

SUITES = ("frft", "propagators", "symmetry", "holonomy")


@dataclass
class Check:
    name: str
    value: float
    tolerance: Optional[float]
    passed: bool

    @classmethod
    def at_most(cls, name, value, tol):
        value = float(value)
        return cls(name, value, tol, bool(value <= tol))

    @classmethod
    def at_least(cls, name, value, tol):
        value = float(value)
        return cls(name, value, tol, bool(value >= tol))

    @classmethod
    def info(cls, name, value):
        return cls(name, float(value), None, True)

    def to_dict(self):
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance, "pass": self.passed}


def report(suite, checks):
    return {"suite": suite, "checks": [c.to_dict() for c in checks]}


# -- shared fixtures ----------------------------------------------------------------

FRFT_GRID = Grid1D.symmetric(6.0, 1024)
PROP_GRID = Grid1D.symmetric(20.0, 1024)
PLANE_GRID = Grid1D.symmetric(8.0, 128)
MAP_GRID = Grid1D.symmetric(14.0, 2048)

FREE = SystemSpec.free()
OSC = SystemSpec.oscillator(omega=1.0)
EFIELD = SystemSpec.efield(force=1.0)
BFIELD = SystemSpec.bfield(field=1.0)

ROUTE_TIMES = {
    "free": (FREE, (0.5, 1.0, 2.0)),
    "oscillator": (OSC, (0.5, 1.0, 2.0)),
    "efield": (EFIELD, (0.5, 1.0, 2.0)),
    "bfield": (BFIELD, (0.8, 1.5, 2.5)),
}


def frft_states(count=10, seed=1, grid=FRFT_GRID):
    return random_packets(grid, count, seed, HBAR_DIMENSIONLESS, unit_width=DIMENSIONLESS_WIDTH)


def physical_states(count=3, seed=2, grid=PROP_GRID):
    return random_packets(grid, count, seed, 1.0)


def plane_state():
    return gaussian_2d(PLANE_GRID, PLANE_GRID, 1.0, (0.5, -0.3), (0.4, 0.2))


def _deficit(a, b):
    return 1.0 - fidelity(a, b)


# -- fractional Fourier checks ----------------------------------------------------------


def check_frft_group(states=None):
    states = states or frft_states()
    angles = (0.3, 0.7, math.pi / 3)
    worst = 0.0
    for mu in angles:
        for nu in angles:
            if mu + nu >= math.pi:
                continue
            for psi in states:
                worst = max(worst, _deficit(frft(frft(psi, nu), mu), frft(psi, mu + nu)))
    return Check.at_most("frft group property deficit", worst, 1e-6)


def check_frft_identity(states=None):
    states = states or frft_states(3)
    exact = all(
        frft(psi, 0.0) is psi or np.array_equal(frft(psi, 0.0).values, psi.values) for psi in states
    )
    return Check("frft at angle 0 is the identity", 0.0 if exact else 1.0, 0.0, exact)


def direct_fourier_2pi(psi):
    """Dense-matrix ``integral psi(x) exp(-2 pi i x x') dx`` on the same grid."""
    x = psi.grid.points
    mat = np.exp(-2j * math.pi * np.outer(x, x))
    return psi.with_values(mat @ psi.values * psi.grid.dx)


def check_frft_quarter(states=None):
    states = states or frft_states(5)
    worst = max(_deficit(frft(psi, 0.5 * math.pi), direct_fourier_2pi(psi)) for psi in states)
    return Check.at_most("frft at pi/2 vs exp(-2 pi i x x') transform", worst, 1e-8)


def check_frft_eigen(grid=FRFT_GRID):
    worst = 0.0
    for k in range(6):
        h = hermite_gauss(k, grid)
        for g in (0.3, 0.25 * math.pi, 1.2):
            diff = frft(h, g).values - cmath.exp(-1j * k * g) * h.values
            worst = max(worst, math.sqrt(float(np.sum(np.abs(diff) ** 2)) * grid.dx))
    return Check.at_most("eigenrelation deviation k<=5", worst, 1e-4)


def check_frft_fast(states=None):
    states = states or frft_states(20, seed=3)
    worst = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for g in (0.3, 1.0, 2.0):
            for psi in states:
                worst = max(worst, _deficit(frft_fast(psi, g), frft(psi, g)))
    return Check.at_most("frft_fast vs quadrature deficit", worst, 1e-6)


def measure_speedup(n=4096, repeats=3):
    grid = Grid1D.symmetric(8.0, n)
    psi = WaveFunction1D(grid, gaussian(grid, 0.3).values, HBAR_DIMENSIONLESS)
    frft(psi, 1.0)
    frft_fast(psi, 1.0)

    def best(fn):
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            fn(psi, 1.0)
            times.append(time.perf_counter() - t0)
        return min(times)

    return best(frft) / best(frft_fast)


def check_frft_speed():
    return Check.at_least("frft_fast speedup at n=4096", measure_speedup(), 20.0)


def frft_residual_phase(grid=FRFT_GRID):
    """Phase of F_a F_b h relative to F_(a+b) h when a+b crosses pi."""
    h = hermite_gauss(1, grid)
    a = b = 0.6 * math.pi
    return phase_of_overlap(frft(h, a + b), frft(frft(h, b), a))


def frft_suite():
    return [
        check_frft_group(),
        check_frft_identity(),
        check_frft_quarter(),
        check_frft_eigen(),
        check_frft_fast(),
        check_frft_speed(),
        Check.info("residual phase across pi (rad)", frft_residual_phase()),
    ]


# -- propagator checks ----------------------------------------------------------------------


def check_kernel_geometry():
    worst = 0.0
    cases = [(FREE, t) for t in (0.5, 1.0, 2.0)] + [
        (SystemSpec.oscillator(m=1.3, omega=0.7, hbar=0.9), t) for t in (0.4, 1.1, 3.0)
    ]
    for sys, t in cases:
        derived = kernel_from_foliations(*propagator_geometry(sys, t), sys.hbar)
        closed = system_kernel(sys, t)
        for name in ("a_xx", "a_xpxp", "a_xxp"):
            ref = getattr(closed, name)[0, 0]
            worst = max(worst, abs(getattr(derived, name)[0, 0] - ref) / abs(ref))
        worst = max(worst, abs(derived.amp - closed.amp) / closed.amp)
        worst = max(worst, abs(derived.phase_amp - closed.phase_amp))
    return Check.at_most("kernel from flowed foliations, relative coefficient error", worst, 1e-12)


def random_area_configuration(rng):
    n = int(rng.integers(1, 3))
    if n == 1:
        f1 = LinearFoliation.from_direction(rng.normal(size=2))
        f2 = LinearFoliation.from_direction(rng.normal(size=2))
    else:
        f1 = LinearFoliation.product(*(LinearFoliation.from_direction(rng.normal(size=2)) for _ in range(2)))
        f2 = LinearFoliation.product(*(LinearFoliation.from_direction(rng.normal(size=2)) for _ in range(2)))
    vals = [rng.uniform(-3, 3, size=n) for _ in range(4)]
    return f1, f2, vals


def check_area_oracle(count=100, seed=5):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        f1, f2, (l2, q1, q2, l1) = random_area_configuration(rng)
        closed = symplectic_area(l2, q1, q2, l1, f1, f2)
        poly = polygon_symplectic_area(rectangle_vertices(l2, q1, q2, l1, f1, f2))
        worst = max(worst, abs(closed - poly) / max(1.0, abs(poly)))
    return Check.at_most("symplectic area vs polygon oracle (100 configurations)", worst, 1e-12)


def check_two_routes():
    checks = []
    for name, (sys, times) in ROUTE_TIMES.items():
        states = [plane_state()] if sys.n == 2 else physical_states(3)
        worst = 0.0
        for t in times:
            for psi in states:
                a = propagate(psi, sys, t, route="kernel")
                b = propagate(psi, sys, t, route="pipeline")
                worst = max(worst, _deficit(a, b))
        checks.append(Check.at_most(f"two-route deficit {name}", worst, 1e-8))
    return checks


def check_oracle_agreement():
    psi = gaussian(PROP_GRID, 1.0, 0.5, 0.7)
    out = []
    for name, sys, pot in (
        ("free", FREE, PotentialSpec()),
        ("efield", EFIELD, PotentialSpec.constant_force(EFIELD.force)),
        ("oscillator", OSC, PotentialSpec.harmonic(OSC.m, OSC.omega)),
    ):
        ref = split_step(psi, pot, sys.m, sys.hbar, 1.0, 512)
        k = propagate(psi, sys, 1.0, outgrid=PROP_GRID)
        out.append(Check.at_most(f"kernel vs split-step {name}", _deficit(k, ref), 1e-5))
    return out


def check_ground_phase():
    gs = ground_state(PROP_GRID, OSC.m, OSC.omega, OSC.hbar)
    t = 1.0
    evolved = split_step(gs, PotentialSpec.harmonic(OSC.m, OSC.omega), OSC.m, OSC.hbar, t, 512)
    err = abs(phase_of_overlap(gs, evolved) + 0.5 * OSC.omega * t)
    return Check.at_most("ground-state phase advance error (rad)", err, 1e-4)


def oscillator_kernel_phase():
    gs = ground_state(PROP_GRID, OSC.m, OSC.omega, OSC.hbar)
    return phase_of_overlap(gs, propagate(gs, OSC, 1.0))


def _moments(psi):
    x = expectation_position(psi)
    p = expectation_momentum(psi)
    return np.atleast_1d(x), np.atleast_1d(p)


def check_ehrenfest():
    worst = 0.0
    cases = [(FREE, gaussian(PROP_GRID, 1.0, 0.5, 0.7)), (OSC, gaussian(PROP_GRID, 1.0, 0.5, 0.7)),
             (EFIELD, gaussian(PROP_GRID, 1.0, 0.5, 0.7)), (BFIELD, plane_state())]
    for sys, psi in cases:
        x0, p0 = _moments(psi)
        for t in ROUTE_TIMES[sys.kind.value][1]:
            out = propagate(psi, sys, t)
            x1, p1 = _moments(out)
            want = classical_flow(sys, t)(np.concatenate([x0, p0]))
            worst = max(worst, np.abs(np.concatenate([x1, p1]) - want).max())
    return Check.at_most("Ehrenfest: kernel moments vs classical flow", worst, 1e-5)


def check_period():
    psi = gaussian(PROP_GRID, 1.0, 0.5, 0.7)
    out = propagate(psi, OSC, 2.0 * math.pi / OSC.omega)
    return Check.at_most("oscillator full period via substeps", _deficit(out, psi), 1e-6)


def propagators_suite():
    return [
        check_kernel_geometry(),
        check_area_oracle(),
        *check_two_routes(),
        *check_oracle_agreement(),
        check_ground_phase(),
        Check.info("oscillator kernel ground-state phase at t=1 (rad)", oscillator_kernel_phase()),
        check_ehrenfest(),
        check_period(),
    ]


# -- symmetry checks ------------------------------------------------------------------------


def check_lens_vs_oracle():
    psi0 = gaussian(MAP_GRID, 1.0, 0.5, 0.3)
    worst = 0.0
    for wt in (0.3, 0.7, 1.2):
        omega = OSC.omega
        t = math.tan(wt) / omega
        phit = propagate(psi0, FREE, t)
        mapped, tau = free_to_oscillator(phit, t, OSC.m, omega, grid=MAP_GRID)
        ref = split_step(psi0, PotentialSpec.harmonic(OSC.m, omega), OSC.m, OSC.hbar, tau, 1024)
        worst = max(worst, _deficit(mapped, ref))
    return Check.at_most("lens transform vs oscillator split-step", worst, 1e-5)


def check_lens_ground_state():
    gs = ground_state(MAP_GRID, OSC.m, OSC.omega, OSC.hbar)
    t = 1.0
    phit = propagate(gs, FREE, t)
    mapped, _ = free_to_oscillator(phit, t, OSC.m, OSC.omega, grid=MAP_GRID)
    return Check.at_most("lens-mapped free ground state is stationary", _deficit(mapped, gs), 1e-6)


def check_avron_herbst():
    psi0 = gaussian(PROP_GRID, 1.0, 0.5, 0.7)
    t = 1.0
    phit = propagate(psi0, FREE, t)
    mapped, _ = free_to_efield(phit, t, EFIELD.m, EFIELD.force, grid=PROP_GRID)
    ref = split_step(psi0, PotentialSpec.constant_force(EFIELD.force), EFIELD.m, EFIELD.hbar, t, 512)
    return Check.at_most("Avron-Herbst map vs constant-force split-step", _deficit(mapped, ref), 1e-5)


def free_plane_solution(grid, t, center=(0.5, -0.3), momentum=(0.4, 0.2), sigma=1.0):
    fx = gaussian_free_solution(grid, sigma, center[0], momentum[0], 1.0, 1.0, t).values
    fy = gaussian_free_solution(grid, sigma, center[1], momentum[1], 1.0, 1.0, t).values
    return WaveFunction2D(grid, grid, np.outer(fx, fy), 1.0)


def check_bfield_map():
    t = 0.8 / BFIELD.omega
    phit = free_plane_solution(PLANE_GRID, t)
    mapped, tau = free_to_bfield(phit, t, BFIELD.m, BFIELD.charge, BFIELD.field, PLANE_GRID, PLANE_GRID)
    ref = propagate(free_plane_solution(PLANE_GRID, 0.0), BFIELD, tau, PLANE_GRID, PLANE_GRID)
    return Check.at_most("magnetic map vs magnetic kernel", _deficit(mapped, ref), 1e-5)


def _frames_1d(kind, n, dt, tau_mid=0.6):
    grid = Grid1D.symmetric(12.0, n)
    frames = []
    for i in (-1, 0, 1):
        tau = tau_mid + i * dt
        if kind == "oscillator":
            t = TimeMap.oscillator(OSC.omega).inverse(tau)
            phi = gaussian_free_solution(grid, 1.0, 0.5, 0.3, 1.0, 1.0, t)
            frames.append(free_to_oscillator(phi, t, OSC.m, OSC.omega, grid=grid).state)
        else:
            phi = gaussian_free_solution(grid, 1.0, 0.5, 0.3, 1.0, 1.0, tau)
            frames.append(free_to_efield(phi, tau, EFIELD.m, EFIELD.force, grid=grid).state)
    return frames


def _frames_2d(n, dt, tau_mid=0.6):
    grid = Grid1D.symmetric(10.0, n)
    tmap = TimeMap.bfield(BFIELD.omega)
    frames = []
    for i in (-1, 0, 1):
        t = tmap.inverse(tau_mid + i * dt)
        frames.append(free_to_bfield(free_plane_solution(grid, t), t, BFIELD.m, BFIELD.charge,
                                     BFIELD.field, grid, grid).state)
    return frames


def residual_orders(kind):
    """Residuals at three resolutions (n and dt refined together) and the fitted orders."""
    if kind == "bfield":
        levels = [(32, 0.08), (64, 0.04), (128, 0.02)]
        res = [pde_residual(_frames_2d(n, dt), BFIELD, dt) for n, dt in levels]
    else:
        sys = OSC if kind == "oscillator" else EFIELD
        levels = [(256, 0.04), (512, 0.02), (1024, 0.01)]
        res = [pde_residual(_frames_1d(kind, n, dt), sys, dt) for n, dt in levels]
    orders = [math.log2(res[i] / res[i + 1]) for i in range(2)]
    return res, orders


def check_residual_order(kind):
    _, orders = residual_orders(kind)
    return Check.at_least(f"PDE residual convergence order ({kind} map)", min(orders), 1.8)


def check_maps_identity():
    psi = gaussian(PROP_GRID, 1.0, 0.5, 0.7)
    plane = plane_state()
    outs = [
        (free_to_oscillator(psi, 0.0, 1.0, 1.0).state, psi),
        (free_to_efield(psi, 0.0, 1.0, 1.0).state, psi),
        (free_to_bfield(plane, 0.0, 1.0, 1.0, 1.0).state, plane),
    ]
    exact = all(a is b or np.array_equal(a.values, b.values) for a, b in outs)
    return Check("all maps are the identity at t=0", 0.0 if exact else 1.0, 0.0, exact)


def check_round_trips():
    worst = 0.0
    for psi in physical_states(3, seed=7, grid=MAP_GRID):
        tau = 0.7
        fwd = oscillator_to_free(psi, tau, OSC.m, OSC.omega)
        back = free_to_oscillator(fwd.state, fwd.time, OSC.m, OSC.omega).state
        worst = max(worst, _deficit(resample(back, psi.grid), psi))
        e = free_to_efield(psi, 1.0, EFIELD.m, EFIELD.force)
        back = efield_to_free(e.state, 1.0, EFIELD.m, EFIELD.force).state
        worst = max(worst, _deficit(resample(back, psi.grid), psi))
    plane = plane_state()
    b = free_to_bfield(plane, 0.8, BFIELD.m, BFIELD.charge, BFIELD.field)
    back = bfield_to_free(b.state, b.time, BFIELD.m, BFIELD.charge, BFIELD.field).state
    worst = max(worst, _deficit(resample(back, plane.grid_x, plane.grid_y), plane))
    return Check.at_most("map round trips", worst, 1e-10)


def symmetry_suite():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return [
            check_lens_vs_oracle(),
            check_lens_ground_state(),
            check_avron_herbst(),
            check_bfield_map(),
            check_residual_order("oscillator"),
            check_residual_order("efield"),
            check_residual_order("bfield"),
            check_maps_identity(),
            check_round_trips(),
        ]


# -- holonomy --------------------------------------------------------------------------------


def linear_loops():
    return {
        "frft inverse pair": [FrFT(0.9), FrFT(-0.9)],
        "fourier to the fourth": [Fourier(), Fourier(), Fourier(), Fourier()],
        "dilation through fourier": [Dilate(1.5), Fourier(), Dilate(1.5), InverseFourier()],
        "chirp conjugated by frft": [
            FrFT(0.4),
            Galilei(GalileiGenerator.quadratic(0.3)),
            FrFT(-0.4),
            FrFT(0.4),
            Galilei(GalileiGenerator.quadratic(-0.3)),
            FrFT(-0.4),
        ],
    }


def holonomy_states(self_conjugate=False):
    # the fractional kernels need the finer spacing of the narrow window
    grid = Grid1D.self_conjugate(1024) if self_conjugate else FRFT_GRID
    return random_packets(grid, 3, 11, HBAR_DIMENSIONLESS, unit_width=DIMENSIONLESS_WIDTH)


def check_linear_holonomy():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return [
            Check.at_most(
                f"linear loop: {name}",
                holonomy_probe(loop, holonomy_states(name == "fourier to the fourth")),
                1e-6,
            )
            for name, loop in linear_loops().items()
        ]


def nonlinear_holonomy(eps_values=(0.01, 0.03, 0.1)):
    states = holonomy_states()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return {eps: holonomy_probe(cubic_commutator_loop(eps), states) for eps in eps_values}


def holonomy_suite():
    checks = check_linear_holonomy()
    for eps, dev in nonlinear_holonomy().items():
        checks.append(Check.info(f"cubic commutator loop deviation, eps={eps}", dev))
    return checks


def run_suite(name):
    builders = {
        "frft": frft_suite,
        "propagators": propagators_suite,
        "symmetry": symmetry_suite,
        "holonomy": holonomy_suite,
    }
    if name not in builders:
        from .errors import ValidationError

        raise ValidationError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return report(name, builders[name]())
