"""Independent reference machinery.

Nothing here uses the propagator kernels or the phase-space construction:
a Strang split-step integrator, the textbook free Gaussian packet, a
finite-difference residual of the Schroedinger equation, and the shoelace
area of a polygon.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import AliasingRisk, GridMismatch, TooFewFrames, ValidationError
from .phasespace import SystemKind
from .waves import WaveFunction1D, same_grid

# relative spectral magnitude tolerated in the outer 5% of the momentum band
SPECTRAL_EDGE = 1e-6


@dataclass(frozen=True)
class PotentialSpec:
    """``V(x) = c0 + c1 x + c2 x^2``."""

    c0: float = 0.0
    c1: float = 0.0
    c2: float = 0.0

    def __post_init__(self):
        for name in ("c0", "c1", "c2"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise ValidationError(f"potential coefficient {name} must be finite")
            object.__setattr__(self, name, val)

    @classmethod
    def from_coefficients(cls, coeffs):
        coeffs = list(coeffs)
        if len(coeffs) > 3 and any(c != 0 for c in coeffs[3:]):
            raise ValidationError("potential degree must be at most 2")
        coeffs = (coeffs + [0.0, 0.0, 0.0])[:3]
        return cls(*coeffs)

    @classmethod
    def constant_force(cls, force):
        """``V = -force * x``."""
        return cls(0.0, -force, 0.0)

    @classmethod
    def harmonic(cls, m, omega):
        return cls(0.0, 0.0, 0.5 * m * omega**2)

    def __call__(self, x):
        return self.c0 + self.c1 * x + self.c2 * x * x

    def gradient(self, x):
        return self.c1 + 2.0 * self.c2 * x


def _check_band(psi):
    spec = np.abs(np.fft.fft(psi.values))
    peak = spec.max()
    if peak == 0.0:
        return
    k = np.abs(np.fft.fftfreq(psi.grid.n))
    if spec[k > 0.45].max(initial=0.0) > SPECTRAL_EDGE * peak:
        raise AliasingRisk("initial state has momentum content at the edge of the grid band")


def split_step(psi, potential, m, hbar, t, steps):
    """Strang splitting: half potential kick, free drift, half potential kick."""
    if psi.ndim != 1:
        raise ValidationError("split_step integrates 1D wavefunctions")
    if int(steps) != steps or steps < 1:
        raise ValidationError(f"step count must be a positive integer, got {steps}")
    if m <= 0 or hbar <= 0:
        raise ValidationError("mass and hbar must be positive")
    if not math.isclose(hbar, psi.hbar, rel_tol=1e-12):
        raise ValidationError(f"wavefunction hbar {psi.hbar} differs from {hbar}")
    _check_band(psi)
    grid = psi.grid
    x = grid.points
    dt = float(t) / int(steps)
    kick_rate = np.abs(potential.gradient(np.array([grid.x0, grid.x_last]))).max()
    if kick_rate * 0.5 * abs(dt) / hbar * grid.dx > math.pi:
        raise AliasingRisk("potential half-step phase outruns the grid; use more steps")
    k = 2.0 * math.pi * np.fft.fftfreq(grid.n, grid.dx)
    drift = np.exp(-0.5j * hbar * k * k * dt / m)
    half_kick = np.exp(-0.5j * potential(x) * dt / hbar)
    vals = psi.values.copy()
    for _ in range(int(steps)):
        vals *= half_kick
        vals = np.fft.ifft(np.fft.fft(vals) * drift)
        vals *= half_kick
    return WaveFunction1D(grid, vals, psi.hbar)


def gaussian_free_solution(grid, sigma0, x0, p0, m, hbar, t):
    """Free Gaussian packet at time ``t``; unit norm and ``exp(i p0 (x - x0)/hbar)`` at t = 0."""
    if not (sigma0 > 0):
        raise ValidationError(f"width must be positive, got {sigma0}")
    x = grid.points
    alpha = 1.0 + 1j * hbar * t / (2.0 * m * sigma0**2)
    y = x - x0 - p0 * t / m
    vals = (
        (2.0 * math.pi * sigma0**2) ** -0.25
        / np.sqrt(alpha)
        * np.exp(
            -(y**2) / (4.0 * sigma0**2 * alpha)
            + 1j * p0 * (x - x0) / hbar
            - 0.5j * p0**2 * t / (m * hbar)
        )
    )
    return WaveFunction1D(grid, vals, hbar)


def _wavenumbers(grid):
    return 2.0 * math.pi * np.fft.fftfreq(grid.n, grid.dx)


def _hamiltonian(psi, sys):
    hb, m = sys.hbar, sys.m
    v = psi.values
    if psi.ndim == 1:
        x = psi.grid.points
        k = _wavenumbers(psi.grid)
        out = np.fft.ifft(np.fft.fft(v) * (hb * hb * k * k / (2.0 * m)))
        if sys.kind is SystemKind.OSCILLATOR:
            out = out + 0.5 * m * sys.omega**2 * x * x * v
        elif sys.kind is SystemKind.EFIELD:
            out = out - sys.force * x * v
        elif sys.kind is not SystemKind.FREE:
            raise ValidationError(f"{sys.kind.value} system needs a 2D wavefunction")
        return out
    kx = _wavenumbers(psi.grid_x)[:, None]
    ky = _wavenumbers(psi.grid_y)[None, :]
    V = np.fft.fft2(v)
    out = np.fft.ifft2(V * (hb * hb * (kx * kx + ky * ky) / (2.0 * m)))
    if sys.kind is SystemKind.FREE:
        return out
    if sys.kind is not SystemKind.BFIELD:
        raise ValidationError(f"{sys.kind.value} system needs a 1D wavefunction")
    w = sys.omega
    X, Y = psi.mesh
    px = np.fft.ifft2(V * (-1j * hb) * (1j * kx))
    py = np.fft.ifft2(V * (-1j * hb) * (1j * ky))
    # (p - eA)^2 / 2m with A = (B/2)(-y, x)
    return out + 0.5 * w * (Y * px - X * py) + 0.125 * m * w * w * (X * X + Y * Y) * v


def pde_residual(frames, sys, dt, margin=1.0 / 16.0):
    """Largest interior L2 norm of ``i hbar d/dt psi - H psi`` over the frames.

    ``frames`` are equally spaced in time by ``dt`` and share one grid.  The
    time derivative is the central difference at each interior frame; the
    spatial derivatives are spectral.  A ``margin`` fraction of each grid
    edge is excluded.
    """
    frames = list(frames)
    if len(frames) < 3:
        raise TooFewFrames(f"need at least 3 frames, got {len(frames)}")
    if not (dt > 0):
        raise ValidationError("frame spacing must be positive")
    for f in frames[1:]:
        if not same_grid(f, frames[0]):
            raise GridMismatch("all frames must share one grid")
    worst = 0.0
    for i in range(1, len(frames) - 1):
        dpsi = (frames[i + 1].values - frames[i - 1].values) / (2.0 * dt)
        res = 1j * sys.hbar * dpsi - _hamiltonian(frames[i], sys)
        if res.ndim == 1:
            cut = int(margin * res.shape[0])
            inner = res[cut : res.shape[0] - cut]
        else:
            cx = int(margin * res.shape[0])
            cy = int(margin * res.shape[1])
            inner = res[cx : res.shape[0] - cx, cy : res.shape[1] - cy]
        worst = max(worst, math.sqrt(float(np.sum(np.abs(inner) ** 2)) * frames[i].measure))
    return worst


def polygon_symplectic_area(vertices):
    """Shoelace area of a closed polygon in phase space, summed over (x_i, p_i) planes.

    ``vertices`` is a sequence of points ``(x.., p..)`` in traversal order.
    """
    V = np.asarray(vertices, dtype=np.float64)
    if V.ndim != 2 or V.shape[1] % 2 or V.shape[0] < 3:
        raise ValidationError("need at least three phase-space points of even dimension")
    n = V.shape[1] // 2
    total = 0.0
    for i in range(n):
        x = V[:, i]
        p = V[:, n + i]
        total += 0.5 * float(np.sum(x * np.roll(p, -1) - np.roll(x, -1) * p))
    return total


def ground_state(grid, m, omega, hbar):
    """Oscillator ground state ``(m w/(pi hbar))^(1/4) exp(-m w x^2 / (2 hbar))``."""
    x = grid.points
    vals = (m * omega / (math.pi * hbar)) ** 0.25 * np.exp(-m * omega * x * x / (2.0 * hbar))
    return WaveFunction1D(grid, vals, hbar)


def phase_of_overlap(a, b):
    """Argument of ``<a|b>``."""
    from .waves import inner

    return cmath.phase(inner(a, b))
