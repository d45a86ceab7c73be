"""Closed-form propagators of the four linear systems and their application.

Every propagator is a :class:`QuadraticKernel`.  :func:`propagate` evolves a
state either by direct kernel quadrature (``route="kernel"``) or by the
three-step factorization phase / scaled Fourier / phase derived from the
flowed foliations (``route="pipeline"``).
"""
from __future__ import annotations

import cmath
import itertools
import math
import warnings

import numpy as np

from ._accel import nudft1, nudft2
from .errors import SingularTime, SupportEscape, ValidationError, ZeroTime
from .kernels import GalileiGenerator, QuadraticKernel
from .phasespace import (
    SystemKind,
    SystemSpec,
    classical_flow,
    fourier_steps,
    propagator_geometry,
)
from .transforms import (
    ALIASING_SLACK,
    dilate,
    fft_center,
    fourier,
    galilei,
    linear_map_2d,
    parity,
)
from .waves import WaveFunction1D, WaveFunction2D, norm, resample

__all__ = [
    "QuadraticKernel",
    "GalileiGenerator",
    "apply_kernel",
    "free_kernel",
    "oscillator_kernel",
    "efield_kernel",
    "bfield_kernel",
    "system_kernel",
    "propagate",
    "default_outgrid",
    "oscillator_length",
    "SINGULAR_SIN",
    "NORM_ESCAPE",
]

SINGULAR_SIN = 1e-6
NORM_ESCAPE = 1e-4
SAFE_OFFSET = 1e-3


def _split_complex(z):
    z = complex(z)
    r = abs(z)
    return r, z / r


def _check_time(t):
    t = float(t)
    if not math.isfinite(t):
        raise ValidationError("time must be finite")
    if t == 0.0:
        raise ZeroTime("the propagator at t = 0 is the identity; use propagate()")
    return t


def _singular(theta, omega, scale, what):
    """SingularTime for phase ``theta`` near a multiple of pi (``t = scale*theta/omega``)."""
    k = round(theta / math.pi)
    safe = tuple(sorted(scale * (k * math.pi + d) / omega for d in (-SAFE_OFFSET, SAFE_OFFSET)))
    return SingularTime(
        f"{what} is singular at this time (phase {theta:.6g} is within {SINGULAR_SIN} of "
        f"{k} pi); nearest safe times: {safe[0]!r}, {safe[1]!r}",
        safe_times=safe,
    )


def free_kernel(m, hbar, t):
    """``sqrt(m/(2 pi i hbar t)) exp(i m (x - x')^2 / (2 hbar t))``."""
    t = _check_time(t)
    amp, phase = _split_complex(cmath.sqrt(m / (2j * math.pi * hbar * t)))
    a = m / (2.0 * t)
    return QuadraticKernel(1, a, a, -2.0 * a, 0.0, 0.0, 0.0, amp, phase, hbar)


def oscillator_kernel(m, omega, hbar, t):
    """Harmonic oscillator propagator (Mehler kernel), principal branch."""
    t = _check_time(t)
    if omega == 0.0:
        return free_kernel(m, hbar, t)
    theta = omega * t
    s = math.sin(theta)
    if abs(s) < SINGULAR_SIN:
        raise _singular(theta, omega, 1.0, "oscillator kernel")
    mw = m * omega
    amp, phase = _split_complex(cmath.sqrt(mw / (2j * math.pi * hbar * s)))
    a = 0.5 * mw * math.cos(theta) / s
    return QuadraticKernel(1, a, a, -mw / s, 0.0, 0.0, 0.0, amp, phase, hbar)


def efield_kernel(m, force, hbar, t, gauge_constant=True):
    """Constant-force propagator: free part plus ``F t (x + x')/2`` and ``-F^2 t^3/(24 m)``."""
    t = _check_time(t)
    base = free_kernel(m, hbar, t)
    b = 0.5 * force * t
    c0 = -(force**2) * t**3 / (24.0 * m) if gauge_constant else 0.0
    return QuadraticKernel(
        1, base.a_xx, base.a_xpxp, base.a_xxp, b, b, c0, base.amp, base.phase_amp, hbar
    )


def bfield_kernel(m, charge, field, hbar, t):
    """Symmetric-gauge propagator of a charge in a uniform magnetic field (n = 2).

    Exponent ``(m w/4) cot(w t/2) |r - r'|^2 - (m w/2)(x' y - y' x)`` over
    ``hbar``; prefactor ``m w / (4 pi i hbar sin(w t/2))``.
    """
    t = _check_time(t)
    omega = charge * field / m
    half = 0.5 * omega * t
    if omega == 0.0:
        a = m / (2.0 * t)
        pref = m / (2j * math.pi * hbar * t)
    else:
        s = math.sin(half)
        if abs(s) < SINGULAR_SIN:
            raise _singular(half, omega, 2.0, "magnetic kernel")
        a = 0.25 * m * omega * math.cos(half) / s
        pref = m * omega / (4j * math.pi * hbar * s)
    amp, phase = _split_complex(pref)
    eye = np.eye(2)
    rot = 0.5 * m * omega * np.array([[0.0, 1.0], [-1.0, 0.0]])
    return QuadraticKernel(2, a * eye, a * eye, -2.0 * a * eye + rot, None, None, 0.0, amp, phase, hbar)


def system_kernel(sys, t, gauge_constant=True):
    kind = sys.kind
    if kind is SystemKind.FREE:
        return free_kernel(sys.m, sys.hbar, t)
    if kind is SystemKind.OSCILLATOR:
        return oscillator_kernel(sys.m, sys.omega, sys.hbar, t)
    if kind is SystemKind.EFIELD:
        return efield_kernel(sys.m, sys.force, sys.hbar, t, gauge_constant)
    return bfield_kernel(sys.m, sys.charge, sys.field, sys.hbar, t)


def oscillator_length(m, omega, hbar):
    """Length unit in which the oscillator kernel becomes the dimensionless FrFT kernel."""
    return math.sqrt(2.0 * math.pi * hbar / (m * omega))


# -- kernel application --------------------------------------------------------------


def _edge_rate(kernel, grids_in, grids_out):
    """Largest phase advance per input sample of the integrand over the grid box."""
    n = kernel.n
    ends_in = [(g.x0, g.x_last) for g in grids_in]
    ends_out = [(g.x0, g.x_last) for g in grids_out]
    worst = 0.0
    for r in itertools.product(*ends_in):
        r = np.array(r)
        for rp in itertools.product(*ends_out):
            grad = 2.0 * kernel.a_xx @ r + kernel.a_xxp @ np.array(rp) + kernel.b_x
            for i in range(n):
                worst = max(worst, abs(grad[i]) / kernel.hbar * grids_in[i].dx)
    return worst


def check_kernel_aliasing(kernel, grids_in, grids_out):
    from .errors import AliasingRisk

    rate = _edge_rate(kernel, grids_in, grids_out)
    limit = math.pi * (1.0 + ALIASING_SLACK)
    if rate > limit:
        raise AliasingRisk(
            f"kernel phase advances {rate:.3g} rad between input samples at the grid edge "
            f"(limit {limit:.3g}); refine the input grid or shrink the windows"
        )


def _warn_escape(before, after):
    if before > 0 and after < before * (1.0 - NORM_ESCAPE):
        warnings.warn(
            f"output window holds only {after / before:.6f} of the input norm",
            SupportEscape,
            stacklevel=3,
        )


def apply_kernel(psi, kernel, outgrid=None, outgrid_y=None):
    """``psi'(x'_k) = sum_j K(x_j, x'_k) psi(x_j) dx`` by direct quadrature."""
    if kernel.n != psi.ndim:
        raise ValidationError(f"{kernel.n}D kernel applied to a {psi.ndim}D wavefunction")
    if not math.isclose(kernel.hbar, psi.hbar, rel_tol=1e-12):
        raise ValidationError(f"kernel hbar {kernel.hbar} differs from wavefunction hbar {psi.hbar}")
    hb = kernel.hbar
    if psi.ndim == 1:
        gin = psi.grid
        gout = outgrid or gin
        check_kernel_aliasing(kernel, (gin,), (gout,))
        x = gin.points
        xp = gout.points
        a, ap, c = kernel.a_xx[0, 0], kernel.a_xpxp[0, 0], kernel.a_xxp[0, 0]
        g = psi.values * np.exp(1j * (a * x * x + kernel.b_x[0] * x) / hb) * gin.dx
        s = nudft1(g, c * x / hb, xp)
        post = np.exp(1j * (ap * xp * xp + kernel.b_xp[0] * xp + kernel.c0) / hb)
        out = WaveFunction1D(gout, kernel.prefactor * post * s, hb)
    else:
        gx_in, gy_in = psi.grid_x, psi.grid_y
        gx = outgrid or gx_in
        gy = outgrid_y or gy_in
        check_kernel_aliasing(kernel, (gx_in, gy_in), (gx, gy))
        X, Y = psi.mesh
        R = np.stack([X, Y], axis=-1)
        g = psi.values * np.exp(
            1j * (np.einsum("...i,ij,...j->...", R, kernel.a_xx, R) + R @ kernel.b_x) / hb
        ) * psi.measure
        Xp, Yp = np.meshgrid(gx.points, gy.points, indexing="ij")
        Rp = np.stack([Xp.ravel(), Yp.ravel()], axis=1)
        CR = Rp @ kernel.a_xxp.T / hb  # rows: a_xxp @ r'
        s = nudft2(g, gx_in.points, gy_in.points, CR[:, 0], CR[:, 1])
        post = np.exp(
            1j * (np.einsum("mi,ij,mj->m", Rp, kernel.a_xpxp, Rp) + Rp @ kernel.b_xp + kernel.c0) / hb
        )
        out = WaveFunction2D(gx, gy, (kernel.prefactor * post * s).reshape(gx.n, gy.n), hb)
    _warn_escape(norm(psi), norm(out))
    return out


# -- propagation ----------------------------------------------------------------------


def default_outgrid(psi, sys, t):
    """Input grid(s) moved by the translation part of the classical flow."""
    shift = classical_flow(sys, t).translation
    if psi.ndim == 1:
        return (psi.grid.shifted(shift[0]),)
    return psi.grid_x.shifted(shift[0]), psi.grid_y.shifted(shift[1])


def _singular_phase(sys, t):
    """Phase whose sine must stay away from zero, with its time scale, or None."""
    if sys.kind is SystemKind.OSCILLATOR and sys.omega != 0.0:
        return sys.omega * t, 1.0
    if sys.kind is SystemKind.BFIELD and sys.omega != 0.0:
        return 0.5 * sys.omega * t, 2.0
    return None


def _is_singular(sys, t):
    ph = _singular_phase(sys, t)
    return ph is not None and abs(math.sin(ph[0])) < SINGULAR_SIN


def _pipeline(psi, sys, t, grids):
    steps = fourier_steps(*propagator_geometry(sys, t), sys.hbar)
    work = galilei(psi, steps.pre)
    centers = [fft_center(g) for g in ((psi.grid,) if psi.ndim == 1 else (psi.grid_x, psi.grid_y))]
    spec = fourier(work)
    if psi.ndim == 1:
        w = steps.coupling[0, 0]
        if w < 0:
            spec = parity(spec)
        spec = dilate(spec, abs(w))
        core = resample(spec, grids[0], carrier=-w * centers[0])
        fourier_phase = cmath.exp(-0.25j * math.pi)
    else:
        core = linear_map_2d(
            spec, np.linalg.inv(steps.coupling), grids[0], grids[1],
            carrier=(-centers[0], -centers[1]),
        )
        fourier_phase = -1j
    core = core.with_values(core.values * (steps.core_phase / fourier_phase))
    return galilei(core, steps.post)


def propagate(psi, sys, t, outgrid=None, outgrid_y=None, route="kernel", substep=True,
              gauge_constant=True):
    """Evolve ``psi`` under ``sys`` for time ``t``.

    ``route`` is ``"kernel"`` (direct quadrature of the closed-form kernel)
    or ``"pipeline"`` (phase, scaled Fourier, phase).  Times at which the
    kernel is singular are split into equal nonsingular substeps when
    ``substep`` is true and raise :class:`SingularTime` otherwise.  The
    output grid defaults to the input grid moved by the classical flow.
    """
    if route not in ("kernel", "pipeline"):
        raise ValidationError(f"unknown route {route!r}; expected 'kernel' or 'pipeline'")
    if sys.kind is SystemKind.FREE and psi.ndim == 2:
        # the planar free particle is the zero-field magnetic system
        sys = SystemSpec.bfield(m=sys.m, charge=1.0, field=0.0, hbar=sys.hbar)
    if psi.ndim != sys.n:
        raise ValidationError(f"{sys.kind.value} system needs a {sys.n}D wavefunction")
    if not math.isclose(psi.hbar, sys.hbar, rel_tol=1e-12):
        raise ValidationError(f"wavefunction hbar {psi.hbar} differs from system hbar {sys.hbar}")
    t = float(t)
    if not math.isfinite(t):
        raise ValidationError("time must be finite")
    grids = (outgrid, outgrid_y)[: psi.ndim]
    if t == 0.0:
        if all(g is None for g in grids):
            return psi
        if psi.ndim == 1:
            return resample(psi, outgrid)
        return resample(psi, outgrid or psi.grid_x, outgrid_y or psi.grid_y)

    if _is_singular(sys, t):
        if not substep:
            theta, scale = _singular_phase(sys, t)
            raise _singular(theta, sys.omega, scale, f"{sys.kind.value} propagator")
        theta, _ = _singular_phase(sys, t)
        pieces = max(2, math.ceil(abs(theta) / (0.5 * math.pi)))
        dt = t / pieces
        for i in range(pieces):
            last = i == pieces - 1
            og = grids if last else (None,) * psi.ndim
            psi = propagate(psi, sys, dt, *og, route=route, substep=False,
                            gauge_constant=gauge_constant)
        return psi

    if any(g is None for g in grids):
        defaults = default_outgrid(psi, sys, t)
        grids = tuple(g or d for g, d in zip(grids, defaults))
    if route == "kernel":
        return apply_kernel(psi, system_kernel(sys, t, gauge_constant), *grids)
    out = _pipeline(psi, sys, t, grids)
    if gauge_constant and sys.kind is SystemKind.EFIELD:
        # time-only phase that the leaf geometry cannot see
        c0 = -(sys.force**2) * t**3 / (24.0 * sys.m)
        out = out.with_values(out.values * cmath.exp(1j * c0 / sys.hbar))
    _warn_escape(norm(psi), norm(out))
    return out
