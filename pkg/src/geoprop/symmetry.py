"""Maps carrying free-particle solutions to solutions of other linear systems.

Each map takes a free solution at time ``t`` and returns the corresponding
solution of the target system at its own time ``tau``, together with
``tau``.  The inverse direction is provided for round trips.

* oscillator: lens transform, ``omega tau = arctan(omega t)``
* constant force: Avron-Herbst translation and boost, ``tau = t``
* magnetic field: rotation-and-scale of the plane,
  ``omega tau = 2 arctan(omega t / 2)``
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import TimeOutOfDomain, ValidationError
from .kernels import GalileiGenerator
from .transforms import dilate, galilei, linear_map_2d, translate
from .waves import resample

# the magnetic time map is rejected this close to its asymptote omega tau = pi
BFIELD_EDGE = 1e-6


class MappedState(NamedTuple):
    state: object
    time: float


@dataclass(frozen=True)
class TimeMap:
    """Strictly increasing reparametrization ``t -> tau`` with ``tau(0) = 0``.

    ``tau_bound`` is the supremum of ``|tau|`` (``inf`` when unbounded).
    """

    name: str
    forward: Callable[[float], float]
    inverse: Callable[[float], float]
    tau_bound: float = math.inf

    def __call__(self, t):
        return self.forward(t)

    @classmethod
    def oscillator(cls, omega):
        if omega == 0.0:
            return cls.identity("oscillator")
        return cls(
            "oscillator",
            lambda t: math.atan(omega * t) / omega,
            lambda tau: math.tan(omega * tau) / omega,
            0.5 * math.pi / abs(omega),
        )

    @classmethod
    def efield(cls):
        return cls.identity("efield")

    @classmethod
    def bfield(cls, omega):
        if omega == 0.0:
            return cls.identity("bfield")
        return cls(
            "bfield",
            lambda t: 2.0 * math.atan(0.5 * omega * t) / omega,
            lambda tau: 2.0 * math.tan(0.5 * omega * tau) / omega,
            math.pi / abs(omega),
        )

    @classmethod
    def identity(cls, name):
        return cls(name, lambda t: float(t), lambda tau: float(tau))


def _finite_time(t):
    t = float(t)
    if not math.isfinite(t):
        raise TimeOutOfDomain(f"time must be finite, got {t}")
    return t


def _check_positive(name, value):
    if not (value > 0) or not math.isfinite(value):
        raise ValidationError(f"{name} must be positive and finite, got {value}")


# -- oscillator ----------------------------------------------------------------------


def _lens_phase(m, omega, t):
    return GalileiGenerator.quadratic(-m * omega**2 * t / (2.0 * (1.0 + (omega * t) ** 2)))


def _onto(psi, grid):
    return psi if grid is None else resample(psi, grid)


def free_to_oscillator(phi, t, m, omega, grid=None):
    """Lens transform: free solution at ``t`` to oscillator solution at ``tau``.

    The result lives on the dilated input grid unless ``grid`` is given.
    """
    _check_positive("mass", m)
    t = _finite_time(t)
    if phi.ndim != 1:
        raise ValidationError("the lens transform acts on 1D wavefunctions")
    if t == 0.0 or omega == 0.0:
        return MappedState(_onto(phi, grid), t)
    scale = math.sqrt(1.0 + (omega * t) ** 2)
    psi = dilate(galilei(phi, _lens_phase(m, omega, t)), scale)
    return MappedState(_onto(psi, grid), TimeMap.oscillator(omega)(t))


def oscillator_to_free(psi, tau, m, omega):
    """Inverse lens transform; requires ``|omega tau| < pi/2``."""
    _check_positive("mass", m)
    tau = _finite_time(tau)
    if abs(omega * tau) >= 0.5 * math.pi:
        raise TimeOutOfDomain(f"|omega tau| = {abs(omega * tau):.6g} must be below pi/2")
    if tau == 0.0 or omega == 0.0:
        return MappedState(psi, tau)
    t = TimeMap.oscillator(omega).inverse(tau)
    scale = math.sqrt(1.0 + (omega * t) ** 2)
    phi = galilei(dilate(psi, 1.0 / scale), -_lens_phase(m, omega, t))
    return MappedState(phi, t)


# -- constant force ---------------------------------------------------------------------


def free_to_efield(phi, t, m, force, hbar=None, gauge=True, grid=None):
    """Avron-Herbst map to the potential ``-force * x``.

    ``psi(x) = phi(x - F t^2/(2m)) exp(i F t (x - F t^2/(2m)) / hbar)``
    times the gauge constant ``exp(i F^2 t^3 / (3 m hbar))`` when ``gauge``
    is true; without it the result solves the equation whose potential
    carries the extra time-dependent constant.
    """
    _check_positive("mass", m)
    t = _finite_time(t)
    if phi.ndim != 1:
        raise ValidationError("the constant-force map acts on 1D wavefunctions")
    if t == 0.0 or force == 0.0:
        return MappedState(_onto(phi, grid), t)
    hbar = phi.hbar if hbar is None else hbar
    boosted = galilei(phi, GalileiGenerator.from_powers([force * t]))
    psi = translate(boosted, force * t * t / (2.0 * m))
    if gauge:
        psi = psi.with_values(psi.values * np.exp(1j * force**2 * t**3 / (3.0 * m * hbar)))
    return MappedState(_onto(psi, grid), t)


def efield_to_free(psi, t, m, force, hbar=None, gauge=True):
    _check_positive("mass", m)
    t = _finite_time(t)
    if t == 0.0 or force == 0.0:
        return MappedState(psi, t)
    hbar = psi.hbar if hbar is None else hbar
    if gauge:
        psi = psi.with_values(psi.values * np.exp(-1j * force**2 * t**3 / (3.0 * m * hbar)))
    shifted = translate(psi, -force * t * t / (2.0 * m))
    return MappedState(galilei(shifted, GalileiGenerator.from_powers([-force * t])), t)


# -- magnetic field -------------------------------------------------------------------------


def _bfield_geometry(m, omega, t):
    d = 4.0 + (omega * t) ** 2
    R = np.array([[4.0, 2.0 * omega * t], [-2.0 * omega * t, 4.0]]) / d
    rho2 = 4.0 / d  # det R; R is rho times a rotation
    phase = -m * omega**2 * t / (2.0 * d)
    return R, rho2, phase


def free_to_bfield(phi, t, m, charge, field, grid_x=None, grid_y=None):
    """Map a free 2D solution at ``t`` to the magnetic solution at ``tau``.

    ``psi(r~) = |det R|^(-1/2) phi(R^-1 r~) exp(i S(R^-1 r~)/hbar)`` with
    ``S(r) = -m w^2 t |r|^2 / (2 (4 + w^2 t^2))``.  The phase is applied
    after interpolation so the chirp is never resampled.
    """
    _check_positive("mass", m)
    t = _finite_time(t)
    if phi.ndim != 2:
        raise ValidationError("the magnetic map acts on 2D wavefunctions")
    omega = charge * field / m
    if t == 0.0 or omega == 0.0:
        if grid_x is None and grid_y is None:
            return MappedState(phi, t)
        return MappedState(resample(phi, grid_x or phi.grid_x, grid_y or phi.grid_y), t)
    tmap = TimeMap.bfield(omega)
    tau = tmap(t)
    if abs(omega * tau) >= math.pi - BFIELD_EDGE:
        raise TimeOutOfDomain(
            f"omega tau = {omega * tau:.17g} is within {BFIELD_EDGE} of the branch edge pi"
        )
    R, rho2, phase = _bfield_geometry(m, omega, t)
    psi = linear_map_2d(phi, R, grid_x, grid_y)
    psi = galilei(psi, GalileiGenerator.radial(phase / rho2))
    return MappedState(psi, tau)


def bfield_to_free(psi, tau, m, charge, field):
    """Inverse of :func:`free_to_bfield`; requires ``|omega tau| < pi``."""
    _check_positive("mass", m)
    tau = _finite_time(tau)
    omega = charge * field / m
    if tau == 0.0 or omega == 0.0:
        return MappedState(psi, tau)
    if abs(omega * tau) >= math.pi - BFIELD_EDGE:
        raise TimeOutOfDomain(f"|omega tau| = {abs(omega * tau):.6g} must stay below pi")
    t = TimeMap.bfield(omega).inverse(tau)
    R, rho2, phase = _bfield_geometry(m, omega, t)
    unphased = galilei(psi, GalileiGenerator.radial(-phase / rho2))
    return MappedState(linear_map_2d(unphased, np.linalg.inv(R)), t)
