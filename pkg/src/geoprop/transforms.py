"""Elementary unitary transforms and their composition.

Building blocks: polynomial phase multiplication (Galilei), the scaled
Fourier transform and its inverse, dilation, parity, translation, a general
linear map of the plane, and the fractional Fourier transform by direct
quadrature and by its chirp / Fourier / dilation factorization.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._accel import nudft1
from .errors import (
    AliasingRisk,
    EmptyTestset,
    NonpositiveScale,
    ValidationError,
)
from .kernels import GalileiGenerator, QuadraticKernel
from .phasespace import AffineSymplecticMap
from .waves import (
    HBAR_DIMENSIONLESS,
    Grid1D,
    WaveFunction1D,
    WaveFunction2D,
    fidelity,
    interpolate,
    resample,
    same_grid,
)

SINGULAR_SIN = 1e-6
ALIASING_SLACK = 0.1


def fft_center(grid):
    """Grid point with index n//2 (the zero-frequency sample of an FFT grid)."""
    return grid.x0 + (grid.n // 2) * grid.dx


# -- Galilei ----------------------------------------------------------------


def galilei(psi, generator):
    """Multiply by ``exp(i S(x) / hbar)``."""
    if not isinstance(generator, GalileiGenerator):
        generator = GalileiGenerator(generator)
    if generator.ndim != psi.ndim:
        raise ValidationError(f"{generator.ndim}D generator applied to a {psi.ndim}D wavefunction")
    if generator.is_zero():
        return psi
    if psi.ndim == 1:
        S = generator(psi.grid.points)
    else:
        X, Y = psi.mesh
        S = generator(X, Y)
    return psi.with_values(psi.values * np.exp(1j * S / psi.hbar))


# -- Fourier ------------------------------------------------------------------


def _dft_axis(values, src, dst, hbar, sign, axis):
    """``c * src.dx * sum_j v_j exp(sign * i p_k x_j / hbar)`` for grids with dx*dp = 2 pi hbar / n."""
    n = src.n
    shape = [1] * values.ndim
    shape[axis] = -1
    j = np.arange(n)
    pre = np.exp(sign * 1j * dst.x0 * j * src.dx / hbar).reshape(shape)
    post = np.exp(sign * 1j * dst.points * src.x0 / hbar).reshape(shape)
    if sign < 0:
        core = np.fft.fft(values * pre, axis=axis)
        c = cmath.sqrt(2j * math.pi * hbar) ** -1
    else:
        core = np.fft.ifft(values * pre, axis=axis) * n
        c = cmath.sqrt(-2j * math.pi * hbar) ** -1
    return c * src.dx * core * post


def _check_dual(src, dst, hbar):
    want = 2.0 * math.pi * hbar / (src.n * src.dx)
    return dst.n == src.n and abs(dst.dx - want) <= 1e-12 * want


def _fourier_generic(psi, sign, grids):
    out_grids = []
    vals = psi.values
    src_grids = (psi.grid,) if psi.ndim == 1 else (psi.grid_x, psi.grid_y)
    for axis, src in enumerate(src_grids):
        dst = grids[axis] if grids and grids[axis] is not None else None
        natural = src.conjugate(psi.hbar)
        if dst is None or not _check_dual(src, dst, psi.hbar):
            target = natural
        else:
            target = dst
        vals = _dft_axis(vals, src, target, psi.hbar, sign, axis)
        out_grids.append((target, dst))
    if psi.ndim == 1:
        (target, dst), = out_grids
        out = WaveFunction1D(target, vals, psi.hbar)
        if dst is not None and not target.isclose(dst):
            out = resample(out, dst, carrier=sign * fft_center(psi.grid))
        return out
    (tx, dx_), (ty, dy_) = out_grids
    out = WaveFunction2D(tx, ty, vals, psi.hbar)
    if (dx_ is not None and not tx.isclose(dx_)) or (dy_ is not None and not ty.isclose(dy_)):
        carrier = (sign * fft_center(psi.grid_x), sign * fft_center(psi.grid_y))
        out = resample(out, dx_ or tx, dy_ or ty, carrier=carrier)
    return out


def fourier(psi, grid=None, grid_y=None):
    """``(2 pi i hbar)^(-n/2) * integral psi(x) exp(-i p.x / hbar) dx``.

    Evaluated exactly (one FFT) on the conjugate grid, which spans
    ``[-pi hbar/dx, pi hbar/dx)``.  A target grid with the conjugate spacing
    is also evaluated directly; any other target is reached by band-limited
    resampling.
    """
    return _fourier_generic(psi, -1, (grid, grid_y))


def inverse_fourier(psi, grid=None, grid_y=None):
    """Inverse of :func:`fourier`; default output is the centered conjugate grid."""
    return _fourier_generic(psi, +1, (grid, grid_y))


# -- geometric maps ---------------------------------------------------------------


def dilate(psi, s):
    """Rescale coordinates by ``1/s``: values ``sqrt(s) psi(s x')`` (``s psi`` in 2D)."""
    s = float(s)
    if not (s > 0) or not math.isfinite(s):
        raise NonpositiveScale(f"dilation scale must be positive and finite, got {s}")
    if s == 1.0:
        return psi
    if psi.ndim == 1:
        return WaveFunction1D(psi.grid.scaled(s), math.sqrt(s) * psi.values, psi.hbar)
    return WaveFunction2D(psi.grid_x.scaled(s), psi.grid_y.scaled(s), s * psi.values, psi.hbar)


def parity(psi):
    """``psi(-x)`` on the reflected grid (exact, no interpolation)."""
    if psi.ndim == 1:
        return WaveFunction1D(psi.grid.reflected(), psi.values[::-1], psi.hbar)
    return WaveFunction2D(
        psi.grid_x.reflected(), psi.grid_y.reflected(), psi.values[::-1, ::-1], psi.hbar
    )


def translate(psi, shift):
    """``psi(x - a)`` by moving the grid."""
    if psi.ndim == 1:
        return WaveFunction1D(psi.grid.shifted(float(shift)), psi.values, psi.hbar)
    ax, ay = shift
    return WaveFunction2D(psi.grid_x.shifted(ax), psi.grid_y.shifted(ay), psi.values, psi.hbar)


def linear_map_2d(psi, matrix, grid_x=None, grid_y=None, *, carrier=0.0):
    """``|det R|^(-1/2) psi(R^-1 r')`` evaluated on the given output grids.

    Default output grids are the input grids scaled by ``sqrt|det R|``.
    """
    R = np.asarray(matrix, dtype=np.float64)
    if R.shape != (2, 2):
        raise ValidationError("linear map must be a 2x2 matrix")
    det = float(np.linalg.det(R))
    if det == 0.0 or not math.isfinite(det):
        raise ValidationError("linear map is singular")
    scale = math.sqrt(abs(det))
    gx = grid_x or psi.grid_x.scaled(1.0 / scale)
    gy = grid_y or psi.grid_y.scaled(1.0 / scale)
    X, Y = np.meshgrid(gx.points, gy.points, indexing="ij")
    Rinv = np.linalg.inv(R)
    pts = np.stack([X.ravel(), Y.ravel()], axis=1) @ Rinv.T
    vals = interpolate(psi, pts, carrier=carrier).reshape(gx.n, gy.n) / scale
    return WaveFunction2D(gx, gy, vals, psi.hbar)


# -- fractional Fourier transform --------------------------------------------------


def reduce_angle(gamma):
    """Angle reduced to (-pi, pi]."""
    g = math.remainder(float(gamma), 2.0 * math.pi)
    return math.pi if g == -math.pi else g


def frft_prefactor(gamma):
    """``exp(i gamma / 2) / sqrt(i sin gamma)`` with the principal square root."""
    g = reduce_angle(gamma)
    return cmath.exp(0.5j * g) / cmath.sqrt(1j * math.sin(g))


def check_aliasing(x_max, xp_max, dx, coeff_sq, coeff_cross, what="kernel"):
    """Reject kernels ``exp(i (a x^2 + b x x' + ...))`` that outrun the grid.

    ``coeff_sq`` and ``coeff_cross`` are the angular rates of the quadratic
    and cross terms (radians per length^2).  The instantaneous frequency of
    the integrand at the grid edge, ``2|a| x_max + |b| x'_max``, must stay
    below Nyquist (pi / dx) with 10% slack.
    """
    rate = (2.0 * abs(coeff_sq) * x_max + abs(coeff_cross) * xp_max) * dx
    if rate > math.pi * (1.0 + ALIASING_SLACK):
        raise AliasingRisk(
            f"{what} phase advances {rate:.3g} rad between samples at the grid edge "
            f"(limit {math.pi * (1 + ALIASING_SLACK):.3g}); refine the grid or shrink the window"
        )


def _singular_frft(psi, g):
    if abs(g) < 0.5 * math.pi:
        return psi
    flipped = parity(psi)
    if flipped.grid.isclose(psi.grid):
        return WaveFunction1D(psi.grid, flipped.values, psi.hbar)
    return resample(flipped, psi.grid)


def frft(psi, gamma):
    """Fractional Fourier transform by direct O(N^2) quadrature on the input grid.

    Kernel ``A exp(i pi ((x^2 + x'^2) cot g - 2 x x' / sin g))`` with
    ``A = exp(i g/2) / sqrt(i sin g)`` (grid in dimensionless units, so
    ``g = pi/2`` is the ``exp(-2 pi i x x')`` transform).  Angles with
    ``|sin g| < 1e-6`` return the identity (near 0) or the exact parity
    (near pi).
    """
    if psi.ndim != 1:
        raise ValidationError("frft acts on 1D wavefunctions")
    g = reduce_angle(gamma)
    s = math.sin(g)
    if abs(s) < SINGULAR_SIN:
        return _singular_frft(psi, g)
    cot = math.cos(g) / s
    grid = psi.grid
    x = grid.points
    xm = grid.max_abs
    check_aliasing(xm, xm, grid.dx, math.pi * cot, 2.0 * math.pi / s, "fractional Fourier kernel")
    chirp = np.exp(1j * math.pi * cot * x * x)
    weights = psi.values * chirp * grid.dx
    out = nudft1(weights, -2.0 * math.pi * x / s, x)
    return psi.with_values(frft_prefactor(g) * chirp * out)


def frft_fast(psi, gamma):
    """Fractional Fourier transform in O(N log N).

    chirp -> Fourier (hbar = 1/2 pi) -> parity if sin g < 0 -> dilate by
    1/|sin g| -> resample onto the input grid -> chirp and constant.
    """
    if psi.ndim != 1:
        raise ValidationError("frft acts on 1D wavefunctions")
    g = reduce_angle(gamma)
    s = math.sin(g)
    if abs(s) < SINGULAR_SIN:
        return _singular_frft(psi, g)
    cot = math.cos(g) / s
    grid = psi.grid
    xm = grid.max_abs
    check_aliasing(xm, xm, grid.dx, math.pi * cot, 2.0 * math.pi / s, "fractional Fourier kernel")
    h = HBAR_DIMENSIONLESS
    work = WaveFunction1D(grid, psi.values, h)
    work = galilei(work, GalileiGenerator.quadratic(0.5 * cot))
    work = fourier(work)
    if s < 0:
        work = parity(work)
    work = dilate(work, 1.0 / abs(s))
    work = resample(work, grid, carrier=-fft_center(grid) / s)
    work = galilei(work, GalileiGenerator.quadratic(0.5 * cot))
    const = frft_prefactor(g) * cmath.sqrt(1j) * math.sqrt(abs(s))
    return WaveFunction1D(grid, const * work.values, psi.hbar)


# -- pipeline steps ---------------------------------------------------------------


def _rotation(gamma):
    c, s = math.cos(gamma), math.sin(gamma)
    return np.array([[c, s], [-s, c]])


def _block(n, mat2):
    """Embed a per-plane 2x2 map into the (x.., p..) ordering."""
    if n == 1:
        return mat2
    M = np.zeros((4, 4))
    for i in range(2):
        M[np.ix_([i, 2 + i], [i, 2 + i])] = mat2
    return M


@dataclass(frozen=True)
class Galilei:
    generator: GalileiGenerator

    def apply(self, psi):
        return galilei(psi, self.generator)

    def classical(self, n):
        g = self.generator
        if g.degree > 2:
            return None
        c = g.coefficients
        if n == 1:
            c = np.pad(c, (0, 3))
            return AffineSymplecticMap([[1.0, 0.0], [2.0 * c[2], 1.0]], [0.0, c[1]])
        hess = np.array([[2 * c[2, 0], c[1, 1]], [c[1, 1], 2 * c[0, 2]]])
        M = np.eye(4)
        M[2:, :2] = hess
        return AffineSymplecticMap(M, [0.0, 0.0, c[1, 0], c[0, 1]])


@dataclass(frozen=True)
class Fourier:
    grid: Optional[Grid1D] = None

    def apply(self, psi):
        return fourier(psi, self.grid)

    def classical(self, n):
        return AffineSymplecticMap(_block(n, np.array([[0.0, 1.0], [-1.0, 0.0]])))


@dataclass(frozen=True)
class InverseFourier:
    grid: Optional[Grid1D] = None

    def apply(self, psi):
        return inverse_fourier(psi, self.grid)

    def classical(self, n):
        return AffineSymplecticMap(_block(n, np.array([[0.0, -1.0], [1.0, 0.0]])))


@dataclass(frozen=True)
class Dilate:
    scale: float

    def __post_init__(self):
        if not (self.scale > 0):
            raise NonpositiveScale(f"dilation scale must be positive, got {self.scale}")

    def apply(self, psi):
        return dilate(psi, self.scale)

    def classical(self, n):
        return AffineSymplecticMap(_block(n, np.diag([1.0 / self.scale, self.scale])))


@dataclass(frozen=True)
class FrFT:
    """Fractional Fourier step; the classical map rotates (x, p/(2 pi hbar))."""

    angle: float
    fast: bool = False

    def __post_init__(self):
        g = reduce_angle(self.angle)
        if abs(math.sin(g)) < SINGULAR_SIN and abs(g) > SINGULAR_SIN and abs(abs(g) - math.pi) > SINGULAR_SIN:
            raise ValidationError(f"FrFT angle {self.angle} is too close to a multiple of pi")

    def apply(self, psi):
        return frft_fast(psi, self.angle) if self.fast else frft(psi, self.angle)

    def classical(self, n):
        if n != 1:
            return None
        return AffineSymplecticMap(_rotation(self.angle))


@dataclass(frozen=True)
class Kernel:
    kernel: QuadraticKernel
    outgrid: Optional[Grid1D] = None

    def apply(self, psi):
        from .propagators import apply_kernel

        return apply_kernel(psi, self.kernel, self.outgrid)

    def classical(self, n):
        return kernel_classical_map(self.kernel)


def kernel_classical_map(kernel):
    """Canonical map generated by the kernel phase ``W(x, x')``.

    ``p = -dW/dx`` and ``p' = dW/dx'`` solved for ``(x', p')``.
    """
    A, B, Cm = kernel.a_xx, kernel.a_xpxp, kernel.a_xxp
    Cinv = np.linalg.inv(Cm)
    # x' = -C^-1 (p + 2 A x + b_x)
    Mxx = -Cinv @ (2.0 * A)
    Mxp = -Cinv
    tx = -Cinv @ kernel.b_x
    # p' = 2 B x' + C^T x + b_xp
    Mpx = 2.0 * B @ Mxx + Cm.T
    Mpp = 2.0 * B @ Mxp
    tp = 2.0 * B @ tx + kernel.b_xp
    M = np.block([[Mxx, Mxp], [Mpx, Mpp]])
    return AffineSymplecticMap(M, np.concatenate([tx, tp]))


def _merged(steps):
    """Fold adjacent Galilei steps into one (exact generator arithmetic)."""
    out = []
    for step in steps:
        if isinstance(step, Galilei) and out and isinstance(out[-1], Galilei):
            merged = out[-1].generator + step.generator
            out.pop()
            if not merged.is_zero():
                out.append(Galilei(merged))
        else:
            out.append(step)
    return out


def compose_pipeline(steps, psi):
    """Apply ``steps`` left to right."""
    for step in _merged(list(steps)):
        psi = step.apply(psi)
    return psi


def classical_composition(steps, n=1):
    """Composite classical map of a pipeline, or None if any step is nonlinear."""
    total = AffineSymplecticMap.identity(n)
    for step in steps:
        cmap = step.classical(n)
        if cmap is None:
            return None
        total = cmap.compose(total)
    return total


def holonomy_probe(loop, testset, *, require_closed=True):
    """Largest projective deviation ``1 - fidelity(U psi, psi)`` over ``testset``.

    If every step is linear the composite classical map is checked to be the
    identity (ValidationError otherwise, unless ``require_closed`` is False).
    Results on a different grid are resampled onto the input grid.
    """
    testset = list(testset)
    if not testset:
        raise EmptyTestset("holonomy probe needs at least one test state")
    loop = list(loop)
    if require_closed:
        cmap = classical_composition(loop, testset[0].ndim)
        if cmap is not None and not cmap.isclose(AffineSymplecticMap.identity(testset[0].ndim), 1e-9):
            raise ValidationError("loop does not close classically")
    worst = 0.0
    for psi in testset:
        out = compose_pipeline(loop, psi)
        if not same_grid(out, psi):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                out = resample(out, psi.grid) if psi.ndim == 1 else resample(out, psi.grid_x, psi.grid_y)
        worst = max(worst, 1.0 - fidelity(out, psi))
    return worst


def cubic_commutator_loop(eps):
    """Group commutator of ``exp(i eps x^3/hbar)`` with its quarter-turn conjugate.

    Linear loops built from these pieces close exactly; with the cubic
    phase the classical maps no longer commute, so the loop measures the
    nonlinear defect.
    """
    g = GalileiGenerator.from_powers([0.0, 0.0, eps])
    quarter = 0.5 * math.pi
    return [
        Galilei(g),
        FrFT(-quarter),
        Galilei(g),
        FrFT(quarter),
        Galilei(-g),
        FrFT(-quarter),
        Galilei(-g),
        FrFT(quarter),
    ]
