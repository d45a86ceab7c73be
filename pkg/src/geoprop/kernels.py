"""Value types shared by the transform and propagator layers.

:class:`QuadraticKernel` is the common shape of every propagator handled
here, ``amp * phase_amp * exp(i Q(x, x') / hbar)`` with ``Q`` a real
polynomial of degree two.  :class:`GalileiGenerator` is a polynomial phase
function ``S`` normalized to ``S(0) = 0``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import NotTransversal, ValidationError

MAX_DEGREE_1D = 8
MAX_DEGREE_2D = 4


def _matrix(value, n, name):
    arr = np.array(value, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr * np.eye(n)
    if arr.shape != (n, n):
        raise ValidationError(f"{name} must be a scalar or {n}x{n} matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def _vector(value, n, name):
    arr = np.zeros(n) if value is None else np.array(value, dtype=np.float64).reshape(-1)
    if arr.size == 1 and n > 1:
        raise ValidationError(f"{name} must have {n} components")
    if arr.shape != (n,):
        raise ValidationError(f"{name} must have {n} components, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class QuadraticKernel:
    """Kernel ``K(x, x') = amp * phase_amp * exp(i Q(x, x') / hbar)`` with

    ``Q = x.a_xx.x + x'.a_xpxp.x' + x.a_xxp.x' + b_x.x + b_xp.x' + c0``.

    ``x`` is the input coordinate and ``x'`` the output coordinate.  For
    ``n = 1`` the coefficients may be given as scalars.  For ``n = 2`` the
    diagonal blocks are symmetric and ``a_xxp`` is a general 2x2 matrix, so
    the antisymmetric coupling of a magnetic kernel fits without a special
    field.
    """

    n: int
    a_xx: np.ndarray
    a_xpxp: np.ndarray
    a_xxp: np.ndarray
    b_x: np.ndarray = None
    b_xp: np.ndarray = None
    c0: float = 0.0
    amp: float = 1.0
    phase_amp: complex = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        n = self.n
        if n not in (1, 2):
            raise ValidationError(f"kernel dimension must be 1 or 2, got {n}")
        set_ = object.__setattr__
        set_(self, "a_xx", _matrix(self.a_xx, n, "a_xx"))
        set_(self, "a_xpxp", _matrix(self.a_xpxp, n, "a_xpxp"))
        set_(self, "a_xxp", _matrix(self.a_xxp, n, "a_xxp"))
        set_(self, "b_x", _vector(self.b_x, n, "b_x"))
        set_(self, "b_xp", _vector(self.b_xp, n, "b_xp"))
        for name in ("a_xx", "a_xpxp"):
            m = getattr(self, name)
            if not np.allclose(m, m.T, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(m).max())):
                raise ValidationError(f"{name} must be symmetric")
        if abs(np.linalg.det(self.a_xxp)) == 0.0:
            raise NotTransversal("kernel does not couple input and output (a_xxp is singular)")
        set_(self, "c0", float(self.c0))
        set_(self, "amp", float(self.amp))
        if not (self.amp > 0 and math.isfinite(self.amp)):
            raise ValidationError(f"kernel amplitude must be positive, got {self.amp}")
        pa = complex(self.phase_amp)
        if abs(abs(pa) - 1.0) > 1e-12:
            raise ValidationError(f"phase_amp must have unit modulus, got |{pa}| = {abs(pa)}")
        set_(self, "phase_amp", pa)
        if not (self.hbar > 0):
            raise ValidationError(f"hbar must be positive, got {self.hbar}")
        set_(self, "hbar", float(self.hbar))

    @property
    def prefactor(self):
        return self.amp * self.phase_amp

    def action(self, x, xp):
        """``Q(x, x')`` for broadcastable arrays; trailing axis holds components when n = 2."""
        if self.n == 1:
            x = np.asarray(x, dtype=np.float64)
            xp = np.asarray(xp, dtype=np.float64)
            return (
                self.a_xx[0, 0] * x * x
                + self.a_xpxp[0, 0] * xp * xp
                + self.a_xxp[0, 0] * x * xp
                + self.b_x[0] * x
                + self.b_xp[0] * xp
                + self.c0
            )
        x = np.asarray(x, dtype=np.float64)
        xp = np.asarray(xp, dtype=np.float64)
        return (
            np.einsum("...i,ij,...j->...", x, self.a_xx, x)
            + np.einsum("...i,ij,...j->...", xp, self.a_xpxp, xp)
            + np.einsum("...i,ij,...j->...", x, self.a_xxp, xp)
            + x @ self.b_x
            + xp @ self.b_xp
            + self.c0
        )

    def __call__(self, x, xp):
        return self.prefactor * np.exp(1j * self.action(x, xp) / self.hbar)

    def coefficients(self):
        """Flat dict of all real coefficients, for comparisons and reports."""
        return {
            "a_xx": self.a_xx.copy(),
            "a_xpxp": self.a_xpxp.copy(),
            "a_xxp": self.a_xxp.copy(),
            "b_x": self.b_x.copy(),
            "b_xp": self.b_xp.copy(),
            "c0": self.c0,
            "amp": self.amp,
            "phase_amp": self.phase_amp,
        }

    def __repr__(self):
        if self.n == 1:
            return (
                f"QuadraticKernel(a_xx={self.a_xx[0, 0]:.6g}, a_xpxp={self.a_xpxp[0, 0]:.6g}, "
                f"a_xxp={self.a_xxp[0, 0]:.6g}, b_x={self.b_x[0]:.6g}, b_xp={self.b_xp[0]:.6g}, "
                f"c0={self.c0:.6g}, amp={self.amp:.6g}, phase_amp={self.phase_amp:.6g}, "
                f"hbar={self.hbar:.6g})"
            )
        return f"QuadraticKernel(n=2, amp={self.amp:.6g}, hbar={self.hbar:.6g})"


def principal_sqrt(z):
    """Principal branch square root of a complex number."""
    return cmath.sqrt(complex(z))


class GalileiGenerator:
    """Polynomial phase function with zero constant term.

    In 1D ``coefficients[k]`` multiplies ``x**k`` (degree at most 8).  In 2D
    ``coefficients[i, j]`` multiplies ``x**i * y**j`` (total degree at most 4).
    Only polynomials are accepted, so generator arithmetic is exact.
    """

    __slots__ = ("_c",)

    def __init__(self, coefficients):
        if callable(coefficients):
            raise ValidationError("Galilei generators must be polynomial coefficient arrays")
        try:
            c = np.array(coefficients, dtype=np.float64)
        except (TypeError, ValueError):
            raise ValidationError("Galilei coefficients must be real numbers") from None
        if c.ndim == 0:
            c = c.reshape(1)
        if c.ndim not in (1, 2):
            raise ValidationError("Galilei coefficients must be a 1D or 2D array")
        if not np.all(np.isfinite(c)):
            raise ValidationError("Galilei coefficients must be finite")
        if c.ndim == 1:
            c = np.trim_zeros(c, "b") if np.any(c) else np.zeros(1)
            if c.size - 1 > MAX_DEGREE_1D:
                raise ValidationError(f"Galilei generator degree {c.size - 1} exceeds {MAX_DEGREE_1D}")
        else:
            i, j = np.nonzero(c)
            if i.size and (i + j).max() > MAX_DEGREE_2D:
                raise ValidationError(
                    f"Galilei generator total degree {(i + j).max()} exceeds {MAX_DEGREE_2D}"
                )
            size = MAX_DEGREE_2D + 1
            full = np.zeros((size, size))
            if c.shape[0] > size or c.shape[1] > size:
                c = c[:size, :size]
            full[: c.shape[0], : c.shape[1]] = c
            c = full
        if c.flat[0] != 0.0:
            raise ValidationError("Galilei generator must vanish at the origin (constant term 0)")
        c.setflags(write=False)
        self._c = c

    @classmethod
    def from_powers(cls, coeffs):
        """1D generator ``sum_k coeffs[k-1] * x**k`` (coefficients from x**1 up)."""
        return cls(np.concatenate([[0.0], np.asarray(coeffs, dtype=np.float64).reshape(-1)]))

    @classmethod
    def quadratic(cls, a, b=0.0):
        """``a * x**2 + b * x``."""
        return cls([0.0, b, a])

    @classmethod
    def radial(cls, a):
        """2D ``a * (x**2 + y**2)``."""
        c = np.zeros((3, 3))
        c[2, 0] = c[0, 2] = a
        return cls(c)

    @classmethod
    def linear_2d(cls, bx, by):
        c = np.zeros((2, 2))
        c[1, 0], c[0, 1] = bx, by
        return cls(c)

    @classmethod
    def zero(cls, ndim=1):
        return cls(np.zeros(1) if ndim == 1 else np.zeros((1, 1)))

    @property
    def coefficients(self):
        return self._c

    @property
    def ndim(self):
        return self._c.ndim

    @property
    def degree(self):
        if self.ndim == 1:
            return self._c.size - 1
        i, j = np.nonzero(self._c)
        return int((i + j).max()) if i.size else 0

    def is_zero(self):
        return not np.any(self._c)

    def __call__(self, x, y=None):
        if self.ndim == 1:
            return np.polynomial.polynomial.polyval(np.asarray(x, dtype=np.float64), self._c)
        if y is None:
            raise ValidationError("2D generator needs both x and y")
        return np.polynomial.polynomial.polyval2d(
            np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64), self._c
        )

    def gradient(self):
        """Derivative polynomial coefficients: array in 1D, (d/dx, d/dy) pair in 2D."""
        if self.ndim == 1:
            return np.polynomial.polynomial.polyder(self._c)
        return (
            np.polynomial.polynomial.polyder(self._c, axis=0),
            np.polynomial.polynomial.polyder(self._c, axis=1),
        )

    def _binary(self, other, sign):
        if not isinstance(other, GalileiGenerator):
            return NotImplemented
        if self.ndim != other.ndim:
            raise ValidationError("cannot combine 1D and 2D Galilei generators")
        a, b = self._c, other._c
        if self.ndim == 1:
            out = np.zeros(max(a.size, b.size))
            out[: a.size] += a
            out[: b.size] += sign * b
        else:
            out = a + sign * b
        return GalileiGenerator(out)

    def __add__(self, other):
        return self._binary(other, 1.0)

    def __sub__(self, other):
        return self._binary(other, -1.0)

    def __neg__(self):
        return GalileiGenerator(-self._c)

    def __eq__(self, other):
        if not isinstance(other, GalileiGenerator) or other.ndim != self.ndim:
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash((self.ndim, self._c.tobytes()))

    def __repr__(self):
        return f"GalileiGenerator({self._c.tolist()!r})"
