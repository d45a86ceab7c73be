"""Grid-sampled wavefunctions.

Values are scalar samples psi(x_j).  The half-density character of a state
(psi * sqrt(dx)) is carried by the Jacobian factors applied in
:mod:`geoprop.transforms`, so every quadrature here is the plain rectangle
rule with weight ``dx`` (``dx * dy`` in 2D).
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import czt

from ._accel import nudft1, nudft2
from .errors import (
    EdgeWarning,
    EmptyTargetGrid,
    GridMismatch,
    ModeTooHigh,
    ValidationError,
    ZeroNorm,
)

#: effective hbar of the dimensionless (2 pi) FrFT convention
HBAR_DIMENSIONLESS = 1.0 / (2.0 * math.pi)

MAX_HERMITE_MODE = 20

# relative threshold below which samples count as "outside the support"
SUPPORT_THRESHOLD = 1e-6

_GRID_RTOL = 1e-12


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid ``x_j = x0 + j*dx`` for ``j = 0..n-1``."""

    x0: float
    dx: float
    n: int

    def __post_init__(self):
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "dx", float(self.dx))
        if int(self.n) != self.n:
            raise ValidationError(f"grid size must be an integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not (math.isfinite(self.x0) and math.isfinite(self.dx)):
            raise ValidationError("grid origin and spacing must be finite")
        if self.dx <= 0:
            raise ValidationError(f"grid spacing must be positive, got {self.dx}")
        if self.n < 2:
            raise ValidationError(f"grid needs at least 2 samples, got {self.n}")

    @classmethod
    def symmetric(cls, half_width, n):
        """Grid from ``-half_width`` to ``+half_width`` inclusive (mirror symmetric)."""
        return cls(-half_width, 2.0 * half_width / (n - 1), n)

    @classmethod
    def centered(cls, length, n):
        """FFT-style grid ``[-length/2, length/2)`` with spacing ``length/n``."""
        return cls(-0.5 * length, length / n, n)

    @classmethod
    def self_conjugate(cls, n, hbar=HBAR_DIMENSIONLESS):
        """Centered grid whose Fourier conjugate grid is itself."""
        dx = math.sqrt(2.0 * math.pi * hbar / n)
        return cls(-0.5 * n * dx, dx, n)

    @property
    def points(self):
        half = 0.5 * (self.n - 1)
        if abs(self.x0 + half * self.dx) <= 4.0 * np.finfo(float).eps * abs(self.x0):
            # mirror-symmetric grid: make x_{n-1-j} = -x_j hold exactly
            return self.dx * (np.arange(self.n) - half)
        return self.x0 + self.dx * np.arange(self.n)

    @property
    def x_last(self):
        return self.x0 + (self.n - 1) * self.dx

    @property
    def length(self):
        return self.n * self.dx

    @property
    def center(self):
        return self.x0 + 0.5 * (self.n - 1) * self.dx

    @property
    def max_abs(self):
        return max(abs(self.x0), abs(self.x_last))

    def conjugate(self, hbar):
        """Momentum grid produced by :func:`geoprop.transforms.fourier`."""
        dp = 2.0 * math.pi * hbar / (self.n * self.dx)
        return Grid1D(-math.pi * hbar / self.dx, dp, self.n)

    def scaled(self, s):
        return Grid1D(self.x0 / s, self.dx / s, self.n)

    def shifted(self, a):
        return Grid1D(self.x0 + a, self.dx, self.n)

    def reflected(self):
        return Grid1D(-self.x_last, self.dx, self.n)

    def isclose(self, other):
        scale = max(abs(self.x0), abs(other.x0), self.dx, other.dx)
        return (
            self.n == other.n
            and abs(self.dx - other.dx) <= _GRID_RTOL * max(self.dx, other.dx)
            and abs(self.x0 - other.x0) <= _GRID_RTOL * scale
        )

    def to_dict(self):
        return {"x0": self.x0, "dx": self.dx, "n": self.n}


def _as_values(values, shape):
    arr = np.array(values, dtype=np.complex128, copy=True)
    if arr.shape != shape:
        raise ValidationError(f"values have shape {arr.shape}, grid expects {shape}")
    arr.setflags(write=False)
    return arr


def _check_hbar(hbar):
    hbar = float(hbar)
    if not (hbar > 0 and math.isfinite(hbar)):
        raise ValidationError(f"hbar must be positive and finite, got {hbar}")
    return hbar


@dataclass(frozen=True, eq=False)
class WaveFunction1D:
    grid: Grid1D
    values: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "values", _as_values(self.values, (self.grid.n,)))
        object.__setattr__(self, "hbar", _check_hbar(self.hbar))

    ndim = 1

    @property
    def x(self):
        return self.grid.points

    @property
    def measure(self):
        return self.grid.dx

    def with_values(self, values, grid=None):
        return WaveFunction1D(grid or self.grid, values, self.hbar)

    def __repr__(self):
        return f"WaveFunction1D(grid={self.grid}, hbar={self.hbar}, norm={norm(self):.6g})"


@dataclass(frozen=True, eq=False)
class WaveFunction2D:
    """Samples ``values[i, j] = psi(x_i, y_j)``."""

    grid_x: Grid1D
    grid_y: Grid1D
    values: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        shape = (self.grid_x.n, self.grid_y.n)
        object.__setattr__(self, "values", _as_values(self.values, shape))
        object.__setattr__(self, "hbar", _check_hbar(self.hbar))

    ndim = 2

    @property
    def measure(self):
        return self.grid_x.dx * self.grid_y.dx

    @property
    def mesh(self):
        return np.meshgrid(self.grid_x.points, self.grid_y.points, indexing="ij")

    def with_values(self, values, grid_x=None, grid_y=None):
        return WaveFunction2D(grid_x or self.grid_x, grid_y or self.grid_y, values, self.hbar)

    def __repr__(self):
        return (
            f"WaveFunction2D(grid_x={self.grid_x}, grid_y={self.grid_y}, "
            f"hbar={self.hbar}, norm={norm(self):.6g})"
        )


def same_grid(a, b):
    if a.ndim != b.ndim:
        return False
    if a.ndim == 1:
        return a.grid.isclose(b.grid)
    return a.grid_x.isclose(b.grid_x) and a.grid_y.isclose(b.grid_y)


def norm(psi):
    return math.sqrt(float(np.sum(np.abs(psi.values) ** 2)) * psi.measure)


def inner(a, b):
    """``<a|b>`` with the rectangle rule; grids and hbar must agree."""
    if not same_grid(a, b):
        raise GridMismatch("wavefunctions live on different grids")
    if not math.isclose(a.hbar, b.hbar, rel_tol=1e-12):
        raise GridMismatch(f"hbar differs: {a.hbar} vs {b.hbar}")
    return complex(np.vdot(a.values, b.values)) * a.measure


def fidelity(a, b):
    """Projective overlap ``|<a|b>| / (|a| |b|)`` in [0, 1]."""
    na, nb = norm(a), norm(b)
    if na == 0.0 or nb == 0.0:
        raise ZeroNorm("fidelity is undefined for a zero wavefunction")
    return min(1.0, abs(inner(a, b)) / (na * nb))


def normalized(psi):
    nrm = norm(psi)
    if nrm == 0.0:
        raise ZeroNorm("cannot normalize a zero wavefunction")
    return replace(psi, values=psi.values / nrm)


def gaussian(grid, sigma, center=0.0, momentum=0.0, hbar=1.0):
    """Unit-norm packet ``exp(-(x-a)^2/(4 sigma^2) + i p (x-a)/hbar)``."""
    x = grid.points
    y = x - center
    vals = (2.0 * math.pi * sigma**2) ** -0.25 * np.exp(
        -(y**2) / (4.0 * sigma**2) + 1j * momentum * y / hbar
    )
    return WaveFunction1D(grid, vals, hbar)


def gaussian_2d(grid_x, grid_y, sigma, center=(0.0, 0.0), momentum=(0.0, 0.0), hbar=1.0):
    gx = gaussian(grid_x, sigma, center[0], momentum[0], hbar).values
    gy = gaussian(grid_y, sigma, center[1], momentum[1], hbar).values
    return WaveFunction2D(grid_x, grid_y, np.outer(gx, gy), hbar)


def hermite_gauss(k, grid):
    """Dimensionless Hermite-Gauss mode h_k, ground mode ``2**0.25 exp(-pi x^2)``.

    Uses the normalized three-term recurrence, which stays stable where the
    explicit ``H_k(x) / sqrt(2^k k!)`` form overflows.  The returned state
    carries hbar = 1/(2 pi).
    """
    if int(k) != k or k < 0:
        raise ValidationError(f"mode index must be a non-negative integer, got {k!r}")
    if k > MAX_HERMITE_MODE:
        raise ModeTooHigh(f"mode index {k} exceeds the cap {MAX_HERMITE_MODE}")
    xi = math.sqrt(2.0 * math.pi) * grid.points
    prev = np.zeros_like(xi)
    cur = 2.0**0.25 * np.exp(-0.5 * xi**2)
    for j in range(int(k)):
        prev, cur = cur, math.sqrt(2.0 / (j + 1)) * xi * cur - math.sqrt(j / (j + 1)) * prev
    return WaveFunction1D(grid, cur.astype(np.complex128), HBAR_DIMENSIONLESS)


# -- band-limited interpolation ---------------------------------------------


def _periodic_coefficients(values, axis):
    """Fourier coefficients of the trigonometric interpolant along ``axis``.

    Returns ``(coeffs, k)`` with integer frequencies ``k`` in ascending order.
    For even sizes the Nyquist coefficient is split symmetrically between
    ``-n/2`` and ``+n/2`` so the interpolant of real data stays real.
    """
    n = values.shape[axis]
    C = np.fft.fftshift(np.fft.fft(values, axis=axis), axes=axis) / n
    k = np.arange(n) - n // 2
    if n % 2 == 0:
        first = np.take(C, [0], axis=axis) * 0.5
        C = np.concatenate([first, np.delete(C, 0, axis=axis), first], axis=axis)
        k = np.arange(-(n // 2), n // 2 + 1)
    return C, k


def _support_outside(values, pts, lo, hi):
    """True if significant samples at ``pts`` fall outside ``[lo, hi]``."""
    mag = np.abs(values)
    peak = mag.max()
    if peak == 0.0:
        return False
    significant = mag > SUPPORT_THRESHOLD * peak
    return bool(np.any(significant & ((pts < lo) | (pts > hi))))


def _edge_fraction(values, axis=0):
    mag = np.abs(values)
    peak = mag.max()
    if peak == 0.0:
        return 0.0
    edges = np.concatenate(
        [np.take(mag, [0], axis=axis).ravel(), np.take(mag, [-1], axis=axis).ravel()]
    )
    return float(edges.max() / peak)


def _check_source_edges(values, axis=0):
    if _edge_fraction(values, axis) > SUPPORT_THRESHOLD:
        warnings.warn(
            "source wavefunction is not negligible at its grid edge; "
            "band-limited interpolation may wrap around",
            EdgeWarning,
            stacklevel=3,
        )


def _resample_axis(values, src, dst, axis, carrier, hbar):
    """Periodic-sinc interpolation of ``values`` along ``axis`` onto ``dst``."""
    x_src = src.points
    x_dst = dst.points
    shape = [1] * values.ndim
    shape[axis] = -1
    if carrier:
        values = values * np.exp(-1j * carrier * x_src / hbar).reshape(shape)
    C, k = _periodic_coefficients(values, axis)
    dk = 2.0 * math.pi / (src.n * src.dx)
    tau0 = dst.x0 - src.x0
    q = np.arange(k.size)
    pre = np.exp(1j * q * dk * tau0).reshape([k.size if i == axis else 1 for i in range(values.ndim)])
    w = np.exp(1j * dk * dst.dx)
    out = czt(C * pre, m=dst.n, w=w, a=1.0, axis=axis)
    t = x_dst - src.x0
    post = np.exp(1j * k[0] * dk * t)
    lo, hi = src.x0 - 0.5 * src.dx, src.x_last + 0.5 * src.dx
    post = np.where((x_dst < lo) | (x_dst > hi), 0.0, post)
    if carrier:
        post = post * np.exp(1j * carrier * x_dst / hbar)
    return out * post.reshape(shape)


def resample(psi, newgrid, newgrid_y=None, *, carrier=0.0):
    """Band-limited (periodic-sinc) interpolation onto a new uniform grid.

    ``carrier`` is a momentum about which the spectrum of ``psi`` is centred;
    the samples are demodulated by it before interpolation and remodulated
    afterwards.  Target points outside the source window are set to zero.
    """
    if psi.ndim == 2:
        return _resample_2d(psi, newgrid, newgrid_y, carrier)
    src = psi.grid
    if src.isclose(newgrid):
        return psi
    lo, hi = src.x0 - 0.5 * src.dx, src.x_last + 0.5 * src.dx
    if newgrid.x_last < lo or newgrid.x0 > hi:
        raise EmptyTargetGrid("target grid does not overlap the source window")
    _check_source_edges(psi.values)
    if _support_outside(psi.values, src.points, newgrid.x0, newgrid.x_last):
        warnings.warn(
            "target grid does not cover the support of the wavefunction",
            EdgeWarning,
            stacklevel=2,
        )
    vals = _resample_axis(psi.values, src, newgrid, 0, carrier, psi.hbar)
    return WaveFunction1D(newgrid, vals, psi.hbar)


def _resample_2d(psi, gx, gy, carrier):
    gy = gy or psi.grid_y
    cx, cy = (carrier, carrier) if np.isscalar(carrier) else carrier
    vals = psi.values
    for axis, (src, dst, c) in enumerate(((psi.grid_x, gx, cx), (psi.grid_y, gy, cy))):
        if src.isclose(dst):
            continue
        lo, hi = src.x0 - 0.5 * src.dx, src.x_last + 0.5 * src.dx
        if dst.x_last < lo or dst.x0 > hi:
            raise EmptyTargetGrid("target grid does not overlap the source window")
        _check_source_edges(vals, axis)
        vals = _resample_axis(vals, src, dst, axis, c, psi.hbar)
    return WaveFunction2D(gx, gy, vals, psi.hbar)


def interpolate(psi, points, *, carrier=0.0):
    """Evaluate the band-limited interpolant of ``psi`` at arbitrary points.

    ``points`` is an array of x values (1D) or an ``(m, 2)`` array of (x, y)
    pairs (2D).  Points outside the source window evaluate to zero.
    """
    if psi.ndim == 1:
        grids = (psi.grid,)
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 1)
    else:
        grids = (psi.grid_x, psi.grid_y)
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    carriers = (carrier,) * psi.ndim if np.isscalar(carrier) else tuple(carrier)

    vals = psi.values
    for axis, g in enumerate(grids):
        if carriers[axis]:
            shape = [1] * psi.ndim
            shape[axis] = -1
            vals = vals * np.exp(-1j * carriers[axis] * g.points / psi.hbar).reshape(shape)
        _check_source_edges(vals, axis)

    C = vals
    ks = []
    for axis in range(psi.ndim):
        C, k = _periodic_coefficients(C, axis)
        ks.append(k)
    us = [2.0 * math.pi * k / (g.n * g.dx) for k, g in zip(ks, grids)]
    ts = [pts[:, a] - g.x0 for a, g in enumerate(grids)]
    if psi.ndim == 1:
        out = nudft1(C, us[0], ts[0])
    else:
        out = nudft2(C, us[0], us[1], ts[0], ts[1])

    inside = np.ones(pts.shape[0], dtype=bool)
    for a, g in enumerate(grids):
        inside &= (pts[:, a] >= g.x0 - 0.5 * g.dx) & (pts[:, a] <= g.x_last + 0.5 * g.dx)
        if carriers[a]:
            out = out * np.exp(1j * carriers[a] * pts[:, a] / psi.hbar)
    return np.where(inside, out, 0.0)


# -- moments ------------------------------------------------------------------


def _spectral_derivative(values, grid, axis=0, order=1):
    k = 2.0 * math.pi * np.fft.fftfreq(grid.n, grid.dx)
    shape = [1] * values.ndim
    shape[axis] = -1
    factor = ((1j * k) ** order).reshape(shape)
    if order % 2 == 1 and grid.n % 2 == 0:
        # the Nyquist mode has no well-defined odd derivative
        factor = factor.copy()
        idx = [0] * values.ndim
        idx[axis] = grid.n // 2
        factor[tuple(idx)] = 0.0
    return np.fft.ifft(np.fft.fft(values, axis=axis) * factor, axis=axis)


def expectation_position(psi):
    """Mean position (tuple of means in 2D) of a normalizable state."""
    w = np.abs(psi.values) ** 2
    total = w.sum()
    if total == 0.0:
        raise ZeroNorm("mean position of a zero wavefunction")
    if psi.ndim == 1:
        return float(np.sum(w * psi.grid.points) / total)
    X, Y = psi.mesh
    return float(np.sum(w * X) / total), float(np.sum(w * Y) / total)


def expectation_momentum(psi):
    """Mean canonical momentum ``<-i hbar d/dx>`` via spectral differentiation."""
    total = np.sum(np.abs(psi.values) ** 2)
    if total == 0.0:
        raise ZeroNorm("mean momentum of a zero wavefunction")
    if psi.ndim == 1:
        d = _spectral_derivative(psi.values, psi.grid)
        return float(np.real(np.vdot(psi.values, -1j * psi.hbar * d)) / total)
    dx = _spectral_derivative(psi.values, psi.grid_x, axis=0)
    dy = _spectral_derivative(psi.values, psi.grid_y, axis=1)
    px = np.real(np.vdot(psi.values, -1j * psi.hbar * dx)) / total
    py = np.real(np.vdot(psi.values, -1j * psi.hbar * dy)) / total
    return float(px), float(py)


# -- file format ----------------------------------------------------------------


def to_json_dict(psi):
    flat = psi.values.ravel(order="C")
    doc = {"hbar": float(psi.hbar)}
    if psi.ndim == 1:
        doc["grid"] = psi.grid.to_dict()
    else:
        doc["grid"] = psi.grid_x.to_dict()
        doc["grid_y"] = psi.grid_y.to_dict()
    doc["values"] = [[float(v.real), float(v.imag)] for v in flat]
    return doc


def _grid_from_dict(d, name):
    if not isinstance(d, dict):
        raise ValidationError(f"'{name}' must be an object with x0, dx, n")
    try:
        return Grid1D(float(d["x0"]), float(d["dx"]), d["n"])
    except KeyError as exc:
        raise ValidationError(f"'{name}' is missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"'{name}' has a non-numeric field: {exc}") from None


def from_json_dict(doc):
    if not isinstance(doc, dict):
        raise ValidationError("wavefunction document must be a JSON object")
    for key in ("hbar", "grid", "values"):
        if key not in doc:
            raise ValidationError(f"wavefunction document is missing {key!r}")
    grid = _grid_from_dict(doc["grid"], "grid")
    try:
        raw = np.asarray(doc["values"], dtype=np.float64)
    except (TypeError, ValueError):
        raise ValidationError("'values' must be a list of [re, im] pairs") from None
    if raw.ndim != 2 or raw.shape[1] != 2:
        raise ValidationError("'values' must be a list of [re, im] pairs")
    vals = raw[:, 0] + 1j * raw[:, 1]
    try:
        hbar = float(doc["hbar"])
    except (TypeError, ValueError):
        raise ValidationError("'hbar' must be a number") from None
    if "grid_y" in doc:
        gy = _grid_from_dict(doc["grid_y"], "grid_y")
        if vals.size != grid.n * gy.n:
            raise ValidationError(f"expected {grid.n * gy.n} values, found {vals.size}")
        return WaveFunction2D(grid, gy, vals.reshape(grid.n, gy.n), hbar)
    if vals.size != grid.n:
        raise ValidationError(f"expected {grid.n} values, found {vals.size}")
    return WaveFunction1D(grid, vals, hbar)


def write_wavefunction(psi, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_json_dict(psi), fh)


def read_wavefunction(path):
    """Load a wavefunction file.

    Raises ``OSError`` for unreadable files (including malformed JSON) and
    :class:`ValidationError` for schema violations.
    """
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise OSError(f"{path}: not valid JSON ({exc})") from None
    return from_json_dict(doc)


# -- test assets ------------------------------------------------------------------


def random_packets(grid, count, seed=0, hbar=1.0, *, width=(0.8, 1.25), spread=1.5,
                   packets=(2, 3), unit_width=1.0):
    """Reproducible random superpositions of Gaussian packets, normalized.

    Each state sums 2-3 packets with width ``unit_width * U(width)``, centre
    and momentum drawn from ``[-spread, spread]`` and random complex weights.
    """
    rng = np.random.default_rng(seed)
    states = []
    for _ in range(count):
        vals = np.zeros(grid.n, dtype=np.complex128)
        for _ in range(rng.integers(packets[0], packets[1] + 1)):
            sigma = unit_width * rng.uniform(*width)
            a, p = rng.uniform(-spread, spread, size=2)
            w = complex(rng.normal(), rng.normal())
            vals += w * gaussian(grid, sigma, a, p, hbar).values
        states.append(normalized(WaveFunction1D(grid, vals, hbar)))
    return states


#: width of the dimensionless ground mode exp(-pi x^2) in the gaussian() convention
DIMENSIONLESS_WIDTH = 0.5 / math.sqrt(math.pi)
