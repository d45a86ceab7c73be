"""Linear phase-space geometry: flows, Lagrangian foliations and sections.

Phase-space points are stacked as ``z = (x_1..x_n, p_1..p_n)`` and the
symplectic pairing is ``sigma(u, v) = u^T J v`` with ``J = [[0, I], [-I, 0]]``,
so ``sigma((1, 0), (0, 1)) = +1``: a counterclockwise loop in the (x, p)
plane encloses positive area.

A :class:`LinearFoliation` is stored through its leaf coordinate, an affine
map ``z -> C z + c`` that is constant along each leaf.  A :class:`LinearSection`
is an affine Lagrangian subspace ``{z : K z = b}``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import NotTransversal, ParallelLeaves, ValidationError
from .kernels import GalileiGenerator, QuadraticKernel

SYMPLECTIC_RTOL = 1e-12

# below this |det| two subspaces are treated as parallel
_SINGULAR_RTOL = 1e-13


def symplectic_j(n):
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def sigma(u, v):
    """Symplectic pairing of two phase-space vectors."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    n = u.shape[-1] // 2
    return float(u[:n] @ v[n:] - u[n:] @ v[:n])


def _frozen(arr):
    arr = np.array(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class AffineSymplecticMap:
    """``z -> matrix @ z + translation`` with a symplectic matrix."""

    matrix: np.ndarray
    translation: np.ndarray = None

    def __post_init__(self):
        M = np.array(self.matrix, dtype=np.float64)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] not in (2, 4):
            raise ValidationError(f"symplectic matrix must be 2x2 or 4x4, got shape {M.shape}")
        n = M.shape[0] // 2
        t = np.zeros(2 * n) if self.translation is None else np.array(self.translation, dtype=np.float64)
        if t.shape != (2 * n,):
            raise ValidationError(f"translation must have {2 * n} components")
        if not (np.all(np.isfinite(M)) and np.all(np.isfinite(t))):
            raise ValidationError("flow has non-finite entries")
        J = symplectic_j(n)
        err = np.abs(M.T @ J @ M - J).max()
        if err > SYMPLECTIC_RTOL * max(1.0, np.abs(M).max() ** 2):
            raise ValidationError(f"matrix is not symplectic (max |M^T J M - J| = {err:.3g})")
        object.__setattr__(self, "matrix", _frozen(M))
        object.__setattr__(self, "translation", _frozen(t))

    @property
    def n(self):
        return self.matrix.shape[0] // 2

    @classmethod
    def identity(cls, n=1):
        return cls(np.eye(2 * n))

    def __call__(self, z):
        return self.matrix @ np.asarray(z, dtype=np.float64) + self.translation

    def compose(self, other):
        """``self`` after ``other``."""
        return AffineSymplecticMap(
            self.matrix @ other.matrix, self.matrix @ other.translation + self.translation
        )

    def __matmul__(self, other):
        return self.compose(other)

    def inverse(self):
        n = self.n
        J = symplectic_j(n)
        Minv = -J @ self.matrix.T @ J
        return AffineSymplecticMap(Minv, -Minv @ self.translation)

    def isclose(self, other, tol=1e-12):
        scale = max(1.0, np.abs(self.matrix).max(), np.abs(self.translation).max())
        return (
            np.abs(self.matrix - other.matrix).max() <= tol * scale
            and np.abs(self.translation - other.translation).max() <= tol * scale
        )

    def __repr__(self):
        return f"AffineSymplecticMap(matrix={self.matrix.tolist()}, translation={self.translation.tolist()})"


class SystemKind(enum.Enum):
    FREE = "free"
    OSCILLATOR = "oscillator"
    EFIELD = "efield"
    BFIELD = "bfield"


@dataclass(frozen=True)
class SystemSpec:
    """A linear Hamiltonian system.

    ``force`` is the constant force e*E of the electric case.  The magnetic
    case uses ``charge`` and ``field`` with cyclotron frequency
    ``omega = charge * field / m`` and symmetric gauge.
    """

    kind: SystemKind
    m: float = 1.0
    hbar: float = 1.0
    omega: float = 0.0
    force: float = 0.0
    charge: float = 1.0
    field: float = 0.0

    def __post_init__(self):
        kind = self.kind
        if isinstance(kind, str):
            try:
                kind = SystemKind(kind.lower())
            except ValueError:
                raise ValidationError(f"unknown system kind {self.kind!r}") from None
            object.__setattr__(self, "kind", kind)
        for name in ("m", "hbar", "omega", "force", "charge", "field"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise ValidationError(f"{name} must be finite")
            object.__setattr__(self, name, val)
        if self.m <= 0:
            raise ValidationError(f"mass must be positive, got {self.m}")
        if self.hbar <= 0:
            raise ValidationError(f"hbar must be positive, got {self.hbar}")
        if kind is SystemKind.OSCILLATOR and self.omega < 0:
            raise ValidationError(f"oscillator frequency must be >= 0, got {self.omega}")
        if kind is SystemKind.BFIELD:
            object.__setattr__(self, "omega", self.charge * self.field / self.m)

    @classmethod
    def free(cls, m=1.0, hbar=1.0):
        return cls(SystemKind.FREE, m=m, hbar=hbar)

    @classmethod
    def oscillator(cls, m=1.0, omega=1.0, hbar=1.0):
        return cls(SystemKind.OSCILLATOR, m=m, hbar=hbar, omega=omega)

    @classmethod
    def efield(cls, m=1.0, force=1.0, hbar=1.0):
        return cls(SystemKind.EFIELD, m=m, hbar=hbar, force=force)

    @classmethod
    def bfield(cls, m=1.0, charge=1.0, field=1.0, hbar=1.0):
        return cls(SystemKind.BFIELD, m=m, hbar=hbar, charge=charge, field=field)

    @property
    def n(self):
        return 2 if self.kind is SystemKind.BFIELD else 1


def _sin_over(w, t):
    """``sin(w t) / w`` with the w -> 0 limit."""
    return t * np.sinc(w * t / math.pi)


def _one_minus_cos_over(w, t):
    """``(1 - cos(w t)) / w`` with the w -> 0 limit."""
    return 0.5 * w * t * t * np.sinc(w * t / (2.0 * math.pi)) ** 2


def classical_flow(sys, t):
    """Exact affine symplectic map ``(x(0), p(0)) -> (x(t), p(t))``."""
    t = float(t)
    if not math.isfinite(t):
        raise ValidationError("time must be finite")
    m = sys.m
    kind = sys.kind
    if kind is SystemKind.FREE:
        return AffineSymplecticMap([[1.0, t / m], [0.0, 1.0]])
    if kind is SystemKind.EFIELD:
        F = sys.force
        return AffineSymplecticMap([[1.0, t / m], [0.0, 1.0]], [F * t * t / (2.0 * m), F * t])
    if kind is SystemKind.OSCILLATOR:
        w = sys.omega
        c, s = math.cos(w * t), math.sin(w * t)
        return AffineSymplecticMap([[c, _sin_over(w, t) / m], [-m * w * s, c]])
    # magnetic field, symmetric gauge, z = (x, y, px, py)
    w = sys.omega
    c, s = math.cos(w * t), math.sin(w * t)
    so = _sin_over(w, t) / m  # sin / (m w)
    co = _one_minus_cos_over(w, t) / m  # (1 - cos) / (m w)
    mw = m * w
    M = np.array(
        [
            [0.5 * (c + 1), 0.5 * s, so, co],
            [-0.5 * s, 0.5 * (c + 1), -co, so],
            [-0.25 * mw * s, -0.25 * mw * (1 - c), 0.5 * (c + 1), 0.5 * s],
            [0.25 * mw * (1 - c), -0.25 * mw * s, -0.5 * s, 0.5 * (c + 1)],
        ]
    )
    return AffineSymplecticMap(M)


# -- foliations and sections ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class LinearFoliation:
    """Foliation by parallel affine Lagrangian leaves ``{z : C z + c = X}``.

    ``X`` (an n-vector) is the leaf coordinate.  Leaves are spanned by the
    kernel of ``coordinate``.
    """

    coordinate: np.ndarray
    offset: np.ndarray = None

    def __post_init__(self):
        C = np.array(self.coordinate, dtype=np.float64)
        if C.ndim == 1:
            C = C.reshape(1, -1)
        n = C.shape[0]
        if n not in (1, 2) or C.shape[1] != 2 * n:
            raise ValidationError(f"coordinate functional must be n x 2n with n in (1, 2), got {C.shape}")
        if np.linalg.matrix_rank(C) < n:
            raise ValidationError("leaf coordinate functional is degenerate")
        iso = C @ symplectic_j(n) @ C.T
        if np.abs(iso).max() > 1e-12 * max(1.0, np.abs(C).max() ** 2):
            raise ValidationError("leaves are not Lagrangian")
        c = np.zeros(n) if self.offset is None else np.array(self.offset, dtype=np.float64).reshape(-1)
        if c.shape != (n,):
            raise ValidationError(f"offset must have {n} components")
        object.__setattr__(self, "coordinate", _frozen(C))
        object.__setattr__(self, "offset", _frozen(c))

    @property
    def n(self):
        return self.coordinate.shape[0]

    @classmethod
    def position(cls, n=1):
        """Leaves ``x = const``, labelled by x."""
        return cls(np.hstack([np.eye(n), np.zeros((n, n))]))

    @classmethod
    def momentum(cls, n=1):
        """Leaves ``p = const``, labelled by p."""
        return cls(np.hstack([np.zeros((n, n)), np.eye(n)]))

    @classmethod
    def from_direction(cls, direction, section_direction=None):
        """1D foliation with leaves parallel to ``direction`` in the (x, p) plane.

        A leaf is labelled by the arc parameter of its intersection with the
        line through the origin along ``section_direction`` (default: the
        position axis, or the momentum axis if leaves are horizontal).  The
        label does not depend on the length of ``direction``.
        """
        d = np.asarray(direction, dtype=np.float64).reshape(-1)
        if d.shape != (2,) or not np.any(d):
            raise ValidationError("leaf direction must be a nonzero 2-vector")
        if section_direction is None:
            e = np.array([1.0, 0.0])
            if abs(sigma(e, d)) <= _SINGULAR_RTOL * np.linalg.norm(d):
                e = np.array([0.0, 1.0])
        else:
            e = np.asarray(section_direction, dtype=np.float64).reshape(-1)
            if e.shape != (2,) or not np.any(e):
                raise ValidationError("section direction must be a nonzero 2-vector")
            e = e / np.linalg.norm(e)
        det = sigma(e, d)
        if abs(det) <= _SINGULAR_RTOL * np.linalg.norm(d):
            raise NotTransversal("section direction is parallel to the leaves")
        # leaf through z meets the section at r*e with r = sigma(z, d) / sigma(e, d)
        return cls((symplectic_j(1) @ d) / det)

    @classmethod
    def product(cls, *planes):
        """Block-separable 2D foliation from one 1D foliation per (x_i, p_i) plane."""
        if len(planes) != 2 or any(f.n != 1 for f in planes):
            raise ValidationError("product needs exactly two 1D foliations")
        C = np.zeros((2, 4))
        for i, f in enumerate(planes):
            C[i, i] = f.coordinate[0, 0]
            C[i, 2 + i] = f.coordinate[0, 1]
        return cls(C, [f.offset[0] for f in planes])

    @property
    def leaf_direction(self):
        """Basis (columns) of the tangent space of the leaves."""
        _, _, vt = np.linalg.svd(self.coordinate)
        return vt[self.n :].T.copy()

    def leaf_coordinate(self, z):
        return self.coordinate @ np.asarray(z, dtype=np.float64) + self.offset

    def mapped(self, flow):
        """Image foliation under an affine symplectic map, labels carried along."""
        inv = flow.inverse()
        C = self.coordinate @ inv.matrix
        return LinearFoliation(C, self.offset + self.coordinate @ inv.translation)

    def leaf(self, value):
        """The leaf with coordinate ``value``, as a :class:`LinearSection`."""
        v = np.atleast_1d(np.asarray(value, dtype=np.float64))
        return LinearSection(self.coordinate, v - self.offset)

    def is_transversal(self, other):
        return transversal(self, other)


def transversal(f1, f2):
    """True iff the leaves of two foliations meet in isolated points."""
    if f1.n != f2.n:
        raise ValidationError("foliations have different dimensions")
    G = np.vstack([f1.coordinate, f2.coordinate])
    return not _is_singular(G)


def _is_singular(G):
    s = np.linalg.svd(G, compute_uv=False)
    return s[-1] <= _SINGULAR_RTOL * s[0]


@dataclass(frozen=True, eq=False)
class LinearSection:
    """Affine Lagrangian subspace ``{z : K z = b}``."""

    constraint: np.ndarray
    value: np.ndarray = None

    def __post_init__(self):
        K = np.array(self.constraint, dtype=np.float64)
        if K.ndim == 1:
            K = K.reshape(1, -1)
        n = K.shape[0]
        if n not in (1, 2) or K.shape[1] != 2 * n:
            raise ValidationError(f"section constraint must be n x 2n, got {K.shape}")
        if np.linalg.matrix_rank(K) < n:
            raise ValidationError("section constraint is degenerate")
        if np.abs(K @ symplectic_j(n) @ K.T).max() > 1e-12 * max(1.0, np.abs(K).max() ** 2):
            raise ValidationError("section is not Lagrangian")
        b = np.zeros(n) if self.value is None else np.array(self.value, dtype=np.float64).reshape(-1)
        if b.shape != (n,):
            raise ValidationError(f"section value must have {n} components")
        object.__setattr__(self, "constraint", _frozen(K))
        object.__setattr__(self, "value", _frozen(b))

    @property
    def n(self):
        return self.constraint.shape[0]

    @classmethod
    def graph(cls, slope, intercept=0.0, n=None):
        """``{p = slope x + intercept}``; slope is a scalar or symmetric n x n matrix."""
        s = np.asarray(slope, dtype=np.float64)
        if n is None:
            n = 1 if s.ndim == 0 else s.shape[0]
        if s.ndim == 0:
            s = s * np.eye(n)
        if s.shape != (n, n):
            raise ValidationError(f"slope must be scalar or {n}x{n}")
        b = np.broadcast_to(np.asarray(intercept, dtype=np.float64), (n,))
        return cls(np.hstack([-s, np.eye(n)]), b)

    @classmethod
    def vertical(cls, x_intercept=0.0, n=1):
        """``{x = x_intercept}``."""
        b = np.broadcast_to(np.asarray(x_intercept, dtype=np.float64), (n,))
        return cls(np.hstack([np.eye(n), np.zeros((n, n))]), b)

    @classmethod
    def zero_momentum(cls, n=1):
        return cls.graph(0.0, 0.0, n)

    def mapped(self, flow):
        inv = flow.inverse()
        K = self.constraint @ inv.matrix
        return LinearSection(K, self.value - self.constraint @ inv.translation)

    def parametrize(self, foliation):
        """Affine parametrization ``X -> P X + q`` of the section by leaf label.

        Raises NotTransversal if the section does not cross every leaf once.
        """
        if foliation.n != self.n:
            raise ValidationError("section and foliation have different dimensions")
        A = np.vstack([foliation.coordinate, self.constraint])
        if _is_singular(A):
            raise NotTransversal("section is not transversal to the foliation")
        n = self.n
        inv = np.linalg.inv(A)
        P = inv[:, :n]
        q = inv[:, n:] @ self.value - P @ foliation.offset
        return P, q

    def contains(self, z, tol=1e-12):
        r = self.constraint @ np.asarray(z, dtype=np.float64) - self.value
        return np.abs(r).max() <= tol * max(1.0, np.abs(self.value).max())


def intersect(s1, s2):
    """Unique common point of two n-dimensional affine subspaces."""
    A = np.vstack([s1.constraint, s2.constraint])
    if _is_singular(A):
        raise ParallelLeaves("the two lines do not meet in a single point")
    return np.linalg.solve(A, np.concatenate([s1.value, s2.value]))


def _as_leaf(leaf, foliation, name):
    """Leaf label of ``leaf`` (a number/vector or a LinearSection) in ``foliation``."""
    if not isinstance(leaf, LinearSection):
        v = np.atleast_1d(np.asarray(leaf, dtype=np.float64))
        if v.shape != (foliation.n,):
            raise ValidationError(f"{name} must have {foliation.n} components")
        return v
    K, C = leaf.constraint, foliation.coordinate
    # same leaf family iff K and C have the same row space
    if np.linalg.matrix_rank(np.vstack([K, C]), tol=1e-10 * max(1.0, np.abs(K).max())) != foliation.n:
        raise ParallelLeaves(f"{name} is not a leaf of its foliation")
    z = np.linalg.lstsq(K, leaf.value, rcond=None)[0]
    return foliation.leaf_coordinate(z)


def coupling_matrix(f1, f2):
    """Block ``Omega_12`` of the symplectic form in the joint leaf coordinates.

    ``Omega_12[i, j] = sigma(u_i, v_j)`` where ``u_i`` moves one unit along the
    i-th label of ``f1`` at fixed ``f2`` labels and ``v_j`` does the reverse.
    """
    G = np.vstack([f1.coordinate, f2.coordinate])
    if _is_singular(G):
        raise NotTransversal("foliations share a leaf direction")
    n = f1.n
    Ginv = np.linalg.inv(G)
    Omega = Ginv.T @ symplectic_j(n) @ Ginv
    return Omega[:n, n:]


def symplectic_area(lam2, q1, q2, lam1, fol1, fol2):
    """Symplectic area of the parallelogram cut out by four leaves.

    ``q1`` and ``lam1`` are leaves of ``fol1``; ``q2`` and ``lam2`` are leaves
    of ``fol2``.  Each may be a leaf label or a :class:`LinearSection`.  The
    boundary is traversed along lam2, q1, q2, lam1, so the area is
    ``(X1 - a1)^T Omega_12 (X2 - a2)`` in leaf labels.
    """
    if fol1.n != fol2.n:
        raise ValidationError("foliations have different dimensions")
    G = np.vstack([fol1.coordinate, fol2.coordinate])
    if _is_singular(G):
        raise ParallelLeaves("adjacent sides of the rectangle are parallel")
    X1 = _as_leaf(q1, fol1, "q1")
    a1 = _as_leaf(lam1, fol1, "lam1")
    X2 = _as_leaf(q2, fol2, "q2")
    a2 = _as_leaf(lam2, fol2, "lam2")
    return float((X1 - a1) @ coupling_matrix(fol1, fol2) @ (X2 - a2))


def rectangle_vertices(lam2, q1, q2, lam1, fol1, fol2):
    """Corners (D, A, B, C) in traversal order lam2 -> q1 -> q2 -> lam1."""
    lines = []
    for leaf, fol, name in ((lam2, fol2, "lam2"), (q1, fol1, "q1"), (q2, fol2, "q2"), (lam1, fol1, "lam1")):
        lines.append(leaf if isinstance(leaf, LinearSection) else fol.leaf(_as_leaf(leaf, fol, name)))
    l2, s1, s2, l1 = lines
    return [intersect(l1, l2), intersect(l2, s1), intersect(s1, s2), intersect(s2, l1)]


def section_difference(new, old, foliation):
    """Generator S on the leaf space with ``dS = new - old``, ``S(0) = 0``.

    Moving the reference section of a representation from ``old`` to ``new``
    multiplies wavefunctions by ``exp(-i S / hbar)``.
    """
    n = foliation.n
    P1, q1 = new.parametrize(foliation)
    P0, q0 = old.parametrize(foliation)
    U = np.linalg.pinv(foliation.coordinate)  # columns move one unit in each label
    UJ = U.T @ symplectic_j(n)
    beta = UJ @ (P1 - P0)
    alpha = UJ @ (q1 - q0)
    beta = 0.5 * (beta + beta.T)
    if n == 1:
        return GalileiGenerator([0.0, alpha[0], 0.5 * beta[0, 0]])
    c = np.zeros((3, 3))
    c[1, 0], c[0, 1] = alpha
    c[2, 0], c[0, 2] = 0.5 * beta[0, 0], 0.5 * beta[1, 1]
    c[1, 1] = beta[0, 1]
    return GalileiGenerator(c)


@dataclass(frozen=True, eq=False)
class FourierSteps:
    """Factorization of a generalized Fourier kernel into three steps.

    Apply ``galilei(pre)``, then the core kernel
    ``core_amp * core_phase * exp(-i X . coupling X' / hbar)``, then
    ``galilei(post)``.
    """

    pre: GalileiGenerator
    coupling: np.ndarray
    post: GalileiGenerator
    core_amp: float
    core_phase: complex
    hbar: float

    @property
    def n(self):
        return self.coupling.shape[0]

    def kernel(self):
        """The combined :class:`QuadraticKernel`."""
        n = self.n
        pre, post = self.pre.coefficients, self.post.coefficients
        if n == 1:
            pre = np.pad(pre, (0, 3))
            post = np.pad(post, (0, 3))
            return QuadraticKernel(
                1,
                pre[2],
                post[2],
                -self.coupling[0, 0],
                pre[1],
                post[1],
                0.0,
                self.core_amp,
                self.core_phase,
                self.hbar,
            )

        def quad(c):
            return np.array([[c[2, 0], 0.5 * c[1, 1]], [0.5 * c[1, 1], c[0, 2]]])

        return QuadraticKernel(
            2,
            quad(pre),
            quad(post),
            -self.coupling,
            [pre[1, 0], pre[0, 1]],
            [post[1, 0], post[0, 1]],
            0.0,
            self.core_amp,
            self.core_phase,
            self.hbar,
        )


def fourier_steps(fol1, sec1, fol2, sec2, hbar):
    """Three-step form of the kernel from (fol1, sec1) to (fol2, sec2).

    ``sec1`` is the reference section of the input representation and
    ``sec2`` that of the output.  The core step pairs the sections through
    the zero leaves, ``mu = fol1.leaf(0)`` and ``mu' = fol2.leaf(0)``.
    """
    if fol1.n != fol2.n:
        raise ValidationError("foliations have different dimensions")
    if not (hbar > 0):
        raise ValidationError(f"hbar must be positive, got {hbar}")
    n = fol1.n
    omega12 = coupling_matrix(fol1, fol2)
    s_in = section_difference(fol2.leaf(np.zeros(n)), sec1, fol1)
    s_out = section_difference(sec2, fol1.leaf(np.zeros(n)), fol2)
    det = float(np.linalg.det(omega12))
    amp = math.sqrt(abs(det)) / (2.0 * math.pi * hbar) ** (0.5 * n)
    # principal branch of sqrt(det / (i hbar)^n): continuous with the free limit
    eighths = n if det > 0 else n - 2
    phase = complex(np.exp(-0.25j * math.pi * eighths))
    return FourierSteps(-s_in, _frozen(omega12), -s_out, amp, phase, float(hbar))


def kernel_from_foliations(fol1, sec1, fol2, sec2, hbar):
    """Generalized Fourier kernel between two transversal representations.

    ``K(X, X') = sqrt|det Omega_12| / (2 pi hbar)^(n/2) * phase
    * exp(-(i/hbar) k)`` with ``k`` the symplectic area spanned by the
    sections and leaves; ``X`` labels leaves of ``fol1`` and ``X'`` leaves of
    ``fol2``.
    """
    return fourier_steps(fol1, sec1, fol2, sec2, hbar).kernel()


def propagator_geometry(sys, t):
    """Foliations and sections whose generalized Fourier kernel is the propagator.

    Returns ``(fol1, sec1, fol2, sec2)``: the position foliation and zero
    momentum section carried forward by the flow, and their untransported
    originals.
    """
    flow = classical_flow(sys, t)
    n = sys.n
    pos = LinearFoliation.position(n)
    zero = LinearSection.zero_momentum(n)
    return pos.mapped(flow), zero.mapped(flow), pos, zero
