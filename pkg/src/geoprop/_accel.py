"""Hot loops: non-uniform exponential sums in one and two dimensions.

Every O(N*M) quadrature in the package (kernel application, direct FrFT,
band-limited interpolation at arbitrary points) funnels through the two sums

    nudft1:  out[m] = sum_j g[j] * exp(i * u[j] * X[m])
    nudft2:  out[m] = sum_{j,k} g[j, k] * exp(i * (u[j] * X[m] + v[k] * Y[m]))

Two implementations exist.  The numba one is used when numba imports and
``GEOPROP_BACKEND`` is not ``numpy``; the numpy one is the reference path
and the fallback.  ``GEOPROP_THREADS`` sets the numba thread count.

Each output sample is accumulated sequentially in a fixed order, so results
do not depend on the thread count.
"""
import os
import warnings

import numpy as np

_REQUESTED = os.environ.get("GEOPROP_BACKEND", "numba").strip().lower()
if _REQUESTED not in ("numba", "numpy"):
    warnings.warn(f"unknown GEOPROP_BACKEND={_REQUESTED!r}, using numpy")
    _REQUESTED = "numpy"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None

# numba falls back to another threading layer when the system TBB is too old
warnings.filterwarnings("ignore", message="The TBB threading layer")
BACKEND = "numba" if (HAVE_NUMBA and _REQUESTED == "numba") else "numpy"

if HAVE_NUMBA and os.environ.get("GEOPROP_THREADS"):
    numba.set_num_threads(int(os.environ["GEOPROP_THREADS"]))

# rows of the phase matrix evaluated per block in the numpy path
_BLOCK = 256


def _nudft1_numpy(g, u, X):
    g = np.ascontiguousarray(g, dtype=np.complex128)
    u = np.asarray(u, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    out = np.empty(X.shape[0], dtype=np.complex128)
    for start in range(0, X.shape[0], _BLOCK):
        stop = min(start + _BLOCK, X.shape[0])
        E = np.exp(1j * np.multiply.outer(X[start:stop], u))
        out[start:stop] = E @ g
    return out


def _nudft2_numpy(g, u, v, X, Y):
    g = np.ascontiguousarray(g, dtype=np.complex128)
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    out = np.empty(X.shape[0], dtype=np.complex128)
    for start in range(0, X.shape[0], _BLOCK):
        stop = min(start + _BLOCK, X.shape[0])
        Ex = np.exp(1j * np.multiply.outer(u, X[start:stop]))  # (nu, b)
        Ey = np.exp(1j * np.multiply.outer(v, Y[start:stop]))  # (nv, b)
        T = g @ Ey  # (nu, b)
        out[start:stop] = np.einsum("jb,jb->b", Ex, T)
    return out


if HAVE_NUMBA:

    @numba.njit(parallel=True, cache=True, fastmath=False)
    def _nudft1_numba(g, u, X):
        M = X.shape[0]
        N = u.shape[0]
        out = np.empty(M, dtype=np.complex128)
        for m in numba.prange(M):
            xm = X[m]
            re = 0.0
            im = 0.0
            for j in range(N):
                ph = u[j] * xm
                c = np.cos(ph)
                s = np.sin(ph)
                gr = g[j].real
                gi = g[j].imag
                re += gr * c - gi * s
                im += gr * s + gi * c
            out[m] = complex(re, im)
        return out

    @numba.njit(parallel=True, cache=True, fastmath=False)
    def _nudft2_numba(g, u, v, X, Y):
        M = X.shape[0]
        Nu = u.shape[0]
        Nv = v.shape[0]
        out = np.empty(M, dtype=np.complex128)
        for m in numba.prange(M):
            ey = np.empty(Nv, dtype=np.complex128)
            for k in range(Nv):
                ph = v[k] * Y[m]
                ey[k] = complex(np.cos(ph), np.sin(ph))
            acc = 0.0 + 0.0j
            for j in range(Nu):
                row = 0.0 + 0.0j
                for k in range(Nv):
                    row += g[j, k] * ey[k]
                ph = u[j] * X[m]
                acc += row * complex(np.cos(ph), np.sin(ph))
            out[m] = acc
        return out


def nudft1(g, u, X, backend=None):
    """Return ``sum_j g[j] exp(i u[j] X[m])`` for every ``X[m]``."""
    backend = backend or BACKEND
    if backend == "numba" and HAVE_NUMBA:
        return _nudft1_numba(
            np.ascontiguousarray(g, dtype=np.complex128),
            np.ascontiguousarray(u, dtype=np.float64),
            np.ascontiguousarray(X, dtype=np.float64),
        )
    return _nudft1_numpy(g, u, X)


def nudft2(g, u, v, X, Y, backend=None):
    """Return ``sum_jk g[j,k] exp(i (u[j] X[m] + v[k] Y[m]))`` for every m."""
    backend = backend or BACKEND
    if backend == "numba" and HAVE_NUMBA:
        return _nudft2_numba(
            np.ascontiguousarray(g, dtype=np.complex128),
            np.ascontiguousarray(u, dtype=np.float64),
            np.ascontiguousarray(v, dtype=np.float64),
            np.ascontiguousarray(X, dtype=np.float64),
            np.ascontiguousarray(Y, dtype=np.float64),
        )
    return _nudft2_numpy(g, u, v, X, Y)
