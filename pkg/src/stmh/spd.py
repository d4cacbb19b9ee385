"""Dense symmetric positive-definite matrix kernels.

Matrices are plain ``numpy`` arrays kept in full symmetric storage.  Positive
definiteness is always decided by Cholesky success, never by eigenvalues.
The factorizations are small hand-written loops compiled with numba: the
sampler calls them millions of times on matrices of order ``p <= 50`` where
LAPACK call overhead dominates.
"""

import numba
import numpy as np

from .errors import DimensionMismatch, EmptyBlock, NotPositiveDefinite


@numba.njit(cache=True)
def _chol(a):
    p = a.shape[0]
    L = np.zeros((p, p))
    for j in range(p):
        s = a[j, j]
        for t in range(j):
            s -= L[j, t] * L[j, t]
        if not s > 0.0:
            return L, False
        d = np.sqrt(s)
        L[j, j] = d
        for i in range(j + 1, p):
            s = a[i, j]
            for t in range(j):
                s -= L[i, t] * L[j, t]
            L[i, j] = s / d
    return L, True


@numba.njit(cache=True)
def _tri_inv(L):
    # Inverse of a lower-triangular matrix by forward substitution.
    p = L.shape[0]
    X = np.zeros((p, p))
    for c in range(p):
        X[c, c] = 1.0 / L[c, c]
        for r in range(c + 1, p):
            s = 0.0
            for t in range(c, r):
                s -= L[r, t] * X[t, c]
            X[r, c] = s / L[r, r]
    return X


@numba.njit(cache=True)
def _inv_from_chol(L):
    X = _tri_inv(L)
    p = L.shape[0]
    out = np.empty((p, p))
    for i in range(p):
        for j in range(i, p):
            s = 0.0
            for t in range(j, p):
                s += X[t, i] * X[t, j]
            out[i, j] = s
            out[j, i] = s
    return out


@numba.njit(cache=True)
def _schur(a, b, r):
    nb = b.shape[0]
    nr = r.shape[0]
    arr = np.empty((nr, nr))
    arb = np.empty((nr, nb))
    for i in range(nr):
        for j in range(nr):
            arr[i, j] = a[r[i], r[j]]
        for j in range(nb):
            arb[i, j] = a[r[i], b[j]]
    L, ok = _chol(arr)
    out = np.empty((nb, nb))
    if not ok:
        return out, False
    # Y = L^{-1} a_RB, then S = a_BB - Y^T Y
    for c in range(nb):
        for i in range(nr):
            s = arb[i, c]
            for t in range(i):
                s -= L[i, t] * arb[t, c]
            arb[i, c] = s / L[i, i]
    for i in range(nb):
        for j in range(i, nb):
            s = a[b[i], b[j]]
            for t in range(nr):
                s -= arb[t, i] * arb[t, j]
            out[i, j] = s
            out[j, i] = s
    return out, True


def _square(a, name="A"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    return a


def cholesky(a):
    """Lower-triangular factor ``L`` with ``L @ L.T == a`` (lower triangle of ``a`` is read).

    Raises:
        NotPositiveDefinite: if a pivot is not strictly positive.
    """
    L, ok = _chol(_square(a))
    if not ok:
        raise NotPositiveDefinite("matrix is not positive definite (non-positive Cholesky pivot)")
    return L


def is_spd(a):
    try:
        cholesky(a)
    except (NotPositiveDefinite, DimensionMismatch):
        return False
    return True


@numba.njit(cache=True)
def _logdet_from_chol(L):
    s = 0.0
    for i in range(L.shape[0]):
        s += np.log(L[i, i])
    return 2.0 * s


def log_det(a):
    return _logdet_from_chol(cholesky(a))


def inverse_spd(a):
    """Inverse of a positive-definite matrix, returned exactly symmetric."""
    return _inv_from_chol(cholesky(a))


def _block_index(block, p):
    idx = np.unique(np.asarray(block, dtype=np.int64).ravel())
    if idx.size == 0:
        raise EmptyBlock("block must contain at least one node")
    if idx[0] < 0 or idx[-1] >= p:
        raise DimensionMismatch(f"block indices must lie in [0, {p})")
    return idx


def complement(block, p):
    mask = np.ones(p, dtype=bool)
    mask[np.asarray(block, dtype=np.int64)] = False
    return np.flatnonzero(mask)


def schur_complement(sigma, block):
    """Schur complement of the rows/columns outside ``block`` (0-based nodes).

    ``S_B = sigma[B,B] - sigma[B,R] sigma[R,R]^{-1} sigma[R,B]`` with ``R`` the
    remaining nodes.  If ``block`` covers every node, ``sigma`` itself is
    returned (as a copy).
    """
    sigma = _square(sigma, "sigma")
    p = sigma.shape[0]
    b = _block_index(block, p)
    if b.size == p:
        return sigma.copy()
    out, ok = _schur(sigma, b, complement(b, p))
    if not ok:
        raise NotPositiveDefinite("complement block is not positive definite")
    return out


def trace_product(a, b):
    """Matrix inner product ``tr(A^T B) = sum_ij A_ij B_ij``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    return float(np.vdot(a, b))


def random_spd(p, rng, eps=1e-1, scale=1.0):
    """Random positive-definite matrix ``M^T M / p + eps I``; test and demo helper."""
    m = rng.standard_normal((p, p)) * scale
    a = m.T @ m / p + eps * np.eye(p)
    return 0.5 * (a + a.T)
