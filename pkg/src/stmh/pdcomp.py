"""PD-completion: map a full covariance matrix to the precision matrix of a graph.

For a graph ``G`` and ``sigma`` positive definite there is exactly one
positive-definite ``Q`` with ``Q[i, j] == 0`` off the extended edge set and
``inv(Q)[i, j] == sigma[i, j]`` on it.  Two iterative solvers are provided:

* ``pd_complete_hastie`` works on the columns of ``W = inv(Q)``, solving one
  regression per node against its neighbours.
* ``pd_complete_ips`` is iterative proportional scaling on ``Q`` over the
  clique cover made of all singletons and all edges.

They share nothing but the contract, so each checks the other in the tests.
"""

from dataclasses import dataclass, field

import numba
import numpy as np

from . import constants
from .errors import DimensionMismatch, NotConverged, NotInPG, NotPositiveDefinite
from .spd import inverse_spd


@dataclass(frozen=True)
class CompletionSettings:
    tol: float = constants.COMPLETION_TOL
    max_sweeps: int = constants.COMPLETION_MAX_SWEEPS

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")


@dataclass
class CompletionResult:
    Q: np.ndarray
    sweeps_used: int
    converged: bool
    residual: float
    W: np.ndarray = field(repr=False, default=None)


@numba.njit(cache=True)
def _chol_solve(A, b, k):
    # In-place Cholesky of A[:k, :k] followed by solve; b[:k] becomes the solution.
    for c in range(k):
        s = A[c, c]
        for t in range(c):
            s -= A[c, t] * A[c, t]
        if not s > 0.0:
            return False
        d = np.sqrt(s)
        A[c, c] = d
        for r in range(c + 1, k):
            s = A[r, c]
            for t in range(c):
                s -= A[r, t] * A[c, t]
            A[r, c] = s / d
    for r in range(k):
        s = b[r]
        for t in range(r):
            s -= A[r, t] * b[t]
        b[r] = s / A[r, r]
    for r in range(k - 1, -1, -1):
        s = b[r]
        for t in range(r + 1, k):
            s -= A[t, r] * b[t]
        b[r] = s / A[r, r]
    return True


@numba.njit(cache=True)
def _neighbour_regression(W, S, ptr, idx, j, A, b):
    k = ptr[j + 1] - ptr[j]
    base = ptr[j]
    for a in range(k):
        ia = idx[base + a]
        b[a] = S[ia, j]
        for c in range(k):
            A[a, c] = W[ia, idx[base + c]]
    return _chol_solve(A, b, k)


@numba.njit(cache=True)
def _hastie_sweeps(W, S, ptr, idx, tol, max_sweeps):
    p = S.shape[0]
    A = np.empty((p, p))
    b = np.empty(p)
    delta = np.inf
    sweeps = 0
    for _ in range(max_sweeps):
        delta = 0.0
        for j in range(p):
            k = ptr[j + 1] - ptr[j]
            base = ptr[j]
            if k > 0 and not _neighbour_regression(W, S, ptr, idx, j, A, b):
                return sweeps, delta, False
            for i in range(p):
                if i == j:
                    continue
                s = 0.0
                for a in range(k):
                    s += W[i, idx[base + a]] * b[a]
                d = abs(s - W[i, j])
                if d > delta:
                    delta = d
                W[i, j] = s
                W[j, i] = s
        sweeps += 1
        if delta <= tol:
            break
    return sweeps, delta, True


@numba.njit(cache=True)
def _hastie_recover(W, S, ptr, idx):
    p = S.shape[0]
    Q = np.zeros((p, p))
    A = np.empty((p, p))
    b = np.empty(p)
    for j in range(p):
        k = ptr[j + 1] - ptr[j]
        base = ptr[j]
        if k > 0 and not _neighbour_regression(W, S, ptr, idx, j, A, b):
            return Q, False
        denom = S[j, j]
        for a in range(k):
            denom -= W[idx[base + a], j] * b[a]
        if not denom > 0.0:
            return Q, False
        q = 1.0 / denom
        Q[j, j] = q
        for a in range(k):
            Q[idx[base + a], j] = -b[a] * q
    return Q, True


@numba.njit(cache=True)
def _ips_sweeps(Q, S, ei, ej, mask, tol, max_sweeps):
    p = S.shape[0]
    W = np.linalg.inv(Q)
    resid = np.inf
    sweeps = 0
    for _ in range(max_sweeps):
        for i in range(p):
            delta = 1.0 / S[i, i] - 1.0 / W[i, i]
            Q[i, i] += delta
            g = delta / (1.0 + W[i, i] * delta)
            wi = W[:, i].copy()
            for r in range(p):
                for c in range(p):
                    W[r, c] -= g * wi[r] * wi[c]
        for e in range(ei.shape[0]):
            i = ei[e]
            j = ej[e]
            # delta = inv(S_C) - inv(W_C) on the 2x2 clique C = {i, j}
            ds = S[i, i] * S[j, j] - S[i, j] * S[i, j]
            dw = W[i, i] * W[j, j] - W[i, j] * W[i, j]
            if not (ds > 0.0 and dw > 0.0):
                return W, sweeps, resid, False
            d00 = S[j, j] / ds - W[j, j] / dw
            d11 = S[i, i] / ds - W[i, i] / dw
            d01 = -S[i, j] / ds + W[i, j] / dw
            Q[i, i] += d00
            Q[j, j] += d11
            Q[i, j] += d01
            Q[j, i] += d01
            # K = delta @ inv(I + W_C delta); W -= W[:, C] K W[C, :]
            m00 = 1.0 + W[i, i] * d00 + W[i, j] * d01
            m01 = W[i, i] * d01 + W[i, j] * d11
            m10 = W[i, j] * d00 + W[j, j] * d01
            m11 = 1.0 + W[i, j] * d01 + W[j, j] * d11
            det = m00 * m11 - m01 * m10
            if det == 0.0:
                return W, sweeps, resid, False
            n00 = m11 / det
            n01 = -m01 / det
            n10 = -m10 / det
            n11 = m00 / det
            k00 = d00 * n00 + d01 * n10
            k01 = d00 * n01 + d01 * n11
            k10 = d01 * n00 + d11 * n10
            k11 = d01 * n01 + d11 * n11
            wi = W[:, i].copy()
            wj = W[:, j].copy()
            for r in range(p):
                ur = wi[r] * k00 + wj[r] * k10
                vr = wi[r] * k01 + wj[r] * k11
                for c in range(p):
                    W[r, c] -= ur * wi[c] + vr * wj[c]
        sweeps += 1
        W = np.linalg.inv(Q)
        W = 0.5 * (W + W.T)
        resid = 0.0
        for r in range(p):
            for c in range(p):
                if mask[r, c]:
                    d = abs(W[r, c] - S[r, c])
                    if d > resid:
                        resid = d
        if resid <= tol:
            break
    return W, sweeps, resid, True


def _check_inputs(sigma, graph):
    sigma = np.ascontiguousarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape != (graph.p, graph.p):
        raise DimensionMismatch(f"sigma shape {sigma.shape} does not match p={graph.p}")
    return sigma


def _finish(result, strict):
    if strict and not result.converged:
        raise NotConverged(
            f"completion did not reach tol after {result.sweeps_used} sweeps "
            f"(residual {result.residual:.3e})",
            result,
        )
    return result


def pd_complete_hastie(sigma, graph, settings=None, init=None, strict=False):
    """PD-completion by column-wise regressions on ``W = inv(Q)``.

    Args:
        sigma: positive-definite ``p x p`` matrix; only entries on the extended
            edge set of ``graph`` influence the result.
        graph: the target :class:`~stmh.graphs.Graph`.
        settings: stopping rule; the sweep metric is the max-abs change of ``W``.
        init: optional starting ``W`` (e.g. a previous completion's inverse).
            Its diagonal is reset to ``diag(sigma)``.
        strict: raise :class:`NotConverged` instead of returning an
            unconverged result.

    Raises:
        NotPositiveDefinite: a neighbour system or a recovered pivot is not
            positive definite.
    """
    settings = settings or CompletionSettings()
    sigma = _check_inputs(sigma, graph)
    W = sigma.copy() if init is None else np.array(init, dtype=float, order="C")
    np.fill_diagonal(W, np.diag(sigma))
    ptr, idx = graph.neighbour_csr()
    sweeps, delta, ok = _hastie_sweeps(W, sigma, ptr, idx, settings.tol, settings.max_sweeps)
    if not ok:
        raise NotPositiveDefinite("neighbour system not positive definite during completion")
    Q, ok = _hastie_recover(W, sigma, ptr, idx)
    if not ok:
        raise NotPositiveDefinite("non-positive pivot while recovering the precision matrix")
    Q = 0.5 * (Q + Q.T)
    result = CompletionResult(Q, int(sweeps), bool(delta <= settings.tol), float(delta), W)
    return _finish(result, strict)


def pd_complete_ips(sigma, graph, settings=None, init=None, strict=False):
    """PD-completion by iterative proportional scaling on ``Q``.

    Each cover element ``C`` (every node, then every edge) gets
    ``Q_C <- inv(sigma_C) + Q_{C,R} inv(Q_R) Q_{R,C}``, which makes
    ``inv(Q)_C == sigma_C``; ``inv(Q)`` is carried along by rank-``|C|``
    updates and refreshed once per sweep.  The sweep metric is the defining
    residual on the extended edge set.

    ``init`` must already be a positive-definite member of the graph's
    pattern; it defaults to ``diag(1 / diag(sigma))``.
    """
    settings = settings or CompletionSettings()
    sigma = _check_inputs(sigma, graph)
    mask = graph.extended_mask()
    if init is None:
        Q = np.diag(1.0 / np.diag(sigma))
    else:
        Q = np.array(init, dtype=float, order="C")
        if np.any(Q[~mask] != 0.0):
            raise NotInPG("initial Q has nonzero entries off the extended edge set")
    edges = np.array(graph.edges, dtype=np.int64).reshape(-1, 2)
    try:
        W, sweeps, resid, ok = _ips_sweeps(
            Q, sigma, edges[:, 0].copy(), edges[:, 1].copy(), mask,
            settings.tol, settings.max_sweeps,
        )
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    if not ok:
        raise NotPositiveDefinite("clique update left the positive-definite cone")
    Q = 0.5 * (Q + Q.T)
    Q[~mask] = 0.0
    inverse_spd(Q)
    result = CompletionResult(Q, int(sweeps), bool(resid <= settings.tol), float(resid), W)
    return _finish(result, strict)


METHODS = {"hastie": pd_complete_hastie, "ips": pd_complete_ips}


def pd_complete(sigma, graph, method="hastie", settings=None, init=None, strict=False):
    try:
        fn = METHODS[method]
    except KeyError:
        raise ValueError(f"unknown completion method {method!r}; use one of {sorted(METHODS)}") from None
    return fn(sigma, graph, settings=settings, init=init, strict=strict)


def completion_residual(Q, sigma, graph):
    """Max-abs gap between ``inv(Q)`` and ``sigma`` over the extended edge set."""
    W = inverse_spd(Q)
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != W.shape:
        raise DimensionMismatch("Q and sigma differ in shape")
    mask = graph.extended_mask()
    return float(np.max(np.abs(W - sigma)[mask]))


def in_pattern(Q, graph):
    """True if ``Q`` is exactly zero off the extended edge set."""
    return not np.any(np.asarray(Q)[~graph.extended_mask()] != 0.0)
