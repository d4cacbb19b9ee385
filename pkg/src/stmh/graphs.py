"""Undirected graphs, graph priors and the add/remove-one-edge proposal.

Nodes are 0-based internally.  Unordered pairs ``(i, j)`` with ``i < j`` are
indexed lexicographically, which is the order of ``np.triu_indices(p, 1)``;
edge-indicator vectors everywhere in the package use this order.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.optimize
from scipy.special import logsumexp

from .errors import DimensionMismatch, NotNeighborGraphs, TooLarge

MAX_ENUMERATE_P = 5


def max_edges(p):
    return p * (p - 1) // 2


@lru_cache(maxsize=64)
def _pairs(p):
    iu, ju = np.triu_indices(p, 1)
    iu.setflags(write=False)
    ju.setflags(write=False)
    return iu, ju


def pair_index(i, j, p):
    """Position of the unordered pair ``{i, j}`` in the lexicographic order."""
    if i == j:
        raise ValueError("self-loops are not edges")
    if i > j:
        i, j = j, i
    return i * (2 * p - i - 1) // 2 + (j - i - 1)


class Graph:
    """Immutable undirected simple graph on nodes ``0..p-1``."""

    __slots__ = ("p", "_ind", "_adj", "_csr", "_num_edges", "_hash")

    def __init__(self, p, edges=()):
        p = int(p)
        if p < 1:
            raise ValueError("a graph needs at least one node")
        ind = np.zeros(max_edges(p), dtype=np.uint8)
        for i, j in edges:
            i, j = int(i), int(j)
            if not (0 <= i < p and 0 <= j < p):
                raise ValueError(f"edge ({i}, {j}) out of range for p={p}")
            ind[pair_index(i, j, p)] = 1
        self._init(p, ind)

    def _init(self, p, ind):
        self.p = p
        ind.setflags(write=False)
        self._ind = ind
        self._num_edges = int(ind.sum())
        self._adj = None
        self._csr = None
        self._hash = None

    @classmethod
    def from_indicator(cls, p, indicator):
        ind = np.asarray(indicator).astype(np.uint8, copy=True)
        if ind.shape != (max_edges(p),):
            raise DimensionMismatch(f"indicator must have length {max_edges(p)}")
        if np.any(ind > 1):
            raise ValueError("indicator entries must be 0 or 1")
        g = cls.__new__(cls)
        g._init(int(p), ind)
        return g

    @classmethod
    def from_adjacency(cls, adjacency):
        a = np.asarray(adjacency) != 0
        p = a.shape[0]
        iu, ju = _pairs(p)
        return cls.from_indicator(p, a[iu, ju])

    @classmethod
    def empty(cls, p):
        return cls(p)

    @classmethod
    def full(cls, p):
        return cls.from_indicator(p, np.ones(max_edges(p), dtype=np.uint8))

    @property
    def e_max(self):
        return max_edges(self.p)

    @property
    def num_edges(self):
        return self._num_edges

    @property
    def indicator(self):
        """Read-only 0/1 vector over the ``e_max`` unordered pairs."""
        return self._ind

    @property
    def adjacency(self):
        if self._adj is None:
            a = np.zeros((self.p, self.p), dtype=bool)
            iu, ju = _pairs(self.p)
            on = self._ind.astype(bool)
            a[iu[on], ju[on]] = True
            a[ju[on], iu[on]] = True
            a.setflags(write=False)
            self._adj = a
        return self._adj

    def neighbour_csr(self):
        """Neighbour lists in compressed form: node ``j`` owns ``idx[ptr[j]:ptr[j + 1]]``."""
        if self._csr is None:
            adj = self.adjacency
            ptr = np.zeros(self.p + 1, dtype=np.int64)
            np.cumsum(adj.sum(axis=1), out=ptr[1:])
            idx = np.nonzero(adj)[1].astype(np.int64)
            self._csr = (ptr, idx)
        return self._csr

    def extended_mask(self):
        """Boolean mask of the extended edge set: edges plus the diagonal."""
        return self.adjacency | np.eye(self.p, dtype=bool)

    @property
    def edges(self):
        iu, ju = _pairs(self.p)
        on = np.flatnonzero(self._ind)
        return [(int(iu[k]), int(ju[k])) for k in on]

    def has_edge(self, i, j):
        return bool(self._ind[pair_index(i, j, self.p)])

    def neighbors(self, j):
        return np.flatnonzero(self.adjacency[j])

    def toggle(self, k):
        """Copy of the graph with pair ``k`` flipped."""
        ind = self._ind.copy()
        ind[k] ^= 1
        g = Graph.__new__(Graph)
        g._init(self.p, ind)
        return g

    def is_empty(self):
        return self._num_edges == 0

    def is_full(self):
        return self._num_edges == self.e_max

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.p == other.p and np.array_equal(self._ind, other._ind)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.p, self._ind.tobytes()))
        return self._hash

    def __repr__(self):
        return f"Graph(p={self.p}, edges={self.edges})"

    def to_edgelist(self):
        """Edge-list text: header ``p=<n>`` then one 1-based ``i j`` per line."""
        lines = [f"p={self.p}"]
        lines += [f"{i + 1} {j + 1}" for i, j in self.edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edgelist(cls, text):
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        if not lines or not lines[0].replace(" ", "").startswith("p="):
            raise ValueError("edge list must start with a 'p=<n>' header")
        p = int(lines[0].replace(" ", "")[2:])
        edges = []
        for lineno, ln in enumerate(lines[1:], start=2):
            parts = ln.split()
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected 'i j', got {ln!r}")
            i, j = int(parts[0]) - 1, int(parts[1]) - 1
            if i == j:
                raise ValueError(f"line {lineno}: self-loop {ln!r}")
            edges.append((i, j))
        return cls(p, edges)


def write_edgelist(graph, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(graph.to_edgelist())


def read_edgelist(path):
    with open(path, encoding="utf-8") as fh:
        return Graph.from_edgelist(fh.read())


def _log_binom(n, k):
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


# Graph priors.  Every variant is uniform over graphs of a given size, so each
# one is fully described by a log-weight per graph as a function of |E|.


@dataclass(frozen=True)
class UniformPrior:
    name = "uniform"

    def log_graph_weight(self, k, e_max):
        return 0.0

    def log_size_pmf(self, e_max):
        k = np.arange(e_max + 1)
        return np.array([_log_binom(e_max, int(i)) for i in k]) - e_max * math.log(2.0)


@dataclass(frozen=True)
class DoubleUniformPrior:
    name = "double_uniform"

    def log_graph_weight(self, k, e_max):
        return -_log_binom(e_max, k)

    def log_size_pmf(self, e_max):
        return np.full(e_max + 1, -math.log(e_max + 1.0))


@dataclass(frozen=True)
class TruncatedGeometricPrior:
    """``pi(|E|) ∝ theta^|E|`` on ``0..e_max``, uniform within each size."""

    theta: float
    name = "trunc_geometric"

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")

    def log_graph_weight(self, k, e_max):
        return k * math.log(self.theta) - _log_binom(e_max, k)

    def log_size_pmf(self, e_max):
        w = np.arange(e_max + 1) * math.log(self.theta)
        return w - logsumexp(w)


@dataclass(frozen=True)
class BernoulliPrior:
    rho: float
    name = "bernoulli"

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")

    def log_graph_weight(self, k, e_max):
        return k * math.log(self.rho) + (e_max - k) * math.log1p(-self.rho)

    def log_size_pmf(self, e_max):
        return np.array(
            [_log_binom(e_max, k) + self.log_graph_weight(k, e_max) for k in range(e_max + 1)]
        )


GraphPrior = UniformPrior | DoubleUniformPrior | TruncatedGeometricPrior | BernoulliPrior


def log_prior(prior, graph):
    """Exact normalized log pmf of ``graph`` under ``prior``."""
    e_max = graph.e_max
    k = graph.num_edges
    if isinstance(prior, UniformPrior):
        return -e_max * math.log(2.0)
    if isinstance(prior, BernoulliPrior):
        return prior.log_graph_weight(k, e_max)
    return float(prior.log_size_pmf(e_max)[k]) - _log_binom(e_max, k)


def log_prior_ratio(prior, g_new, g_old):
    """``log_prior(g_new) - log_prior(g_old)`` without computing normalizers."""
    if g_new.p != g_old.p:
        raise DimensionMismatch("graphs have different node counts")
    e_max = g_new.e_max
    k1, k0 = g_new.num_edges, g_old.num_edges
    if k1 == k0:
        return 0.0
    return prior.log_graph_weight(k1, e_max) - prior.log_graph_weight(k0, e_max)


def size_pmf(prior, e_max):
    return np.exp(prior.log_size_pmf(e_max))


def expected_num_edges(prior, e_max):
    pmf = size_pmf(prior, e_max)
    return float(np.dot(np.arange(e_max + 1), pmf))


def edge_marginal(prior, e_max):
    """Prior probability that any given pair is an edge (sizes are exchangeable)."""
    if isinstance(prior, BernoulliPrior):
        return prior.rho
    return expected_num_edges(prior, e_max) / e_max


def theta_for_expected_edges(expected, e_max, xtol=1e-14):
    """Truncated-geometric ``theta`` whose prior mean edge count is ``expected``.

    The mean is increasing in ``theta`` and tends to ``e_max / 2`` as
    ``theta -> 1``, so ``expected`` must lie strictly inside ``(0, e_max / 2)``.
    """
    if not 0.0 < expected < e_max / 2.0:
        raise ValueError(f"expected edge count must lie in (0, {e_max / 2}), got {expected}")

    def gap(theta):
        return expected_num_edges(TruncatedGeometricPrior(theta), e_max) - expected

    return scipy.optimize.bisect(gap, 1e-12, 1.0 - 1e-12, xtol=xtol, maxiter=200)


# Proposal kernel: add or remove one edge, uniformly among the possible choices.


def _log_q(k_from, adding, e_max):
    if adding:
        return -math.log(2.0 - (k_from == 0)) - math.log(e_max - k_from)
    return -math.log(2.0 - (k_from == e_max)) - math.log(k_from)


def propose_graph(graph, rng):
    """Draw a neighbouring graph.

    Returns:
        ``(new_graph, log_q_fwd, log_q_rev)`` with ``log_q_fwd = log q(new|graph)``
        and ``log_q_rev = log q(graph|new)``.
    """
    e_max = graph.e_max
    if e_max < 1:
        raise ValueError("graph proposals need at least two nodes")
    k = graph.num_edges
    if k == 0:
        adding = True
    elif k == e_max:
        adding = False
    else:
        adding = rng.random() < 0.5
    candidates = np.flatnonzero(graph.indicator == (0 if adding else 1))
    pick = int(candidates[rng.integers(candidates.size)])
    new = graph.toggle(pick)
    fwd = _log_q(k, adding, e_max)
    rev = _log_q(new.num_edges, not adding, e_max)
    return new, fwd, rev


def proposal_log_prob(g_from, g_to):
    """Deterministic ``log q(g_to | g_from)``."""
    if g_from.p != g_to.p:
        raise DimensionMismatch("graphs have different node counts")
    diff = g_from.indicator != g_to.indicator
    if int(diff.sum()) != 1:
        raise NotNeighborGraphs("graphs must differ by exactly one edge")
    adding = g_to.num_edges > g_from.num_edges
    return _log_q(g_from.num_edges, adding, g_from.e_max)


def enumerate_graphs(p):
    """All ``2**e_max`` graphs on ``p`` nodes, ordered by their indicator bitmask."""
    if p > MAX_ENUMERATE_P:
        raise TooLarge(f"enumeration limited to p <= {MAX_ENUMERATE_P}, got {p}")
    e_max = max_edges(p)
    masks = np.arange(2 ** e_max, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(e_max)) & 1).astype(np.uint8)
    return [Graph.from_indicator(p, row) for row in bits]
