"""Metropolis-Hastings on (sigma, graph) with sparsifying-transform priors.

The chain lives on a full covariance parameter ``sigma`` and a graph ``G``,
a priori independent.  The precision matrix entering the likelihood is
``Q = PD_G(sigma)``, so no graph-dependent normalizing constant ever appears in
an acceptance ratio.  One iteration is one add/remove-edge proposal followed by
``blocks_per_iter`` inverse-Wishart proposals on the Schur complements of
random node blocks.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import constants
from .dist import InvWishartParams, _inv_wishart_from_chol, dof, gaussian_loglik, log_pdf_inv_wishart
from .errors import BadBlockSize, ConfigError, NoSamples, NotPositiveDefinite
from .graphs import Graph, log_prior, log_prior_ratio, max_edges, propose_graph
from .pdcomp import CompletionSettings, completion_residual, in_pattern, pd_complete
from .spd import _inv_from_chol, _logdet_from_chol, cholesky, schur_complement

log = logging.getLogger(__name__)


def proposal_k(c):
    """Inverse-Wishart proposal constant giving relative diagonal SD ``c``."""
    return 2.0 / c ** 2 + 2.0


@dataclass(frozen=True)
class SamplerConfig:
    iterations: int
    burn_in: int = 0
    thin: int = 1
    block_size: int = 2
    blocks_per_iter: int = 1
    c: float = constants.DEFAULT_C
    seed: int = 0
    completion: CompletionSettings = field(default_factory=CompletionSettings)
    completion_method: str = "hastie"
    audit_every: int = constants.CACHE_AUDIT_EVERY

    @property
    def k(self):
        return proposal_k(self.c)

    def validate(self, p):
        if self.iterations < 0:
            raise ConfigError("sampler.iterations", "must be non-negative")
        if self.burn_in < 0:
            raise ConfigError("sampler.burn_in", "must be non-negative")
        if self.iterations > 0 and self.burn_in >= self.iterations:
            raise ConfigError("sampler.burn_in", "must be smaller than sampler.iterations")
        if self.thin < 1:
            raise ConfigError("sampler.thin", "must be at least 1")
        if not 2 <= self.block_size <= p:
            raise ConfigError("sampler.block_size", f"must lie in [2, {p}]")
        if self.blocks_per_iter < 1:
            raise ConfigError("sampler.blocks_per_iter", "must be at least 1")
        if not (self.c > 0 and math.isfinite(self.c)):
            raise ConfigError("sampler.c", "must be a positive number")
        if self.completion_method not in ("hastie", "ips"):
            raise ConfigError("sampler.completion_method", "must be 'hastie' or 'ips'")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("sampler.seed", "must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class ChainState:
    sigma: np.ndarray
    graph: Graph
    Q: np.ndarray
    W: np.ndarray
    log_lik: float
    log_prior_sigma: float
    log_prior_graph: float

    @property
    def log_target(self):
        return self.log_lik + self.log_prior_sigma + self.log_prior_graph


@dataclass(frozen=True)
class SampleRecord:
    iter: int
    edges: np.ndarray
    num_edges: int
    log_lik: float
    log_prior_sigma: float
    log_prior_graph: float
    accept_flags: tuple
    sigma: np.ndarray = None
    Q: np.ndarray = None


@dataclass
class RunStats:
    accept_rate_sigma: float = float("nan")
    accept_rate_graph: float = float("nan")
    completion_failures: int = 0
    proposals_sigma: int = 0
    proposals_graph: int = 0
    accepted_sigma: int = 0
    accepted_graph: int = 0

    def finish(self):
        if self.proposals_sigma:
            self.accept_rate_sigma = self.accepted_sigma / self.proposals_sigma
        if self.proposals_graph:
            self.accept_rate_graph = self.accepted_graph / self.proposals_graph
        return self


@dataclass(frozen=True)
class Step:
    state: ChainState
    accepted: bool
    completion_failed: bool = False


def make_rng(seed, chain_index=0):
    """Independent PCG64 stream for chain ``chain_index`` of a run seeded ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(chain_index),))
    return np.random.Generator(np.random.PCG64(ss))


def _complete(sigma, graph, settings, method, warm):
    """Completion with an optional warm start, falling back to a cold start."""
    if warm is not None:
        try:
            res = pd_complete(sigma, graph, method=method, settings=settings, init=warm)
            if res.converged:
                return res
        except (NotPositiveDefinite, ValueError):
            pass
    try:
        res = pd_complete(sigma, graph, method=method, settings=settings)
    except NotPositiveDefinite:
        return None
    return res if res.converged else None


def init_state(stats, sigma_prior, graph_prior, sigma=None, graph=None,
               settings=None, method="hastie"):
    """Chain state at ``(sigma, graph)``; defaults to the identity and the empty graph."""
    p = stats.p
    sigma = np.eye(p) if sigma is None else np.array(sigma, dtype=float)
    graph = Graph.empty(p) if graph is None else graph
    res = pd_complete(sigma, graph, method=method, settings=settings, strict=True)
    return ChainState(
        sigma=sigma,
        graph=graph,
        Q=res.Q,
        W=res.W,
        log_lik=gaussian_loglik(stats, res.Q),
        log_prior_sigma=sigma_prior.log_pdf(sigma),
        log_prior_graph=log_prior(graph_prior, graph),
    )


def select_random_block(p, size, rng):
    """Uniformly random ``size``-subset of ``0..p-1``, sorted."""
    if not 2 <= size <= p:
        raise BadBlockSize(f"block size must lie in [2, {p}], got {size}")
    if size == p:
        return np.arange(p)
    return np.sort(rng.permutation(p)[:size])


def block_proposal_params(schur, k):
    """Proposal law ``IW(k + 2, k * S_B)``, centred on ``S_B`` with relative SD ``c``."""
    return InvWishartParams(k + 2.0, k * schur)


def propose_sigma_block(sigma, block, k, rng):
    """New sigma differing from ``sigma`` only inside ``block``.

    The Schur complement ``S_B`` of the block is redrawn from
    ``IW(k + 2, k * S_B)`` and the block is rebuilt from it, so positive
    definiteness is preserved and the off-block entries stay fixed.

    Returns:
        ``(sigma_new, schur_old, schur_new)``.
    """
    schur = schur_complement(sigma, block)
    C = math.sqrt(k) * cholesky(schur)
    schur_new = _inv_wishart_from_chol(C, dof(k + 2.0, len(block)), rng)
    sigma_new = sigma.copy()
    ix = np.ix_(block, block)
    sigma_new[ix] = schur_new + (sigma[ix] - schur)
    return sigma_new, schur, schur_new


def block_proposal_log_density(schur_from, schur_to, k):
    """``log q(S_B_to | S_B_from)``.

    The block entries are a translation of the Schur complement at fixed
    off-block entries, so no Jacobian term is needed.
    """
    return log_pdf_inv_wishart(schur_to, block_proposal_params(schur_from, k))


def block_proposal_log_ratio(schur, schur_new, k):
    """``log q(schur | schur_new) - log q(schur_new | schur)`` from shared factors.

    Both densities have the same dimension and shape parameter, so the
    multigamma terms cancel; the ``log|k S|`` parts of the normalizers do not.
    """
    b = schur.shape[0]
    n = dof(k + 2.0, b)
    L0 = cholesky(schur)
    L1 = cholesky(schur_new)
    ld0 = _logdet_from_chol(L0)
    ld1 = _logdet_from_chol(L1)
    tr01 = float(np.vdot(_inv_from_chol(L0), schur_new))
    tr10 = float(np.vdot(_inv_from_chol(L1), schur))
    a = 0.5 * (k + 2.0 + 2.0 * b)
    return -a * (ld0 - ld1) - 0.5 * k * (tr01 - tr10) + 0.5 * n * (ld1 - ld0)


def sigma_block_log_alpha(state, sigma_new, schur, schur_new, k, stats, sigma_prior,
                          settings=None, method="hastie"):
    """Log acceptance ratio of a block proposal ``state.sigma -> sigma_new``.

    Returns:
        ``(log_alpha, completion, log_lik, log_prior_sigma)`` for the proposed
        state, or ``None`` if the completion failed.
    """
    if method == "hastie":
        warm = state.W + (sigma_new - state.sigma)
    else:
        warm = state.Q
    res = _complete(sigma_new, state.graph, settings, method, warm)
    if res is None:
        return None
    try:
        lp_sigma = sigma_prior.log_pdf(sigma_new)
        ll = gaussian_loglik(stats, res.Q)
        ratio = block_proposal_log_ratio(schur, schur_new, k)
    except NotPositiveDefinite:
        return None
    log_alpha = lp_sigma + ll - state.log_prior_sigma - state.log_lik + ratio
    return log_alpha, res, ll, lp_sigma


def step_sigma_block(state, block, k, stats, sigma_prior, rng, settings=None, method="hastie"):
    """One Metropolis-Hastings update of ``sigma`` on ``block``; the graph prior cancels."""
    try:
        sigma_new, schur, schur_new = propose_sigma_block(state.sigma, block, k, rng)
    except NotPositiveDefinite:
        return Step(state, False, True)
    out = sigma_block_log_alpha(state, sigma_new, schur, schur_new, k, stats, sigma_prior, settings, method)
    if out is None:
        return Step(state, False, True)
    log_alpha, res, ll, lp_sigma = out
    if math.log(rng.random()) < log_alpha:
        new = replace(state, sigma=sigma_new, Q=res.Q, W=res.W, log_lik=ll, log_prior_sigma=lp_sigma)
        return Step(new, True)
    return Step(state, False)


def graph_log_alpha(state, g_new, log_q_fwd, log_q_rev, graph_prior, stats, settings=None,
                    method="hastie", corrupt_add_bias=0.0):
    """Log acceptance ratio of the graph proposal ``state.graph -> g_new``.

    Returns:
        ``(log_alpha, completion, log_lik)`` or ``None`` if the completion failed.
    """
    if method == "hastie":
        warm = np.where(g_new.extended_mask(), state.sigma, state.W)
    else:
        warm = state.Q if in_pattern(state.Q, g_new) else None
    res = _complete(state.sigma, g_new, settings, method, warm)
    if res is None:
        return None
    try:
        ll = gaussian_loglik(stats, res.Q)
    except NotPositiveDefinite:
        return None
    log_alpha = ll - state.log_lik + log_prior_ratio(graph_prior, g_new, state.graph) + log_q_rev - log_q_fwd
    if corrupt_add_bias and g_new.num_edges > state.graph.num_edges:
        log_alpha += corrupt_add_bias
    return log_alpha, res, ll


def step_graph(state, graph_prior, stats, rng, settings=None, method="hastie", corrupt_add_bias=0.0):
    """One add/remove-edge Metropolis-Hastings update; ``sigma`` is untouched.

    ``corrupt_add_bias`` is a test hook added to the log acceptance ratio of
    every edge addition; it must stay zero for valid inference.
    """
    g_new, log_q_fwd, log_q_rev = propose_graph(state.graph, rng)
    out = graph_log_alpha(state, g_new, log_q_fwd, log_q_rev, graph_prior, stats, settings, method,
                          corrupt_add_bias)
    if out is None:
        return Step(state, False, True)
    log_alpha, res, ll = out
    if math.log(rng.random()) < log_alpha:
        new = replace(
            state,
            graph=g_new,
            Q=res.Q,
            W=res.W,
            log_lik=ll,
            log_prior_graph=state.log_prior_graph + log_prior_ratio(graph_prior, g_new, state.graph),
        )
        return Step(new, True)
    return Step(state, False)


class CacheDrift(RuntimeError):
    pass


def audit_state(state, stats, sigma_prior, graph_prior, atol=constants.CACHE_AUDIT_ATOL):
    """Recompute the cached terms from scratch and return the largest drift."""
    drift = max(
        abs(state.log_lik - gaussian_loglik(stats, state.Q)),
        abs(state.log_prior_sigma - sigma_prior.log_pdf(state.sigma)),
        abs(state.log_prior_graph - log_prior(graph_prior, state.graph)),
        completion_residual(state.Q, state.sigma, state.graph),
    )
    if not in_pattern(state.Q, state.graph):
        raise CacheDrift("cached Q left the graph's zero pattern")
    if drift > atol:
        raise CacheDrift(f"cached chain terms drifted by {drift:.3e} (limit {atol:.1e})")
    return drift


class Chain:
    """A single STMH chain; iterate it to obtain :class:`SampleRecord` objects.

    Records are emitted after iterations ``0, thin, 2 * thin, ...`` and include
    the burn-in.  :attr:`run_stats` counts only post-burn-in proposals.
    """

    def __init__(self, config, stats, sigma_prior, graph_prior, init=None, rng=None,
                 keep_matrices=False, corrupt_add_bias=0.0):
        p = stats.p
        config.validate(p)
        self.config = config
        self.stats = stats
        self.sigma_prior = sigma_prior
        self.graph_prior = graph_prior
        self.rng = make_rng(config.seed) if rng is None else rng
        self.keep_matrices = keep_matrices
        self.corrupt_add_bias = corrupt_add_bias
        if init is None:
            init = init_state(stats, sigma_prior, graph_prior,
                              settings=config.completion, method=config.completion_method)
        self.state = init
        self.run_stats = RunStats()

    def __iter__(self):
        cfg = self.config
        rs = self.run_stats
        p = self.stats.p
        k = cfg.k
        settings = cfg.completion
        method = cfg.completion_method
        for it in range(cfg.iterations):
            counted = it >= cfg.burn_in
            step = step_graph(self.state, self.graph_prior, self.stats, self.rng, settings, method,
                              self.corrupt_add_bias)
            flags = [step.accepted]
            self.state = step.state
            rs.completion_failures += step.completion_failed
            if counted:
                rs.proposals_graph += 1
                rs.accepted_graph += step.accepted
            for _ in range(cfg.blocks_per_iter):
                block = select_random_block(p, cfg.block_size, self.rng)
                step = step_sigma_block(self.state, block, k, self.stats, self.sigma_prior,
                                        self.rng, settings, method)
                flags.append(step.accepted)
                self.state = step.state
                rs.completion_failures += step.completion_failed
                if counted:
                    rs.proposals_sigma += 1
                    rs.accepted_sigma += step.accepted
            if cfg.audit_every and (it + 1) % cfg.audit_every == 0:
                audit_state(self.state, self.stats, self.sigma_prior, self.graph_prior)
            if it % cfg.thin == 0:
                yield self._record(it, tuple(flags))
        rs.finish()
        if rs.completion_failures:
            log.warning("%d proposals rejected after failed PD-completion", rs.completion_failures)

    def _record(self, it, flags):
        s = self.state
        extra = {}
        if self.keep_matrices:
            extra = {"sigma": s.sigma, "Q": s.Q}
        return SampleRecord(
            iter=it,
            edges=s.graph.indicator,
            num_edges=s.graph.num_edges,
            log_lik=s.log_lik,
            log_prior_sigma=s.log_prior_sigma,
            log_prior_graph=s.log_prior_graph,
            accept_flags=flags,
            **extra,
        )


@dataclass
class ChainResult:
    records: list
    run_stats: RunStats
    state: ChainState


def run_chain(config, stats, sigma_prior, graph_prior, init=None, rng=None, **kwargs):
    """Run one chain to completion and collect its records."""
    chain = Chain(config, stats, sigma_prior, graph_prior, init=init, rng=rng, **kwargs)
    records = list(chain)
    return ChainResult(records, chain.run_stats, chain.state)


def _run_indexed(args):
    config, stats, sigma_prior, graph_prior, index, kwargs = args
    return run_chain(config, stats, sigma_prior, graph_prior, rng=make_rng(config.seed, index), **kwargs)


def run_chains(config, stats, sigma_prior, graph_prior, chains=1, workers=1, **kwargs):
    """Run ``chains`` independent chains; chain ``i`` uses stream ``(seed, i)``.

    Results are returned in chain order and do not depend on ``workers``.
    """
    jobs = [(config, stats, sigma_prior, graph_prior, i, kwargs) for i in range(chains)]
    if workers <= 1 or chains == 1:
        return [_run_indexed(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_indexed, jobs))


def _p_from_pairs(n_pairs):
    p = int(round((1 + math.sqrt(1 + 8 * n_pairs)) / 2))
    if max_edges(p) != n_pairs:
        raise ValueError(f"{n_pairs} is not a triangular pair count")
    return p


def edge_frequencies(records, burn_in=0):
    """Mean edge-indicator vector over records with ``iter >= burn_in``."""
    kept = [r.edges for r in records if r.iter >= burn_in]
    if not kept:
        raise NoSamples("no records after burn-in")
    return np.mean(np.asarray(kept, dtype=float), axis=0), len(kept)


def estimate_edge_probabilities(records, burn_in=0):
    """Symmetric ``p x p`` matrix of posterior edge frequencies, zero diagonal."""
    freq, _ = edge_frequencies(records, burn_in)
    p = _p_from_pairs(freq.size)
    out = np.zeros((p, p))
    iu = np.triu_indices(p, 1)
    out[iu] = freq
    out.T[iu] = freq
    return out


def batch_means_se(x, batches=constants.BATCH_MEANS_BATCHES):
    """Monte-Carlo standard error of the mean of ``x`` by non-overlapping batch means."""
    x = np.asarray(x, dtype=float)
    size = x.size // batches
    if size < 1:
        raise ValueError(f"need at least {batches} values for batch means")
    means = x[: size * batches].reshape(batches, size).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(batches))
