import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from stmh.cli import autocorrelation_time

from conftest import random_graph
from stmh.dist import InvWishartParams, SufficientStats, WishartParams, log_pdf_inv_wishart, sample_wishart
from stmh.errors import BadBlockSize, ConfigError, NoSamples
from stmh.graphs import (
    BernoulliPrior,
    DoubleUniformPrior,
    Graph,
    TruncatedGeometricPrior,
    UniformPrior,
    log_prior,
    proposal_log_prob,
    propose_graph,
)
from stmh.pdcomp import CompletionSettings, completion_residual, in_pattern, pd_complete_hastie
from stmh.sampler import (
    CacheDrift,
    Chain,
    SampleRecord,
    SamplerConfig,
    audit_state,
    batch_means_se,
    block_proposal_log_density,
    block_proposal_log_ratio,
    edge_frequencies,
    estimate_edge_probabilities,
    graph_log_alpha,
    init_state,
    make_rng,
    proposal_k,
    propose_sigma_block,
    run_chain,
    run_chains,
    select_random_block,
    sigma_block_log_alpha,
    step_graph,
    step_sigma_block,
)
from stmh.spd import random_spd, schur_complement


def toy_problem(p=4, m=12, seed=3):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((m, p)) @ np.linalg.cholesky(random_spd(p, rng)).T
    return SufficientStats.from_data(x), WishartParams(3.0, 2.0 * np.eye(p))


def log_target(sigma, graph, stats, sigma_prior, graph_prior):
    """Independent evaluation of the unnormalized posterior log density."""
    Q = pd_complete_hastie(sigma, graph).Q
    ll = 0.0
    if stats.m:
        ll = stats.m / 2 * np.linalg.slogdet(Q)[1] - 0.5 * np.sum(Q * stats.sxx) - stats.m * stats.p / 2 * math.log(2 * math.pi)
    return ll + sigma_prior.log_pdf(sigma) + log_prior(graph_prior, graph)


def test_proposal_k():
    assert proposal_k(1 / 35) == pytest.approx(2452)
    assert SamplerConfig(iterations=1, c=1 / 35).k == pytest.approx(2452)


def test_select_random_block(rng):
    np.testing.assert_array_equal(select_random_block(5, 5, rng), np.arange(5))
    with pytest.raises(BadBlockSize):
        select_random_block(3, 1, rng)
    with pytest.raises(BadBlockSize):
        select_random_block(3, 4, rng)
    n = 100_000
    counts = {}
    for _ in range(n):
        b = tuple(select_random_block(3, 2, rng))
        counts[b] = counts.get(b, 0) + 1
    assert set(counts) == {(0, 1), (0, 2), (1, 2)}
    for c in counts.values():
        assert abs(c / n - 1 / 3) <= 4 * math.sqrt(2 / 9 / n)


def test_every_pair_can_share_a_block(rng):
    seen = np.zeros((6, 6), dtype=bool)
    for _ in range(500):
        b = select_random_block(6, 2, rng)
        seen[np.ix_(b, b)] = True
    assert seen.all()


def test_propose_sigma_block_structure(rng):
    sigma = random_spd(6, rng)
    block = np.array([1, 3, 4])
    new, schur, schur_new = propose_sigma_block(sigma, block, proposal_k(0.2), rng)
    off = np.ones((6, 6), dtype=bool)
    off[np.ix_(block, block)] = False
    np.testing.assert_array_equal(new[off], sigma[off])
    np.testing.assert_array_equal(new, new.T)
    np.testing.assert_allclose(schur, schur_complement(sigma, block), atol=1e-12)
    np.testing.assert_allclose(schur_complement(new, block), schur_new, atol=1e-10)
    assert np.all(np.linalg.eigvalsh(new) > 0)


def test_block_proposal_moments(rng):
    c = 1 / 35
    k = proposal_k(c)
    sigma = random_spd(4, rng)
    block = np.array([0, 2])
    S = schur_complement(sigma, block)
    draws = np.array([propose_sigma_block(sigma, block, k, rng)[2] for _ in range(100_000)])
    mean = draws.mean(axis=0)
    se = draws.std(axis=0, ddof=1) / math.sqrt(len(draws))
    assert np.all(np.abs(mean - S) <= 4 * se)
    frac = draws[:, [0, 1], [0, 1]].std(axis=0, ddof=1) / np.diag(S)
    np.testing.assert_allclose(frac, c, rtol=0.05)


@given(b=st.integers(1, 5), c=st.floats(0.05, 1.0), seed=st.integers(0, 2**32 - 1))
def test_block_log_ratio_matches_densities(b, c, seed):
    rng = np.random.default_rng(seed)
    k = proposal_k(c)
    s0 = random_spd(b, rng)
    s1 = random_spd(b, rng)
    direct = block_proposal_log_density(s1, s0, k) - block_proposal_log_density(s0, s1, k)
    assert block_proposal_log_ratio(s0, s1, k) == pytest.approx(direct, abs=1e-8, rel=1e-10)
    # the proposal density is an inverse-Wishart in the package parametrization
    assert block_proposal_log_density(s0, s1, k) == pytest.approx(
        log_pdf_inv_wishart(s1, InvWishartParams(k + 2, k * s0)))


def test_graph_step_from_empty_always_adds(rng):
    stats = SufficientStats.empty(3)
    prior = WishartParams(3.0, np.eye(3))
    state = init_state(stats, prior, UniformPrior())
    g_new, fwd, rev = propose_graph(state.graph, rng)
    log_alpha, _, _ = graph_log_alpha(state, g_new, fwd, rev, UniformPrior(), stats)
    assert log_alpha == pytest.approx(math.log(1 / 2) - math.log(1 / 3), abs=1e-14)
    for _ in range(20):
        step = step_graph(state, UniformPrior(), stats, rng)
        assert step.accepted and step.state.graph.num_edges == 1


def test_graph_step_leaves_sigma_unchanged(rng):
    stats, prior = toy_problem()
    state = init_state(stats, prior, UniformPrior(), sigma=random_spd(4, rng))
    before = state.sigma.copy()
    for _ in range(50):
        state = step_graph(state, UniformPrior(), stats, rng).state
        np.testing.assert_array_equal(state.sigma, before)
        assert in_pattern(state.Q, state.graph)


def test_block_step_keeps_graph_and_cache(rng):
    stats, prior = toy_problem()
    g = Graph(4, [(0, 1), (1, 2), (2, 3)])
    state = init_state(stats, prior, UniformPrior(), graph=g)
    k = proposal_k(0.3)
    accepted = 0
    for _ in range(200):
        step = step_sigma_block(state, select_random_block(4, 2, rng), k, stats, prior, rng)
        state = step.state
        accepted += step.accepted
    assert 0 < accepted < 200
    assert state.graph == g
    assert audit_state(state, stats, prior, UniformPrior()) <= 1e-6


PRIORS = [UniformPrior(), DoubleUniformPrior(), TruncatedGeometricPrior(0.6), BernoulliPrior(0.3)]


@pytest.mark.parametrize("graph_prior", PRIORS, ids=lambda pr: pr.name)
def test_graph_move_detailed_balance(graph_prior, rng):
    stats, sigma_prior = toy_problem()
    for _ in range(20):
        x = init_state(stats, sigma_prior, graph_prior, sigma=random_spd(4, rng), graph=random_graph(4, 0.5, rng))
        g_new, fwd, rev = propose_graph(x.graph, rng)
        y = init_state(stats, sigma_prior, graph_prior, sigma=x.sigma, graph=g_new)
        a_xy = min(0.0, graph_log_alpha(x, g_new, fwd, rev, graph_prior, stats)[0])
        a_yx = min(0.0, graph_log_alpha(y, x.graph, rev, fwd, graph_prior, stats)[0])
        lhs = a_xy + log_target(x.sigma, x.graph, stats, sigma_prior, graph_prior) + proposal_log_prob(x.graph, y.graph)
        rhs = a_yx + log_target(y.sigma, y.graph, stats, sigma_prior, graph_prior) + proposal_log_prob(y.graph, x.graph)
        assert math.exp(lhs) == pytest.approx(math.exp(rhs), abs=1e-10, rel=1e-8)


@pytest.mark.parametrize("sigma_prior_cls", [WishartParams, InvWishartParams])
def test_block_move_detailed_balance(sigma_prior_cls, rng):
    stats, _ = toy_problem()
    sigma_prior = sigma_prior_cls(3.0, 2.0 * np.eye(4))
    graph_prior = UniformPrior()
    k = proposal_k(0.3)
    for _ in range(20):
        g = random_graph(4, 0.5, rng)
        x = init_state(stats, sigma_prior, graph_prior, sigma=random_spd(4, rng), graph=g)
        block = select_random_block(4, 3, rng)
        sigma_y, s_x, s_y = propose_sigma_block(x.sigma, block, k, rng)
        y = init_state(stats, sigma_prior, graph_prior, sigma=sigma_y, graph=g)
        np.testing.assert_allclose(schur_complement(sigma_y, block), s_y, atol=1e-10)
        a_xy = min(0.0, sigma_block_log_alpha(x, sigma_y, s_x, s_y, k, stats, sigma_prior)[0])
        a_yx = min(0.0, sigma_block_log_alpha(y, x.sigma, s_y, s_x, k, stats, sigma_prior)[0])
        lhs = a_xy + log_target(x.sigma, g, stats, sigma_prior, graph_prior) + block_proposal_log_density(s_x, s_y, k)
        rhs = a_yx + log_target(y.sigma, g, stats, sigma_prior, graph_prior) + block_proposal_log_density(s_y, s_x, k)
        assert lhs == pytest.approx(rhs, abs=1e-8)


def test_config_validation():
    ok = SamplerConfig(iterations=10, burn_in=2, block_size=3)
    ok.validate(4)
    bad = {
        "sampler.burn_in": replace(ok, burn_in=10),
        "sampler.thin": replace(ok, thin=0),
        "sampler.block_size": replace(ok, block_size=5),
        "sampler.blocks_per_iter": replace(ok, blocks_per_iter=0),
        "sampler.c": replace(ok, c=0.0),
        "sampler.completion_method": replace(ok, completion_method="lu"),
        "sampler.seed": replace(ok, seed=-1),
        "sampler.iterations": replace(ok, iterations=-1),
    }
    for field, cfg in bad.items():
        with pytest.raises(ConfigError) as info:
            cfg.validate(4)
        assert info.value.field == field
    with pytest.raises(ConfigError):
        replace(ok, block_size=1).validate(4)


def test_zero_iterations():
    stats, prior = toy_problem()
    init = init_state(stats, prior, UniformPrior())
    res = run_chain(SamplerConfig(iterations=0), stats, prior, UniformPrior(), init=init)
    assert res.records == [] and res.state is init


def test_records_and_thinning():
    stats, prior = toy_problem()
    cfg = SamplerConfig(iterations=25, burn_in=5, thin=4, block_size=2, blocks_per_iter=3, c=0.3, seed=1)
    res = run_chain(cfg, stats, prior, UniformPrior(), keep_matrices=True)
    assert [r.iter for r in res.records] == [0, 4, 8, 12, 16, 20, 24]
    for r in res.records:
        assert r.num_edges == int(r.edges.sum())
        assert len(r.accept_flags) == 4
        assert completion_residual(r.Q, r.sigma, Graph.from_indicator(4, r.edges)) <= 1e-8
    rs = res.run_stats
    assert rs.proposals_graph == 20 and rs.proposals_sigma == 60
    assert 0.0 <= rs.accept_rate_sigma <= 1.0 and 0.0 <= rs.accept_rate_graph <= 1.0


def test_chain_starts_empty_at_identity():
    stats, prior = toy_problem()
    chain = Chain(SamplerConfig(iterations=1, block_size=2), stats, prior, UniformPrior())
    np.testing.assert_array_equal(chain.state.sigma, np.eye(4))
    assert chain.state.graph.is_empty()


def test_determinism_and_substreams():
    stats, prior = toy_problem()
    cfg = SamplerConfig(iterations=60, block_size=3, blocks_per_iter=2, c=0.3, seed=77)
    a = run_chains(cfg, stats, prior, UniformPrior(), chains=2)
    b = run_chains(cfg, stats, prior, UniformPrior(), chains=2, workers=2)
    for ra, rb in zip(a, b):
        assert [r.log_lik for r in ra.records] == [r.log_lik for r in rb.records]
        assert all(np.array_equal(x.edges, y.edges) for x, y in zip(ra.records, rb.records))
    single = run_chain(cfg, stats, prior, UniformPrior(), rng=make_rng(77, 0))
    assert [r.log_lik for r in single.records] == [r.log_lik for r in a[0].records]
    assert [r.log_lik for r in a[0].records] != [r.log_lik for r in a[1].records]


def test_audit_detects_drift():
    stats, prior = toy_problem()
    state = init_state(stats, prior, UniformPrior())
    assert audit_state(state, stats, prior, UniformPrior()) <= 1e-12
    with pytest.raises(CacheDrift):
        audit_state(replace(state, log_lik=state.log_lik + 1e-3), stats, prior, UniformPrior())


def test_periodic_audit_passes_on_long_data_chain():
    stats, prior = toy_problem(p=5, m=30)
    cfg = SamplerConfig(iterations=400, block_size=3, blocks_per_iter=2, c=0.2, audit_every=50, seed=4)
    res = run_chain(cfg, stats, prior, BernoulliPrior(0.4))
    assert res.run_stats.completion_failures == 0
    assert audit_state(res.state, stats, prior, BernoulliPrior(0.4)) <= 1e-6


def test_completion_failure_counts_as_rejection():
    stats, prior = toy_problem()
    # a one-sweep budget with an unreachable tolerance fails every completion
    # that is not exact at the warm start; those proposals must be rejected
    cfg = SamplerConfig(iterations=30, block_size=4, c=0.3, completion=CompletionSettings(tol=1e-300, max_sweeps=1))
    state = init_state(stats, prior, UniformPrior(), sigma=random_spd(4, np.random.default_rng(0)))
    res = run_chain(cfg, stats, prior, UniformPrior(), init=state)
    assert res.run_stats.completion_failures > 0
    assert audit_state(res.state, stats, prior, UniformPrior()) <= 1e-6


def test_ips_completion_method_runs():
    stats, prior = toy_problem()
    cfg = SamplerConfig(iterations=40, block_size=2, c=0.3, completion_method="ips", audit_every=10)
    res = run_chain(cfg, stats, prior, UniformPrior())
    assert res.run_stats.completion_failures == 0


def _record(edges, it=0):
    edges = np.asarray(edges, dtype=np.uint8)
    return SampleRecord(it, edges, int(edges.sum()), 0.0, 0.0, 0.0, ())


def test_estimate_edge_probabilities_examples():
    g = Graph(4, [(0, 1), (2, 3)])
    M = estimate_edge_probabilities([_record(g.indicator, i) for i in range(5)])
    np.testing.assert_array_equal(M, g.adjacency.astype(float))
    M = estimate_edge_probabilities([_record(np.zeros(6)), _record(np.ones(6), 1)])
    np.testing.assert_array_equal(M, 0.5 * (1 - np.eye(4)))
    freq, n = edge_frequencies([_record(np.ones(3), 0), _record(np.zeros(3), 1)], burn_in=1)
    assert n == 1 and freq.sum() == 0
    with pytest.raises(NoSamples):
        estimate_edge_probabilities([_record(np.ones(3), 0)], burn_in=1)


def test_batch_means_se(rng):
    x = rng.standard_normal(50_000)
    assert batch_means_se(x) == pytest.approx(1 / math.sqrt(50_000), rel=0.35)
    with pytest.raises(ValueError):
        batch_means_se(np.ones(10))


@pytest.mark.slow
def test_sigma_marginal_prior_recovery():
    # m = 0, full graph start, block = all nodes: the sigma chain must leave the
    # Wishart prior invariant.  c = 0.45 mixes fastest here (autocorrelation
    # time about 40 iterations), so thinning by 40 gives ~10^4 effective draws.
    p = 3
    suff = SufficientStats.empty(p)
    prior = WishartParams(3.0, 2.0 * np.eye(p))
    thin = 40
    cfg = SamplerConfig(iterations=10_000 * thin, thin=thin, block_size=p, c=0.45, seed=11, audit_every=0)
    init = init_state(suff, prior, UniformPrior(), graph=Graph.full(p))
    res = run_chain(cfg, suff, prior, UniformPrior(), init=init, keep_matrices=True)
    chain = np.array([r.sigma[0, 0] for r in res.records])
    rng = np.random.default_rng(12)
    direct = np.array([sample_wishart(prior, rng)[0, 0] for _ in range(20_000)])
    assert autocorrelation_time(chain) < 3.0
    assert stats.ks_2samp(chain, direct).pvalue > 0.001
