"""Command-line interface: ``stmh prepare | run | prior-check | complete | defaults``.

Configuration is a flat text file of ``key = value`` lines with dotted
section prefixes (``sampler.iterations = 100000``).  ``#`` starts a comment.
``--set key=value`` on the command line overrides the file; environment
variables are never consulted.  Run ``stmh defaults`` for the full schema.

Exit status: 0 success, 1 prior-check FAIL, 2 configuration error,
3 numerical failure, 4 input/output error.
"""

import argparse
import logging
import os
import sys
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2

from . import constants
from .dataio import (
    DataMatrix,
    DegenerateColumnWarning,
    column_variances,
    degenerate_columns,
    quantile_normalize,
    read_matrix_csv,
    select_top_variance,
    write_edge_prob_matrix,
    write_histogram,
    write_key_values,
    write_matrix_csv,
    write_reverse_cdf,
    write_trace,
)
from .dist import InvWishartParams, SufficientStats, WishartParams
from .errors import BadK, ConfigError, NotConverged, ParseError, STMHError, TooLarge
from .graphs import (
    BernoulliPrior,
    DoubleUniformPrior,
    TruncatedGeometricPrior,
    UniformPrior,
    edge_marginal,
    enumerate_graphs,
    log_prior,
    max_edges,
    read_edgelist,
    size_pmf,
    theta_for_expected_edges,
)
from .pdcomp import CompletionSettings, pd_complete
from .sampler import SamplerConfig, estimate_edge_probabilities, run_chains

log = logging.getLogger("stmh")

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

PRIOR_CHECK_MAX_P = 6


@dataclass(frozen=True)
class Key:
    name: str
    kind: type
    default: object
    help: str


def _optional(kind):
    return ("optional", kind)


SCHEMA = [
    Key("data.path", str, "none", "input CSV (header row optional); 'none' = no data (prior-check mode)"),
    Key("data.p", _optional(int), None, "number of variables when data.path = none"),
    Key("data.variables", _optional(int), None, "keep this many highest-variance columns (default: all)"),
    Key("data.normalize", bool, False, "apply column-wise quantile normalization"),
    Key("graph_prior.family", str, "uniform", "uniform | double_uniform | trunc_geometric | bernoulli"),
    Key("graph_prior.theta", _optional(float), None, "trunc_geometric ratio in (0, 1)"),
    Key("graph_prior.expected_edges", _optional(float), None, "trunc_geometric prior mean |E| (alternative to theta)"),
    Key("graph_prior.rho", _optional(float), None, "bernoulli edge probability in (0, 1)"),
    Key("sigma_prior.family", str, "wishart", "wishart | inv_wishart"),
    Key("sigma_prior.delta", float, constants.DEFAULT_DELTA, "shape parameter delta >= 1"),
    Key("sigma_prior.D", str, f"identity:{constants.DEFAULT_D_SCALE:g}",
        "'identity:<c>' for c * I, or a path to a p x p CSV"),
    Key("sampler.iterations", int, int(constants.DEFAULT_ITERATIONS), "number of iterations"),
    Key("sampler.burn_in", int, int(constants.DEFAULT_BURN_IN), "iterations excluded from summaries"),
    Key("sampler.thin", int, 1, "record every thin-th iteration"),
    Key("sampler.block_size", int, constants.DEFAULT_BLOCK_SIZE, "nodes per sigma block, in [2, p]"),
    Key("sampler.blocks_per_iter", int, constants.DEFAULT_BLOCKS_PER_ITER, "sigma block proposals per iteration"),
    Key("sampler.c", float, constants.DEFAULT_C, "relative SD of the block proposal"),
    Key("sampler.seed", int, 0, "64-bit seed; chain i uses sub-stream (seed, i)"),
    Key("sampler.completion_method", str, "hastie", "hastie | ips"),
    Key("sampler.completion.tol", float, constants.COMPLETION_TOL, "completion stopping tolerance"),
    Key("sampler.completion.max_sweeps", int, constants.COMPLETION_MAX_SWEEPS, "completion sweep limit"),
    Key("sampler.audit_every", int, constants.CACHE_AUDIT_EVERY, "recompute cached terms every n iterations (0 = never)"),
    Key("run.chains", int, 1, "independent chains"),
    Key("run.workers", int, 1, "worker processes (results do not depend on it)"),
    Key("output.dir", str, "stmh_out", "output directory"),
    Key("prior_check.alpha", float, 0.001, "significance level of the chi-square tests"),
    Key("prior_check.corrupt_add_bias", float, 0.0, "test hook: bias added to edge-addition log ratios"),
]
_SCHEMA = {k.name: k for k in SCHEMA}


# configuration parsing


def _parse_value(key, text):
    kind = key.kind
    text = text.strip()
    if isinstance(kind, tuple):
        if text.lower() in ("none", ""):
            return None
        kind = kind[1]
    try:
        if kind is bool:
            low = text.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(text)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        return text
    except ValueError:
        raise ConfigError(key.name, f"cannot parse {text!r} as {kind.__name__}") from None


def _assign(values, raw_key, raw_value, origin):
    name = raw_key.strip()
    if name not in _SCHEMA:
        raise ConfigError(name, f"unknown key ({origin})")
    values[name] = _parse_value(_SCHEMA[name], raw_value)


def parse_config_text(text, values=None, origin="config"):
    values = {} if values is None else values
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value' ({origin})")
        k, v = line.split("=", 1)
        _assign(values, k, v, f"{origin}:{lineno}")
    return values


def load_config(path=None, overrides=()):
    """Defaults, then the file at ``path``, then ``key=value`` overrides."""
    values = {k.name: k.default for k in SCHEMA}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            parse_config_text(fh.read(), values, origin=str(path))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override must look like key=value")
        k, v = item.split("=", 1)
        _assign(values, k, v, "--set")
    return values


def format_defaults():
    lines = []
    section = None
    for k in SCHEMA:
        head = k.name.split(".", 1)[0]
        if head != section:
            if section is not None:
                lines.append("")
            section = head
        default = "none" if k.default is None else k.default
        if isinstance(default, bool):
            default = str(default).lower()
        lines.append(f"# {k.help}")
        lines.append(f"{k.name} = {default}")
    return "\n".join(lines) + "\n"


# building domain objects from a config


def build_graph_prior(values, e_max):
    fam = values["graph_prior.family"]
    if fam == "uniform":
        return UniformPrior()
    if fam == "double_uniform":
        return DoubleUniformPrior()
    if fam == "trunc_geometric":
        theta = values["graph_prior.theta"]
        expected = values["graph_prior.expected_edges"]
        if (theta is None) == (expected is None):
            raise ConfigError("graph_prior.theta", "give exactly one of theta and expected_edges")
        if expected is not None:
            try:
                theta = theta_for_expected_edges(expected, e_max)
            except ValueError as exc:
                raise ConfigError("graph_prior.expected_edges", str(exc)) from None
        try:
            return TruncatedGeometricPrior(theta)
        except ValueError as exc:
            raise ConfigError("graph_prior.theta", str(exc)) from None
    if fam == "bernoulli":
        rho = values["graph_prior.rho"]
        if rho is None:
            raise ConfigError("graph_prior.rho", "required for the bernoulli prior")
        try:
            return BernoulliPrior(rho)
        except ValueError as exc:
            raise ConfigError("graph_prior.rho", str(exc)) from None
    raise ConfigError("graph_prior.family", f"unknown family {fam!r}")


def build_sigma_prior(values, p):
    spec = values["sigma_prior.D"]
    if spec.startswith("identity:"):
        try:
            scale = float(spec.split(":", 1)[1])
        except ValueError:
            raise ConfigError("sigma_prior.D", f"bad identity scale in {spec!r}") from None
        D = scale * np.eye(p)
    else:
        D = read_matrix_csv(spec).values
        if D.shape != (p, p):
            raise ConfigError("sigma_prior.D", f"matrix in {spec} has shape {D.shape}, need ({p}, {p})")
    cls = {"wishart": WishartParams, "inv_wishart": InvWishartParams}.get(values["sigma_prior.family"])
    if cls is None:
        raise ConfigError("sigma_prior.family", "must be 'wishart' or 'inv_wishart'")
    try:
        return cls(values["sigma_prior.delta"], D)
    except STMHError as exc:
        raise ConfigError("sigma_prior", str(exc)) from None


def build_sampler_config(values, p):
    try:
        completion = CompletionSettings(values["sampler.completion.tol"], values["sampler.completion.max_sweeps"])
    except ValueError as exc:
        raise ConfigError("sampler.completion", str(exc)) from None
    cfg = SamplerConfig(
        iterations=values["sampler.iterations"],
        burn_in=values["sampler.burn_in"],
        thin=values["sampler.thin"],
        block_size=values["sampler.block_size"],
        blocks_per_iter=values["sampler.blocks_per_iter"],
        c=values["sampler.c"],
        seed=values["sampler.seed"],
        completion=completion,
        completion_method=values["sampler.completion_method"],
        audit_every=values["sampler.audit_every"],
    )
    cfg.validate(p)
    if cfg.iterations <= cfg.burn_in:
        raise ConfigError("sampler.burn_in", "must be smaller than sampler.iterations")
    if values["run.chains"] < 1:
        raise ConfigError("run.chains", "must be at least 1")
    return cfg


def load_data(values):
    """The (possibly reduced and normalized) data matrix, or None when data.path = none."""
    path = values["data.path"]
    if path.lower() == "none":
        return None
    data = read_matrix_csv(path)
    if data.p < 2:
        raise ConfigError("data.path", "need at least two columns")
    k = values["data.variables"]
    if k is not None:
        data = select_top_variance(data, k)
    if values["data.normalize"]:
        data = quantile_normalize(data)
    return data


def _problem(values):
    data = load_data(values)
    if data is None:
        p = values["data.p"]
        if p is None or p < 2:
            raise ConfigError("data.p", "set data.p >= 2 when data.path = none")
        stats = SufficientStats.empty(p)
        names = [f"V{j + 1}" for j in range(p)]
    else:
        stats = SufficientStats.from_data(data.values)
        p = data.p
        names = data.names()
    return stats, names, p


def resolved_items(values, p, graph_prior, config):
    """Fully resolved configuration as ordered ``(key, value)`` pairs."""
    items = []
    for k in SCHEMA:
        if k.name.startswith("prior_check."):
            continue
        v = values[k.name]
        items.append((k.name, "none" if v is None else (str(v).lower() if isinstance(v, bool) else v)))
    items.append(("resolved.p", p))
    items.append(("resolved.e_max", max_edges(p)))
    if isinstance(graph_prior, TruncatedGeometricPrior):
        items.append(("resolved.theta", f"{graph_prior.theta:.10g}"))
    items.append(("resolved.k", repr(config.k)))
    for i in range(values["run.chains"]):
        items.append((f"resolved.chain.{i}.stream", f"SeedSequence(entropy={config.seed}, spawn_key=({i},))"))
    return items


# subcommands


def cmd_prepare(values, out_dir):
    data = read_matrix_csv(values["data.path"])
    var_all = column_variances(data)
    k = values["data.variables"]
    selected = select_top_variance(data, k) if k is not None else data
    var_sel = column_variances(selected)
    report = [("m", selected.m), ("p", selected.p), ("input_p", data.p)]
    bad = degenerate_columns(selected)
    if values["data.normalize"]:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateColumnWarning)
            out = quantile_normalize(selected)
    else:
        out = selected
    names = selected.names()
    if bad:
        report.append(("warning.degenerate_columns", " ".join(names[j] for j in bad)))
        log.warning("constant column(s): %s", ", ".join(names[j] for j in bad))
    order = sorted(range(selected.p), key=lambda j: (-var_sel[j], j))
    for rank, j in enumerate(order, 1):
        report.append((f"variance.{rank}.{names[j]}", repr(float(var_sel[j]))))
    os.makedirs(out_dir, exist_ok=True)
    write_matrix_csv(out, os.path.join(out_dir, "prepared.csv"), header=data.column_names is not None)
    write_key_values(report, os.path.join(out_dir, "prepare_report.txt"))
    log.info("prepared %d x %d matrix (from %d columns, max variance %s)", out.m, out.p, data.p,
             repr(float(var_all.max())) if var_all.size else "n/a")
    return EXIT_OK


def _run_stats_items(results):
    items = []
    total = {"proposals_sigma": 0, "accepted_sigma": 0, "proposals_graph": 0, "accepted_graph": 0,
             "completion_failures": 0}
    for i, res in enumerate(results):
        rs = res.run_stats
        for name in ("accept_rate_sigma", "accept_rate_graph", "completion_failures",
                     "proposals_sigma", "proposals_graph"):
            items.append((f"chain.{i}.{name}", repr(getattr(rs, name))))
        for name in total:
            total[name] += getattr(rs, name)
    rate = lambda a, n: repr(a / n) if n else "nan"  # noqa: E731
    items.append(("accept_rate_sigma", rate(total["accepted_sigma"], total["proposals_sigma"])))
    items.append(("accept_rate_graph", rate(total["accepted_graph"], total["proposals_graph"])))
    items.append(("completion_failures", total["completion_failures"]))
    return items


def cmd_run(values, out_dir):
    stats, names, p = _problem(values)
    graph_prior = build_graph_prior(values, max_edges(p))
    sigma_prior = build_sigma_prior(values, p)
    config = build_sampler_config(values, p)
    os.makedirs(out_dir, exist_ok=True)
    write_key_values(resolved_items(values, p, graph_prior, config), os.path.join(out_dir, "config_resolved.txt"))
    results = run_chains(config, stats, sigma_prior, graph_prior,
                         chains=values["run.chains"], workers=values["run.workers"])
    merged = []
    for i, res in enumerate(results):
        write_trace(res.records, os.path.join(out_dir, f"trace_chain{i}.csv"))
        merged.extend(res.records)
    M = estimate_edge_probabilities(merged, config.burn_in)
    write_edge_prob_matrix(M, os.path.join(out_dir, "edge_probabilities.csv"), names)
    write_histogram(merged, os.path.join(out_dir, "edge_count_histogram.csv"), config.burn_in)
    write_reverse_cdf(M, os.path.join(out_dir, "reverse_cdf.csv"))
    write_key_values(_run_stats_items(results), os.path.join(out_dir, "run_stats.txt"))
    log.info("wrote %d chain(s) to %s", len(results), out_dir)
    return EXIT_OK


# prior check


def exact_prior_summary(prior, p):
    """Exact ``|E|`` pmf and per-edge marginal of ``prior`` on ``p`` nodes.

    Every prior is uniform within a size class, so both follow from the size
    pmf.  For ``p <= 5`` they are cross-checked by enumerating all graphs.
    """
    if p > PRIOR_CHECK_MAX_P:
        raise TooLarge(f"exact prior comparison limited to p <= {PRIOR_CHECK_MAX_P}, got {p}")
    e_max = max_edges(p)
    pmf = size_pmf(prior, e_max)
    marg = edge_marginal(prior, e_max)
    try:
        graphs = enumerate_graphs(p)
    except TooLarge:
        return pmf, marg
    w = np.exp([log_prior(prior, g) for g in graphs])
    sizes = np.array([g.num_edges for g in graphs])
    enum_pmf = np.bincount(sizes, weights=w, minlength=e_max + 1)
    enum_marg = (np.array([g.indicator for g in graphs], dtype=float) * w[:, None]).sum(axis=0)
    if not (np.allclose(enum_pmf, pmf, atol=1e-12) and np.allclose(enum_marg, marg, atol=1e-12)):
        raise AssertionError("closed-form prior summary disagrees with enumeration")
    return pmf, marg


def autocorrelation_time(x, batches=constants.BATCH_MEANS_BATCHES):
    """Integrated autocorrelation time estimated by batch means (at least 1)."""
    x = np.asarray(x, dtype=float)
    size = x.size // batches
    var = x.var()
    if size < 1 or var == 0:
        return 1.0
    means = x[: size * batches].reshape(batches, size).mean(axis=1)
    return max(1.0, size * means.var(ddof=1) / var)


def _pool_bins(observed, expected, min_expected=5.0):
    keep = expected >= min_expected
    obs = list(observed[keep])
    exp = list(expected[keep])
    rest_e = expected[~keep].sum()
    if rest_e > 0:
        obs.append(observed[~keep].sum())
        exp.append(rest_e)
    return np.array(obs, dtype=float), np.array(exp, dtype=float)


@dataclass
class PriorCheckResult:
    n: int
    size_stat: float
    size_df: int
    size_pvalue: float
    size_tau: float
    edge_stats: np.ndarray
    edge_pvalues: np.ndarray
    edge_tau: np.ndarray
    alpha: float

    @property
    def size_pass(self):
        return self.size_pvalue > self.alpha

    @property
    def edges_pass(self):
        return bool(np.all(self.edge_pvalues > self.alpha / self.edge_pvalues.size))

    @property
    def passed(self):
        return self.size_pass and self.edges_pass


def prior_check_statistics(records, prior, p, burn_in=0, alpha=0.001):
    """Chi-square comparison of sampled graphs with the exact prior.

    The ``|E|`` counts get a Pearson test against the exact size pmf (bins
    with expected count below 5 pooled); each edge indicator gets a one-degree
    test against the exact marginal, Bonferroni-corrected across edges.
    Serial dependence is handled by dividing each statistic by the
    integrated autocorrelation time of the series it summarizes.
    """
    pmf, marg = exact_prior_summary(prior, p)
    kept = [r for r in records if r.iter >= burn_in]
    n = len(kept)
    if n == 0:
        raise ValueError("no records after burn-in")
    sizes = np.array([r.num_edges for r in kept])
    ind = np.array([r.edges for r in kept], dtype=float)
    e_max = max_edges(p)
    obs, exp = _pool_bins(np.bincount(sizes, minlength=e_max + 1).astype(float), n * pmf)
    tau = autocorrelation_time(sizes)
    size_stat = float(((obs - exp) ** 2 / exp).sum()) / tau
    size_df = obs.size - 1
    size_p = float(chi2.sf(size_stat, size_df))
    taus = np.array([autocorrelation_time(ind[:, e]) for e in range(e_max)])
    counts = ind.sum(axis=0)
    var = n * marg * (1.0 - marg)
    edge_stats = (counts - n * marg) ** 2 / var / taus
    edge_p = chi2.sf(edge_stats, 1)
    return PriorCheckResult(n, size_stat, size_df, size_p, float(tau), edge_stats, edge_p, taus, alpha)


def format_prior_check(res, prior, p):
    lines = [f"prior = {prior.name}", f"p = {p}", f"samples = {res.n}", f"alpha = {res.alpha}",
             f"size.tau = {res.size_tau!r}", f"size.chi2 = {res.size_stat!r}", f"size.df = {res.size_df}",
             f"size.pvalue = {res.size_pvalue!r}", f"size.verdict = {'PASS' if res.size_pass else 'FAIL'}"]
    iu = np.triu_indices(p, 1)
    for e, (i, j) in enumerate(zip(*iu)):
        lines.append(f"edge.{i + 1}-{j + 1}.chi2 = {float(res.edge_stats[e])!r}")
        lines.append(f"edge.{i + 1}-{j + 1}.pvalue = {float(res.edge_pvalues[e])!r}")
    lines.append(f"edges.verdict = {'PASS' if res.edges_pass else 'FAIL'}")
    lines.append(f"verdict = {'PASS' if res.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


def cmd_prior_check(values, out_dir):
    if values["data.path"].lower() != "none":
        raise ConfigError("data.path", "prior-check runs without data; set data.path = none")
    stats, _, p = _problem(values)
    if p > PRIOR_CHECK_MAX_P:
        raise ConfigError("data.p", f"prior-check needs p <= {PRIOR_CHECK_MAX_P}")
    graph_prior = build_graph_prior(values, max_edges(p))
    sigma_prior = build_sigma_prior(values, p)
    config = build_sampler_config(values, p)
    results = run_chains(config, stats, sigma_prior, graph_prior, chains=values["run.chains"],
                         workers=values["run.workers"],
                         corrupt_add_bias=values["prior_check.corrupt_add_bias"])
    records = [r for res in results for r in res.records]
    res = prior_check_statistics(records, graph_prior, p, config.burn_in, values["prior_check.alpha"])
    text = format_prior_check(res, graph_prior, p)
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "prior_check.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_complete(sigma_path, graph_path, method, out_path, settings):
    sigma = read_matrix_csv(sigma_path).values
    graph = read_edgelist(graph_path)
    result = pd_complete(sigma, graph, method=method, settings=settings)
    write_matrix_csv(DataMatrix(result.Q), out_path, header=False)
    report = [("method", method), ("sweeps", result.sweeps_used), ("residual", repr(result.residual)),
              ("converged", str(result.converged).lower())]
    write_key_values(report, out_path + ".report.txt")
    for k, v in report:
        sys.stdout.write(f"{k} = {v}\n")
    if not result.converged:
        raise NotConverged(f"completion stopped after {result.sweeps_used} sweeps "
                           f"(residual {result.residual:.3e})", result)
    return EXIT_OK


# entry point


def build_parser():
    parser = argparse.ArgumentParser(prog="stmh", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("-c", "--config", help="configuration file (key = value)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
        return p

    with_config(sub.add_parser("prepare", help="select top-variance columns and quantile-normalize"))
    with_config(sub.add_parser("run", help="run the sampler and write traces and summaries"))
    with_config(sub.add_parser("prior-check", help="run without data and test against the exact graph prior"))
    comp = sub.add_parser("complete", help="PD-complete a covariance matrix for a graph")
    comp.add_argument("sigma", help="p x p covariance CSV")
    comp.add_argument("graph", help="edge-list file ('p=<n>' then 1-based 'i j' lines)")
    comp.add_argument("--method", choices=("hastie", "ips"), default="hastie")
    comp.add_argument("--tol", type=float, default=constants.COMPLETION_TOL)
    comp.add_argument("--max-sweeps", type=int, default=constants.COMPLETION_MAX_SWEEPS)
    comp.add_argument("-o", "--output", default="Q.csv", help="output CSV for Q")
    sub.add_parser("defaults", help="print the configuration schema with default values")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "defaults":
            sys.stdout.write(format_defaults())
            return EXIT_OK
        if args.command == "complete":
            try:
                settings = CompletionSettings(args.tol, args.max_sweeps)
            except ValueError as exc:
                raise ConfigError("complete", str(exc)) from None
            return cmd_complete(args.sigma, args.graph, args.method, args.output, settings)
        values = load_config(args.config, args.set)
        out_dir = values["output.dir"]
        if args.command == "prepare":
            if values["data.path"].lower() == "none":
                raise ConfigError("data.path", "prepare needs an input file")
            return cmd_prepare(values, out_dir)
        if args.command == "run":
            return cmd_run(values, out_dir)
        return cmd_prior_check(values, out_dir)
    except (ConfigError, BadK, TooLarge) as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except (ParseError, OSError) as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return EXIT_IO
    except (STMHError, FloatingPointError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"numerical error: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
