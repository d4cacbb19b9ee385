"""Data ingestion, preprocessing and the tabular output writers.

All files are comma separated with ``.`` decimals.  Floats are written with
``repr`` so every value round-trips exactly.
"""

import csv
import math
import warnings
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri
from scipy.stats import rankdata

from .errors import BadK, ParseError, RaggedRows


class DegenerateColumnWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DataMatrix:
    values: np.ndarray
    column_names: tuple = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError("data must be two-dimensional")
        object.__setattr__(self, "values", v)
        if self.column_names is not None:
            names = tuple(str(n) for n in self.column_names)
            if len(names) != v.shape[1]:
                raise ValueError("one column name per column required")
            object.__setattr__(self, "column_names", names)

    @property
    def m(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]

    def names(self):
        if self.column_names is not None:
            return list(self.column_names)
        return [f"V{j + 1}" for j in range(self.p)]

    def take(self, columns):
        columns = list(columns)
        names = None if self.column_names is None else tuple(self.column_names[j] for j in columns)
        return DataMatrix(self.values[:, columns], names)


def _parse_float(token):
    t = token.strip()
    try:
        v = float(t)
    except ValueError:
        return None
    if not math.isfinite(v):
        return None
    return v


def read_matrix_csv(path):
    """Read a numeric CSV with an optional single header row.

    The first row is a header when none of its cells parse as finite numbers.

    Raises:
        ParseError: empty file or a non-numeric body cell (1-based row and column).
        RaggedRows: rows of unequal length.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError(f"{path}: file is empty")
    names = None
    first = rows[0]
    if all(_parse_float(c) is None for c in first):
        names = tuple(c.strip() for c in first)
        body_start = 1
    else:
        body_start = 0
    body = rows[body_start:]
    if not body:
        raise ParseError(f"{path}: no data rows")
    width = len(names) if names is not None else len(body[0])
    values = np.empty((len(body), width))
    for r, row in enumerate(body):
        line = r + body_start + 1
        if len(row) != width:
            raise RaggedRows(f"{path}: row {line} has {len(row)} cells, expected {width}", row=line)
        for c, token in enumerate(row):
            v = _parse_float(token)
            if v is None:
                raise ParseError(
                    f"{path}: row {line}, column {c + 1}: cannot parse {token!r} as a number",
                    row=line, column=c + 1, token=token,
                )
            values[r, c] = v
    return DataMatrix(values, names)


def write_matrix_csv(data, path, header=True):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow(data.names())
        for row in data.values:
            w.writerow([repr(float(v)) for v in row])


def column_variances(data):
    return np.var(data.values, axis=0, ddof=1)


def select_top_variance(data, k):
    """Keep the ``k`` columns of largest sample variance, in their original order.

    Ties go to the lower column index.
    """
    if not 2 <= k <= data.p:
        raise BadK(f"k must lie in [2, {data.p}], got {k}")
    var = column_variances(data)
    order = sorted(range(data.p), key=lambda j: (-var[j], j))
    return data.take(sorted(order[:k]))


def degenerate_columns(data):
    v = data.values
    return [j for j in range(data.p) if np.all(v[:, j] == v[0, j])]


def quantile_normalize(data):
    """Column-wise map ``x -> Phi^{-1}(rank / (m + 1))`` with average ranks for ties.

    A constant column cannot be normalized; it comes out as all zeros and a
    :class:`DegenerateColumnWarning` is issued.
    """
    if data.m < 2:
        raise ValueError("quantile normalization needs at least two rows")
    ranks = rankdata(data.values, method="average", axis=0)
    out = ndtri(ranks / (data.m + 1.0))
    bad = degenerate_columns(data)
    if bad:
        names = data.names()
        warnings.warn(
            "constant column(s) left as zeros: " + ", ".join(names[j] for j in bad),
            DegenerateColumnWarning,
            stacklevel=2,
        )
        out[:, bad] = 0.0
    return DataMatrix(out, data.column_names)


# writers


def _writer(path):
    fh = open(path, "w", newline="", encoding="utf-8")
    return fh, csv.writer(fh, lineterminator="\n")


def write_trace(records, path):
    """Rows ``iter,num_edges,log_lik``."""
    fh, w = _writer(path)
    with fh:
        w.writerow(["iter", "num_edges", "log_lik"])
        for r in records:
            w.writerow([r.iter, r.num_edges, repr(float(r.log_lik))])


def read_trace(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))[1:]
    return [(int(a), int(b), float(c)) for a, b, c in rows]


def write_edge_prob_matrix(M, path, names=None):
    """``p x p`` grid with a header row and a leading column of variable names."""
    M = np.asarray(M, dtype=float)
    p = M.shape[0]
    names = list(names) if names is not None else [f"V{j + 1}" for j in range(p)]
    fh, w = _writer(path)
    with fh:
        w.writerow([""] + names)
        for name, row in zip(names, M):
            w.writerow([name] + [repr(float(v)) for v in row])


def read_edge_prob_matrix(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    names = rows[0][1:]
    M = np.array([[float(v) for v in row[1:]] for row in rows[1:]])
    return M, names


def edge_count_histogram(records, burn_in=0):
    counts = Counter(r.num_edges for r in records if r.iter >= burn_in)
    return sorted(counts.items())


def write_histogram(records, path, burn_in=0):
    """Rows ``num_edges,count`` for every edge count seen after ``burn_in``."""
    fh, w = _writer(path)
    with fh:
        w.writerow(["num_edges", "count"])
        for k, n in edge_count_histogram(records, burn_in):
            w.writerow([k, n])


def default_grid():
    return np.arange(101) / 100.0


def reverse_cdf(M, grid=None):
    """Fraction of unordered pairs whose edge probability is at least ``t``."""
    M = np.asarray(M, dtype=float)
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    probs = M[np.triu_indices(M.shape[0], 1)]
    return np.array([np.count_nonzero(probs >= t) / probs.size for t in grid])


def write_reverse_cdf(M, path, grid=None):
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    frac = reverse_cdf(M, grid)
    fh, w = _writer(path)
    with fh:
        w.writerow(["t", "fraction"])
        for t, f in zip(grid, frac):
            w.writerow([repr(float(t)), repr(float(f))])


def write_key_values(items, path):
    """``key = value`` lines in the given order."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in items:
            fh.write(f"{key} = {value}\n")
