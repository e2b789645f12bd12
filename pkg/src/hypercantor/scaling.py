"""Ratio geometry of cylinders and tabulated scaling-function estimates."""
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import BudgetError, InvariantViolation, ParameterError
from .hierarchy import root_pieces
from .symbolic import as_word, check_depth, index_word, pad_dual, word_str

DEFAULT_TABLE_BUDGET = 2**20
TABLE_FORMAT = "hypercantor.scaling-table"
TABLE_VERSION = 1


@dataclass(frozen=True)
class RatioTriple:
    """Normalised (left child, gap, right child) lengths; a point of the open simplex."""

    l: object
    g: object
    r: object

    def __post_init__(self):
        vals = (float(self.l), float(self.g), float(self.r))
        if not all(0 < v < 1 for v in vals) or abs(sum(vals) - 1) > 1e-12:
            raise ParameterError(f"triple {vals} is not inside the open simplex")

    def as_array(self):
        return np.array([float(self.l), float(self.g), float(self.r)])

    def log(self):
        return np.log(self.as_array())

    def __iter__(self):
        return iter((self.l, self.g, self.r))


def _four_pieces(sys, like):
    i0, g, i1 = root_pieces(sys, like)
    return [(like * 0, like * 0 + 1), i0, g, i1]


def _apply(sys, s, pieces):
    f = sys.branch(s)
    return [(f(a), f.increment(a, h)) for a, h in pieces]


def _triple(pieces):
    (_, h), (_, h0), (_, hg), (_, h1) = pieces
    return RatioTriple(h0 / h, hg / h, h1 / h)


def ratio_geometry(sys, w):
    """Lengths of I_{w0}, G_w, I_{w1} relative to I_w."""
    w = as_word(w)
    check_depth(len(w) + 1, sys.depth_cap)
    pieces = _four_pieces(sys, sys.mpf(0))
    for s in reversed(w):
        pieces = _apply(sys, s, pieces)
    return _triple(pieces)


def ratio_dual(sys, y):
    y = as_word(y)
    if not y:
        raise ParameterError("dual word must be nonempty")
    return ratio_geometry(sys, y)


def log_slack(sys, est_depth, known):
    """Log-error of a depth-``est_depth`` estimate for any completion of ``known`` symbols."""
    K, b, g = sys.K, float(sys.beta), float(sys.gamma)
    return K * b ** (est_depth * g) + 2 * K * b ** (known * g)


@dataclass(frozen=True)
class ScalingEstimate:
    triple: RatioTriple
    err: float
    log_slack: float
    padded: tuple


def scaling_estimate(sys, y, n):
    """R_n of ``y`` padded leftward with zeros, and its multiplicative error.

    The true value at any completion y' of y lies within e^{±log_slack} of
    the returned triple, componentwise; ``err = e^{log_slack} - 1``.
    """
    y = as_word(y)
    if n < len(y):
        raise ParameterError("estimation depth shorter than the dual word")
    check_depth(n + 1, sys.depth_cap)
    padded = pad_dual(y, n)
    slack = log_slack(sys, n, len(y))
    return ScalingEstimate(ratio_geometry(sys, padded), math.expm1(slack), slack, padded)


@dataclass
class ScalingTable:
    """Scaling-function estimates on all dual cylinders of length m.

    Row i holds the triple for the dual word whose lexicographic index is i
    (first symbol most significant, so the symbol nearest the present is the
    lowest bit).
    """

    m: int
    n: int
    entries: np.ndarray
    err_bound: float
    log_slack: float
    system: dict = field(default_factory=dict)
    K: float = 0.0
    beta: float = 0.5
    gamma: float = 1.0

    def __len__(self):
        return len(self.entries)

    def words(self):
        return [index_word(i, self.m) for i in range(len(self.entries))]

    def index(self, y):
        y = pad_dual(as_word(y), self.m)[-self.m:] if self.m else ()
        idx = 0
        for s in y:
            idx = 2 * idx + s
        return idx

    def lookup(self, y):
        row = self.entries[self.index(y)]
        return RatioTriple(*row)

    def rows(self):
        for i, w in enumerate(self.words()):
            l, g, r = self.entries[i]
            yield word_str(w), float(l), float(g), float(r), self.err_bound

    def to_dict(self):
        return {
            "format": TABLE_FORMAT,
            "version": TABLE_VERSION,
            "library_version": __version__,
            "system": self.system,
            "m": self.m,
            "n": self.n,
            "err_bound": self.err_bound,
            "log_slack": self.log_slack,
            "K": self.K,
            "beta": self.beta,
            "gamma": self.gamma,
            "entries": [[repr(float(v)) for v in row] for row in self.entries],
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != TABLE_FORMAT or d.get("version") != TABLE_VERSION:
            raise ParameterError("not a version-1 scaling table")
        entries = np.array([[float(v) for v in row] for row in d["entries"]])
        if entries.shape != (2 ** d["m"], 3):
            raise ParameterError("scaling table has the wrong number of entries")
        return cls(d["m"], d["n"], entries, d["err_bound"], d["log_slack"], d["system"],
                   d["K"], d["beta"], d["gamma"])

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def build_scaling_table(sys, m, n, budget=DEFAULT_TABLE_BUDGET):
    if not 0 <= m <= n:
        raise ParameterError("table depth must satisfy 0 <= m <= n")
    check_depth(n + 1, sys.depth_cap)
    if 2**m > budget:
        raise BudgetError(f"2^{m} entries exceed the table budget {budget}")
    # prepend symbols y_{-1}, y_{-2}, ...: states stay in lexicographic order
    states = [_four_pieces(sys, sys.mpf(0))]
    for _ in range(m):
        states = [_apply(sys, s, p) for s in (0, 1) for p in states]
    rows = []
    for p in states:
        for _ in range(n - m):
            p = _apply(sys, 0, p)
        rows.append([float(v) for v in _triple(p)])
    slack = log_slack(sys, n, m)
    return ScalingTable(m, n, np.array(rows), math.expm1(slack), slack, sys.config(),
                        sys.K, float(sys.beta), float(sys.gamma))


@dataclass
class HolderReport:
    max_ratio: float
    worst_pair: tuple
    pairs: int
    violations: int

    @property
    def ok(self):
        return self.violations == 0


def _trailing_agreement(a, b, m):
    x = np.bitwise_xor(a, b)
    low = x & -x
    out = np.where(x == 0, m, np.log2(np.maximum(low, 1)).astype(int))
    return out


def holder_diagnostic(table, beta=None, gamma=None, K=None, floor=1e-12,
                      raise_on_violation=True):
    """Scan all pairs of table entries against the Hölder envelope of log R."""
    beta = table.beta if beta is None else beta
    gamma = table.gamma if gamma is None else gamma
    K = table.K if K is None else K
    logs = np.log(table.entries)
    size = len(logs)
    idx = np.arange(size)
    extra = 2 * math.log1p(table.err_bound) + floor
    worst, worst_pair, bad = 0.0, None, 0
    for i in range(size):
        lhs = np.max(np.abs(logs - logs[i]), axis=1)
        j = _trailing_agreement(idx, i, table.m)
        bound = 2 * K * beta ** (gamma * j) + extra
        ratio = lhs / bound
        ratio[i] = 0.0
        k = int(np.argmax(ratio))
        if ratio[k] > worst:
            worst, worst_pair = float(ratio[k]), (index_word(i, table.m), index_word(k, table.m))
        bad += int(np.count_nonzero(ratio > 1))
    report = HolderReport(worst, worst_pair, size * (size - 1), bad // 2)
    if bad and raise_on_violation:
        raise InvariantViolation(f"Hölder envelope exceeded (max ratio {worst})", worst_pair)
    return report
