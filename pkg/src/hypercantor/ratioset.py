"""Ratio Cantor sets rebuilt from scaling data, and the exact scenery identity."""
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .errors import InvariantViolation, ParameterError
from .maps import frac
from .scaling import RatioTriple
from .symbolic import DEFAULT_DEPTH_CAP, as_word, check_depth, shift, word_str


class ScalingSource:
    """Map from dual words to ratio triples.

    ``rule(past)`` receives the full past as a tuple and returns something
    unpackable as (l, g, r).  ``depth`` is the number of trailing symbols the
    rule actually reads (0 for constant rules) and ``err_bound`` its
    multiplicative slack against the true scaling function.
    """

    def __init__(self, rule, depth=0, err_bound=0.0, description="rule"):
        self.rule = rule
        self.depth = depth
        self.err_bound = err_bound
        self.description = description

    def __call__(self, past):
        return self.rule(tuple(past))

    @classmethod
    def constant(cls, l, g, r):
        l, g, r = frac(l), frac(g), frac(r)
        RatioTriple(l, g, r)
        return cls(lambda past: (l, g, r), 0, 0.0, f"constant({l}, {g}, {r})")

    @classmethod
    def from_table(cls, table):
        def rule(past):
            return tuple(table.entries[table.index(past)])
        return cls(rule, table.m, table.err_bound, f"table(m={table.m}, n={table.n})")


@dataclass(frozen=True)
class RescaledSet:
    """Level-``depth`` interval skeleton of a Cantor set normalised to [0,1]."""

    depth: int
    intervals: tuple
    provenance: str = ""

    def as_array(self):
        return np.array([[float(a), float(b)] for a, b in self.intervals], dtype=float)

    def check(self, tol=1e-12):
        arr = self.as_array()
        if len(arr) != 2**self.depth:
            raise InvariantViolation("wrong number of intervals")
        if abs(arr[0, 0]) > tol or abs(arr[-1, 1] - 1) > tol:
            raise InvariantViolation("skeleton does not span [0,1]")
        if np.any(arr[:, 1] <= arr[:, 0]) or np.any(arr[1:, 0] <= arr[:-1, 1]):
            raise InvariantViolation("intervals not disjoint and increasing")
        return True


def _mp_context(bits):
    ctx = mpmath.MPContext()
    ctx.prec = int(bits)
    return ctx


def _to_mp(ctx, v):
    if isinstance(v, Fraction):
        return ctx.mpf(v.numerator) / v.denominator
    return ctx.mpf(v)


def _children(ctx, source, past, a, b):
    l, g, r = (_to_mp(ctx, v) for v in source(past))
    try:
        RatioTriple(l, g, r)
    except ParameterError as exc:
        raise ParameterError(f"source returned a triple outside the simplex at past "
                             f"{word_str(past)}: {exc}") from None
    h = b - a
    return (a, a + h * l), (b - h * r, b)


def _descend(ctx, source, past, prefix):
    a, b = ctx.mpf(0), ctx.mpf(1)
    for s in prefix:
        left, right = _children(ctx, source, past, a, b)
        a, b = right if s else left
        past = past + (s,)
    return a, b


def _expand(ctx, source, past, a, b, depth):
    nodes = [((), a, b)]
    for _ in range(depth):
        nxt = []
        for u, lo, hi in nodes:
            left, right = _children(ctx, source, past + u, lo, hi)
            nxt.append((u + (0,), *left))
            nxt.append((u + (1,), *right))
        nodes = nxt
    return nodes


def build_ratio_set(source, y, n, precision_bits=128, cap=DEFAULT_DEPTH_CAP):
    """Level-n intervals of the ratio Cantor set with past ``y``.

    The cylinder of x_0...x_{k-1} is subdivided with the triple at past
    y x_0 ... x_{k-1}; the left child keeps the parent's left endpoint and
    the right child keeps its right endpoint.
    """
    check_depth(n, cap)
    y = as_word(y)
    ctx = _mp_context(precision_bits)
    nodes = _expand(ctx, source, y, ctx.mpf(0), ctx.mpf(1), n)
    return RescaledSet(n, tuple((a, b) for _, a, b in nodes),
                       f"ratio set of {source.description} at past {word_str(y) or 'empty'}")


@dataclass
class IdentityReport:
    n: int
    depth: int
    max_abs_diff: float
    witness: object
    tol: float

    @property
    def ok(self):
        return self.max_abs_diff <= self.tol


def scenery_identity_check(source, window, n, depth, precision_bits=128, tol=1e-20,
                           raise_on_violation=True):
    """Rescaled subtree below x_0..x_{n-1} versus the ratio set of the shifted past."""
    if len(window.future) < n:
        raise ParameterError("window future shorter than n")
    ctx = _mp_context(precision_bits)
    prefix = window.future[:n]
    a, b = _descend(ctx, source, window.past, prefix)
    below = _expand(ctx, source, window.past + prefix, a, b, depth)
    h = b - a
    rescaled = [((lo - a) / h, (hi - a) / h) for _, lo, hi in below]
    direct = build_ratio_set(source, shift(window, n).past, depth, precision_bits,
                             cap=max(DEFAULT_DEPTH_CAP, depth))
    worst, witness = 0.0, None
    for k, ((p, q), (u, v)) in enumerate(zip(rescaled, direct.intervals)):
        diff = max(abs(p - u), abs(q - v))
        if diff > worst:
            worst, witness = float(diff), (k, float(p), float(u))
    report = IdentityReport(n, depth, worst, witness, tol)
    if not report.ok and raise_on_violation:
        raise InvariantViolation(f"scenery identity off by {worst}", witness)
    return report
