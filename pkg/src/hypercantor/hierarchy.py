"""Cylinder intervals, gaps, affine rescalings and symbolic coding of points."""
from dataclasses import dataclass

import numpy as np

from .errors import GapError, ParameterError
from .symbolic import as_word, check_depth, word_str


@dataclass(frozen=True)
class CylinderInterval:
    word: tuple
    left: object
    length: object

    @property
    def right(self):
        return self.left + self.length

    def contains(self, x):
        return self.left <= x <= self.right

    def __repr__(self):
        return (f"CylinderInterval({word_str(self.word)!r}, "
                f"[{float(self.left):.17g}, {float(self.right):.17g}])")


@dataclass(frozen=True)
class Gap:
    """Open interval between the two children of the cylinder of ``word``."""

    word: tuple
    left: object
    length: object

    @property
    def right(self):
        return self.left + self.length

    def contains(self, x):
        return self.left < x < self.right


@dataclass(frozen=True)
class AffineRescale:
    """x -> scale * x + offset, sending a source interval onto [0,1]."""

    scale: object
    offset: object

    def __call__(self, x):
        return self.scale * x + self.offset

    def inverse(self, t):
        return (t - self.offset) / self.scale


def fold(sys, w, left, length):
    """Image of [left, left+length] under phi_w, innermost symbol first."""
    for s in reversed(w):
        f = sys.branch(s)
        left, length = f(left), f.increment(left, length)
    return left, length


def root_pieces(sys, like):
    """(left, length) of I_0, the root gap G and I_1 in the arithmetic of ``like``."""
    zero, one = like * 0, like * 0 + 1
    a = sys.phi0(one)
    b = sys.phi1(zero)
    return (zero, a), (a, b - a), (b, one - b)


def interval_for_word(sys, w):
    w = as_word(w)
    check_depth(len(w), sys.depth_cap)
    left, length = fold(sys, w, sys.mpf(0), sys.mpf(1))
    return CylinderInterval(w, left, length)


def level_intervals(sys, n):
    """All 2^n level-n cylinders in increasing (= lexicographic) order.

    Nodes are built by prepending symbols, which applies exactly the same
    sequence of map evaluations as folding each word from the root.
    """
    check_depth(n, sys.depth_cap)
    words = [()]
    lefts = [sys.mpf(0)]
    lengths = [sys.mpf(1)]
    for _ in range(n):
        nw, nl, nh = [], [], []
        for s in (0, 1):
            f = sys.branch(s)
            for w, a, h in zip(words, lefts, lengths):
                nw.append((s,) + w)
                nl.append(f(a))
                nh.append(f.increment(a, h))
        words, lefts, lengths = nw, nl, nh
    return [CylinderInterval(w, a, h) for w, a, h in zip(words, lefts, lengths)]


def level_arrays(sys, n):
    """Double-precision (left, length) arrays of the level-n cylinders."""
    check_depth(n, sys.depth_cap)
    left = np.zeros(1)
    length = np.ones(1)
    for _ in range(n):
        parts = [(sys.branch(s)(left), sys.branch(s).increment(left, length)) for s in (0, 1)]
        left = np.concatenate([p[0] for p in parts])
        length = np.concatenate([p[1] for p in parts])
    return left, length


def gap(sys, w):
    w = as_word(w)
    check_depth(len(w) + 1, sys.depth_cap)
    _, (g0, gl), _ = root_pieces(sys, sys.mpf(0))
    left, length = fold(sys, w, g0, gl)
    return Gap(w, left, length)


def rescale(iv):
    left, length = iv.left, iv.length
    if not length > 0:
        raise ParameterError("cannot rescale a degenerate interval")
    return AffineRescale(1 / length, -left / length)


def code_point(sys, x, n, tol=0):
    """Length-n word of the cylinder containing x (closed intervals).

    Raises GapError naming the level of the gap that contains x.
    """
    check_depth(n, sys.depth_cap)
    x = sys.mpf(x)
    if x < -tol or x > 1 + tol:
        raise ParameterError(f"{float(x)} lies outside [0,1]")
    u = ()
    for level in range(n):
        hits = []
        for s in (0, 1):
            left, length = fold(sys, u + (s,), sys.mpf(0), sys.mpf(1))
            if left - tol <= x <= left + length + tol:
                hits.append(s)
        if not hits:
            raise GapError(f"{float(x)} lies in the gap of level {level} "
                           f"(word {word_str(u) or 'empty'})", level, u)
        if len(hits) > 1:
            raise GapError(f"{float(x)} is ambiguous at level {level}", level, u)
        u = u + (hits[0],)
    return u
