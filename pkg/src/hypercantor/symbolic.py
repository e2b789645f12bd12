"""Finite words over {0,1}, dual words, bi-infinite windows and the beta metric.

A ``Word`` lists symbols left to right, first symbol outermost.  A dual word
lists the tail of a past sequence in reading order ``y_{-n} ... y_{-1}``, so
its last entry is the symbol closest to the present.  Both are plain tuples of
ints; strings over "01" are accepted wherever a word is expected.
"""
from dataclasses import dataclass
from itertools import product

from .errors import DepthCapError, ParameterError

DEFAULT_DEPTH_CAP = 26


def as_word(symbols):
    """Coerce a string, tuple or iterable of 0/1 symbols to a tuple of ints."""
    if isinstance(symbols, str):
        symbols = symbols.lstrip("…").strip()
        out = tuple(int(ch) for ch in symbols)
    else:
        out = tuple(int(s) for s in symbols)
    for s in out:
        if s not in (0, 1):
            raise ParameterError(f"symbol {s!r} is not 0 or 1")
    return out


def word_str(w):
    return "".join(str(s) for s in w)


def dual_str(y, human=False):
    s = word_str(y)
    return "…" + s if human else s


def word_index(w):
    """Position of w in the lexicographic order of words of its length."""
    idx = 0
    for s in w:
        idx = 2 * idx + s
    return idx


def index_word(idx, n):
    return tuple((idx >> (n - 1 - k)) & 1 for k in range(n))


def check_depth(n, cap=DEFAULT_DEPTH_CAP):
    if n < 0:
        raise ParameterError(f"negative depth {n}")
    if n > cap:
        raise DepthCapError(f"depth {n} exceeds cap {cap}")


def pad_dual(y, n, symbol=0):
    """Extend a dual word leftward to length n by repeating ``symbol``."""
    y = as_word(y)
    if len(y) >= n:
        return y
    return (symbol,) * (n - len(y)) + y


@dataclass(frozen=True)
class BiWindow:
    """Finite window (past, future) around the boundary of a two-sided sequence."""

    past: tuple
    future: tuple

    def __post_init__(self):
        object.__setattr__(self, "past", as_word(self.past))
        object.__setattr__(self, "future", as_word(self.future))


def shift(window, times=1):
    """Move the first ``times`` future symbols onto the right end of the past."""
    if times > len(window.future):
        raise ParameterError("cannot shift past the end of the future")
    if times == 0:
        return window
    return BiWindow(window.past + window.future[:times], window.future[times:])


@dataclass(frozen=True)
class BetaDistance:
    """Value of the beta metric on finite data.

    ``lower``/``upper`` bracket the distance between any infinite completions.
    ``truncated`` is set when the inputs ran out before a disagreement was
    found; ``value`` is then 0 for equal-length agreement and the upper bound
    when one word is a strict suffix of the other.
    """

    value: float
    lower: float
    upper: float
    truncated: bool
    agree: int

    def __float__(self):
        return float(self.value)


def common_suffix(y, w):
    n = 0
    for a, b in zip(reversed(y), reversed(w)):
        if a != b:
            break
        n += 1
    return n


def beta_metric(y, w, beta):
    if not 0 < beta < 1:
        raise ParameterError(f"beta={beta} not in (0,1)")
    y, w = as_word(y), as_word(w)
    n = common_suffix(y, w)
    if n < min(len(y), len(w)):
        d = beta**n
        return BetaDistance(d, d, d, False, n)
    top = beta**n
    if len(y) == len(w):
        return BetaDistance(0.0, 0.0, top, True, n)
    return BetaDistance(top, 0.0, top, True, n)


def enumerate_cylinders(n, cap=DEFAULT_DEPTH_CAP):
    check_depth(n, cap)
    return [tuple(p) for p in product((0, 1), repeat=n)]
