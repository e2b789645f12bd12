"""Renormalised compositions A_w ∘ φ_w of [0,1] and their limits.

For a dual word y = (y_{-n}, ..., y_{-1}) the map sends [0,1] onto itself by
composing the branches (innermost y_{-1}) and rescaling the image cylinder
back to [0,1].  Evaluation proceeds one branch at a time in local coordinates
of the current cylinder, so no step subtracts nearby numbers.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .symbolic import as_word, check_depth

DEFAULT_GRID_POINTS = 1025


def make_grid(points=DEFAULT_GRID_POINTS):
    """Uniform dyadic grid j / (points - 1), including both endpoints."""
    if isinstance(points, np.ndarray):
        return points.astype(float)
    points = int(points)
    if points < 3:
        raise ParameterError("grid needs at least 3 points")
    return np.linspace(0.0, 1.0, points)


@dataclass
class ConjugacyGrid:
    """An increasing self-map of [0,1] sampled with first and second derivatives."""

    grid: np.ndarray
    values: np.ndarray
    dvalues: np.ndarray
    d2values: np.ndarray = None
    label: str = ""
    evaluator: object = None

    def higher(self, k):
        if k == 0:
            return self.values
        if k == 1:
            return self.dvalues
        if k == 2 and self.d2values is not None:
            return self.d2values
        raise ParameterError(f"no order-{k} derivative samples")

    def check(self, tol=1e-12):
        ok = (np.all(np.diff(self.values) > 0) and np.all(self.dvalues > 0)
              and abs(self.values[0]) <= tol and abs(self.values[-1] - 1) <= tol)
        return bool(ok)

    def rows(self):
        return zip(self.grid, self.values, self.dvalues)


def k0(K):
    return math.expm1(math.exp(K)) / math.exp(K)


def k1(K):
    return math.exp(K) * k0(K)


def k3(K):
    a = k0(K)
    return a * (5 + 4 * a)


def k4(K, k2):
    a = math.exp(K) * k2
    return 5 * a + 4 * a * a


def conjugacy_bound(sys, n):
    """Certified C1 distance between the depth-n renormalised map and its limit.

    Affine systems renormalise to the identity at every depth, so the bound
    is 0 there.
    """
    if sys.K == 0:
        return 0.0
    return k1(sys.K) * float(sys.beta) ** (n * float(sys.gamma))


def depth_for_tol(sys, tol):
    if sys.K == 0:
        return 0
    b = float(sys.beta) ** float(sys.gamma)
    return max(0, math.ceil(math.log(tol / k1(sys.K)) / math.log(b)))


def renormalized_jet(sys, word, x):
    """Value, first and second derivative of A_word ∘ φ_word at x.

    ``word`` is read as a dual word: its last symbol is applied first.
    Works on numpy arrays (double precision) and on mpmath scalars.
    """
    t = x
    d1 = x * 0 + 1
    d2 = x * 0
    left = x * 0 if not isinstance(x, np.ndarray) else 0.0
    length = left + 1
    for s in reversed(word):
        f = sys.branch(s)
        p = left + t * length
        g1 = f.deriv(p, 1) * length
        g2 = f.deriv(p, 2) * length * length
        new_left = f(left)
        new_length = f.increment(left, length)
        t = f.increment(left, t * length) / new_length
        d2 = (g2 * d1 * d1 + g1 * d2) / new_length
        d1 = g1 * d1 / new_length
        left, length = new_left, new_length
    return t, d1, d2


def renormalized_inverse(sys, word, t):
    """Inverse of A_word ∘ φ_word at local coordinate t (same conventions)."""
    frames = []
    left = t * 0 if not isinstance(t, np.ndarray) else 0.0
    length = left + 1
    for s in reversed(word):
        f = sys.branch(s)
        frames.append((f, left, length))
        left, length = f(left), f.increment(left, length)
    for f, inner_left, inner_length in reversed(frames):
        outer_length = f.increment(inner_left, inner_length)
        t = f.inverse_increment(inner_left, t * outer_length) / inner_length
    return t


def phi_n(sys, y, n, grid=DEFAULT_GRID_POINTS):
    """Sample the depth-n renormalised map of the dual word y on a grid."""
    y = as_word(y)
    if n > len(y):
        raise ParameterError(f"depth {n} exceeds dual word length {len(y)}")
    check_depth(n, sys.depth_cap)
    x = make_grid(grid)
    word = y[len(y) - n:]
    v, d1, d2 = renormalized_jet(sys, word, x)
    return ConjugacyGrid(x, v, d1, d2, f"phi_{n}")


@dataclass
class LimitConjugacy:
    grid: ConjugacyGrid
    n_used: int
    bound: float
    reached: bool


def limit_conjugacy(sys, y, tol, grid=DEFAULT_GRID_POINTS):
    """Depth-n approximant certified within ``tol`` of the limit, if |y| allows.

    When the dual word is too short the deepest available approximant is
    returned with ``reached=False`` and its achievable bound.
    """
    y = as_word(y)
    need = depth_for_tol(sys, tol)
    n = min(need, len(y))
    return LimitConjugacy(phi_n(sys, y, n, grid), n, conjugacy_bound(sys, n), n == need)


def limit_word(sys, y, tol=1e-13, cap=64):
    """Pad y leftward with zeros so that its renormalised map is within tol of the limit."""
    y = as_word(y)
    need = min(depth_for_tol(sys, tol), cap)
    if len(y) >= need:
        return y
    return (0,) * (need - len(y)) + y


def batch_renormalized(sys, windows, x):
    """Renormalised maps of many dual words at once, evaluated at points x.

    ``windows`` is an integer array of shape (N, L) read like dual words
    (last column applied first); entries of -1 are skipped, which lets
    shorter words share one array.  Returns values of shape (N, len(x)).
    """
    windows = np.asarray(windows)
    x = np.asarray(x, dtype=float)
    count = windows.shape[0]
    t = np.broadcast_to(x, (count, x.size)).copy()
    left = np.zeros((count, 1))
    length = np.ones((count, 1))
    for j in range(windows.shape[1] - 1, -1, -1):
        sym = windows[:, j][:, None]
        if np.all(sym < 0):
            continue
        new_left, new_length, new_t = left.copy(), length.copy(), t.copy()
        for s in (0, 1):
            rows = (sym == s)[:, 0]
            if not rows.any():
                continue
            f = sys.branch(s)
            a, h = left[rows], length[rows]
            nl = f.increment(a, h)
            new_left[rows] = f(a)
            new_length[rows] = nl
            new_t[rows] = f.increment(a, t[rows] * h) / nl
        left, length, t = new_left, new_length, new_t
    return t


def limit_grid(sys, y, tol=1e-13, grid=DEFAULT_GRID_POINTS):
    """Grid of the limit renormalised map of y, padded per :func:`limit_word`.

    Composition along one word costs time linear in its length, so this is
    not subject to the cylinder-enumeration depth cap.
    """
    word = limit_word(sys, y, tol)
    x = make_grid(grid)
    v, d1, d2 = renormalized_jet(sys, word, x)
    return ConjugacyGrid(x, v, d1, d2, f"limit_{len(word)}")
