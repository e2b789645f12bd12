"""Pressure roots, dimension, and conformal and Gibbs weights on cylinders."""
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantViolation, ParameterError
from .hierarchy import interval_for_word, level_arrays
from .metrics import IntervalMeasure
from .symbolic import as_word, index_word, word_index, word_str

S_LOW, S_HIGH = 0.01, 0.99
MAX_BISECTIONS = 200


@dataclass
class DimensionResult:
    """Dimension estimate with its bisection bracket and a certified enclosure.

    ``d`` is the root of Z_n(s) = Z_{n-1}(s), which converges geometrically
    in n; ``moran_root`` is the plain root of Z_n(s) = 1.  ``certified_bracket``
    contains the true dimension, from the uniform bounds on Z_n at the root.
    """

    d: float
    depth_used: int
    bracket: tuple
    moran_root: float
    certified_bracket: tuple

    def to_dict(self):
        return {"d": self.d, "bracket": list(self.bracket), "depth": self.depth_used,
                "moran_root": self.moran_root, "certified_bracket": list(self.certified_bracket)}


def _log_partition(lengths, s):
    """log sum lengths^s, computed stably."""
    logs = s * np.log(lengths)
    top = logs.max()
    return float(top + np.log(np.exp(logs - top).sum()))


def _bisect(fn, tol, lo=S_LOW, hi=S_HIGH):
    """Root of a decreasing function on [lo, hi]; returns the final bracket."""
    flo, fhi = fn(lo), fn(hi)
    if not (flo > 0 > fhi):
        raise InvariantViolation(f"pressure does not change sign on [{lo}, {hi}]", (flo, fhi))
    for _ in range(MAX_BISECTIONS):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if fn(mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo, hi


def _clamped_bisect(fn, tol=1e-13):
    """Like _bisect, but a root outside the search range collapses to the nearer end."""
    if fn(S_LOW) <= 0:
        return S_LOW, S_LOW
    if fn(S_HIGH) >= 0:
        return S_HIGH, S_HIGH
    return _bisect(fn, tol)


def _assert_decreasing(fn, points=33):
    s = np.linspace(S_LOW, S_HIGH, points)
    vals = np.array([fn(v) for v in s])
    if np.any(np.diff(vals) > 1e-12 * np.maximum(1, np.abs(vals[1:]))):
        raise InvariantViolation("pressure function is not monotone in s", vals)


def full_distortion(sys):
    """Distortion constant of the maps φ_w over the whole unit interval."""
    if sys.K == 0:
        return 0.0
    return sys.K / float(sys.beta) ** float(sys.gamma)


def moran_root(lengths, tol=1e-12):
    lo, hi = _bisect(lambda s: _log_partition(lengths, s), tol)
    return 0.5 * (lo + hi)


def bowen_root(sys, n, tol=1e-12):
    """Dimension of C from the level-n and level-(n-1) cylinder lengths."""
    if n < 2:
        raise ParameterError("bowen_root needs depth n >= 2")
    if not tol > 0:
        raise ParameterError("tol must be positive")
    levels = {k: level_arrays(sys, k)[1] for k in range(1, n + 1)}
    ln, lp = levels[n], levels[n - 1]

    def ratio(s):
        return _log_partition(ln, s) - _log_partition(lp, s)

    _assert_decreasing(ratio)
    lo, hi = _bisect(ratio, tol)
    d = 0.5 * (lo + hi)
    moran = moran_root(ln, min(tol, 1e-12))

    # Z_k(d) lies in [e^{-Kd}, e^{Kd}] for the full-interval distortion K.
    Kf = full_distortion(sys)
    c_lo, c_hi = S_LOW, S_HIGH
    for k in range(1, n + 1):
        lk = levels[k]
        a, _ = _clamped_bisect(lambda s: _log_partition(lk, s) - Kf * s)
        _, b = _clamped_bisect(lambda s: _log_partition(lk, s) + Kf * s)
        c_lo, c_hi = max(c_lo, a), min(c_hi, b)
    return DimensionResult(d, n, (lo, hi), moran, (c_lo, c_hi))


@dataclass
class CylinderMeasure:
    """Nonnegative weights on the level-``depth`` cylinders, in lexicographic order.

    ``intervals`` (optional, shape (2^depth, 2)) places each weight on an
    interval so the measure can be compared with :func:`metrics.d_M`.
    """

    depth: int
    weights: np.ndarray
    kind: str = "measure"
    d: float = None
    band: float = 0.0
    defect: float = 0.0
    system: object = None
    intervals: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (2**self.depth,):
            raise ParameterError(f"expected {2**self.depth} weights, got {self.weights.shape}")
        if np.any(self.weights < 0):
            raise InvariantViolation("negative cylinder weight", self.weights.min())

    @property
    def total(self):
        return float(self.weights.sum())

    def weight(self, w):
        w = as_word(w)
        if len(w) > self.depth:
            raise ParameterError("word deeper than the measure")
        return float(self.marginal(len(w))[word_index(w)])

    def marginal(self, k):
        """Weights of the level-k cylinders (k <= depth), summing children."""
        if k > self.depth:
            raise ParameterError("cannot refine a cylinder measure")
        return self.weights.reshape(2**k, -1).sum(axis=1)

    def interval_measure(self):
        if self.intervals is None:
            if self.system is None:
                raise ParameterError("measure carries no intervals")
            left, length = level_arrays(self.system, self.depth)
            self.intervals = np.stack([left, left + length], axis=1)
        return IntervalMeasure(self.intervals, self.weights)

    def rows(self):
        for i, v in enumerate(self.weights):
            yield word_str(index_word(i, self.depth)), float(v)


def conformal_weights(sys, d, n):
    """Normalised |I_w|^d on level n.

    ``band`` is the log-width e^{±band} within which the weights of the
    normalised conformal measure lie relative to these.
    """
    left, length = level_arrays(sys, n)
    logs = d * np.log(length)
    w = np.exp(logs - logs.max())
    w /= w.sum()
    band = 2 * full_distortion(sys) * d
    return CylinderMeasure(n, w, "conformal", d, band, 0.0, sys,
                           np.stack([left, left + length], axis=1))


def transfer_weights(sys, d, n):
    """Branch weights Dφ_s(left end of I_v)^d on level-n cylinders, for s = 0, 1."""
    left, _ = level_arrays(sys, n)
    return [np.asarray(sys.branch(s).deriv(left, 1), dtype=float) ** d for s in (0, 1)]


def gibbs_weights(sys, d, n, tol=1e-15, max_iter=20000):
    """Invariant weights of the level-n discretised transfer operator.

    The operator maps f to sum_s g_s(v) f(s v'), where v' drops the last
    symbol of v.  With right and left eigenvectors h, l the weights h*l are
    the stationary law of the chain v -> s v', hence exactly invariant under
    the shift on level-(n-1) marginals.
    """
    if n < 1:
        raise ParameterError("gibbs_weights needs depth >= 1")
    g0, g1 = transfer_weights(sys, d, n)
    half = 2 ** (n - 1)
    idx = np.arange(2**n)
    tail = idx >> 1

    def apply(f):
        return g0 * f[tail] + g1 * f[half + tail]

    def apply_left(l):
        out = np.empty_like(l)
        out[:half] = l[0::2] * g0[0::2] + l[1::2] * g0[1::2]
        out[half:] = l[0::2] * g1[0::2] + l[1::2] * g1[1::2]
        return out

    def power(op):
        v = np.full(2**n, 1.0 / 2**n)
        lam = 0.0
        for _ in range(max_iter):
            u = op(v)
            lam = u.sum()
            u /= lam
            if np.max(np.abs(u - v)) <= tol * np.max(u):
                return u, lam
            v = u
        raise InvariantViolation("transfer-operator power iteration did not converge", lam)

    h, lam = power(apply)
    l, _ = power(apply_left)
    w = h * l
    w /= w.sum()
    m = CylinderMeasure(n, w, "gibbs", d, 0.0, 0.0, sys)
    m.defect = invariance_defect(m)
    m.meta["eigenvalue"] = float(lam)
    return m


def invariance_defect(mu):
    """max over level-(n-1) cylinders A of |mu(σ^{-1}A) - mu(A)|."""
    if mu.depth < 1:
        return 0.0
    coarse = mu.marginal(mu.depth - 1)
    half = 2 ** (mu.depth - 1)
    pulled = mu.weights[:half] + mu.weights[half:]
    return float(np.max(np.abs(pulled - coarse)))


def restrict_rescale(mu, w):
    """Measure on the rescaled copy of I_w: weights below w times |I_w|^{-d}."""
    w = as_word(w)
    if len(w) >= mu.depth:
        raise ParameterError("word must be shorter than the measure depth")
    if mu.d is None:
        raise ParameterError("measure has no dimension attached")
    k = len(w)
    start = word_index(w) * 2 ** (mu.depth - k) if k else 0
    sub = mu.weights[start:start + 2 ** (mu.depth - k)]
    if sub.sum() <= 0:
        raise ParameterError(f"cylinder {word_str(w)} has zero mass")
    if mu.intervals is None:
        mu.interval_measure()
    iv = mu.intervals[start:start + len(sub)]
    if mu.system is not None:
        outer = interval_for_word(mu.system, w)
        a, h = float(outer.left), float(outer.length)
    else:
        a, h = iv[0, 0], iv[-1, 1] - iv[0, 0]
    return CylinderMeasure(mu.depth - k, sub * h ** (-mu.d), mu.kind, mu.d, mu.band, 0.0, None,
                           (iv - a) / h, {"restricted_to": word_str(w)})


def rescaled_set_dimension(levels, tol=1e-12):
    """Ratio-root dimension of a set given interval lengths at two consecutive depths."""
    prev, cur = (np.asarray(v, dtype=float) for v in levels)
    lo, hi = _bisect(lambda s: _log_partition(cur, s) - _log_partition(prev, s), tol)
    return 0.5 * (lo + hi)


def dimension_sweep(sys, depths, tol=1e-12):
    return {n: bowen_root(sys, n, tol) for n in depths}


def moran_exact(l, r, tol=1e-15):
    """Root of l^s + r^s = 1 for affine maps, by bisection in log form."""
    lo, hi = _bisect(lambda s: math.log(l**s + r**s), tol)
    return 0.5 * (lo + hi)
