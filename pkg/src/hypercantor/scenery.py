"""Limit sets, scenery sequences, rigidity conjugacies and smoothness probes."""
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .conjugacy import (ConjugacyGrid, conjugacy_bound, limit_grid, limit_word, make_grid, phi_n,
                        renormalized_inverse, renormalized_jet)
from .errors import InvariantViolation, ParameterError
from .hierarchy import fold, interval_for_word, level_arrays, level_intervals
from .metrics import d_C, mesh_check
from .ratioset import RescaledSet
from .rng import make_rng
from .scaling import build_scaling_table
from .symbolic import as_word, check_depth, word_str


class ScalingMismatch(InvariantViolation):
    """Two systems disagree on their scaling functions beyond certified error."""


def skeleton_endpoints(sys, depth):
    left, length = level_arrays(sys, depth)
    return np.stack([left, left + length], axis=1)


def limit_set(sys, y, depth, tol=1e-13):
    """Image of the level-``depth`` skeleton under the limit renormalised map of y.

    y is padded leftward with zeros until the certified C1 error of the
    truncation is below ``tol``; that error is stored as ``slack``.
    """
    word = limit_word(sys, y, tol)
    ends = skeleton_endpoints(sys, depth)
    vals, _, _ = renormalized_jet(sys, word, ends.ravel())
    out = vals.reshape(ends.shape)
    out[0, 0], out[-1, 1] = 0.0, 1.0
    return RescaledSet(depth, tuple(map(tuple, out)),
                       f"limit set at past {word_str(as_word(y)) or 'empty'} "
                       f"(depth {len(word)}, C1 slack {conjugacy_bound(sys, len(word)):.3g})")


def scenery_sequence(sys, x_prefix, n_max, depth):
    """Skeletons of the rescaled pieces of C inside I_{x_0..x_n}, n = 0..n_max.

    Computed from the cylinder hierarchy (extended precision), independently
    of the renormalised-map route used by :func:`limit_set`.
    """
    x = as_word(x_prefix)
    if len(x) < n_max + depth:
        raise ParameterError("prefix shorter than n_max + depth")
    check_depth(n_max + 1 + depth, sys.depth_cap)
    base = level_intervals(sys, depth)
    out = []
    for n in range(n_max + 1):
        w = x[: n + 1]
        outer = interval_for_word(sys, w)
        ivs = []
        for iv in base:
            a, h = fold(sys, w, iv.left, iv.length)
            ivs.append(((a - outer.left) / outer.length, (a + h - outer.left) / outer.length))
        out.append(RescaledSet(depth, tuple(ivs), f"scenery piece n={n} of {word_str(x)}"))
    return out


def scenery_conjugacy(sys, x_prefix, n, grid=1025):
    """The map carrying C onto the n-th scenery piece: A_w ∘ φ_w for w = x_0..x_n."""
    x = as_word(x_prefix)
    return phi_n(sys, x[: n + 1], n + 1, grid)


def estimate_k2(sys, samples=40, seed=0, agree=range(2, 12), length=48, grid=257):
    """Empirical Hölder constant of y -> limit map, in the beta metric.

    For each sample, two dual words share their last j symbols and differ
    before; returns the max of d_C / beta^(j gamma).
    """
    rng = make_rng(seed)
    b = float(sys.beta) ** float(sys.gamma)
    x = make_grid(grid)
    worst = 0.0
    for _ in range(samples):
        for j in agree:
            tail = tuple(int(s) for s in rng.integers(0, 2, j))
            heads = rng.integers(0, 2, size=(2, length - j - 1))
            y = tuple(int(s) for s in heads[0]) + (0,) + tail
            w = tuple(int(s) for s in heads[1]) + (1,) + tail
            fy, dy, _ = renormalized_jet(sys, y, x)
            fw, dw, _ = renormalized_jet(sys, w, x)
            d = float(np.max(np.abs(fy - fw)) + np.max(np.abs(dy - dw)))
            worst = max(worst, d / b**j)
    return worst


# rigidity ------------------------------------------------------------------

def _compose_jets(outer, inner):
    """Jets (value, d1, d2) of outer ∘ inner, where outer is evaluated at inner's value."""
    o0, o1, o2 = outer
    _, i1, i2 = inner
    return o0, o1 * i1, o2 * i1 * i1 + o1 * i2


def identity_seed(s):
    return s, 1.0, 0.0


def map_gap_seed(sysA, sysB, psi):
    """Seed induced by a global map psi that carries A's root gap onto B's."""
    a0, a1 = float(sysA.phi0(1.0)), float(sysA.phi1(0.0))
    b0, b1 = float(sysB.phi0(1.0)), float(sysB.phi1(0.0))
    ga, gb = a1 - a0, b1 - b0

    def seed(s):
        u = a0 + s * ga
        return ((psi(u) - b0) / gb, psi.deriv(u, 1) * ga / gb, psi.deriv(u, 2) * ga * ga / gb)
    return seed


def flat_bump_seed(eta):
    """s + eta s^3 (1-s)^3: first and second derivatives match the identity at 0 and 1."""
    def seed(s):
        p = s**3 * (1 - s) ** 3
        d1 = 3 * s**2 * (1 - s) ** 2 * (1 - 2 * s)
        d2 = 6 * s * (1 - s) * (1 - 5 * s + 5 * s * s)
        return s + eta * p, 1 + eta * d1, eta * d2
    return seed


def compose_seeds(outer, inner):
    def seed(s):
        j = inner(s)
        return _compose_jets(outer(j[0]), j)
    return seed


def grid_seed(g):
    vals = PchipInterpolator(g.grid, g.values)
    dv = PchipInterpolator(g.grid, g.dvalues)
    d2 = PchipInterpolator(g.grid, g.d2values) if g.d2values is not None else dv.derivative()

    def seed(s):
        return float(vals(s)), float(dv(s)), float(d2(s))
    return seed


def scaling_agreement(sysA, sysB, m=6, n=18):
    """Max log-discrepancy of two scaling tables and the combined certified slack."""
    ta, tb = build_scaling_table(sysA, m, n), build_scaling_table(sysB, m, n)
    gap = float(np.max(np.abs(np.log(ta.entries) - np.log(tb.entries))))
    return gap, ta.log_slack + tb.log_slack


class RigidityMap:
    """Conjugacy from the Cantor set of sysA to that of sysB built gap by gap.

    On a gap G_v of A it is φ̂_v ∘ seed ∘ S^{|v|}; on C it is the coding map,
    reached by descending until x falls in a gap or hits a cylinder endpoint.
    ``depth`` only sets how many levels are tabulated in advance.
    """

    def __init__(self, sysA, sysB, seed, depth, min_length=1e-11, curvature_length=1e-4):
        self.sysA, self.sysB, self.depth = sysA, sysB, depth
        self.min_length, self.curvature_length = min_length, curvature_length
        self.seed = identity_seed if seed is None else seed
        self.levelsA = [level_arrays(sysA, k) for k in range(depth + 1)]
        self.levelsB = [level_arrays(sysB, k) for k in range(depth + 1)]
        self.gapA = (float(sysA.phi0(1.0)), float(sysA.phi1(0.0)))
        self.gapB = (float(sysB.phi0(1.0)), float(sysB.phi1(0.0)))

    def _interval(self, sys, levels, word):
        k = len(word)
        if k < len(levels):
            idx = 0
            for s in word:
                idx = 2 * idx + s
            return float(levels[k][0][idx]), float(levels[k][1][idx])
        a, h = fold(sys, word, 0.0, 1.0)
        return float(a), float(h)

    def locate(self, x, stop_at_endpoint=False):
        """(word, in_gap) for the gap of A containing x, or the cylinder where descent stopped.

        Descent stops once the cylinder is shorter than ``min_length`` (x is
        then in C up to float resolution), or at an exact cylinder endpoint
        when ``stop_at_endpoint`` is set.
        """
        word = ()
        la, ha = 0.0, 1.0
        while True:
            if ha < self.min_length or (stop_at_endpoint and (x == la or x == la + ha)):
                return word, False
            l0, h0 = self._interval(self.sysA, self.levelsA, word + (0,))
            l1, h1 = self._interval(self.sysA, self.levelsA, word + (1,))
            if x <= l0 + h0:
                word, la, ha = word + (0,), l0, h0
            elif x >= l1:
                word, la, ha = word + (1,), l1, h1
            else:
                return word, True

    def jet(self, x):
        x = float(x)
        word, in_gap = self.locate(x)
        la, ha = self._interval(self.sysA, self.levelsA, word)
        lb, hb = self._interval(self.sysB, self.levelsB, word)
        t = (x - la) / ha
        if not in_gap:
            return self._cantor_jet(x, word, lb + hb * t, hb / ha)
        u = float(renormalized_inverse(self.sysA, word, t))
        _, a1, a2 = renormalized_jet(self.sysA, word, u)
        # jet of t -> u, the inverse of the renormalised A-map
        inv = (u, 1 / a1, -a2 / a1**3)
        ga = self.gapA[1] - self.gapA[0]
        gb = self.gapB[1] - self.gapB[0]
        h0, h1, h2 = self.seed((u - self.gapA[0]) / ga)
        core = (self.gapB[0] + gb * h0, h1 * gb / ga, h2 * gb / (ga * ga))
        j = _compose_jets(core, inv)
        w = renormalized_jet(self.sysB, word, j[0])
        j = _compose_jets(tuple(float(v) for v in w), j)
        scale = hb / ha
        return lb + hb * j[0], j[1] * scale, j[2] * hb / (ha * ha)

    def _cantor_jet(self, x, word, value, slope):
        """Jet at a point of C: slopes of nested cylinder pairs stand in for derivatives.

        The second derivative is the difference of the two children's mean
        slopes over the distance between their midpoints, taken at the first
        level whose cylinder is shorter than ``curvature_length``.
        """
        k = 0
        while k < len(word) and self._interval(self.sysA, self.levelsA, word[:k])[1] >= self.curvature_length:
            k += 1
        slopes, mids = [], []
        for s in (0, 1):
            la, ha = self._interval(self.sysA, self.levelsA, word[:k] + (s,))
            _, hb = self._interval(self.sysB, self.levelsB, word[:k] + (s,))
            slopes.append(hb / ha)
            mids.append(la + ha / 2)
        return value, slope, (slopes[1] - slopes[0]) / (mids[1] - mids[0])

    def value(self, x):
        x = float(x)
        word, in_gap = self.locate(x, stop_at_endpoint=True)
        la, ha = self._interval(self.sysA, self.levelsA, word)
        if not in_gap and (x == la or x == la + ha):
            lb, hb = self._interval(self.sysB, self.levelsB, word)
            return lb if x == la else lb + hb
        return self.jet(x)[0]

    def __call__(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.array([self.value(v) for v in x])

    def sample(self, grid):
        x = make_grid(grid)
        jets = np.array([self.jet(v) for v in x])
        return ConjugacyGrid(x, jets[:, 0], jets[:, 1], jets[:, 2], "rigidity", self)


def rigidity_conjugacy(sysA, sysB, gap_seed=None, depth=12, grid=1025, table_depth=6,
                       est_depth=18, check_scaling=True):
    """Build the conjugacy of Cantor sets A -> B from the dynamics and a gap seed.

    ``gap_seed`` maps s in [0,1] (normalised coordinate in A's root gap) to a
    jet (value, d1, d2) in normalised coordinates of B's root gap; ``None``
    means the affine identification.  The scaling tables of the two systems
    must agree within their combined certified slack.
    """
    if check_scaling:
        gap, slack = scaling_agreement(sysA, sysB, table_depth, est_depth)
        if gap > slack + 1e-12:
            raise ScalingMismatch(
                f"scaling tables differ by {gap:.3g} > certified slack {slack:.3g}",
                (gap, slack))
    return RigidityMap(sysA, sysB, gap_seed, depth).sample(grid)


def conjugacy_residual(sysA, sysB, conj, points):
    """max |Ŝ(Φ(a)) - Φ(S(a))| over the given points (which must lie in C's gaps)."""
    points = np.asarray(points, dtype=float)
    lhs = sysB.expand(conj(points))
    rhs = conj(sysA.expand(points))
    return float(np.max(np.abs(lhs - rhs)))


def gap_points(sys, depth, count, seed=0, min_level=1):
    """Random points inside gaps G_v with min_level <= |v| < depth."""
    rng = make_rng(seed)
    levels = [level_arrays(sys, k) for k in range(depth + 1)]
    out = []
    for _ in range(count):
        k = int(rng.integers(min_level, depth))
        idx = int(rng.integers(0, 2**k))
        left, length = levels[k + 1]
        lo = left[2 * idx] + length[2 * idx]
        hi = left[2 * idx + 1]
        out.append(lo + (hi - lo) * (0.05 + 0.9 * rng.random()))
    return np.array(out)


# smoothness ------------------------------------------------------------------

@dataclass
class SmoothnessReport:
    k: int
    gamma: float
    scales: np.ndarray
    estimates: np.ndarray
    constant: float
    stable: bool
    growth: float


def smoothness_probe(f, k, gamma=1.0, levels=6, growth_limit=2.0, floor=1e-9):
    """Finite-difference Hölder constants of D^{k-1} log Df at dyadic separations.

    The estimate at separation 2^j grid steps is max |q(x+h) - q(x)| / h^gamma.
    ``growth`` compares the finest scale with the one 8 steps coarser; a
    controlled quantity stays bounded (growth near 1) while a singular one
    grows like the scale ratio.
    """
    if k not in (1, 2):
        raise ParameterError("probe supports k = 1 or 2")
    x = f.grid
    if len(x) < 2 ** (levels + 1) + 1:
        raise ParameterError(f"grid of {len(x)} points too coarse for {levels} scale levels")
    d1 = f.higher(1)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.log(d1) if k == 1 else f.higher(2) / d1
    ests, scales = [], []
    for j in range(levels):
        step = 2**j
        h = x[step:] - x[:-step]
        diff = np.abs(q[step:] - q[:-step])
        with np.errstate(invalid="ignore"):
            ratio = diff / h**gamma
        ests.append(np.inf if not np.all(np.isfinite(ratio)) else float(np.max(ratio)))
        scales.append(float(np.max(h)))
    ests = np.array(ests)
    if not np.all(np.isfinite(ests)):
        return SmoothnessReport(k, gamma, np.array(scales), ests, np.inf, False, np.inf)
    coarse = ests[min(3, levels - 1)]
    growth = (ests[0] + floor) / (coarse + floor)
    stable = bool(growth <= growth_limit)
    return SmoothnessReport(k, gamma, np.array(scales), ests, float(ests.max()), stable, float(growth))


# convergence studies -----------------------------------------------------------

@dataclass
class ConvergenceReport:
    """Rows (n, d_C, d_H, d_M, bound, measure_bound) of a convergence study."""

    label: str
    n: np.ndarray
    d_c: np.ndarray
    d_h: np.ndarray
    d_m: np.ndarray
    bound: np.ndarray
    measure_bound: np.ndarray
    extra: dict

    def slope(self, column="d_c", start=None):
        """Least-squares slope of log(column) against n, over rows with n >= start."""
        vals = getattr(self, column)
        keep = (vals > 0) & ((self.n >= start) if start is not None else True)
        if keep.sum() < 2:
            return float("nan")
        return float(np.polyfit(self.n[keep], np.log(vals[keep]), 1)[0])

    def violations(self):
        bad = (self.d_c > self.bound) | (self.d_h > self.bound)
        if self.d_m is not None:
            bad |= self.d_m > self.measure_bound
        return [int(v) for v in self.n[bad]]

    def rows(self):
        for i, n in enumerate(self.n):
            dm = float(self.d_m[i]) if self.d_m is not None else float("nan")
            yield (int(n), float(self.d_c[i]), float(self.d_h[i]), dm, float(self.bound[i]))


def _skeleton_measure(sys, depth, d):
    from .thermo import conformal_weights
    mu = conformal_weights(sys, d, depth)
    return mu.intervals, mu.weights


def scenery_comparison(sys, x_prefix, n_max, depth, grid=1025, d=None, tol=1e-13):
    """Distances between the scenery pieces C_{n,x} and the limit sets of x_0..x_n.

    The scenery side comes from :func:`scenery_sequence` (hierarchy folds in
    extended precision) and :func:`scenery_conjugacy`; the limit side from
    the padded limit renormalised map.  Bounds: k_1 β^{nγ} for d_C and d_H,
    k_3 β^{nγ} for d_M (conformal-weight proxy).
    """
    from .conjugacy import k3
    from .metrics import d_H, transported_measure, d_M
    from .thermo import bowen_root
    x = as_word(x_prefix)
    seq = scenery_sequence(sys, x, n_max, depth)
    if d is None:
        d = bowen_root(sys, min(14, sys.depth_cap)).d
    base_iv, base_mass = _skeleton_measure(sys, depth, d)
    rows = {"d_c": [], "d_h": [], "d_m": [], "bound": [], "mbound": [], "route_gap": []}
    for n in range(n_max + 1):
        y = x[: n + 1]
        actual = scenery_conjugacy(sys, x, n, grid)
        limit = limit_grid(sys, y, tol, grid)
        lim_set = limit_set(sys, y, depth, tol).as_array()
        act_set = seq[n].as_array()
        # the hierarchy skeleton and the conjugacy image of C's skeleton must coincide
        via_map = renormalized_jet(sys, y, base_iv.ravel())[0].reshape(-1, 2)
        rows["route_gap"].append(float(np.max(np.abs(via_map - act_set))))
        rows["d_c"].append(d_C(actual, limit).value)
        rows["d_h"].append(d_H(act_set, lim_set).value)
        mu_a = transported_measure(base_iv, base_mass, act_set, d)
        mu_l = transported_measure(base_iv, base_mass, lim_set, d)
        rows["d_m"].append(d_M(mu_a, mu_l).value)
        b = conjugacy_bound(sys, n)
        rows["bound"].append(b)
        rows["mbound"].append(0.0 if sys.K == 0 else k3(sys.K) * float(sys.beta) ** (n * float(sys.gamma)))
    y0 = x[:1]
    mesh = mesh_check(lambda p: d_C(scenery_conjugacy(sys, x, 0, p), limit_grid(sys, y0, tol, p)).value,
                      grid)
    return ConvergenceReport(f"scenery {word_str(x)}", np.arange(n_max + 1), np.array(rows["d_c"]),
                             np.array(rows["d_h"]), np.array(rows["d_m"]), np.array(rows["bound"]),
                             np.array(rows["mbound"]),
                             {"route_gap": max(rows["route_gap"]), "d": d, "depth": depth,
                              "mesh_check": mesh})


def conjugacy_convergence(sys, y, n_values, lag=6, grid=1025):
    """d_C(Φ_n, Φ_{n+lag}) for a dual word y, against the certified bound k_1 β^{nγ}."""
    from .conjugacy import k1
    y = as_word(y)
    n_values = np.asarray(list(n_values))
    if n_values.max() + lag > len(y):
        raise ParameterError(f"dual word of length {len(y)} too short for n + lag = {n_values.max() + lag}")
    dc, env = [], []
    for n in n_values:
        a, b = phi_n(sys, y, int(n), grid), phi_n(sys, y, int(n) + lag, grid)
        dc.append(d_C(a, b).value)
        env.append(max(np.max(np.abs(np.log(a.dvalues))), np.max(np.abs(np.log(b.dvalues)))))
    bound = np.array([conjugacy_bound(sys, int(n)) for n in n_values])
    dc = np.array(dc)
    n0 = int(n_values[0])
    mesh = mesh_check(lambda p: d_C(phi_n(sys, y, n0, p), phi_n(sys, y, n0 + lag, p)).value, grid)
    return ConvergenceReport(f"conjugacy {word_str(y)}", n_values, dc, np.zeros_like(dc), None, bound,
                             None, {"log_derivative_envelope": max(env), "K": sys.K, "lag": lag,
                                    "mesh_check": mesh,
                                    "k1": k1(sys.K) if sys.K else 0.0})
