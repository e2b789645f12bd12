"""Sampling from Gibbs cylinder laws and genericity diagnostics for the scenery processes."""
import math
from dataclasses import dataclass, field

import numpy as np

from .conjugacy import batch_renormalized, k1
from .errors import ParameterError
from .hierarchy import level_arrays
from .metrics import d_H
from .rng import GENERATOR_NAME, make_rng
from .scaling import build_scaling_table

# Renormalised maps of words this long agree with their limit to double precision
# for every built-in family (certified bound below 1e-15).
WINDOW = 48
BATCHES = 50
# summation noise allowed on top of the statistical and certified bands
ROUNDING = 1e-13


@dataclass
class OrbitSample:
    """Symbols x_{-origin} ... x_{len-origin-1}; ``origin`` marks x_0.

    The symbols before ``origin`` are the sampled past used by limit-set
    comparisons; forward quantities start at x_0.
    """

    seed: int
    symbols: np.ndarray
    origin: int
    law: dict
    generator: str = GENERATOR_NAME

    @property
    def future(self):
        return self.symbols[self.origin:]


def sample_orbit(gibbs, length, seed, past=WINDOW):
    """Stationary sequence from the order-(depth-1) Markov chain of a cylinder law.

    The first ``depth`` symbols are drawn from the law itself; afterwards
    each symbol is drawn from weight(v s) / weight(v) for the preceding
    depth-1 symbols v.  ``past`` extra symbols are drawn before x_0.
    """
    k = gibbs.depth
    if k < 2:
        raise ParameterError("sampling needs a cylinder law of depth >= 2")
    if length < 1:
        raise ParameterError("orbit length must be positive")
    w = gibbs.weights / gibbs.total
    pairs = w.reshape(-1, 2)
    cond = pairs[:, 1] / pairs.sum(axis=1)
    if not np.all(np.isfinite(cond)):
        raise ParameterError("cylinder law has a zero-probability branch")
    total = length + past
    rng = make_rng(seed)
    first = int(rng.choice(w.size, p=w))
    u = rng.random(max(total - k, 0))
    out = np.empty(max(total, k), dtype=np.int8)
    for i in range(k):
        out[i] = (first >> (k - 1 - i)) & 1
    mask = 2 ** (k - 1) - 1
    state = first & mask
    for i in range(k, total):
        s = 1 if u[i - k] < cond[state] else 0
        out[i] = s
        state = ((state << 1) | s) & mask
    law = {"kind": gibbs.kind, "depth": k, "d": gibbs.d}
    return OrbitSample(seed, out[:total], past, law)


def _windows(symbols, ends, width):
    """Rows symbols[end-width+1 .. end], padded on the left with -1."""
    ends = np.asarray(ends)
    idx = ends[:, None] + np.arange(-width + 1, 1)[None, :]
    return np.where(idx >= 0, symbols[np.clip(idx, 0, None)], -1)


def batch_means_sigma(values, batches=BATCHES):
    """Standard error of the mean from non-overlapping batch means."""
    values = np.asarray(values, dtype=float)
    size = values.size // batches
    if size < 1:
        raise ParameterError("too few values for batch means")
    means = values[: size * batches].reshape(batches, size).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(batches))


def _ratio_points(sys):
    return np.array([float(sys.phi0(1.0)), float(sys.phi1(0.0))])


def ratio_process(sys, symbols, ends, width=WINDOW):
    """(l, g, r) of the cylinders spelled by the windows ending at each index."""
    pts = batch_renormalized(sys, _windows(symbols, ends, width), _ratio_points(sys))
    return np.stack([pts[:, 0], pts[:, 1] - pts[:, 0], 1 - pts[:, 1]], axis=1)


RATIO_FUNCTIONALS = {
    "l": lambda R: R[:, 0],
    "g": lambda R: R[:, 1],
    "r": lambda R: R[:, 2],
    "log_g": lambda R: np.log(R[:, 1]),
}


@dataclass
class BirkhoffReport:
    functional: str
    steps: int
    time_average: float
    ensemble_average: float
    difference: float
    sigma: float
    bias_bound: float
    band: float
    seed: int

    @property
    def ok(self):
        return abs(self.difference) <= self.band + ROUNDING


def _functional_slack(name, entries, log_slack):
    """Bound on |f(R) - f(R')| when log R' is within log_slack of log R."""
    if name == "log_g":
        return log_slack
    col = {"l": 0, "g": 1, "r": 2}[name]
    return float(np.max(entries[:, col])) * math.expm1(log_slack)


def birkhoff_ratio_test(sys, orbit, n_max, f="l", gibbs=None, table=None, table_depth=None,
                        est_depth=24):
    """Time average of f(R_{n,x}) for n < n_max against the stationary ensemble.

    The ensemble side weighs the scaling table by the orbit's cylinder law.
    ``band`` is 3 batch-means sigma plus the table's certified bias.
    """
    if f not in RATIO_FUNCTIONALS:
        raise ParameterError(f"unknown ratio functional {f!r}; choose from {sorted(RATIO_FUNCTIONALS)}")
    seq = orbit.future
    if len(seq) < n_max:
        raise ParameterError(f"orbit has {len(seq)} symbols, need {n_max}")
    fn = RATIO_FUNCTIONALS[f]
    R = ratio_process(sys, seq, np.arange(n_max))
    values = fn(R)
    if table is None:
        m = table_depth or min(orbit.law["depth"], 12)
        table = build_scaling_table(sys, m, max(est_depth, m))
    if gibbs is None:
        raise ParameterError("the ensemble side needs the orbit's cylinder law")
    marg = gibbs.marginal(table.m)
    marg = marg / marg.sum()
    ensemble = float(marg @ fn(table.entries))
    # orbit windows are truncated at WINDOW symbols: same log slack form as the table
    trunc = 2 * table.K * table.beta ** (WINDOW * table.gamma)
    bias = _functional_slack(f, table.entries, table.log_slack) + \
        _functional_slack(f, table.entries, trunc)
    sigma = batch_means_sigma(values)
    t = float(values.mean())
    return BirkhoffReport(f, n_max, t, ensemble, t - ensemble, sigma, bias, 3 * sigma + bias,
                          orbit.seed)


# set-valued functionals ------------------------------------------------------

def _gaps(skel):
    """Gap (left, right) arrays of skeletons with shape (steps, pieces, 2)."""
    return skel[:, :-1, 1], skel[:, 1:, 0]


def gap_moment(k):
    """Integral of x^k dist(x, A) over [0,1]; 1/(k+1)-Lipschitz in Hausdorff distance."""
    def g(skel):
        a, b = _gaps(skel)
        h, m = b - a, 0.5 * (a + b)
        if k == 0:
            return np.sum(h * h / 4, axis=1)
        if k == 1:
            return np.sum(m * h * h / 4, axis=1)
        raise ParameterError("gap moments are built in for k = 0, 1")
    return g


def first_gap_left(skel):
    """Left end of the first-level gap; moves by at most the sup-distance of the maps."""
    return skel[:, skel.shape[1] // 2 - 1, 1]


def hausdorff_to(reference):
    ref = np.asarray(reference, dtype=float)

    def g(skel):
        return np.array([d_H(s, ref).value for s in skel])
    return g


@dataclass
class SetFunctional:
    name: str
    fn: object
    lipschitz: float
    metric: str


def builtin_set_functionals(sys, depth):
    left, length = level_arrays(sys, depth)
    ref = np.stack([left, left + length], axis=1)
    return {
        "first_gap": SetFunctional("first_gap", first_gap_left, 1.0, "C1"),
        "gap_moment0": SetFunctional("gap_moment0", gap_moment(0), 1.0, "Hausdorff"),
        "gap_moment1": SetFunctional("gap_moment1", gap_moment(1), 0.5, "Hausdorff"),
        "hausdorff_self": SetFunctional("hausdorff_self", hausdorff_to(ref), 1.0, "Hausdorff"),
    }


def skeleton_process(sys, symbols, ends, depth, width=WINDOW):
    """Level-``depth`` skeletons of the rescaled copies spelled by each window."""
    left, length = level_arrays(sys, depth)
    pts = np.stack([left, left + length], axis=1).ravel()
    vals = batch_renormalized(sys, _windows(symbols, ends, width), pts)
    return vals.reshape(len(ends), -1, 2)


@dataclass
class SceneryReport:
    functional: str
    steps: int
    depth: int
    actual: np.ndarray
    limit: np.ndarray
    running_actual: np.ndarray
    running_limit: np.ndarray
    average: float
    sigma: float
    band: float
    difference: float
    bound: float
    lipschitz: float
    ensemble_average: float = None
    ensemble_bias: float = None
    seed: int = None
    extra: dict = field(default_factory=dict)

    @property
    def ok(self):
        return abs(self.difference) <= self.bound + ROUNDING

    @property
    def ensemble_ok(self):
        if self.ensemble_average is None:
            return None
        return abs(self.average - self.ensemble_average) <= self.band + self.ensemble_bias + ROUNDING

    def rows(self):
        for n in range(self.steps):
            yield (n, float(self.actual[n]), float(self.limit[n]), float(self.running_actual[n]),
                   float(self.running_limit[n]), self.band)


def scenery_process_sim(sys, orbit, steps, depth, g="first_gap", gibbs=None, ensemble_depth=12):
    """Time averages of a set functional along C_{n,x} and along C(σ^n x̲).

    C_{n,x} is built from x_0..x_n only; the limit sets also use the sampled
    past before x_0.  ``bound`` is Lip(g)/N sum_n k_1 β^{nγ} plus the
    window-truncation slack.  With ``gibbs`` the ensemble average over
    level-``ensemble_depth`` pasts is reported too.
    """
    funcs = builtin_set_functionals(sys, depth)
    if g not in funcs:
        raise ParameterError(f"unknown set functional {g!r}; choose from {sorted(funcs)}")
    func = funcs[g]
    if len(orbit.future) < steps:
        raise ParameterError(f"orbit has {len(orbit.future)} forward symbols, need {steps}")
    if orbit.origin < WINDOW:
        raise ParameterError(f"orbit needs at least {WINDOW} past symbols")
    sym = orbit.symbols
    ends = orbit.origin + np.arange(steps)
    # actual scenery: only x_0..x_n, so mask out the past
    fwd = np.where(np.arange(sym.size) >= orbit.origin, sym, -1)
    actual = func.fn(skeleton_process(sys, fwd, ends, depth))
    limit = func.fn(skeleton_process(sys, sym, ends, depth))
    counts = np.arange(1, steps + 1)
    run_a, run_l = np.cumsum(actual) / counts, np.cumsum(limit) / counts
    if sys.K == 0:
        per_step = np.zeros(steps)
        trunc = 0.0
    else:
        b = float(sys.beta) ** float(sys.gamma)
        per_step = k1(sys.K) * b ** np.arange(steps)
        trunc = 2 * k1(sys.K) * b**WINDOW
    bound = func.lipschitz * (float(per_step.sum()) / steps + trunc)
    sigma = batch_means_sigma(limit) if steps >= BATCHES else 0.0
    rep = SceneryReport(g, steps, depth, actual, limit, run_a, run_l, float(limit.mean()), sigma,
                        3 * sigma, float(run_a[-1] - run_l[-1]), bound, func.lipschitz,
                        seed=orbit.seed)
    if gibbs is not None:
        rep.ensemble_average, rep.ensemble_bias = ensemble_set_average(
            sys, gibbs, func, depth, ensemble_depth)
    return rep


def ensemble_set_average(sys, gibbs, func, depth, m):
    """Stationary mean of a set functional over level-m pasts, with its bias bound.

    Limit sets of pasts sharing the last m symbols are within 2 k_1 β^{mγ}
    in C1, which bounds the bias of fixing the unseen earlier symbols.
    """
    m = min(m, gibbs.depth)
    marg = gibbs.marginal(m)
    marg = marg / marg.sum()
    words = ((np.arange(2**m)[:, None] >> np.arange(m - 1, -1, -1)[None, :]) & 1).astype(np.int8)
    left, length = level_arrays(sys, depth)
    pts = np.stack([left, left + length], axis=1).ravel()
    skel = batch_renormalized(sys, words, pts).reshape(2**m, -1, 2)
    avg = float(marg @ func.fn(skel))
    if sys.K == 0:
        return avg, 0.0
    return avg, func.lipschitz * 2 * k1(sys.K) * float(sys.beta) ** (m * float(sys.gamma))


def cylinder_frequencies(orbit, k):
    """Empirical frequencies of the length-k windows of the forward orbit, and batch sigmas."""
    seq = orbit.future.astype(np.int64)
    n = seq.size - k + 1
    idx = np.zeros(n, dtype=np.int64)
    for j in range(k):
        idx = 2 * idx + seq[j:j + n]
    onehot = np.zeros((n, 2**k))
    onehot[np.arange(n), idx] = 1.0
    freq = onehot.mean(axis=0)
    sig = np.array([batch_means_sigma(onehot[:, i]) for i in range(2**k)])
    return freq, sig
