"""The C1, Hausdorff and binary-interval measure distances."""
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ParameterError

DEFAULT_MEASURE_TERMS = 40


@dataclass(frozen=True)
class MetricValue:
    kind: str
    value: float
    truncation_err: float = 0.0
    grid_lower_bound: bool = False

    def __float__(self):
        return float(self.value)


def _resample(f, grid):
    vals = PchipInterpolator(f.grid, f.values)(grid)
    dvals = PchipInterpolator(f.grid, f.dvalues)(grid)
    lin = np.interp(grid, f.grid, f.values)
    dlin = np.interp(grid, f.grid, f.dvalues)
    err = float(np.max(np.abs(vals - lin)) + np.max(np.abs(dvals - dlin)))
    return vals, dvals, err


def d_C(f, g, resample=False):
    """max|f - g| + max|Df - Dg| over the common grid (a lower bound of the sup)."""
    err = 0.0
    if f.grid.shape == g.grid.shape and np.array_equal(f.grid, g.grid):
        gv, gd = g.values, g.dvalues
    elif resample:
        gv, gd, err = _resample(g, f.grid)
    else:
        raise ParameterError("grids differ; pass resample=True to interpolate")
    value = float(np.max(np.abs(f.values - gv)) + np.max(np.abs(f.dvalues - gd)))
    return MetricValue("C1", value, err, True)


def mesh_check(distance_at, points, rel=0.01):
    """Recompute a grid sup-distance on the doubled mesh.

    ``distance_at(points)`` returns the distance sampled on a grid of that
    many points.  Returns (coarse, fine, ok) where ok means the value moved
    by less than ``rel`` (relative) under refinement.
    """
    coarse = float(distance_at(points))
    fine = float(distance_at(2 * points - 1))
    scale = max(abs(coarse), abs(fine))
    return coarse, fine, scale == 0 or abs(fine - coarse) <= rel * scale


def _as_intervals(A):
    arr = A.as_array() if hasattr(A, "as_array") else np.asarray(A, dtype=float)
    arr = np.atleast_2d(arr)
    if arr.size == 0:
        raise ParameterError("empty set")
    return arr[np.argsort(arr[:, 0])]


def distance_to_union(points, arr):
    """Distance from each point to a sorted union of disjoint closed intervals."""
    points = np.asarray(points, dtype=float)
    idx = np.searchsorted(arr[:, 0], points, side="right") - 1
    dist = np.full(points.shape, np.inf)
    has_left = idx >= 0
    i = np.clip(idx, 0, len(arr) - 1)
    dist = np.where(has_left, np.maximum(points - arr[i, 1], 0.0), dist)
    j = np.clip(idx + 1, 0, len(arr) - 1)
    has_right = idx + 1 < len(arr)
    dist = np.where(has_right, np.minimum(dist, arr[j, 0] - points), dist)
    return dist


def _directed(A, B):
    """sup over b in B of dist(b, A)."""
    cands = [B.ravel()]
    mids = (A[:-1, 1] + A[1:, 0]) / 2
    if mids.size:
        inside = distance_to_union(mids, B) == 0
        cands.append(mids[inside])
    pts = np.concatenate(cands)
    return float(np.max(distance_to_union(pts, A)))


def d_H(A, B):
    """Exact Hausdorff distance between two finite unions of closed intervals.

    ``truncation_err`` is half the longest interval of either skeleton, which
    bounds the distance from each skeleton to the Cantor set it approximates.
    """
    a, b = _as_intervals(A), _as_intervals(B)
    value = max(_directed(a, b), _directed(b, a))
    slack = max(np.max(a[:, 1] - a[:, 0]), np.max(b[:, 1] - b[:, 0])) / 2
    return MetricValue("Hausdorff", value, float(slack))


@dataclass
class IntervalMeasure:
    """Masses spread uniformly over the intervals of a skeleton."""

    intervals: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        self.intervals = _as_intervals(self.intervals)
        self.masses = np.asarray(self.masses, dtype=float)
        if np.any(self.masses < 0):
            raise ParameterError("negative mass")

    @property
    def total(self):
        return float(self.masses.sum())

    def cdf(self, x):
        x = np.asarray(x, dtype=float)[:, None]
        a, b = self.intervals[:, 0], self.intervals[:, 1]
        width = b - a
        frac = np.where(width > 0, np.clip((x - a) / np.where(width > 0, width, 1), 0, 1),
                        (x >= a).astype(float))
        return frac @ self.masses

    def mass(self, lo, hi):
        return self.cdf(hi) - self.cdf(lo)


def dyadic_enumeration(count=DEFAULT_MEASURE_TERMS):
    """E_1 = [0,1], then level k intervals [j 2^-k, (j+1) 2^-k] in increasing j."""
    out = [(0.0, 1.0)]
    k = 1
    while len(out) < count:
        step = 2.0**-k
        out.extend((j * step, (j + 1) * step) for j in range(2**k))
        k += 1
    return np.array(out[:count])


def d_M(mu_a, mu_b, terms=DEFAULT_MEASURE_TERMS):
    """sum_n |mu_a(E_n) - mu_b(E_n)| 2^-n over the first ``terms`` binary intervals."""
    E = dyadic_enumeration(terms)
    diff = np.abs(mu_a.mass(E[:, 0], E[:, 1]) - mu_b.mass(E[:, 0], E[:, 1]))
    weights = 2.0 ** -np.arange(1, terms + 1)
    value = float(diff @ weights)
    return MetricValue("Measure", value, (mu_a.total + mu_b.total) * 2.0**-terms)


def measure_bound(x):
    """Upper bound 5x + 4x^2 for the measure distance at C1 distance x."""
    return 5 * x + 4 * x * x


def transported_measure(base_intervals, base_masses, image_intervals, d):
    """Conformal transport: each mass scales by (|f(J)| / |J|)^d."""
    base = np.asarray(base_intervals, dtype=float)
    image = np.asarray(image_intervals, dtype=float)
    ratio = (image[:, 1] - image[:, 0]) / (base[:, 1] - base[:, 0])
    return IntervalMeasure(image, np.asarray(base_masses) * ratio**d)
