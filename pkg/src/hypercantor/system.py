"""Contraction pairs, hyperbolicity certificates and the distortion check."""
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .errors import InvariantViolation, ParameterError, ValidationError
from .maps import AffineMap, PolynomialMap, conjugate_map, frac, quadratic_bump
from .rng import make_rng
from .symbolic import DEFAULT_DEPTH_CAP, check_depth

MACHINE_EPS = Fraction(1, 2**52)
DEFAULT_PRECISION = 128
FAMILIES = ("linear", "middle-third", "perturbed", "conjugated", "polynomial")


def distortion_constant(c, beta, gamma):
    bg = float(beta) ** float(gamma)
    return float(c) * bg / (1.0 - bg)


@dataclass(frozen=True, eq=False)
class ContractionSystem:
    """Two increasing contractions phi0, phi1 of [0,1] with certified constants.

    ``alpha``/``beta`` bound the first derivatives, ``gamma``/``c`` are the
    Hölder exponent and constant of log of the first derivative, and ``K`` is
    the bounded-distortion constant derived from them.  The expanding map S is
    available through :meth:`expand`, which applies the inverse branch.
    """

    phi0: object
    phi1: object
    alpha: Fraction
    beta: Fraction
    gamma: Fraction
    c: float
    family: str
    params: tuple
    precision_bits: int = DEFAULT_PRECISION
    certified: bool = True
    depth_cap: int = DEFAULT_DEPTH_CAP
    base: object = None
    ctx: object = field(default=None, repr=False)

    def __post_init__(self):
        if self.ctx is None:
            ctx = mpmath.MPContext()
            ctx.prec = int(self.precision_bits)
            object.__setattr__(self, "ctx", ctx)

    @property
    def K(self):
        return distortion_constant(self.c, self.beta, self.gamma)

    @property
    def affine(self):
        return self.c == 0

    def branch(self, s):
        return self.phi1 if s else self.phi0

    def mpf(self, v):
        if isinstance(v, Fraction):
            return self.ctx.mpf(v.numerator) / v.denominator
        return self.ctx.mpf(v)

    def expand(self, x):
        """S(x): apply the inverse of the branch whose image contains x."""
        mid = (self.phi0(1.0) + self.phi1(0.0)) / 2
        x = np.asarray(x, dtype=float)
        # each inverse is only defined on its own branch image; the other side is discarded
        with np.errstate(invalid="ignore"):
            return np.where(x <= mid, self.phi0.inverse(x), self.phi1.inverse(x))

    def config(self):
        out = {"family": self.family, "precision_bits": int(self.precision_bits)}
        if self.family == "polynomial":
            out["phi0"] = [str(c) for c in self.phi0.coeffs]
            out["phi1"] = [str(c) for c in self.phi1.coeffs]
        else:
            out["params"] = [float(p) for p in self.params]
        if self.base is not None:
            base = self.base.config()
            base.pop("precision_bits", None)
            out["base"] = base
        return out

    def constants(self):
        return {
            "alpha": float(self.alpha),
            "beta": float(self.beta),
            "gamma": float(self.gamma),
            "c": float(self.c),
            "K": self.K,
            "certified": self.certified,
        }


def _linear(l, r, **kw):
    l, r = frac(l), frac(r)
    if not (l > 0 and r > 0 and l + r < 1):
        raise ParameterError(f"linear({l}, {r}) needs 0<l, 0<r, l+r<1")
    phi0 = AffineMap(l, 0)
    phi1 = AffineMap(r, 1 - r)
    return ContractionSystem(
        phi0, phi1,
        alpha=min(l, r) - MACHINE_EPS, beta=max(l, r) + MACHINE_EPS,
        gamma=Fraction(1), c=0.0, family="linear", params=(l, r), **kw)


def _perturbed(a, b, **kw):
    a, b = frac(a), frac(b)
    third = Fraction(1, 3)
    if not (abs(a) < third and abs(b) < third):
        raise ParameterError(f"perturbed({a}, {b}) needs |a|,|b| < 1/3")
    phi0 = PolynomialMap([0, third + a, -a])
    phi1 = PolynomialMap([2 * third, third + b, -b])
    top = max(abs(a), abs(b))
    alpha, beta = third - top, third + top
    if top == 0:
        alpha, beta = alpha - MACHINE_EPS, beta + MACHINE_EPS
    # |D log Dphi| = 2|a| / Dphi <= 2|a| / alpha
    c = float(2 * top / alpha)
    return ContractionSystem(
        phi0, phi1, alpha=alpha, beta=beta, gamma=Fraction(1), c=c,
        family="perturbed", params=(a, b), **kw)


def _conjugated(base, eps, **kw):
    e = frac(eps)
    if not abs(e) < 1:
        raise ParameterError(f"conjugation parameter {eps} needs |eps| < 1")
    if base.gamma != 1:
        raise ParameterError("conjugated family requires a Lipschitz base")
    psi = quadratic_bump(e)
    phi0 = conjugate_map(psi, base.phi0)
    phi1 = conjugate_map(psi, base.phi1)
    lo, hi = 1 - abs(e), 1 + abs(e)
    alpha = base.alpha * lo / hi
    beta = base.beta * hi / lo
    # log Dphi_hat = log DPsi(phi(u)) + log Dphi(u) - log DPsi(u), u = Psi^{-1}(x);
    # |D log DPsi| <= 2|e|/(1-|e|) and |D Psi^{-1}| <= 1/(1-|e|)
    lip_psi = 2 * abs(e) / lo
    c = (float(lip_psi) * float(base.beta) + base.c + float(lip_psi)) / float(lo)
    if beta >= 1:
        raise ValidationError(
            f"conjugated system has derivative bound {float(beta):.4f} >= 1; "
            "not strictly contracting at the certified bounds")
    return ContractionSystem(
        phi0, phi1, alpha=alpha, beta=beta, gamma=Fraction(1), c=c,
        family="conjugated", params=(e,), base=base, **kw)


def _empirical_bounds(phi0, phi1, grid_size=4097):
    x = np.linspace(0.0, 1.0, grid_size)
    d = np.concatenate([phi0.deriv(x, 1), phi1.deriv(x, 1)])
    d2 = np.concatenate([phi0.deriv(x, 2), phi1.deriv(x, 2)])
    margin = 1e-9
    alpha = float(d.min()) - margin
    beta = float(d.max()) + margin
    c = float(np.max(np.abs(d2 / d))) + margin
    return frac(alpha), frac(beta), c


def _polynomial(coeffs0, coeffs1, **kw):
    phi0 = PolynomialMap(coeffs0)
    phi1 = PolynomialMap(coeffs1)
    alpha, beta, c = _empirical_bounds(phi0, phi1)
    if not (0 < alpha and beta < 1):
        raise ValidationError(
            f"polynomial branches have derivative range [{float(alpha)}, {float(beta)}]")
    return ContractionSystem(
        phi0, phi1, alpha=alpha, beta=beta, gamma=Fraction(1), c=c,
        family="polynomial", params=(), certified=False, **kw)


def make_builtin(family, params=(), precision_bits=DEFAULT_PRECISION,
                 depth_cap=DEFAULT_DEPTH_CAP, base=None, phi0=None, phi1=None,
                 grid_size=256):
    """Build and validate one of the built-in families.

    ``family`` is one of linear, middle-third, perturbed, conjugated (which
    needs ``base``) or polynomial (which needs ``phi0``/``phi1`` coefficient
    lists in ascending powers).
    """
    kw = {"precision_bits": precision_bits, "depth_cap": depth_cap}
    params = tuple(params or ())
    if family == "middle-third":
        if params:
            raise ParameterError("middle-third takes no parameters")
        sys = _linear(Fraction(1, 3), Fraction(1, 3), **kw)
        sys = _relabel(sys, "middle-third", ())
    elif family == "linear":
        _arity(family, params, 2)
        sys = _linear(*params, **kw)
    elif family == "perturbed":
        _arity(family, params, 2)
        sys = _perturbed(*params, **kw)
    elif family == "conjugated":
        _arity(family, params, 1)
        if base is None:
            raise ParameterError("conjugated family needs a base system")
        if isinstance(base, dict):
            base = make_builtin(precision_bits=precision_bits, depth_cap=depth_cap, **base)
        sys = _conjugated(base, params[0], **kw)
    elif family == "polynomial":
        if phi0 is None or phi1 is None:
            raise ParameterError("polynomial family needs phi0 and phi1 coefficients")
        sys = _polynomial(phi0, phi1, **kw)
    else:
        raise ParameterError(f"unknown family {family!r}; expected one of {FAMILIES}")
    report = validate(sys, grid_size)
    if not report.ok:
        raise ValidationError("system failed validation: " + report.summary(), report)
    return sys


def _arity(family, params, n):
    if len(params) != n:
        raise ParameterError(f"{family} takes {n} parameters, got {len(params)}")


def _relabel(sys, family, params):
    return ContractionSystem(
        sys.phi0, sys.phi1, sys.alpha, sys.beta, sys.gamma, sys.c, family, params,
        sys.precision_bits, sys.certified, sys.depth_cap, sys.base)


def from_maps(phi0, phi1, alpha, beta, c, gamma=1, family="custom", **kw):
    """Wrap arbitrary map oracles without validating them."""
    return ContractionSystem(phi0, phi1, frac(alpha), frac(beta), frac(gamma),
                             float(c), family, (), certified=False, **kw)


@dataclass
class Violation:
    condition: str
    detail: str
    point: object = None


@dataclass
class ValidationReport:
    ok: bool
    violations: list
    grid_size: int
    beta_tilde: float
    c_tilde: float
    certified: bool
    derivative_range: tuple

    def summary(self):
        if self.ok:
            return "all checks passed"
        return "; ".join(f"{v.condition}: {v.detail}" for v in self.violations)


def _hyperbolicity_estimate(sys, depth=12, grid_points=65):
    """Sup of D phi_w over words of each length up to ``depth``, on a grid."""
    x = np.linspace(0.0, 1.0, grid_points)
    vals = x[None, :]
    ders = np.ones_like(vals)
    sups = []
    for _ in range(depth):
        new_vals, new_ders = [], []
        for s in (0, 1):
            f = sys.branch(s)
            new_vals.append(f(vals))
            new_ders.append(f.deriv(vals, 1) * ders)
        vals = np.concatenate(new_vals)
        ders = np.concatenate(new_ders)
        sups.append(float(ders.max()))
    sups = np.array(sups)
    half = depth // 2
    beta_tilde = (sups[-1] / sups[half - 1]) ** (1.0 / (depth - half))
    c_tilde = float(np.max(sups / beta_tilde ** np.arange(1, depth + 1)))
    return beta_tilde, c_tilde


def validate(sys, grid_size=256, tol=1e-12):
    if grid_size < 64:
        raise ParameterError("validation grid needs at least 64 points")
    violations = []
    x = np.linspace(0.0, 1.0, grid_size)
    f0, f1 = sys.phi0, sys.phi1
    z, o = sys.mpf(0), sys.mpf(1)
    if abs(f0(z)) > tol:
        violations.append(Violation("endpoint", f"phi0(0) = {float(f0(z))}", 0.0))
    if abs(f1(o) - 1) > tol:
        violations.append(Violation("endpoint", f"phi1(1) = {float(f1(o))}", 1.0))
    if not f0(o) < f1(z):
        violations.append(Violation(
            "overlap", f"phi0(1) = {float(f0(o))} is not below phi1(0) = {float(f1(z))}",
            float(f0(o))))
    lo, hi = math.inf, -math.inf
    for name, f in (("phi0", f0), ("phi1", f1)):
        v = f(x)
        dv = f.deriv(x, 1)
        bad = np.nonzero(np.diff(v) <= 0)[0]
        if bad.size:
            violations.append(Violation("monotone", f"{name} not increasing", float(x[bad[0]])))
        if v.min() < -tol or v.max() > 1 + tol:
            i = int(np.argmax(np.maximum(-v, v - 1)))
            violations.append(Violation("range", f"{name} leaves [0,1]", float(x[i])))
        for i in np.nonzero((dv <= 0) | (dv >= 1))[0][:1]:
            violations.append(Violation("contraction", f"D{name} = {dv[i]}", float(x[i])))
        for i in np.nonzero(dv < float(sys.alpha) - tol)[0][:1]:
            violations.append(Violation("alpha", f"D{name} = {dv[i]} < alpha", float(x[i])))
        for i in np.nonzero(dv > float(sys.beta) + tol)[0][:1]:
            violations.append(Violation("beta", f"D{name} = {dv[i]} > beta", float(x[i])))
        lo, hi = min(lo, float(dv.min())), max(hi, float(dv.max()))
    if not (0 < sys.alpha and sys.beta < 1):
        violations.append(Violation("bounds", f"alpha={float(sys.alpha)}, beta={float(sys.beta)}"))
    beta_tilde, c_tilde = _hyperbolicity_estimate(sys)
    if not beta_tilde < 1:
        violations.append(Violation("hyperbolicity", f"estimated rate {beta_tilde} >= 1"))
    return ValidationReport(not violations, violations, grid_size, beta_tilde, c_tilde,
                            sys.certified, (lo, hi))


@dataclass
class DistortionReport:
    n: int
    m: int
    samples: int
    seed: int
    max_log_ratio: float
    bound: float
    violations: list

    @property
    def ok(self):
        return not self.violations


def _log_expansion(sys, w, t, m):
    """log DS^m at the point phi_w(t) of I_w, via forward images of t."""
    ctx = sys.ctx
    pts = [None] * (len(w) + 1)
    pts[len(w)] = t
    for k in range(len(w) - 1, 0, -1):
        pts[k] = sys.branch(w[k])(pts[k + 1])
    total = ctx.mpf(0)
    for j in range(m):
        total -= ctx.log(sys.branch(w[j]).deriv(pts[j + 1], 1))
    return total


def check_distortion(sys, n, m, samples=200, seed=0, raise_on_violation=True):
    """Sample DS^m(x)/DS^m(y) for x, y in one cylinder of n+m+1 symbols.

    Points are drawn as phi_w(t) with t uniform on [0,1].
    """
    check_depth(n + m + 1, sys.depth_cap)
    rng = make_rng(seed)
    bound = sys.K * float(sys.beta) ** (n * float(sys.gamma))
    worst = 0.0
    violations = []
    for _ in range(samples):
        w = tuple(int(s) for s in rng.integers(0, 2, size=n + m + 1))
        t1, t2 = (sys.mpf(float(u)) for u in rng.random(2))
        lr = float(_log_expansion(sys, w, t1, m) - _log_expansion(sys, w, t2, m))
        worst = max(worst, abs(lr))
        if abs(lr) > bound + 1e-30:
            violations.append((w, float(t1), float(t2), lr))
    report = DistortionReport(n, m, samples, seed, worst, bound, violations)
    if violations and raise_on_violation:
        raise InvariantViolation(
            f"distortion {violations[0][3]} exceeds bound {bound}", violations[0])
    return report
