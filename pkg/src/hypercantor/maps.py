"""Smooth increasing maps of [0,1] with derivative, increment and inverse oracles.

Every oracle accepts either an mpmath ``mpf`` (evaluated in that number's
context, so precision follows the caller) or a float / numpy array (evaluated
in double precision, vectorised).  Increments ``f(x + dx) - f(x)`` are formed
without subtracting nearby values, which keeps lengths of deep cylinders
accurate to full relative precision.
"""
from fractions import Fraction

import numpy as np
from mpmath.ctx_mp_python import _mpf as _mpf_type


def is_mp(x):
    return isinstance(x, _mpf_type)


def frac(v):
    """Exact rational from an int, Fraction, float or decimal string."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        return Fraction(repr(v))
    return Fraction(v)


def const(c, like):
    """Rational constant ``c`` in the arithmetic of ``like``."""
    if is_mp(like):
        ctx = like.context
        cache = ctx.__dict__.setdefault("_rational_cache", {})
        key = (c, ctx.prec)
        v = cache.get(key)
        if v is None:
            v = cache[key] = ctx.mpf(c.numerator) / c.denominator
        return v
    return c.numerator / c.denominator


def sqrt(x):
    if is_mp(x):
        return x.context.sqrt(x)
    return np.sqrt(x)


class SmoothMap:
    """Base class; subclasses provide value, deriv, increment, inverse_increment."""

    smoothness = "omega"

    def _consts(self, values, like):
        # rational constants converted once per mpmath context
        if not is_mp(like):
            return self.__dict__.setdefault("_float_consts", tuple(float(v) for v in values))
        ctx = like.context
        cache = self.__dict__.setdefault("_mp_consts", {})
        hit = cache.get(id(ctx))
        if hit is None or hit[0] is not ctx:
            hit = cache[id(ctx)] = (ctx, tuple(const(v, like) for v in values))
        return hit[1]

    def deriv(self, x, k=1):
        raise NotImplementedError

    def increment(self, x, dx):
        raise NotImplementedError

    def inverse_increment(self, x, dy):
        raise NotImplementedError

    def inverse(self, y):
        zero = y * 0
        return zero + self.inverse_increment(zero, y - self(zero))

    def jet(self, x):
        return self(x), self.deriv(x, 1), self.deriv(x, 2)


class AffineMap(SmoothMap):
    def __init__(self, slope, offset):
        self.slope = frac(slope)
        self.offset = frac(offset)

    def __repr__(self):
        return f"AffineMap({self.slope}, {self.offset})"

    def _so(self, x):
        return self._consts((self.slope, self.offset), x)

    def __call__(self, x):
        slope, offset = self._so(x)
        return offset + slope * x

    def deriv(self, x, k=1):
        if k == 0:
            return self(x)
        if k == 1:
            return self._so(x)[0] + 0 * x
        return 0 * x

    def increment(self, x, dx):
        return self._so(dx)[0] * dx

    def inverse_increment(self, x, dy):
        return dy / self._so(dy)[0]


class PolynomialMap(SmoothMap):
    """p(x) = sum coeffs[k] x^k with rational coefficients."""

    def __init__(self, coeffs):
        coeffs = [frac(c) for c in coeffs]
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        self.coeffs = tuple(coeffs)

    def __repr__(self):
        return f"PolynomialMap({[str(c) for c in self.coeffs]})"

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def _taylor(self, x):
        # coefficients of t -> p(x + t), by repeated synthetic division
        c = list(self._consts(self.coeffs, x))
        n = len(c)
        for k in range(n - 1):
            for j in range(n - 2, k - 1, -1):
                c[j] = c[j] + x * c[j + 1]
        return c

    def __call__(self, x):
        cs = self._consts(self.coeffs, x)
        out = cs[-1] + 0 * x
        for a in reversed(cs[:-1]):
            out = out * x + a
        return out

    def deriv(self, x, k=1):
        if k == 0:
            return self(x)
        t = self._taylor(x)
        if k >= len(t):
            return 0 * x
        fact = 1
        for j in range(2, k + 1):
            fact *= j
        return t[k] * fact + 0 * x

    def increment(self, x, dx):
        t = self._taylor(x)
        out = 0 * dx
        for a in reversed(t[1:]):
            out = (out + a) * dx
        return out

    def inverse_increment(self, x, dy):
        t = self._taylor(x)
        if self.degree <= 1:
            return dy / t[1]
        if self.degree == 2:
            b, a = t[1], t[2]
            # root of a*d^2 + b*d - dy nearest 0, written without cancellation
            return 2 * dy / (b + sqrt(b * b + 4 * a * dy))
        d = dy / t[1]
        for _ in range(200):
            step = (self.increment(x, d) - dy) / self.deriv(x + d, 1)
            d = d - step
            if np.all(abs(step) <= 4 * _eps(d) * (abs(d) + _tiny(d))):
                break
        return d


def _eps(x):
    if is_mp(x):
        return x.context.eps
    return np.finfo(float).eps


def _tiny(x):
    if is_mp(x):
        return x.context.mpf(2) ** (-x.context.prec * 2)
    return 1e-300


class InverseMap(SmoothMap):
    """Inverse of a monotone SmoothMap on its image."""

    def __init__(self, f):
        self.f = f

    def __repr__(self):
        return f"InverseMap({self.f!r})"

    def __call__(self, y):
        return self.f.inverse(y)

    def deriv(self, y, k=1):
        u = self.f.inverse(y)
        if k == 0:
            return u
        d1 = self.f.deriv(u, 1)
        if k == 1:
            return 1 / d1
        if k == 2:
            return -self.f.deriv(u, 2) / d1**3
        raise ValueError("inverse derivatives supported up to order 2")

    def increment(self, y, dy):
        return self.f.inverse_increment(self.f.inverse(y), dy)

    def inverse_increment(self, y, dx):
        return self.f.increment(self.f.inverse(y), dx)

    def inverse(self, x):
        return self.f(x)


class ComposedMap(SmoothMap):
    """maps[0] ∘ maps[1] ∘ ... ∘ maps[-1]."""

    def __init__(self, *maps):
        self.maps = tuple(maps)

    def __repr__(self):
        return "ComposedMap" + repr(self.maps)

    def _bases(self, x):
        bases = [x]
        for m in reversed(self.maps):
            bases.append(m(bases[-1]))
        return bases

    def __call__(self, x):
        for m in reversed(self.maps):
            x = m(x)
        return x

    def jet(self, x):
        v, d1, d2 = x, 1 + 0 * x, 0 * x
        for m in reversed(self.maps):
            g1, g2 = m.deriv(v, 1), m.deriv(v, 2)
            v, d1, d2 = m(v), g1 * d1, g2 * d1 * d1 + g1 * d2
        return v, d1, d2

    def deriv(self, x, k=1):
        if k > 2:
            raise ValueError("composite derivatives supported up to order 2")
        return self.jet(x)[k]

    def increment(self, x, dx):
        for m in reversed(self.maps):
            x, dx = m(x), m.increment(x, dx)
        return dx

    def inverse_increment(self, x, dy):
        bases = self._bases(x)
        # bases[j] is the input of maps[-1-j]
        for j, m in enumerate(self.maps):
            dy = m.inverse_increment(bases[len(self.maps) - 1 - j], dy)
        return dy

    def inverse(self, y):
        for m in self.maps:
            y = m.inverse(y)
        return y


def quadratic_bump(eps):
    """x + eps * x * (1 - x) as a polynomial map."""
    e = frac(eps)
    return PolynomialMap([0, 1 + e, -e])


def conjugate_map(psi, base):
    """psi ∘ base ∘ psi^{-1}."""
    return ComposedMap(psi, base, InverseMap(psi))
