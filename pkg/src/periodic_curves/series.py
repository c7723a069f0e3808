"""Truncated Puiseux series with exact rational exponents.

A series is stored densely: ``coef[i]`` multiplies ``t**((k0 + i)/ram)``.
Exponents never touch floating point; only coefficients do.  Every
coefficient carries a companion ``scale``, the total magnitude of the
products that were summed to form it, and a coefficient is treated as zero
when it falls below ``tol_rel * scale``.  Cancellation is therefore judged
against the terms that actually cancelled rather than against the largest
coefficient of the operand, which matters because coefficients of orbit
series grow geometrically with the exponent.

``trunc`` is the exponent from which on nothing is known; ``None`` marks an
exact (finite) series.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, ceil
from numbers import Number
from typing import Mapping, Optional, Union

import numpy as np

__all__ = [
    "INF", "Infinity", "SeriesContext", "DEFAULT_CONTEXT", "PuiseuxSeries",
    "Jet", "SeriesZeroDivision", "IndeterminateOrder", "ord0", "reduce",
    "spherical_ord", "as_fraction",
]


class SeriesZeroDivision(ZeroDivisionError):
    """Division by a series with no surviving term below its truncation."""


class IndeterminateOrder(ArithmeticError):
    """The requested valuation lies beyond the available truncation."""


class Infinity:
    """The point at infinity, and also the valuation of zero."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (Infinity, ())

    # ordering against rationals, so min()/max() work on valuations
    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("periodic_curves.INF")

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __neg__(self):
        raise ArithmeticError("negative infinity is not a valuation")


INF = Infinity()


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"exponents must be exact, got {type(x).__name__}")


@dataclass(frozen=True)
class SeriesContext:
    """Numerical policy carried by every series.

    tol_rel
        Relative zero threshold.
    depth
        How many exponent units past the leading order an otherwise
        unbounded quotient is expanded.
    precision_bits
        Working precision requested for root finding; series arithmetic
        itself runs in double precision.
    """

    tol_rel: float = 1e-9
    depth: Fraction = Fraction(12)
    precision_bits: int = 53

    def with_depth(self, depth) -> "SeriesContext":
        return SeriesContext(self.tol_rel, as_fraction(depth), self.precision_bits)


DEFAULT_CONTEXT = SeriesContext()


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


class PuiseuxSeries:
    __slots__ = ("ram", "k0", "coef", "scale", "tk", "ctx", "kept_min", "dropped_max")

    def __init__(self, ram, k0, coef, scale, tk, ctx, kept_min=np.inf, dropped_max=0.0):
        # callers should go through _make, which normalizes
        self.ram = ram
        self.k0 = k0
        self.coef = coef
        self.scale = scale
        self.tk = tk
        self.ctx = ctx
        self.kept_min = kept_min
        self.dropped_max = dropped_max

    # construction

    @classmethod
    def _make(cls, ram, k0, coef, scale, tk, ctx, kept_min=np.inf, dropped_max=0.0):
        coef = np.asarray(coef, dtype=complex)
        scale = np.asarray(scale, dtype=float)
        if tk is not None and coef.size:
            n = max(0, min(coef.size, tk - k0))
            coef, scale = coef[:n], scale[:n]
        if coef.size:
            mag = np.abs(coef)
            keep = mag > ctx.tol_rel * scale
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(scale > 0, mag / np.where(scale > 0, scale, 1.0), 0.0)
            if keep.any():
                kept_min = min(kept_min, float(ratio[keep].min()))
            gone = (~keep) & (mag > 0)
            if gone.any():
                dropped_max = max(dropped_max, float(ratio[gone].max()))
            coef = np.where(keep, coef, 0)
            nz = np.flatnonzero(keep)
            if nz.size:
                lo, hi = nz[0], nz[-1] + 1
                coef, scale = coef[lo:hi], scale[lo:hi]
                k0 += int(lo)
            else:
                coef, scale = coef[:0], scale[:0]
        if not coef.size:
            k0 = 0
        # smallest ramification compatible with the support and truncation
        g = ram
        if coef.size:
            for i in np.flatnonzero(coef):
                g = gcd(g, k0 + int(i))
                if g == 1:
                    break
        if tk is not None:
            g = gcd(g, tk)
        if g > 1:
            ram //= g
            if coef.size:
                k0 //= g
                coef, scale = coef[::g], scale[::g]
            if tk is not None:
                tk //= g
        return cls(ram, k0, coef, scale, tk, ctx, kept_min, dropped_max)

    @classmethod
    def from_terms(
        cls,
        terms: Mapping,
        trunc=None,
        ctx: SeriesContext = DEFAULT_CONTEXT,
    ) -> "PuiseuxSeries":
        """Build from ``{exponent: coefficient}`` with exact exponents."""
        exps = {as_fraction(e): complex(c) for e, c in terms.items()}
        trunc = None if trunc is None else as_fraction(trunc)
        ram = 1
        for e in list(exps) + ([trunc] if trunc is not None else []):
            ram = _lcm(ram, e.denominator)
        if not exps:
            tk = None if trunc is None else int(trunc * ram)
            return cls._make(ram, 0, [], [], tk, ctx)
        ks = {int(e * ram): c for e, c in exps.items()}
        k0 = min(ks)
        coef = np.zeros(max(ks) - k0 + 1, dtype=complex)
        for k, c in ks.items():
            coef[k - k0] += c
        tk = None if trunc is None else int(trunc * ram)
        return cls._make(ram, k0, coef, np.abs(coef), tk, ctx)

    @classmethod
    def constant(cls, c, ctx: SeriesContext = DEFAULT_CONTEXT) -> "PuiseuxSeries":
        return cls.from_terms({0: c} if c != 0 else {}, ctx=ctx)

    @classmethod
    def monomial(cls, exponent, c=1.0, ctx: SeriesContext = DEFAULT_CONTEXT) -> "PuiseuxSeries":
        return cls.from_terms({as_fraction(exponent): c}, ctx=ctx)

    @classmethod
    def zero(cls, trunc=None, ctx: SeriesContext = DEFAULT_CONTEXT) -> "PuiseuxSeries":
        return cls.from_terms({}, trunc=trunc, ctx=ctx)

    # inspection

    @property
    def trunc(self) -> Optional[Fraction]:
        return None if self.tk is None else Fraction(self.tk, self.ram)

    @property
    def is_exact(self) -> bool:
        return self.tk is None

    @property
    def is_zero(self) -> bool:
        return self.coef.size == 0

    @property
    def is_zero_to_trunc(self) -> bool:
        """No surviving term, but only because of truncation."""
        return self.is_zero and self.tk is not None

    def terms(self) -> list[tuple[Fraction, complex]]:
        return [(Fraction(self.k0 + int(i), self.ram), complex(self.coef[i]))
                for i in np.flatnonzero(self.coef)]

    def coefficient(self, exponent) -> complex:
        e = as_fraction(exponent)
        if self.tk is not None and e >= self.trunc:
            raise IndeterminateOrder(f"coefficient of t^{e} is beyond truncation {self.trunc}")
        k = e * self.ram
        if k.denominator != 1:
            return 0j
        i = int(k) - self.k0
        return complex(self.coef[i]) if 0 <= i < self.coef.size else 0j

    def ord0(self):
        """Lowest exponent with a nonzero coefficient, or ``INF``."""
        if self.is_zero:
            return INF
        return Fraction(self.k0, self.ram)

    def ord_lower_bound(self):
        """``ord0`` for nonzero series, else the truncation (``INF`` if exact)."""
        if not self.is_zero:
            return Fraction(self.k0, self.ram)
        return INF if self.tk is None else self.trunc

    def leading(self) -> complex:
        if self.is_zero:
            raise IndeterminateOrder("zero series has no leading coefficient")
        return complex(self.coef[0])

    def reduce(self):
        """Residue at ``t = 0``: a complex number or ``INF``."""
        if self.is_zero:
            if self.tk is not None and self.tk <= 0:
                raise IndeterminateOrder("reduction needs the series beyond t^0")
            return 0j
        if self.k0 < 0:
            return INF
        if self.tk is not None and self.tk <= 0:
            raise IndeterminateOrder("reduction needs the series beyond t^0")
        return complex(self.coef[0]) if self.k0 == 0 else 0j

    def margins(self) -> dict:
        """Smallest kept and largest dropped |coefficient| / scale seen so far."""
        return {
            "kept_min": None if np.isinf(self.kept_min) else self.kept_min,
            "dropped_max": self.dropped_max,
        }

    def evaluate(self, t: complex) -> complex:
        """Numerical value at a small ``t`` using the principal root."""
        if self.is_zero:
            return 0j
        s = complex(t) ** (1.0 / self.ram)
        powers = s ** (self.k0 + np.arange(self.coef.size))
        return complex(np.dot(self.coef, powers))

    def truncate(self, trunc) -> "PuiseuxSeries":
        trunc = as_fraction(trunc)
        if self.tk is not None and trunc >= self.trunc:
            return self
        m = _lcm(self.ram, trunc.denominator)
        x = self._to_ram(m)
        return PuiseuxSeries._make(m, x.k0, x.coef, x.scale, int(trunc * m), self.ctx,
                                   self.kept_min, self.dropped_max)

    def with_ctx(self, ctx: SeriesContext) -> "PuiseuxSeries":
        return PuiseuxSeries(self.ram, self.k0, self.coef, self.scale, self.tk, ctx,
                             self.kept_min, self.dropped_max)

    # arithmetic

    def _to_ram(self, m: int) -> "PuiseuxSeries":
        if m == self.ram:
            return self
        f = m // self.ram
        n = (self.coef.size - 1) * f + 1 if self.coef.size else 0
        coef = np.zeros(n, dtype=complex)
        scale = np.zeros(n, dtype=float)
        coef[::f] = self.coef
        scale[::f] = self.scale
        tk = None if self.tk is None else self.tk * f
        return PuiseuxSeries(m, self.k0 * f, coef, scale, tk, self.ctx,
                             self.kept_min, self.dropped_max)

    def _coerce(self, other) -> "PuiseuxSeries":
        if isinstance(other, PuiseuxSeries):
            return other
        if isinstance(other, Number):
            return PuiseuxSeries.constant(complex(other), self.ctx)
        return NotImplemented

    @staticmethod
    def _merge_margins(x, y):
        return min(x.kept_min, y.kept_min), max(x.dropped_max, y.dropped_max)

    def _add(self, other, sign):
        m = _lcm(self.ram, other.ram)
        x, y = self._to_ram(m), other._to_ram(m)
        tks = [v for v in (x.tk, y.tk) if v is not None]
        tk = min(tks) if tks else None
        km, dm = self._merge_margins(x, y)
        if x.is_zero and y.is_zero:
            return PuiseuxSeries._make(m, 0, [], [], tk, self.ctx, km, dm)
        starts = [v.k0 for v in (x, y) if not v.is_zero]
        ends = [v.k0 + v.coef.size for v in (x, y) if not v.is_zero]
        lo, hi = min(starts), max(ends)
        coef = np.zeros(hi - lo, dtype=complex)
        scale = np.zeros(hi - lo, dtype=float)
        if not x.is_zero:
            coef[x.k0 - lo:x.k0 - lo + x.coef.size] += x.coef
            scale[x.k0 - lo:x.k0 - lo + x.coef.size] += x.scale
        if not y.is_zero:
            coef[y.k0 - lo:y.k0 - lo + y.coef.size] += sign * y.coef
            scale[y.k0 - lo:y.k0 - lo + y.coef.size] += y.scale
        return PuiseuxSeries._make(m, lo, coef, scale, tk, self.ctx, km, dm)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._add(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._add(other, -1)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other._add(self, -1)

    def __neg__(self):
        return PuiseuxSeries(self.ram, self.k0, -self.coef, self.scale, self.tk, self.ctx,
                             self.kept_min, self.dropped_max)

    def __pos__(self):
        return self

    def scalar_mul(self, c) -> "PuiseuxSeries":
        c = complex(c)
        if c == 0:
            return PuiseuxSeries._make(self.ram, 0, [], [], None, self.ctx)
        return PuiseuxSeries(self.ram, self.k0, self.coef * c, self.scale * abs(c),
                             self.tk, self.ctx, self.kept_min, self.dropped_max)

    def shift(self, exponent) -> "PuiseuxSeries":
        """Multiply by ``t**exponent``."""
        e = as_fraction(exponent)
        m = _lcm(self.ram, e.denominator)
        x = self._to_ram(m)
        d = int(e * m)
        tk = None if x.tk is None else x.tk + d
        return PuiseuxSeries._make(m, x.k0 + d, x.coef, x.scale, tk, self.ctx,
                                   self.kept_min, self.dropped_max)

    def __mul__(self, other):
        if isinstance(other, Number):
            return self.scalar_mul(other)
        if not isinstance(other, PuiseuxSeries):
            return NotImplemented
        m = _lcm(self.ram, other.ram)
        x, y = self._to_ram(m), other._to_ram(m)
        km, dm = self._merge_margins(x, y)
        lbx, lby = x._klb(), y._klb()
        cand = []
        if x.tk is not None and lby is not None:
            cand.append(x.tk + lby)
        if y.tk is not None and lbx is not None:
            cand.append(y.tk + lbx)
        exact_zero = (x.is_zero and x.tk is None) or (y.is_zero and y.tk is None)
        tk = None if exact_zero or not cand else min(cand)
        if x.is_zero or y.is_zero:
            return PuiseuxSeries._make(m, 0, [], [], tk, self.ctx, km, dm)
        coef = np.convolve(x.coef, y.coef)
        scale = np.convolve(x.scale, y.scale)
        return PuiseuxSeries._make(m, x.k0 + y.k0, coef, scale, tk, self.ctx, km, dm)

    __rmul__ = __mul__

    def _klb(self):
        # ord lower bound in units of 1/ram, None meaning +infinity
        if not self.is_zero:
            return self.k0
        return self.tk

    def inverse(self) -> "PuiseuxSeries":
        return PuiseuxSeries.constant(1.0, self.ctx) / self

    def __truediv__(self, other):
        if isinstance(other, Number):
            if other == 0:
                raise SeriesZeroDivision("division by scalar zero")
            return self.scalar_mul(1.0 / complex(other))
        if not isinstance(other, PuiseuxSeries):
            return NotImplemented
        if other.is_zero:
            raise SeriesZeroDivision("divisor has no term below its truncation")
        m = _lcm(self.ram, other.ram)
        x, y = self._to_ram(m), other._to_ram(m)
        km, dm = self._merge_margins(x, y)
        v = y.k0
        y0 = y.coef[0]
        if x.is_zero:
            tk = None if x.tk is None else x.tk - v
            return PuiseuxSeries._make(m, 0, [], [], tk, self.ctx, km, dm)
        kz = x.k0 - v
        cand = []
        if x.tk is not None:
            cand.append(x.tk - v)
        if y.tk is not None:
            cand.append(y.tk - 2 * v + x.k0)
        if y.coef.size == 1 and y.tk is None:
            tk = min(cand) if cand else None
            return PuiseuxSeries._make(m, kz, x.coef / y0, x.scale / abs(y0), tk,
                                       self.ctx, km, dm)
        if not cand:
            cand.append(kz + int(ceil(self.ctx.depth * m)))
        tk = min(cand)
        n = max(0, tk - kz)
        xc = np.zeros(n, dtype=complex)
        xs = np.zeros(n, dtype=float)
        k = min(n, x.coef.size)
        xc[:k] = x.coef[:k]
        xs[:k] = x.scale[:k]
        yc = np.zeros(n, dtype=complex)
        ys = np.zeros(n, dtype=float)
        k = min(n, y.coef.size)
        yc[:k] = y.coef[:k]
        ys[:k] = y.scale[:k]
        z = np.zeros(n, dtype=complex)
        zs = np.zeros(n, dtype=float)
        ay0 = abs(y0)
        tol = self.ctx.tol_rel
        for i in range(n):
            acc = xc[i]
            sc = xs[i]
            if i:
                tail_c = yc[i:0:-1]
                acc = acc - np.dot(tail_c, z[:i])
                sc = sc + np.dot(ys[i:0:-1], np.abs(z[:i]))
            zi = acc / y0
            si = sc / ay0
            # decide zero-ness now so cancellation noise does not feed later terms
            if abs(zi) <= tol * si:
                if zi != 0:
                    dm = max(dm, abs(zi) / si)
                zi = 0j
            z[i] = zi
            zs[i] = si
        return PuiseuxSeries._make(m, kz, z, zs, tk, self.ctx, km, dm)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return (self ** (-n)).inverse()
        result = PuiseuxSeries.constant(1.0, self.ctx)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # comparison and display

    def close_to(self, other, tol: float = 1e-9) -> bool:
        """Coefficientwise agreement up to the shorter truncation."""
        other = self._coerce(other)
        diff = self - other
        return all(abs(c) <= tol for _, c in diff.terms())

    def __repr__(self):
        parts = []
        for e, c in self.terms()[:8]:
            cs = f"{c.real:.6g}" if abs(c.imag) < 1e-15 else f"({c:.6g})"
            parts.append(cs if e == 0 else f"{cs}*t^{e}")
        if len(self.terms()) > 8:
            parts.append("...")
        body = " + ".join(parts) if parts else "0"
        if self.tk is not None:
            body += f" + O(t^{self.trunc})"
        return f"PuiseuxSeries({body})"

    # serialization

    def to_json(self) -> dict:
        ks = np.flatnonzero(self.coef)
        return {
            "ram": self.ram,
            "terms": [[self.k0 + int(i), float(self.coef[i].real), float(self.coef[i].imag)]
                      for i in ks],
            "trunc": None if self.tk is None else str(self.trunc),
        }

    @classmethod
    def from_json(cls, data: Mapping, ctx: SeriesContext = DEFAULT_CONTEXT) -> "PuiseuxSeries":
        ram = int(data["ram"])
        terms = {Fraction(int(k), ram): complex(re, im) for k, re, im in data["terms"]}
        return cls.from_terms(terms, trunc=data["trunc"], ctx=ctx)


Point = Union[PuiseuxSeries, Infinity]


def ord0(x) -> Union[Fraction, Infinity]:
    if x is INF:
        raise ValueError("the point at infinity has no t-adic order")
    return x.ord0()


def reduce(x):
    """Reduction to the Riemann sphere; ``INF`` maps to ``INF``."""
    if x is INF:
        return INF
    return x.reduce()


def _inv_ord(x: PuiseuxSeries):
    if x.is_zero:
        raise IndeterminateOrder("cannot invert a series that vanishes to truncation")
    return -x.ord0()


def spherical_ord(z, w):
    """t-order of the spherical distance between two points of the line.

    ``ord(z - w)`` when both are integral, ``ord(1/z - 1/w)`` when both lie
    outside the unit ball, and 0 when they sit in different residue classes
    of that split.  Equal points give ``INF``.
    """
    if z is INF and w is INF:
        return INF
    if z is INF or w is INF:
        other = w if z is INF else z
        if other.is_zero:
            return Fraction(0)
        o = other.ord0()
        return -o if o < 0 else Fraction(0)
    oz, ow = z.ord_lower_bound(), w.ord_lower_bound()
    inside_z, inside_w = oz >= 0, ow >= 0
    if inside_z and inside_w:
        d = z - w
        if d.is_zero_to_trunc:
            raise IndeterminateOrder("points agree to truncation")
        return d.ord0()
    if not inside_z and not inside_w:
        d = z.inverse() - w.inverse()
        if d.is_zero_to_trunc:
            raise IndeterminateOrder("points agree to truncation")
        return d.ord0()
    return Fraction(0)


class Jet:
    """A series together with its derivative in the parameter ``beta``."""

    __slots__ = ("value", "dbeta")

    def __init__(self, value: PuiseuxSeries, dbeta: PuiseuxSeries):
        self.value = value
        self.dbeta = dbeta

    @classmethod
    def variable(cls, beta: PuiseuxSeries) -> "Jet":
        return cls(beta, PuiseuxSeries.constant(1.0, beta.ctx))

    @classmethod
    def constant(cls, c, ctx: SeriesContext = DEFAULT_CONTEXT) -> "Jet":
        if not isinstance(c, PuiseuxSeries):
            c = PuiseuxSeries.constant(c, ctx)
        return cls(c, PuiseuxSeries.zero(ctx=c.ctx))

    def _coerce(self, other):
        if isinstance(other, Jet):
            return other
        if isinstance(other, (PuiseuxSeries, Number)):
            return Jet.constant(other, self.value.ctx)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Jet(self.value + other.value, self.dbeta + other.dbeta)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Jet(self.value - other.value, self.dbeta - other.dbeta)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __neg__(self):
        return Jet(-self.value, -self.dbeta)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Jet(self.value * other.value,
                   self.dbeta * other.value + self.value * other.dbeta)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        q = self.value / other.value
        return Jet(q, (self.dbeta - q * other.dbeta) / other.value)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = Jet.constant(1.0, self.value.ctx)
        for _ in range(n):
            out = out * self
        return out

    def __repr__(self):
        return f"Jet({self.value!r}, d/dbeta={self.dbeta!r})"
