"""Dynamics of the quadratic family over the Puiseux field.

The family is ``phi(z) = 1 + beta/z + a/z**2`` with ``a = t`` (chart
``plus``, branches at the line a = 0 side, ``|beta| <= 1``) or ``a = 1/t``
(chart ``minus``, ``|beta| > 1``).  The marked critical point is 0 and its
orbit is 0, INF, 1, ...

Orders are exact rationals throughout.  Spherical quantities are reported
as t-orders: a spherical size ``|t|**r`` is reported as ``r``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Union

from .series import (
    INF, Infinity, IndeterminateOrder, Jet, PuiseuxSeries, SeriesContext,
    DEFAULT_CONTEXT, spherical_ord,
)
from .counting import divisors

Point = Union[PuiseuxSeries, Infinity]


class ImageIsP1(ArithmeticError):
    """The ball contains a pole together with preimages of its neighbourhood."""


class RegionUnresolved(ValueError):
    """The sample point lies in none of the tabulated regions."""


class NoLimbMatch(ValueError):
    """The reduction of beta matches no c_theta of admissible order."""


class NoPeriodicBall(ArithmeticError):
    """No periodic closed ball of degree 2 was found around the critical point."""


class Chart(str, enum.Enum):
    PLUS = "plus"
    MINUS = "minus"


def _is_zero_point(z: Point) -> bool:
    return z is not INF and z.is_zero


@dataclass(frozen=True)
class MapChart:
    chart: Chart
    beta: PuiseuxSeries

    def __post_init__(self):
        object.__setattr__(self, "chart", Chart(self.chart))

    @property
    def ctx(self) -> SeriesContext:
        return self.beta.ctx

    @property
    def a(self) -> PuiseuxSeries:
        e = 1 if self.chart is Chart.PLUS else -1
        return PuiseuxSeries.monomial(e, 1.0, self.ctx)

    @property
    def tau_ord(self) -> int:
        """``ord tau``: 1 when ``|beta| > 1`` and 0 otherwise."""
        return 1 if self.chart is Chart.MINUS else 0

    @property
    def tau(self) -> PuiseuxSeries:
        return PuiseuxSeries.monomial(self.tau_ord, 1.0, self.ctx)

    def with_beta(self, beta: PuiseuxSeries) -> "MapChart":
        return MapChart(self.chart, beta)

    def chart_consistent(self) -> bool:
        o = self.beta.ord_lower_bound()
        return (o >= 0) if self.chart is Chart.PLUS else (o < 0)

    def critical_point_other(self) -> PuiseuxSeries:
        """The free critical point ``-2a/beta``."""
        return (self.a * -2.0) / self.beta

    # evaluation

    def apply(self, z: Point) -> Point:
        if z is INF:
            return PuiseuxSeries.constant(1.0, self.ctx)
        if z.is_zero:
            return INF
        w = z.inverse()
        return w * (self.beta + self.a * w) + 1.0

    def apply_jet(self, z: Jet) -> Jet:
        b = Jet.variable(self.beta)
        w = 1.0 / z
        return w * (b + self.a * w) + 1.0

    def zder(self, z: PuiseuxSeries) -> PuiseuxSeries:
        """Ordinary derivative ``-beta/z**2 - 2a/z**3`` at a finite nonzero point."""
        w = z.inverse()
        return (w * w) * (self.beta + self.a * w * 2.0) * -1.0

    def iterate(self, z: Point, n: int) -> Point:
        for _ in range(n):
            z = self.apply(z)
        return z


def critical_orbit(m: MapChart, n: int) -> list:
    """``[w_0, ..., w_n]`` with ``w_0 = 0``, ``w_1 = INF``, ``w_2 = 1``."""
    orbit = [PuiseuxSeries.zero(ctx=m.ctx)]
    for _ in range(n):
        orbit.append(m.apply(orbit[-1]))
    return orbit


def _check_exact_period_orbit(orbit, p):
    for j in range(2, p):
        z = orbit[j]
        if z is INF or z.is_zero:
            raise ValueError(f"orbit returns to the critical point at step {j} < {p}")
    last = orbit[p]
    if last is INF or not last.is_zero:
        o = None if last is INF else last.ord0()
        raise ValueError(f"w_{p} does not vanish to truncation (order {o})")


def deriv_at_infinity(m: MapChart, p: int, orbit=None) -> PuiseuxSeries:
    """``G = beta * prod_{j=2}^{p-1} phi'(w_j)``, the derivative of the
    ``(p-1)``-st iterate at infinity."""
    if orbit is None:
        orbit = critical_orbit(m, p)
    g = m.beta
    for j in range(2, p):
        z = orbit[j]
        if _is_zero_point(z) or z is INF:
            raise ValueError(f"w_{j} is 0 or infinite; period is not {p}")
        g = g * m.zder(z)
    return g


def dbeta_orbit(m: MapChart, n: int) -> PuiseuxSeries:
    """``d w_n / d beta`` by forward differentiation from ``w_2 = 1``."""
    if n <= 2:
        return PuiseuxSeries.zero(ctx=m.ctx)
    z = Jet.constant(1.0, m.ctx)
    for _ in range(2, n):
        z = m.apply_jet(z)
    return z.dbeta


def dbeta_orbit_recursive(m: MapChart, n: int, orbit=None) -> PuiseuxSeries:
    """Same quantity through ``d_{j+1} = 1/w_j + phi'(w_j) d_j``."""
    if orbit is None:
        orbit = critical_orbit(m, n)
    d = PuiseuxSeries.zero(ctx=m.ctx)
    for j in range(2, n):
        d = orbit[j].inverse() + m.zder(orbit[j]) * d
    return d


# spherical derivative orders

def _min0(x):
    return min(Fraction(0), x)


def sph_zder_ord(m: MapChart, z: Point):
    """t-order of the spherical derivative of ``phi`` at ``z``."""
    if z is INF:
        return m.beta.ord0()
    if z.is_zero:
        # phi(1/z)^-1 ~ z**2 / a near 0: spherical derivative vanishes
        return INF
    fz = m.apply(z)
    d = m.zder(z)
    if d.is_zero:
        return INF
    return d.ord0() + 2 * _min0(z.ord0()) - 2 * _min0(fz.ord_lower_bound())


def sph_bder_ord(m: MapChart, z: Point):
    """t-order of the spherical size of ``d phi / d beta = 1/z`` at ``z``."""
    if z is INF:
        return INF
    if z.is_zero:
        raise IndeterminateOrder("d phi / d beta has a pole at 0")
    fz = m.apply(z)
    return -z.ord0() - 2 * _min0(fz.ord_lower_bound())


def sph_point_norm_ord(z: Point, dz: PuiseuxSeries):
    """t-order of the spherical size of a tangent vector ``dz`` at ``z``."""
    if dz.is_zero:
        return INF
    if z is INF:
        raise ValueError("tangent vectors at infinity need the inverted chart")
    return dz.ord0() + 2 * _min0(z.ord_lower_bound())


def sph_iterate_zder_ord(m: MapChart, orbit, start: int, steps: int):
    """Sum of spherical derivative orders along ``orbit[start:start+steps]``."""
    total = Fraction(0)
    for j in range(start, start + steps):
        total += sph_zder_ord(m, orbit[j])
    return total


# limbs

def c_theta(k: int, q: int) -> float:
    return -1.0 / (2.0 * math.cos(math.pi * k / q)) ** 2


@dataclass(frozen=True)
class LimbInfo:
    theta_num: int
    theta_den: int
    c_theta: Optional[complex]
    gamma: PuiseuxSeries
    gamma_red: complex
    match_error: float

    @property
    def q(self) -> int:
        return self.theta_den

    def to_json(self) -> dict:
        return {
            "theta": f"{self.theta_num}/{self.theta_den}",
            "q": self.q,
            "c_theta": None if self.c_theta is None else [self.c_theta.real, self.c_theta.imag],
            "gamma_red": [self.gamma_red.real, self.gamma_red.imag],
            "match_error": self.match_error,
        }


def classify_limb(m: MapChart, max_den: Optional[int] = None, tol: float = 1e-6) -> LimbInfo:
    """Find the limb containing ``beta``.

    For ``|beta| > 1`` the limb is the 1/2-limb and ``gamma = t*beta``.
    Otherwise ``red(beta)`` must equal some ``c_theta``; since
    ``c_theta = c_{-theta}``, theta is reported in ``(0, 1/2)``.
    """
    beta = m.beta
    if beta.is_zero:
        raise NoLimbMatch("beta vanishes to truncation")
    o = beta.ord0()
    if o < 0:
        if o != -1:
            raise NoLimbMatch(f"ord beta = {o}; the 1/2-limb needs ord beta = -1")
        gamma = beta.shift(1)
        return LimbInfo(1, 2, None, gamma, gamma.reduce(), 0.0)
    red = beta.reduce()
    max_den = max_den or 64
    best = None
    for q in range(3, max_den + 1):
        for k in range(1, (q + 1) // 2):
            if gcd(k, q) != 1:
                continue
            err = abs(c_theta(k, q) - red)
            if best is None or err < best[0]:
                best = (err, k, q)
    if best is None or best[0] > tol:
        raise NoLimbMatch(f"red(beta) = {red} matches no c_theta with denominator <= {max_den}")
    err, k, q = best
    c = complex(c_theta(k, q))
    diff = beta - c
    if not diff.is_zero and diff.ord0() < 1:
        # the constant term survived the threshold: beta - c is not O(t)
        if abs(diff.coefficient(0)) > tol:
            raise NoLimbMatch("beta - c_theta is not O(t)")
    gamma = diff.shift(-1)
    g0 = gamma.reduce() if gamma.ord_lower_bound() >= 0 else INF
    if g0 is INF:
        raise NoLimbMatch("gamma is not integral")
    return LimbInfo(k, q, c, gamma, g0, err)


# balls

@dataclass(frozen=True)
class BallSpec:
    """A closed or open ball; larger ``rho`` means a smaller ball.

    Balls whose center is ``INF`` or has negative order live in the chart
    ``u = 1/z`` and are ``{z : ord(1/z - 1/center) >= rho}``; all others are
    ``{z : ord(z - center) >= rho}`` (``>`` for open balls).
    """

    center: Point
    rho: Fraction
    closed: bool = True

    @property
    def at_infinity(self) -> bool:
        c = self.center
        return c is INF or (not c.is_zero and c.ord0() < 0)

    def _u_center(self):
        if self.center is INF:
            return PuiseuxSeries.zero(ctx=DEFAULT_CONTEXT)
        return self.center.inverse()

    def _cmp(self, d):
        if d is INF:
            return True
        return d >= self.rho if self.closed else d > self.rho

    def contains(self, z: Point) -> bool:
        if self.at_infinity:
            if _is_zero_point(z):
                return False
            u = PuiseuxSeries.zero() if z is INF else z.inverse()
            d = u - self._u_center()
        else:
            if z is INF:
                return False
            d = z - self.center
        if d.is_zero:
            if d.tk is not None and d.trunc <= self.rho:
                raise IndeterminateOrder("membership undecided at truncation")
            return True
        return self._cmp(d.ord0())

    def contains_ball(self, other: "BallSpec") -> bool:
        if self.at_infinity != other.at_infinity:
            # a ball around infinity can still contain a finite-chart ball
            # only when radii are large; not needed here
            return False
        if not self.contains(other.center):
            return False
        if other.rho > self.rho:
            return True
        if other.rho == self.rho:
            return self.closed or not other.closed
        return False

    def same_as(self, other: "BallSpec") -> bool:
        return (self.rho == other.rho and self.closed == other.closed
                and self.at_infinity == other.at_infinity and self.contains(other.center))

    def to_json(self) -> dict:
        c = self.center
        return {
            "center": "inf" if c is INF else c.to_json(),
            "rho": str(self.rho),
            "closed": self.closed,
        }


def _ord_or_inf(x: PuiseuxSeries):
    if x.is_zero:
        if x.tk is not None:
            return x.trunc  # lower bound only
        return INF
    return x.ord0()


def _standard_to_ball(w0: PuiseuxSeries, rho_r, closed: bool) -> BallSpec:
    """Convert ``{|w - w0| <= |t|**rho_r}`` to spherical form."""
    ow = w0.ord_lower_bound() if not w0.is_zero else INF
    if ow is not INF and ow < 0:
        if rho_r > ow:
            return BallSpec(w0, rho_r - 2 * ow, closed)
        raise ImageIsP1("image ball swallows the unit ball")
    if rho_r < 0:
        raise ImageIsP1("image ball swallows the unit ball")
    return BallSpec(w0, rho_r, closed)


def _degree(o1, o2, rho, closed):
    l1 = o1 + rho if o1 is not INF else INF
    l2 = o2 + 2 * rho if o2 is not INF else INF
    if l1 is INF and l2 is INF:
        raise ArithmeticError("map is constant on the ball")
    if l1 == l2:
        return l1, (2 if closed else 1)
    return (l1, 1) if l1 < l2 else (l2, 2)


def ball_image(m: MapChart, B: BallSpec):
    """Image ball and local degree, from the Newton polygon of
    ``phi(c + h) - phi(c) = a1 h + a2 h**2`` up to a unit."""
    a, beta = m.a, m.beta
    if B.at_infinity:
        u0 = B._u_center()
        a1 = beta + a * u0 * 2.0
        a2 = a
        rho_r, deg = _degree(_ord_or_inf(a1), a2.ord0(), B.rho, B.closed)
        w0 = m.apply(B.center)
        return _standard_to_ball(w0, rho_r, B.closed), deg
    c = B.center
    oc = INF if c.is_zero else c.ord0()
    pole_inside = oc is INF or (oc >= B.rho if B.closed else oc > B.rho)
    if pole_inside:
        oa, ob = a.ord0(), _ord_or_inf(beta)
        bound = min(ob + B.rho if ob is not INF else INF, 2 * B.rho)
        if not oa < bound:
            raise ImageIsP1("pole and zeros of phi share the ball")
        return BallSpec(INF, 2 * B.rho - oa, B.closed), 2
    a1 = c * (beta * c + a * 2.0) * -1.0
    a2 = (beta * c + a) * -1.0
    l, deg = _degree(_ord_or_inf(a1), _ord_or_inf(a2), B.rho, B.closed)
    return _standard_to_ball(m.apply(c), l - 4 * oc, B.closed), deg


# level-0 structure

def _mobius_orbit_centers(c: complex, q: int) -> list[complex]:
    """``M^{j-2}(1)`` for ``j = 2 .. q-1`` with ``M(z) = 1 + c/z``."""
    out, z = [], 1.0 + 0j
    for _ in range(2, q):
        out.append(z)
        z = 1 + c / z
    return out


def _preimage_in_disk(m: MapChart, w: Point, z0: PuiseuxSeries, iterations: int = 40):
    """Root of ``phi(z) = w`` near ``z0`` by Newton iteration on
    ``(w - 1) z**2 - beta z - a``."""
    if w is INF:
        return PuiseuxSeries.zero(ctx=m.ctx)
    wm1 = w - 1.0
    z = z0
    for _ in range(iterations):
        f = wm1 * z * z - m.beta * z - m.a
        fp = wm1 * z * 2.0 - m.beta
        step = f / fp
        z = z - step
        if step.is_zero:
            break
    return z


@dataclass(frozen=True)
class Level0:
    q: int
    B: tuple            # B_0 .. B_{q-1}
    D0: BallSpec
    D0_prime: BallSpec
    C: tuple            # C_1 .. C_{q-1}

    def named(self) -> dict:
        out = {f"B{j}": b for j, b in enumerate(self.B)}
        out["D0"] = self.D0
        out["D0'"] = self.D0_prime
        out.update({f"C{j + 1}": c for j, c in enumerate(self.C)})
        return out


def level0_structure(limb: LimbInfo, m: MapChart) -> Level0:
    ctx = m.ctx
    q = limb.q
    t = PuiseuxSeries.monomial(1, 1.0, ctx)
    if q == 2:
        g = limb.gamma
        B = (BallSpec(PuiseuxSeries.zero(ctx=ctx), Fraction(0)),
             BallSpec(INF, Fraction(1)))
        d0_center = g.inverse() * -1.0
        D0 = BallSpec(d0_center, Fraction(0), closed=False)
        D0p = BallSpec(m.critical_point_other(), Fraction(0), closed=False)
        c_rho = Fraction(1)
    else:
        c = limb.c_theta
        B = [BallSpec(PuiseuxSeries.zero(ctx=ctx), Fraction(1)),
             BallSpec(INF, Fraction(1))]
        for z in _mobius_orbit_centers(c, q):
            B.append(BallSpec(PuiseuxSeries.constant(z, ctx), Fraction(1)))
        B = tuple(B)
        d0_center = t * (-1.0 / c)
        D0 = BallSpec(d0_center, Fraction(1), closed=False)
        D0p = BallSpec(m.critical_point_other(), Fraction(1), closed=False)
        c_rho = Fraction(3)
    z0 = (m.a / m.beta) * -1.0
    C = []
    for j in range(1, q):
        target = B[(j + 1) % q]
        z = _preimage_in_disk(m, target.center, z0)
        C.append(BallSpec(z, c_rho))
    return Level0(q, B, D0, D0p, tuple(C))


# derivative tables

def classify_region(level: Level0, m: MapChart, z: Point) -> str:
    """Name of the tabulated region containing ``z``.

    ``B1/2`` (the disks C_j) takes precedence over ``B0'``.  Points of
    ``D0`` outside every ``C_j``, points of ``D0'`` and points of the
    invariant domain are not covered by the tables.
    """
    q = level.q
    if level.B[1].contains(z):
        return "B1"
    if level.B[0].contains(z):
        if level.D0.contains(z):
            if any(c.contains(z) for c in level.C):
                return "B1/2"
            raise RegionUnresolved("point of D0 outside the disks C_j")
        if level.D0_prime.contains(z):
            raise RegionUnresolved("point of D0'")
        return "B0'"
    for j in range(2, q):
        if level.B[j].contains(z):
            return f"B{j}"
    raise RegionUnresolved("point of the invariant domain U0")


def expected_orders(q: int, region: str, z: Point):
    """Tabulated t-orders of the spherical sizes of d phi/dz and d phi/dbeta."""
    oz = None if z is INF else z.ord_lower_bound()
    if q == 2:
        if region == "B0'":
            return oz + 1, 3 * oz + 2
        if region == "B1/2":
            return Fraction(-1), Fraction(0)
        if region == "B1":
            return Fraction(-1), (INF if z is INF else -oz)
    else:
        if region == "B0'":
            return oz - 1, 3 * oz - 2
        if region == "B1/2":
            return Fraction(-2), Fraction(-1)
        if region == "B1":
            return Fraction(0), (INF if z is INF else -oz)
        if region.startswith("B") and region[1:].isdigit():
            return Fraction(0), Fraction(0)
    raise RegionUnresolved(f"no table row for {region} at q = {q}")


@dataclass(frozen=True)
class TableCheck:
    region: str
    zder: tuple
    bder: tuple

    @property
    def ok(self) -> bool:
        return self.zder[0] == self.zder[1] and self.bder[0] == self.bder[1]

    def to_json(self) -> dict:
        return {
            "region": self.region,
            "zder": [str(v) for v in self.zder],
            "bder": [str(v) for v in self.bder],
            "ok": self.ok,
        }


def deriv_order_table_check(limb: LimbInfo, m: MapChart, sample: Point,
                            level: Optional[Level0] = None) -> TableCheck:
    level = level or level0_structure(limb, m)
    region = classify_region(level, m, sample)
    ez, eb = expected_orders(limb.q, region, sample)
    return TableCheck(region, (sph_zder_ord(m, sample), ez), (sph_bder_ord(m, sample), eb))


_UNITS = (1.0 + 0j, 0.5 + 0.8j, -0.7 + 0.3j, 2.0 - 1.0j, -1.3 - 0.9j)


def region_samples(limb: LimbInfo, m: MapChart, level: Optional[Level0] = None,
                   per_region: int = 3) -> dict:
    """Deterministic sample points in every tabulated region."""
    ctx = m.ctx
    level = level or level0_structure(limb, m)
    q = limb.q
    T = lambda e, c=1.0: PuiseuxSeries.monomial(e, c, ctx)
    out = {}
    base = Fraction(0) if q == 2 else Fraction(1)
    bad = {level.D0.center.reduce() if q == 2 else level.D0.center.shift(-1).reduce(),
           level.D0_prime.center.reduce() if q == 2 else level.D0_prime.center.shift(-1).reduce()}
    pts = []
    for u in _UNITS:
        if all(abs(u - b) > 0.2 for b in bad):
            pts.append(T(base, u))
            break
    pts.append(T(base + Fraction(1, 2), _UNITS[1]))
    pts.append(T(base + 1, _UNITS[2]) + T(base + 2, 1.0))
    out["B0'"] = pts[:per_region]
    out["B1"] = [T(-1, _UNITS[0]) + 1.0, T(Fraction(-3, 2), _UNITS[3]), T(-2, _UNITS[4]) + T(-1, 1.0)][:per_region]
    for j in range(2, q):
        c = level.B[j].center
        out[f"B{j}"] = [c + T(base, u) for u in _UNITS[:per_region]]
    half = []
    for j, C in enumerate(level.C, start=1):
        target = level.B[(j + 1) % q]
        rt = target.rho
        for u in _UNITS[:per_region]:
            if target.at_infinity:
                w = T(-rt, u)
            else:
                w = target.center + T(rt, u)
            half.append(_preimage_in_disk(m, w, C.center))
    out["B1/2"] = half
    return out


# returns and renormalization

@dataclass(frozen=True)
class ReturnInfo:
    satellite: bool
    ell: int            # l0 for non-central returns, p/q for satellites

    def to_json(self) -> dict:
        return {"satellite": self.satellite, "ell": self.ell}


def first_noncentral_return(limb: LimbInfo, m: MapChart, p: int, orbit=None,
                            level: Optional[Level0] = None) -> ReturnInfo:
    level = level or level0_structure(limb, m)
    if orbit is None:
        orbit = critical_orbit(m, p)
    q = limb.q
    for ell in range(1, (p - 1) // q + 1):
        if q * ell >= p:
            break
        if level.D0.contains(orbit[q * ell]):
            return ReturnInfo(False, ell)
    if p % q:
        raise ValueError(f"no non-central return yet q = {q} does not divide p = {p}")
    return ReturnInfo(True, p // q)


@dataclass(frozen=True)
class SatelliteCheck:
    kind: str
    lhs: object
    rhs: object
    asserted: bool = True

    @property
    def ok(self) -> bool:
        return self.lhs == self.rhs

    def to_json(self) -> dict:
        return {"kind": self.kind, "lhs": str(self.lhs), "rhs": str(self.rhs),
                "ok": self.ok, "asserted": self.asserted}


def satellite_identities(limb: LimbInfo, m: MapChart, p: int, ret: ReturnInfo,
                         orbit=None) -> list[SatelliteCheck]:
    """Order identities at the first return to the critical point's disk.

    Satellites: ``ord d w_p/d beta = ord G + 2 ord tau``.  Non-central
    returns at time ``n = q l0``: the spherical derivative of the
    ``(n-1)``-st iterate at infinity has order ``-ord tau``, and the
    spherical size of ``d w_{n+1}/d beta`` plus ``ord tau`` equals the
    spherical derivative order of the ``n``-th iterate plus ``2 ord tau``.
    """
    if orbit is None:
        orbit = critical_orbit(m, p)
    if ret.satellite:
        d = dbeta_orbit(m, p)
        if d.is_zero:
            raise IndeterminateOrder("d w_p / d beta vanishes to truncation")
        g = deriv_at_infinity(m, p, orbit)
        return [SatelliteCheck("satellite", d.ord0(), g.ord0() + 2 * m.tau_ord)]
    n = limb.q * ret.ell
    first = SatelliteCheck("first-return", sph_iterate_zder_ord(m, orbit, 1, n - 1),
                           Fraction(-m.tau_ord))
    d = dbeta_orbit(m, n + 1)
    size = sph_point_norm_ord(orbit[n + 1], d)
    rhs = sph_iterate_zder_ord(m, orbit, 1, n) + 2 * m.tau_ord
    return [
        first,
        SatelliteCheck("first-return-dbeta", size, rhs),
        # the same identity with an extra |tau| on the left; informational
        SatelliteCheck("first-return-dbeta-printed", size + m.tau_ord, rhs, asserted=False),
    ]


@dataclass(frozen=True)
class RenormInfo:
    satellite: bool
    ell0: Optional[int]
    q_prime: Optional[int]
    rho0: Optional[Fraction]
    rho1: Optional[Fraction]
    levels: tuple = ()
    cycle_degree: Optional[int] = None
    containing: tuple = ()
    distance_orders: tuple = ()
    zder_ratio_ok: Optional[bool] = None
    dbeta_reading: Optional[str] = None

    def levels_ok(self, q: int) -> bool:
        if self.satellite or not self.levels:
            return True
        L = self.levels
        n = q * self.ell0
        if L[1] != 2 * L[0]:
            return False
        if any(L[j] != L[1] for j in range(1, n + 1)):
            return False
        return all(L[j] < L[1] for j in range(n + 1, len(L)))

    def to_json(self) -> dict:
        return {
            "satellite": self.satellite,
            "ell0": self.ell0,
            "q_prime": self.q_prime,
            "rho0": None if self.rho0 is None else str(self.rho0),
            "rho1": None if self.rho1 is None else str(self.rho1),
            "levels": [str(x) for x in self.levels],
            "cycle_degree": self.cycle_degree,
            "containing": list(self.containing),
            "distance_orders": [str(x) for x in self.distance_orders],
            "zder_ratio_ok": self.zder_ratio_ok,
            "dbeta_reading": self.dbeta_reading,
        }


def _containing_B(level: Level0, z: Point) -> int:
    for k, B in enumerate(level.B):
        if B.contains(z):
            return k
    raise RegionUnresolved("orbit point outside B_0 .. B_{q-1}")


def renorm_detect(limb: LimbInfo, m: MapChart, p: int, orbit=None,
                  level: Optional[Level0] = None, ret: Optional[ReturnInfo] = None) -> RenormInfo:
    """Locate the periodic closed ball ``X_0`` around the critical point.

    For each candidate period ``q' > q`` dividing ``p`` the log-diameter of
    ``X_0`` is pinned by requiring ``X_1 -> X_{q'}`` to be a bijection that
    scales by the derivative ``G_{q'}`` at infinity while ``X_0 -> X_1`` is
    the degree-2 map ``z -> a/z**2``: ``rho0 = ord a - ord G_{q'}`` and
    ``rho1 = 2 rho0 - ord a``.  The candidate is accepted when iterating
    exact ball images closes the cycle with total degree 2.
    """
    level = level or level0_structure(limb, m)
    if orbit is None:
        orbit = critical_orbit(m, p)
    ret = ret or first_noncentral_return(limb, m, p, orbit, level)
    dist = tuple(spherical_ord(orbit[0], orbit[j]) for j in range(1, p))
    if ret.satellite:
        return RenormInfo(True, None, None, None, None, distance_orders=dist)
    q = limb.q
    oa = m.a.ord0()
    for qp in divisors(p):
        if qp <= q:
            continue
        g = deriv_at_infinity(m, qp, orbit)
        rho0 = oa - g.ord0()
        if rho0 <= level.B[0].rho:
            continue
        X = [BallSpec(PuiseuxSeries.zero(ctx=m.ctx), rho0)]
        degree = 1
        try:
            for _ in range(qp):
                img, d = ball_image(m, X[-1])
                X.append(img)
                degree *= d
        except ImageIsP1:
            continue
        if degree != 2 or not X[-1].same_as(X[0]):
            continue
        containing, levels = [], []
        for j in range(qp + 1):
            k = _containing_B(level, orbit[j] if j < len(orbit) else X[j].center)
            containing.append(k)
            levels.append(X[j].rho - level.B[k].rho)
        zder_ok = True
        for j in range(2, qp + 1):
            lhs = X[j].rho - X[1].rho
            rhs = sph_iterate_zder_ord(m, orbit, 1, j - 1)
            zder_ok = zder_ok and lhs == rhs
        # ||d w_q' / d beta|| against diam(X_q') and diam(X_1): quotient or product
        size = sph_point_norm_ord(orbit[qp], dbeta_orbit(m, qp))
        readings = {"quotient": X[qp].rho - X[1].rho + 2 * m.tau_ord,
                    "product": X[qp].rho + X[1].rho - 2 * m.tau_ord}
        matched = [k for k, v in readings.items() if v == size]
        reading = "+".join(matched) if matched else "neither"
        return RenormInfo(False, ret.ell, qp, rho0, X[1].rho, tuple(levels), degree,
                          tuple(containing), dist, zder_ok, reading)
    raise NoPeriodicBall(f"no periodic ball of period dividing {p} around the critical point")
