"""The period-p condition as an integer polynomial and its branches at infinity.

``omega_poly(p)`` is the numerator of ``w_p(a, b) = f^p(0)`` for
``f(z) = 1 + b/z + a/z**2``.  Its branches at the line ``a = 0`` are
expanded in ``t = a`` and those at the line at infinity in ``t = 1/a``.
Polygon slopes and initial forms come from exact integer data at the first
step; later steps and root finding run in mpmath at ``dps`` digits, and the
final coefficients are handed to :class:`PuiseuxSeries` in double precision.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional

import mpmath
import numpy as np
import sympy

from . import __version__
from .counting import divisors
from .dynamics import (
    Chart, LimbInfo, MapChart, NoLimbMatch, RenormInfo, classify_limb,
    critical_orbit,
)
from .series import (
    DEFAULT_CONTEXT, INF, PuiseuxSeries, SeriesContext, as_fraction,
)


class UnresolvedCluster(ArithmeticError):
    """Branches could not be separated within the recursion budget."""


class IllConditioned(ArithmeticError):
    """A refined center still has a large residual."""


# exact bivariate polynomials

class IntBivarPoly:
    """``sum c[i, j] a**i b**j`` with Python integer coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        self.coeffs = {k: v for k, v in (coeffs or {}).items() if v}

    @classmethod
    def const(cls, c: int) -> "IntBivarPoly":
        return cls({(0, 0): c})

    @classmethod
    def a(cls) -> "IntBivarPoly":
        return cls({(1, 0): 1})

    @classmethod
    def b(cls) -> "IntBivarPoly":
        return cls({(0, 1): 1})

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return IntBivarPoly(out)

    def __mul__(self, other):
        if isinstance(other, int):
            return IntBivarPoly({k: v * other for k, v in self.coeffs.items()})
        out = {}
        for (i1, j1), v1 in self.coeffs.items():
            for (i2, j2), v2 in other.coeffs.items():
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, 0) + v1 * v2
        return IntBivarPoly(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, IntBivarPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def content(self) -> int:
        g = 0
        for v in self.coeffs.values():
            g = gcd(g, v)
        return g

    def is_zero(self) -> bool:
        return not self.coeffs

    def degree(self) -> int:
        return max((i + j for i, j in self.coeffs), default=-1)

    def degree_a(self) -> int:
        return max((i for i, _ in self.coeffs), default=-1)

    def degree_b(self) -> int:
        return max((j for _, j in self.coeffs), default=-1)

    def evaluate(self, a, b):
        return sum(v * a**i * b**j for (i, j), v in self.coeffs.items())

    def to_sympy(self, a, b) -> sympy.Poly:
        return sympy.Poly.from_dict(dict(self.coeffs), a, b, domain="ZZ") if self.coeffs \
            else sympy.Poly(0, a, b, domain="ZZ")

    @classmethod
    def from_sympy(cls, poly: sympy.Poly) -> "IntBivarPoly":
        return cls({k: int(v) for k, v in poly.as_dict().items()})

    def __repr__(self):
        terms = sorted(self.coeffs.items())
        return "IntBivarPoly(" + " + ".join(f"{v}*a^{i}*b^{j}" for (i, j), v in terms) + ")"


def omega_pair(n: int) -> tuple:
    """Numerator and denominator of ``w_n`` as integer polynomials."""
    if n < 0:
        raise ValueError("n must be non-negative")
    N, D = IntBivarPoly.const(0), IntBivarPoly.const(1)
    A, B = IntBivarPoly.a(), IntBivarPoly.b()
    for _ in range(n):
        N, D = N * N + B * N * D + A * D * D, N * N
        g = gcd(N.content(), D.content())
        if g > 1:
            N = IntBivarPoly({k: v // g for k, v in N.coeffs.items()})
            D = IntBivarPoly({k: v // g for k, v in D.coeffs.items()})
    return N, D


def omega_poly(p: int) -> IntBivarPoly:
    """Numerator of ``w_p(a, b)``; its zero set contains the period-p curve."""
    if p < 1:
        raise ValueError("period must be positive")
    return omega_pair(p)[0]


def chart_poly(P: IntBivarPoly, chart: Chart) -> dict:
    """``{(i, j): c}`` for ``P(t, b)`` (plus) or ``t**deg_a P(1/t, b)`` (minus)."""
    chart = Chart(chart)
    if chart is Chart.PLUS:
        return dict(P.coeffs)
    d = P.degree_a()
    return {(d - i, j): v for (i, j), v in P.coeffs.items()}


# Newton-Puiseux

def _lower_hull(points):
    """Lower convex hull of ``(j, i)`` points sorted by ``j``."""
    pts = sorted(points)
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop hull[-1] if it lies on or above segment hull[-2] -> p
            if (y2 - y1) * (p[0] - x1) >= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _clean(H: dict, S: dict, rel) -> tuple[dict, dict]:
    """Zero every coefficient below ``rel`` times the magnitude of the terms
    it was summed from."""
    keep = {k for k, v in H.items() if abs(v) > rel * S[k]}
    return {k: H[k] for k in keep}, {k: S[k] for k in keep}


def _support_min(H: dict) -> dict:
    lo = {}
    for (i, j) in H:
        if j not in lo or i < lo[j]:
            lo[j] = i
    return lo


def _cluster_roots(coeffs_low_to_high, exact: bool, tol):
    """Distinct roots with multiplicities of ``sum c_k u**k``.

    Exact integer input goes through a squarefree decomposition; numeric
    input is clustered and each cluster replaced by its centroid, polished
    on the ``(r-1)``-st derivative.
    """
    if exact:
        u = sympy.Symbol("u")
        poly = sympy.Poly(list(reversed([int(c) for c in coeffs_low_to_high])), u)
        out = []
        for factor, mult in sympy.sqf_list(poly)[1]:
            if factor.degree() == 0:
                continue
            cs = [mpmath.mpf(int(x)) for x in factor.all_coeffs()]
            roots = [cs[-1] / -cs[0]] if len(cs) == 2 else \
                mpmath.polyroots(cs, maxsteps=500, extraprec=4 * mpmath.mp.prec)
            out.extend((mpmath.mpc(r), mult) for r in roots)
        return out
    cs = list(reversed(coeffs_low_to_high))
    while cs and cs[0] == 0:
        cs.pop(0)
    if len(cs) <= 1:
        return []
    if len(cs) == 2:
        return [(-cs[1] / cs[0], 1)]
    roots = mpmath.polyroots(cs, maxsteps=800, extraprec=4 * mpmath.mp.prec)
    roots = [mpmath.mpc(r) for r in roots]
    scale = max(1, max(abs(r) for r in roots))
    clusters = []
    for r in roots:
        for cl in clusters:
            if abs(cl[0] - r) < tol * scale:
                cl.append(r)
                break
        else:
            clusters.append([r])
    out = []
    for cl in clusters:
        c = sum(cl) / len(cl)
        k = len(cl)
        if k > 1:
            d = cs
            for _ in range(k - 1):
                n = len(d) - 1
                d = [d[i] * (n - i) for i in range(n)]
            for _ in range(8):
                fv = mpmath.polyval(d, c)
                n = len(d) - 1
                dv = mpmath.polyval([d[i] * (n - i) for i in range(n)], c)
                if dv == 0:
                    break
                c = c - fv / dv
        out.append((c, k))
    return out


def _substitute(H: dict, S: dict, pp: int, qq: int, c) -> tuple[dict, dict]:
    """``s**-v H(s**qq, s**pp (c + y))`` with the minimal ``v``.

    ``S`` carries, for each coefficient, the sum of absolute values of the
    contributions that produced it; it is transported the same way.
    """
    out, scale = {}, {}
    binom = mpmath.binomial
    ac = abs(c)
    for (i, j), h in H.items():
        e = i * qq + j * pp
        cp, ap = [mpmath.mpf(1)], [mpmath.mpf(1)]
        for _ in range(j):
            cp.append(cp[-1] * c)
            ap.append(ap[-1] * ac)
        for k in range(j + 1):
            bk = binom(j, k)
            key = (e, k)
            out[key] = out.get(key, 0) + h * bk * cp[j - k]
            scale[key] = scale.get(key, 0) + S[(i, j)] * bk * ap[j - k]
    v = min(e for e, _ in out)
    return ({(e - v, k): val for (e, k), val in out.items()},
            {(e - v, k): val for (e, k), val in scale.items()})


def _series_mul(x, y, n):
    out = [mpmath.mpc(0)] * n
    for i, xi in enumerate(x[:n]):
        if xi == 0:
            continue
        for j in range(min(len(y), n - i)):
            out[i + j] += xi * y[j]
    return out


def _series_div(x, y, n):
    z = [mpmath.mpc(0)] * n
    y0 = y[0]
    for k in range(n):
        acc = x[k] if k < len(x) else 0
        for i in range(1, min(k, len(y) - 1) + 1):
            acc -= y[i] * z[k - i]
        z[k] = acc / y0
    return z


def _newton_lift(H: dict, n: int) -> list:
    """Power-series root ``y(s)`` with ``y(0) = 0`` of a polynomial whose
    ``y``-derivative does not vanish at the origin."""
    degy = max(j for _, j in H)
    cols = []
    for j in range(degy + 1):
        col = [mpmath.mpc(0)] * n
        for (i, jj), v in H.items():
            if jj == j and i < n:
                col[i] += v
        cols.append(col)
    dcols = [[c * j for c in cols[j]] for j in range(1, degy + 1)]
    y = [mpmath.mpc(0)] * n
    m = 1
    while True:
        m = min(n, 2 * m)
        val = cols[degy][:m]
        for j in range(degy - 1, -1, -1):
            val = [u + v for u, v in zip(_series_mul(val, y, m), cols[j][:m])]
        der = dcols[-1][:m]
        for j in range(len(dcols) - 2, -1, -1):
            der = [u + v for u, v in zip(_series_mul(der, y, m), dcols[j][:m])]
        step = _series_div(val, der, m)
        y = [y[k] - step[k] for k in range(m)] + y[m:]
        if m == n:
            # one more pass at full length settles the last coefficients
            val = cols[degy][:n]
            for j in range(degy - 1, -1, -1):
                val = [u + v for u, v in zip(_series_mul(val, y, n), cols[j][:n])]
            der = dcols[-1][:n]
            for j in range(len(dcols) - 2, -1, -1):
                der = [u + v for u, v in zip(_series_mul(der, y, n), dcols[j][:n])]
            step = _series_div(val, der, n)
            y = [y[k] - step[k] for k in range(n)]
            return y


@dataclass
class RawBranch:
    terms: list          # [(Fraction exponent, mpc)]
    ram: int             # product of slope denominators
    exact: bool          # finite series with nothing beyond the listed terms


def newton_puiseux_raw(H0: dict, trunc: Fraction, dps: int = 60,
                       max_depth: int = 40) -> list[RawBranch]:
    """All Puiseux roots ``b(t)`` of ``sum h[i, j] t**i b**j``, one per branch."""
    trunc = as_fraction(trunc)
    out = []
    with mpmath.workdps(dps):
        rel = mpmath.mpf(10) ** (-(dps * 3) // 5)
        tol = mpmath.mpf(10) ** (-(dps // 4))

        def recurse(H, S, terms, base, M, exact_int, depth, r):
            if depth > max_depth:
                raise UnresolvedCluster("branches not separated; raise dps or depth")
            if not exact_int:
                H, S = _clean(H, S, rel)
            lo = _support_min(H)
            jmin = min(lo)
            if jmin > 0:
                # y = 0 is an exact root of multiplicity jmin
                out.append(RawBranch(list(terms), M, True))
                if r is not None and r == jmin:
                    return
                H = {(i, j - jmin): v for (i, j), v in H.items()}
                S = {(i, j - jmin): v for (i, j), v in S.items()}
                lo = _support_min(H)
                if r is not None:
                    r -= jmin
            if r == 1 and depth > 0:
                n = int((trunc - base) * M) + 1
                if n <= 0:
                    out.append(RawBranch(list(terms), M, False))
                    return
                ys = _newton_lift(H, n)
                new = list(terms)
                for k, yk in enumerate(ys):
                    if k and abs(yk) > 0:
                        new.append((base + Fraction(k, M), yk))
                out.append(RawBranch(new, M, False))
                return
            hull = _lower_hull([(j, i) for j, i in lo.items()])
            if r is not None:
                hull = [pt for pt in hull if pt[0] <= r]
            for (j1, i1), (j2, i2) in zip(hull, hull[1:]):
                slope = Fraction(i1 - i2, j2 - j1)
                if depth > 0 and slope <= 0:
                    continue
                pp, qq = slope.numerator, slope.denominator
                level = i1 + j1 * slope
                on_edge = {j: H[(i, j)] for j, i in lo.items()
                           if j1 <= j <= j2 and i + j * slope == level}
                psi = [0] * ((j2 - j1) // qq + 1)
                for j, v in on_edge.items():
                    psi[(j - j1) // qq] = v
                for u, mult in _cluster_roots(psi, exact_int, tol):
                    c = mpmath.root(u, qq) if qq > 1 else u
                    nb = base + Fraction(pp, M * qq)
                    if nb >= trunc:
                        out.append(RawBranch(list(terms), M * qq, False))
                        continue
                    H2, S2 = _substitute(H, S, pp, qq, c)
                    recurse(H2, S2, terms + [(nb, c)], nb, M * qq, False, depth + 1, mult)

        H0 = {k: mpmath.mpf(v) if not isinstance(v, int) else v for k, v in H0.items()}
        exact_int = all(isinstance(v, int) for v in H0.values())
        S0 = {k: abs(mpmath.mpf(v)) for k, v in H0.items()}
        recurse(H0, S0, [], Fraction(0), 1, exact_int, 0, None)
    return out


def _raw_to_series(raw: RawBranch, trunc: Fraction, ctx: SeriesContext,
                   rel_zero: float = 1e-30) -> PuiseuxSeries:
    """Drop multiprecision round-off, then hand over to double precision.

    Coefficients grow geometrically along a branch, so a term counts as zero
    when it is below ``rel_zero`` times the largest coefficient of lower or
    equal order.
    """
    terms = {}
    running = 1
    for e, c in sorted(raw.terms, key=lambda ec: ec[0]):
        running = max(running, abs(c))
        if e >= trunc or abs(c) <= rel_zero * running:
            continue
        terms[e] = terms.get(e, 0) + complex(c)
    return PuiseuxSeries.from_terms(terms, trunc=None if raw.exact else trunc, ctx=ctx)


# branches

class Line(str, __import__("enum").Enum):
    LPLUS = "L+"
    LMINUS = "L-"


def _line_chart(line: Line) -> Chart:
    return Chart.PLUS if Line(line) is Line.LPLUS else Chart.MINUS


@dataclass
class BranchRecord:
    line: Line
    mu: int
    beta: PuiseuxSeries
    exact_period: int
    limb: Optional[LimbInfo] = None
    renorm: Optional[RenormInfo] = None
    ledger: Optional[dict] = None
    residual: Optional[float] = None

    @property
    def chart(self) -> Chart:
        return _line_chart(self.line)

    @property
    def map(self) -> MapChart:
        return MapChart(self.chart, self.beta)

    def to_json(self) -> dict:
        return {
            "line": self.line.value,
            "mu": self.mu,
            "beta": self.beta.to_json(),
            "exact_period": self.exact_period,
            "limb": None if self.limb is None else self.limb.to_json(),
            "renorm": None if self.renorm is None else self.renorm.to_json(),
            "ledger": self.ledger,
        }

    @classmethod
    def from_json(cls, data: dict, ctx: SeriesContext = DEFAULT_CONTEXT,
                  max_den: Optional[int] = None) -> "BranchRecord":
        rec = cls(Line(data["line"]), int(data["mu"]),
                  PuiseuxSeries.from_json(data["beta"], ctx), int(data["exact_period"]))
        try:
            rec.limb = classify_limb(rec.map, max_den=max_den)
        except NoLimbMatch:
            rec.limb = None
        return rec


def _sort_key(line: Line, beta: PuiseuxSeries, theta=(0, 0)):
    key = [0 if line is Line.LPLUS else 1, theta[0] * 10**6 // max(theta[1], 1), theta[1]]
    for e, c in beta.terms():
        key.extend([float(e), round(c.real, 8) + 0.0, round(c.imag, 8) + 0.0])
    return tuple(key)


def canonical_conjugate(beta: PuiseuxSeries) -> PuiseuxSeries:
    """The root-of-unity conjugate ``c_k -> c_k zeta**k`` with the smallest key."""
    m = beta.ram
    if m == 1:
        return beta
    best, best_key = None, None
    for r in range(m):
        zeta = mpmath.exp(2j * mpmath.pi * r / m)
        terms = {}
        for e, c in beta.terms():
            w = c * complex(zeta ** int(e * m))
            # rotation round-off must not split one conjugacy class into two keys
            eps = 1e-14 * abs(w)
            terms[e] = complex(w.real if abs(w.real) > eps else 0.0, w.imag if abs(w.imag) > eps else 0.0)
        cand = PuiseuxSeries.from_terms(terms, trunc=beta.trunc, ctx=beta.ctx)
        key = tuple((round(c.real, 8) + 0.0, round(c.imag, 8) + 0.0) for _, c in cand.terms())
        if best_key is None or key < best_key:
            best, best_key = cand, key
    return best


def newton_puiseux(P: IntBivarPoly, chart: Chart, trunc, ctx: SeriesContext = DEFAULT_CONTEXT,
                   dps: int = 60) -> list[tuple[PuiseuxSeries, int]]:
    """Branches ``(beta, mu)`` of ``P = 0`` in the given chart, all orders."""
    trunc = as_fraction(trunc)
    sym_a, sym_b = sympy.symbols("a b")
    sq = sympy.sqf_part(P.to_sympy(sym_a, sym_b).as_expr())
    Psq = IntBivarPoly.from_sympy(sympy.Poly(sq, sym_a, sym_b))
    raws = newton_puiseux_raw(chart_poly(Psq, chart), trunc, dps=dps)
    out = []
    for raw in raws:
        s = _raw_to_series(raw, trunc, ctx)
        s = canonical_conjugate(s)
        out.append((s, s.ram))
    return out


def true_period(m: MapChart, p: int, orbit=None) -> int:
    """Smallest proper divisor ``d >= 3`` of ``p`` with ``w_d`` vanishing to
    truncation, else ``p`` (the branch already solves the period-p equation)."""
    orbit = orbit or critical_orbit(m, p)
    for d in divisors(p):
        if 3 <= d < p and orbit[d] is not INF and orbit[d].is_zero:
            return d
    return p


def substitution_residual(m: MapChart, p: int, orbit=None) -> float:
    """Largest surviving coefficient of ``w_p(beta)`` relative to its scale.

    Zero means ``w_p`` vanishes to truncation.  Long division chains in
    double precision make this grow with ``p``; it is a diagnostic, not part
    of the period test.
    """
    orbit = orbit or critical_orbit(m, p)
    w = orbit[p]
    if w is INF:
        return float("inf")
    if w.is_zero:
        return 0.0
    return float(np.max(np.abs(w.coef) / np.maximum(w.scale, np.finfo(float).tiny)))


def exact_period_filter(branches: list, p: int) -> tuple[list, list]:
    """Split branch records into exact period ``p`` and lower-period ones;
    the latter are tagged with their true period."""
    kept, dropped = [], []
    for br in branches:
        br.exact_period = true_period(br.map, p)
        (kept if br.exact_period == p else dropped).append(br)
    return kept, dropped


def default_trunc(p: int) -> Fraction:
    return Fraction(4 * p + 12)


def compute_branches(p: int, trunc=None, ctx: SeriesContext = DEFAULT_CONTEXT,
                     dps: int = 60) -> dict:
    """Branches of the period-p curve at both lines, filtered and ordered.

    Returns ``{"kept": [...], "dropped": [...], "other": [...]}`` where
    ``other`` collects roots in the wrong order range for their line (these
    would be branches through the coordinate vertices).
    """
    if p < 3:
        raise ValueError("branches exist for p >= 3")
    trunc = default_trunc(p) if trunc is None else as_fraction(trunc)
    P = omega_poly(p)
    records, other = [], []
    for line in (Line.LPLUS, Line.LMINUS):
        chart = _line_chart(line)
        for beta, mu in newton_puiseux(P, chart, trunc, ctx, dps):
            o = beta.ord_lower_bound()
            on_line = (o >= 0) if line is Line.LPLUS else (o == -1)
            rec = BranchRecord(line, mu, beta, -1)
            (records if on_line else other).append(rec)
    kept, dropped = exact_period_filter(records, p)
    for rec in kept:
        try:
            rec.limb = classify_limb(rec.map, max_den=p)
        except NoLimbMatch:
            rec.limb = None
        rec.residual = substitution_residual(rec.map, p)
    kept.sort(key=lambda r: _sort_key(r.line, r.beta,
                                      (r.limb.theta_num, r.limb.theta_den) if r.limb else (0, 0)))
    return {"kept": kept, "dropped": dropped, "other": other, "trunc": trunc}


# cache

def _cache_name(p, trunc, precision, tol) -> str:
    return f"branches_p{p}_t{str(trunc).replace('/', '-')}_b{precision}_e{tol:g}.json"


def save_branches(cache_dir: str, p: int, trunc, precision: int, tol: float, kept: list) -> str:
    os.makedirs(cache_dir, exist_ok=True)
    path = os.path.join(cache_dir, _cache_name(p, trunc, precision, tol))
    payload = {
        "manifest": {"p": p, "trunc": str(trunc), "precision": precision, "tol": tol,
                     "version": __version__},
        "branches": [b.to_json() for b in kept],
    }
    fd, tmp = tempfile.mkstemp(dir=cache_dir, prefix=".tmp-", suffix=".json")
    with os.fdopen(fd, "w") as fh:
        json.dump(payload, fh, sort_keys=True)
    os.replace(tmp, path)
    return path


def load_branches(cache_dir: str, p: int, trunc, precision: int, tol: float,
                  ctx: SeriesContext = DEFAULT_CONTEXT) -> Optional[list]:
    path = os.path.join(cache_dir, _cache_name(p, trunc, precision, tol))
    if not os.path.exists(path):
        return None
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("manifest", {}).get("version") != __version__:
        return None
    return [BranchRecord.from_json(d, ctx, max_den=p) for d in payload["branches"]]


# Gleason polynomials

def _iterate_poly(n: int) -> sympy.Poly:
    c = sympy.Symbol("c")
    x = sympy.Poly(0, c, domain="ZZ")
    cp = sympy.Poly(c, c, domain="ZZ")
    for _ in range(n):
        x = x**2 + cp
    return x


_GLEASON_CACHE: dict = {}


def gleason_poly(p: int) -> sympy.Poly:
    """Exact period-p factor of ``Q_c^p(0)`` for ``Q_c(z) = z**2 + c``."""
    if p < 1:
        raise ValueError("period must be positive")
    if p in _GLEASON_CACHE:
        return _GLEASON_CACHE[p]
    g = _iterate_poly(p)
    for d in divisors(p):
        if d < p:
            q, r = sympy.div(g, gleason_poly(d))
            if not r.is_zero:
                raise ArithmeticError(f"Q^{p}(0) is not divisible by G_{d}")
            g = q
    _GLEASON_CACHE[p] = g
    return g


@dataclass(frozen=True)
class GleasonCertificate:
    p: int
    degree: int
    gcd_with_derivative: str
    squarefree: bool

    def to_json(self) -> dict:
        return {"p": self.p, "degree": self.degree,
                "gcd_with_derivative": self.gcd_with_derivative, "squarefree": self.squarefree}


def gleason(p: int) -> tuple[sympy.Poly, GleasonCertificate]:
    g = gleason_poly(p)
    h = sympy.gcd(g, g.diff())
    return g, GleasonCertificate(p, g.degree(), str(h.as_expr()), h.degree() == 0)


# type-II centers

def _omega_value(a, b, n):
    """``w_n(a, b)`` in mpmath; ``None`` stands for infinity."""
    z = mpmath.mpc(0)
    for _ in range(n):
        if z is None:
            z = mpmath.mpc(1)
        elif z == 0:
            z = None
        else:
            z = 1 + b / z + a / z**2
    return z


def _is_exact_period(a, b, p, tol):
    for d in divisors(p):
        if 3 <= d < p:
            w = _omega_value(a, b, d)
            if w is not None and abs(w) < tol:
                return False
    return True


def _refine(F, J, x, tol, iters=60):
    """Newton in several variables; reports whether the step fell below
    ``tol``.  Near singular points convergence is linear and never gets there."""
    for _ in range(iters):
        try:
            step = mpmath.lu_solve(J(x), F(x))
        except ZeroDivisionError:
            return x, False
        x = [x[i] - step[i] for i in range(len(x))]
        if mpmath.norm(step) < tol * (1 + mpmath.norm(mpmath.matrix(x))):
            return x, True
    return x, False


def _relative_residual(P: IntBivarPoly, a, b):
    num = abs(P.evaluate(a, b))
    den = sum(abs(v) * abs(a) ** i * abs(b) ** j for (i, j), v in P.coeffs.items())
    return num / den if den else num


@dataclass(frozen=True)
class Type2Center:
    a: complex
    b: complex
    j: int
    residual: float

    def to_json(self) -> dict:
        return {"a": [self.a.real, self.a.imag], "b": [self.b.real, self.b.imag],
                "j": self.j, "residual": self.residual}


def type2_centers(p: int, dps: int = 50, tol: float = 1e-8) -> list[Type2Center]:
    """Parameters of exact period p where the free critical point is on the
    critical orbit, found by eliminating ``b`` and refining by Newton."""
    if p < 3:
        raise ValueError("type-II centers need p >= 3")
    sa, sb = sympy.symbols("a b")
    Np = omega_poly(p).to_sympy(sa, sb)
    found = []
    with mpmath.workdps(dps):
        eps = mpmath.mpf(10) ** (-(dps // 2))

        def accept(a, b, j):
            if abs(a) < tol:
                return
            if not _is_exact_period(a, b, p, 1e-6):
                return
            for c in found:
                if abs(c[0] - a) < 1e-7 and abs(c[1] - b) < 1e-7:
                    return
            found.append((a, b, j))

        # j = 1: the free critical point is at infinity, so b = 0
        n0 = sympy.Poly(Np.as_expr().subs(sb, 0), sa)
        for fac, _ in sympy.factor_list(n0.as_expr())[1]:
            fp = sympy.Poly(fac, sa)
            if fp.degree() < 1:
                continue
            cs = [int(x) for x in fp.all_coeffs()]
            roots = [mpmath.mpf(-cs[1]) / cs[0]] if len(cs) == 2 else \
                mpmath.polyroots(cs, maxsteps=500, extraprec=200)
            for r in roots:
                accept(mpmath.mpc(r), mpmath.mpc(0), 1)
        for j in range(2, p):
            Nj, Dj = omega_pair(j)
            E = (sb * Nj.to_sympy(sa, sb).as_expr() + 2 * sa * Dj.to_sympy(sa, sb).as_expr())
            E = sympy.Poly(E, sa, sb)
            res = sympy.resultant(Np, E, sb)
            res = sympy.Poly(res, sa)
            if res.is_zero:
                raise IllConditioned(f"resultant vanishes identically at j = {j}")
            f_np = sympy.lambdify((sa, sb), Np.as_expr(), "mpmath")
            f_e = sympy.lambdify((sa, sb), E.as_expr(), "mpmath")
            grads = [sympy.lambdify((sa, sb), sympy.diff(ex, v), "mpmath")
                     for ex in (Np.as_expr(), E.as_expr()) for v in (sa, sb)]
            F = lambda x: mpmath.matrix([f_np(*x), f_e(*x)])
            Jm = lambda x: mpmath.matrix([[grads[0](*x), grads[1](*x)],
                                          [grads[2](*x), grads[3](*x)]])
            for fac, _ in sympy.factor_list(res.as_expr())[1]:
                fp = sympy.Poly(fac, sa)
                if fp.degree() < 1:
                    continue
                cs = [int(x) for x in fp.all_coeffs()]
                roots = [mpmath.mpf(-cs[1]) / cs[0]] if len(cs) == 2 else \
                    mpmath.polyroots(cs, maxsteps=800, extraprec=400)
                for a0 in roots:
                    a0 = mpmath.mpc(a0)
                    if abs(a0) < tol:
                        continue
                    coeffs_b = [sympy.lambdify(sa, cf, "mpmath")(a0)
                                for cf in sympy.Poly(Np.as_expr(), sb).all_coeffs()]
                    while coeffs_b and abs(coeffs_b[0]) < eps:
                        coeffs_b.pop(0)
                    if len(coeffs_b) < 2:
                        continue
                    broots = mpmath.polyroots(coeffs_b, maxsteps=500, extraprec=200) \
                        if len(coeffs_b) > 2 else [-coeffs_b[1] / coeffs_b[0]]
                    for b0 in broots:
                        b0 = mpmath.mpc(b0)
                        scale = 1 + abs(a0) + abs(b0)
                        if abs(f_e(a0, b0)) > 1e-6 * scale ** E.total_degree():
                            continue
                        (a1, b1), converged = _refine(F, Jm, [a0, b0], eps)
                        if not converged or abs(b1) < tol:
                            continue
                        w = _omega_value(a1, b1, j)
                        if w is None or abs(w + 2 * a1 / b1) > 1e-6 * (1 + abs(w)):
                            continue
                        accept(a1, b1, j)
        P = omega_poly(p)
        out = []
        for a, b, j in found:
            r = float(_relative_residual(P, a, b))
            if r > tol:
                raise IllConditioned(f"center ({complex(a)}, {complex(b)}) has residual {r:.3g}")
            out.append(Type2Center(complex(a), complex(b), j, r))
    out.sort(key=lambda c: (round(c.a.real, 8), round(c.a.imag, 8), round(c.b.real, 8), round(c.b.imag, 8)))
    return out


def g_zero_multiplicity(p: int, center: Type2Center, h: float = 1e-6, dps: int = 40) -> float:
    """Numerical order of vanishing of ``G`` along the curve at a center.

    The curve is followed in whichever coordinate has a nonzero partial of
    the period polynomial; ``G = b * prod f'(w_j)``.  Returns the slope of
    ``log|G|`` against ``log|h|`` from two step sizes.
    """
    sa, sb = sympy.symbols("a b")
    Np = omega_poly(p).to_sympy(sa, sb).as_expr()
    f = sympy.lambdify((sa, sb), Np, "mpmath")
    fa = sympy.lambdify((sa, sb), sympy.diff(Np, sa), "mpmath")
    fb = sympy.lambdify((sa, sb), sympy.diff(Np, sb), "mpmath")
    with mpmath.workdps(dps):
        a0, b0 = mpmath.mpc(center.a), mpmath.mpc(center.b)
        use_a = abs(fb(a0, b0)) >= abs(fa(a0, b0))

        def point(step):
            a, b = (a0 + step, b0) if use_a else (a0, b0 + step)
            for _ in range(50):
                if use_a:
                    b = b - f(a, b) / fb(a, b)
                else:
                    a = a - f(a, b) / fa(a, b)
            return a, b

        def G(a, b):
            g = b
            z = mpmath.mpc(1)
            for _ in range(2, p):
                g *= -b / z**2 - 2 * a / z**3
                z = 1 + b / z + a / z**2
            return g

        vals = []
        for step in (h, 2 * h):
            a, b = point(mpmath.mpf(step))
            vals.append(abs(G(a, b)))
        return float(mpmath.log(vals[1] / vals[0]) / mpmath.log(2))
