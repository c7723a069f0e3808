"""Branch-by-branch verification and the Euler characteristic cross-check.

Order identities are compared as exact fractions.  The rescaling checks
evaluate the reduced maps at fixed sample points and fit the expected
complex families; every complex comparison reports its tolerance.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import mpmath
import numpy as np

from .counting import Variant, divisors, eta_II, eta_prime, euler_char, genus_if_connected
from .curves import BranchRecord, Line, compute_branches, gleason_poly, type2_centers
from .dynamics import (
    LimbInfo, MapChart, RenormInfo, critical_orbit, deriv_at_infinity,
    dbeta_orbit, first_noncentral_return, level0_structure, region_samples,
    deriv_order_table_check, renorm_detect, satellite_identities,
)
from .series import INF, IndeterminateOrder, PuiseuxSeries

FIT_TOL = 1e-6
IDENTITY_TOL = 1e-8


class FitResidualTooLarge(ArithmeticError):
    pass


class PeriodMismatch(ArithmeticError):
    pass


def _frac(x) -> str:
    return str(x)


def _cjson(z) -> Optional[list]:
    if z is None:
        return None
    z = complex(z)
    return [z.real, z.imag]


# fixed sample points, a Kronecker sequence kept away from -1, 0 and infinity
def sample_points(n: int, avoid=(-1.0, 0.0), radius=(0.4, 1.8)) -> list[complex]:
    out = []
    k = 1
    while len(out) < n:
        r = radius[0] + (radius[1] - radius[0]) * ((k * math.sqrt(2)) % 1.0)
        z = r * cmath.exp(2j * math.pi * ((k * (math.sqrt(5) - 1) / 2) % 1.0))
        k += 1
        if all(abs(z - a) > 0.25 for a in avoid):
            out.append(z)
    return out


# Main Lemma and the d(tau) ledger

@dataclass
class LedgerEntry:
    line: Line
    mu: int
    ord_dbeta: Fraction
    ord_G: Fraction
    tau_ord: int
    main_lemma_ok: bool
    ord_dbeta_complex: Fraction
    ord_G_complex: Fraction
    ord_dtau_complex: Fraction
    theta: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "line": self.line.value,
            "mu": self.mu,
            "theta": self.theta,
            "ord_dbeta": _frac(self.ord_dbeta),
            "ord_G": _frac(self.ord_G),
            "tau_ord": self.tau_ord,
            "main_lemma_ok": self.main_lemma_ok,
            "ord_dbeta_complex": _frac(self.ord_dbeta_complex),
            "ord_G_complex": _frac(self.ord_G_complex),
            "ord_dtau_complex": _frac(self.ord_dtau_complex),
        }


def _main_lemma_orders(m: MapChart, p: int):
    d = dbeta_orbit(m, p)
    if d.is_zero:
        raise IndeterminateOrder("d w_p / d beta vanishes to truncation")
    g = deriv_at_infinity(m, p)
    if g.is_zero:
        raise IndeterminateOrder("G vanishes to truncation")
    return d.ord0(), g.ord0()


def main_lemma_check(branch: BranchRecord, p: int) -> LedgerEntry:
    """Compare ``ord d w_p/d beta`` with ``ord G + 2 ord tau`` on one branch.

    The complex-side orders are in the local parameter ``s`` with
    ``t = s**mu``.  A truncation too shallow to see either order triggers
    one recomputation of the branch at twice the depth.
    """
    m = branch.map
    try:
        od, og = _main_lemma_orders(m, p)
    except IndeterminateOrder:
        deeper = refine_branch(branch, p)
        m = deeper.map
        od, og = _main_lemma_orders(m, p)
    mu = branch.mu
    sign = 1 if branch.line is Line.LPLUS else -1
    od_c = mu * od
    entry = LedgerEntry(
        line=branch.line,
        mu=mu,
        ord_dbeta=od,
        ord_G=og,
        tau_ord=m.tau_ord,
        main_lemma_ok=(od == og + 2 * m.tau_ord),
        ord_dbeta_complex=od_c,
        ord_G_complex=mu * og,
        ord_dtau_complex=Fraction(-1 + sign * mu) - od_c,
        theta=None if branch.limb is None else f"{branch.limb.theta_num}/{branch.limb.theta_den}",
    )
    branch.ledger = entry.to_json()
    return entry


def refine_branch(branch: BranchRecord, p: int) -> BranchRecord:
    """The same branch recomputed at twice the truncation depth."""
    trunc = 2 * (branch.beta.trunc or Fraction(4 * p + 12))
    best, best_err = None, None
    for cand in compute_branches(p, trunc)["kept"]:
        if cand.line is not branch.line:
            continue
        diff = (cand.beta - branch.beta).truncate(branch.beta.trunc)
        err = max((abs(c) for _, c in diff.terms()), default=0.0)
        if best is None or err < best_err:
            best, best_err = cand, err
    if best is None:
        raise IndeterminateOrder("branch not found at deeper truncation")
    return best


@dataclass(frozen=True)
class DtauLedger:
    N_p: int
    total: Fraction
    chi_hat: Fraction
    chi: Fraction
    mu_sums: dict
    bezout_ok: bool

    def to_json(self) -> dict:
        return {
            "N_p": self.N_p,
            "sum_ord_dtau": _frac(self.total),
            "chi_hat": _frac(self.chi_hat),
            "chi": _frac(self.chi),
            "mu_sums": dict(self.mu_sums),
            "bezout_ok": self.bezout_ok,
        }


def dtau_ledger(entries: list[LedgerEntry], p: int) -> DtauLedger:
    """Sum the orders of ``d tau`` at the punctures.

    The total is ``-chi`` of the compactified curve; removing the ``N_p``
    punctures gives ``chi(S_p)``.
    """
    total = sum((e.ord_dtau_complex for e in entries), Fraction(0))
    chi_hat = -total
    n = len(entries)
    sums = {line.value: sum(e.mu for e in entries if e.line is line) for line in Line}
    target = eta_prime(p) // 3
    return DtauLedger(n, total, chi_hat, chi_hat - n, sums,
                      all(v == target for v in sums.values()))


# parabolic reduction

def _fit_rational2(zs, ws):
    """Null vector of ``a0 + a1 z + a2 z^2 - w (b0 + b1 z + b2 z^2)``."""
    M = np.array([[1, z, z * z, -w, -w * z, -w * z * z] for z, w in zip(zs, ws)], dtype=complex)
    _, s, vh = np.linalg.svd(M)
    v = vh[-1].conj()
    return v, float(s[-1] / s[0])


def R_v(v: complex, z: complex) -> complex:
    return v + z * z / (z + 1)


def R_iterate(v: complex, z: complex, n: int) -> complex:
    for _ in range(n):
        z = R_v(v, z)
    return z


@dataclass(frozen=True)
class ParabolicReport:
    q: int
    v: complex
    v_fit: complex
    fit_residual: float
    family_error: float
    slope: Optional[complex]
    slope_spread: Optional[float]
    identity_error: Optional[float]
    ell0: int
    satellite: bool
    corollary_value: complex
    corollary_target: float
    transversal: bool

    @property
    def ok(self) -> bool:
        good = self.fit_residual < FIT_TOL and self.family_error < FIT_TOL
        if self.q == 2:
            good = good and self.identity_error is not None and self.identity_error < IDENTITY_TOL
        else:
            good = good and self.slope is not None and abs(self.slope) > FIT_TOL \
                and self.slope_spread < FIT_TOL
        return good and abs(self.corollary_value - self.corollary_target) < FIT_TOL and self.transversal

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "v": _cjson(self.v),
            "v_fit": _cjson(self.v_fit),
            "fit_residual": self.fit_residual,
            "family_error": self.family_error,
            "slope": _cjson(self.slope),
            "slope_spread": self.slope_spread,
            "identity_error": self.identity_error,
            "ell0": self.ell0,
            "satellite": self.satellite,
            "corollary_value": _cjson(self.corollary_value),
            "corollary_target": self.corollary_target,
            "transversal": self.transversal,
            "ok": self.ok,
        }


def _conjugator(limb: LimbInfo, m: MapChart):
    """``(L, L^{-1})`` sending the critical disk to the reduced coordinate."""
    if limb.q == 2:
        g = m.beta.shift(1)
        return (lambda z: z * g), (lambda w: g.inverse() * w)
    c = limb.c_theta
    return (lambda z: z.shift(-1) * c), (lambda w: PuiseuxSeries.monomial(1, w / c, m.ctx))


def _reduced_return(m: MapChart, limb: LimbInfo, ztil: complex):
    L, Linv = _conjugator(limb, m)
    z = Linv(ztil) if limb.q != 2 else Linv(PuiseuxSeries.constant(ztil, m.ctx))
    w = m.iterate(z, limb.q)
    if w is INF:
        return INF
    return L(w).reduce()


def _v_of(m: MapChart, limb: LimbInfo) -> complex:
    L, _ = _conjugator(limb, m)
    w = m.iterate(PuiseuxSeries.zero(ctx=m.ctx), limb.q)
    if w is INF:
        raise FitResidualTooLarge("w_q is infinite")
    v = L(w).reduce()
    if v is INF:
        raise FitResidualTooLarge("L(w_q) is not integral")
    return complex(v)


def parabolic_reduction_check(branch: BranchRecord, p: int, n_samples: int = 8) -> ParabolicReport:
    """Fit ``red(L phi^q L^{-1})`` at sample points and compare with ``R_v``."""
    m, limb = branch.map, branch.limb
    q = limb.q
    zs, ws = [], []
    for z in sample_points(n_samples):
        w = _reduced_return(m, limb, z)
        if w is not INF:
            zs.append(z)
            ws.append(complex(w))
    if len(zs) < 6:
        raise FitResidualTooLarge("too few finite sample values")
    coef, resid = _fit_rational2(zs, ws)
    b0 = coef[3]
    v_fit = coef[0] / b0 if abs(b0) > 1e-12 else complex("nan")
    v = _v_of(m, limb)
    ref = np.array([v, v, 1, 1, 1, 0], dtype=complex)
    scale = coef[4] if abs(coef[4]) > 1e-12 else 1.0
    family_error = float(np.max(np.abs(coef / scale - ref)))
    slope = spread = ident = None
    if q == 2:
        gt = limb.gamma_red
        errs = [abs(v - gt), abs(v_fit - gt)]
        for d in (0.25, -0.5j):
            mp = m.with_beta(m.beta + PuiseuxSeries.monomial(-1, d, m.ctx))
            errs.append(abs(_v_of(mp, limb) - (gt + d)))
        ident = float(max(errs))
    else:
        deltas = (0.5, -0.75 + 0.25j)
        slopes = []
        for d in deltas:
            mp = m.with_beta(m.beta + PuiseuxSeries.monomial(1, d, m.ctx))
            slopes.append((_v_of(mp, limb) - v) / d)
        slope = slopes[0]
        spread = float(abs(slopes[0] - slopes[1]))
    ret = first_noncentral_return(limb, m, p)
    target = 0.0 if ret.satellite else -1.0
    cval = R_iterate(v, 0.0, ret.ell)
    kind = "periodic" if ret.satellite else "prefixed"
    return ParabolicReport(q, v, complex(v_fit), resid, family_error, slope, spread, ident,
                           ret.ell, ret.satellite, cval, target,
                           transversality_spotcheck(v, ret.ell, kind))


def transversality_spotcheck(v0: complex, ell0: int, kind: str = "periodic",
                             h: float = 1e-6, tol: float = 1e-6) -> bool:
    """Central-difference check that ``d R_v^{ell0}(0) / dv`` is nonzero at ``v0``."""
    if kind not in ("periodic", "prefixed"):
        raise ValueError(f"unknown kind {kind!r}")
    d = (R_iterate(v0 + h, 0.0, ell0) - R_iterate(v0 - h, 0.0, ell0)) / (2 * h)
    return bool(abs(d) > tol)


# quadratic renormalization

@dataclass(frozen=True)
class QuadraticReport:
    A: complex
    B: complex
    C: complex
    fit_residual: float
    period: Optional[int]
    expected_period: int
    c: complex
    gleason_distance: float

    @property
    def ok(self) -> bool:
        return (self.fit_residual < FIT_TOL and abs(self.A) > FIT_TOL and abs(self.B) > FIT_TOL
                and self.period == self.expected_period and self.gleason_distance < FIT_TOL)

    def to_json(self) -> dict:
        return {
            "A": _cjson(self.A), "B": _cjson(self.B), "C": _cjson(self.C),
            "fit_residual": self.fit_residual,
            "period": self.period, "expected_period": self.expected_period,
            "c": _cjson(self.c), "gleason_distance": self.gleason_distance,
            "ok": self.ok,
        }


def _orbit_period(A, C, n_max, tol=1e-6):
    z = 0.0
    for n in range(1, n_max + 1):
        z = A * z * z + C
        if abs(z) < tol * max(1.0, abs(C)):
            return n
    return None


def _gleason_roots(n: int) -> list[complex]:
    g = gleason_poly(n)
    cs = [int(x) for x in g.all_coeffs()]
    if len(cs) == 2:
        return [complex(-cs[1] / cs[0])]
    with mpmath.workdps(40):
        return [complex(r) for r in mpmath.polyroots(cs, maxsteps=400, extraprec=200)]


def quadratic_renorm_check(branch: BranchRecord, renorm: RenormInfo, p: int) -> QuadraticReport:
    """Fit ``red(M0^{-1} phi^{q'} M0)`` by ``A z^2 + B gamma + C``."""
    if renorm.satellite or renorm.q_prime is None:
        raise ValueError("quadratic renormalization needs a non-satellite branch")
    m = branch.map
    ctx = m.ctx
    rho0, rho1, qp = renorm.rho0, renorm.rho1, renorm.q_prime
    step = PuiseuxSeries.monomial(rho1 - 2 * m.tau_ord, 1.0, ctx)
    rows, vals = [], []
    for g in (0.0, 0.5, -0.3 + 0.7j):
        mg = m.with_beta(m.beta + step * g)
        for z in sample_points(4, avoid=()):
            w = mg.iterate(PuiseuxSeries.monomial(rho0, z, ctx), qp)
            if w is INF:
                raise FitResidualTooLarge("return map sends a sample to infinity")
            red = w.shift(-rho0).reduce()
            if red is INF:
                raise FitResidualTooLarge("return map leaves the periodic ball")
            rows.append([z * z, g, 1.0])
            vals.append(complex(red))
    M = np.array(rows, dtype=complex)
    y = np.array(vals, dtype=complex)
    sol, *_ = np.linalg.lstsq(M, y, rcond=None)
    A, B, C = (complex(x) for x in sol)
    resid = float(np.max(np.abs(M @ sol - y)) / max(1.0, float(np.max(np.abs(y)))))
    n = p // qp
    period = _orbit_period(A, C, 2 * n)
    c = A * C
    dist = min(abs(c - r) for r in _gleason_roots(n))
    return QuadraticReport(A, B, C, resid, period, n, c, float(dist))


# per-branch bundle

@dataclass
class BranchVerification:
    branch: BranchRecord
    entry: LedgerEntry
    tables: list
    satellite: list
    renorm: Optional[RenormInfo]
    parabolic: Optional[ParabolicReport]
    quadratic: Optional[QuadraticReport]
    errors: list = field(default_factory=list)

    @property
    def tables_ok(self) -> bool:
        return all(c.ok for c in self.tables)

    @property
    def satellite_ok(self) -> bool:
        return all(c.ok for c in self.satellite if c.asserted)

    @property
    def renorm_ok(self) -> bool:
        r = self.renorm
        if r is None:
            return False
        if r.satellite:
            return True
        return (r.levels_ok(self.branch.limb.q) and r.cycle_degree == 2 and bool(r.zder_ratio_ok)
                and self.quadratic is not None and self.quadratic.ok)

    @property
    def ok(self) -> bool:
        return (self.entry.main_lemma_ok and self.tables_ok and self.satellite_ok and self.renorm_ok
                and self.parabolic is not None and self.parabolic.ok and not self.errors)

    def to_json(self) -> dict:
        return {
            "branch": self.branch.to_json(),
            "main_lemma": self.entry.to_json(),
            "tables": [c.to_json() for c in self.tables],
            "tables_ok": self.tables_ok,
            "satellite_identities": [c.to_json() for c in self.satellite],
            "satellite_ok": self.satellite_ok,
            "parabolic": None if self.parabolic is None else self.parabolic.to_json(),
            "quadratic_renorm": None if self.quadratic is None else self.quadratic.to_json(),
            "renorm_ok": self.renorm_ok,
            "errors": list(self.errors),
            "ok": self.ok,
        }


def verify_branch(branch: BranchRecord, p: int) -> BranchVerification:
    """Every per-branch check; failures become entries in ``errors``."""
    entry = main_lemma_check(branch, p)
    limb, m = branch.limb, branch.map
    errors, tables, sat = [], [], []
    renorm = para = quad = None
    if limb is None:
        return BranchVerification(branch, entry, [], [], None, None, None, ["no limb match"])
    orbit = critical_orbit(m, p)
    level = level0_structure(limb, m)
    try:
        for pts in region_samples(limb, m, level).values():
            tables.extend(deriv_order_table_check(limb, m, z, level) for z in pts)
        ret = first_noncentral_return(limb, m, p, orbit, level)
        sat = satellite_identities(limb, m, p, ret, orbit)
        renorm = renorm_detect(limb, m, p, orbit, level, ret)
        branch.renorm = renorm
        if not renorm.satellite:
            quad = quadratic_renorm_check(branch, renorm, p)
        para = parabolic_reduction_check(branch, p)
    except (ArithmeticError, ValueError) as exc:
        errors.append(f"{type(exc).__name__}: {exc}")
    return BranchVerification(branch, entry, tables, sat, renorm, para, quad, errors)


# Euler characteristic

LITERAL_VARIANTS = (Variant.KMOD, Variant.PMOD, Variant.NU2_CLOSED_FORM)


def eta_II_oracle(p: int) -> dict:
    """Enumerated type-II counts for every divisor ``d >= 3`` of ``p``."""
    return {d: Fraction(len(type2_centers(d))) for d in divisors(p) if d >= 3}


@dataclass
class VerificationReport:
    p: int
    entries: list
    ledger: DtauLedger
    chi_geometric: Fraction
    chi_oracle: Fraction
    chi_formula: dict
    eta_II_oracle: Fraction
    selected_variant: Variant
    genus_if_connected: Fraction
    genus_consistent: bool
    g_zero_slopes: list = field(default_factory=list)
    branch_checks: list = field(default_factory=list)

    @property
    def main_lemma_ok(self) -> bool:
        return all(e.main_lemma_ok for e in self.entries)

    @property
    def geometric_oracle_agree(self) -> bool:
        return self.chi_geometric == self.chi_oracle

    @property
    def formula_agree(self) -> dict:
        return {k: (v == self.chi_geometric) for k, v in self.chi_formula.items()}

    @property
    def g_zeros_simple(self) -> bool:
        return all(abs(s - 1) < 1e-3 for s in self.g_zero_slopes)

    @property
    def invariants_ok(self) -> bool:
        return (self.main_lemma_ok and self.ledger.bezout_ok and self.geometric_oracle_agree
                and self.g_zeros_simple and all(b.ok for b in self.branch_checks))

    @property
    def exit_code(self) -> int:
        if not self.invariants_ok:
            return 1
        if not self.formula_agree.get(self.selected_variant.value, False):
            return 2
        return 0

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "entries": [e.to_json() for e in self.entries],
            "ledger": self.ledger.to_json(),
            "N_p": self.ledger.N_p,
            "chi_geometric": _frac(self.chi_geometric),
            "chi_oracle": _frac(self.chi_oracle),
            "chi_formula": {k: _frac(v) for k, v in self.chi_formula.items()},
            "eta_II_oracle": _frac(self.eta_II_oracle),
            "selected_variant": self.selected_variant.value,
            "genus_if_connected": _frac(self.genus_if_connected),
            "genus_consistent": self.genus_consistent,
            "genus_caveat": "valid only if S_p is connected",
            "g_zero_slopes": [round(s, 6) for s in self.g_zero_slopes],
            "agreements": {
                "main_lemma": self.main_lemma_ok,
                "bezout": self.ledger.bezout_ok,
                "geometric_oracle": self.geometric_oracle_agree,
                "formula": self.formula_agree,
                "g_zeros_simple": self.g_zeros_simple,
            },
            "branch_checks": [b.to_json() for b in self.branch_checks],
            "exit_code": self.exit_code,
        }


def euler_crosscheck(p: int, branches: Optional[list] = None, entries: Optional[list] = None,
                     variant: Variant = Variant.ORACLE_CALIBRATED, oracle: Optional[dict] = None,
                     branch_checks: Optional[list] = None, g_zero_check: bool = True) -> VerificationReport:
    """Geometric, oracle and formula values of ``chi(S_p)`` side by side."""
    from .curves import g_zero_multiplicity

    if branches is None:
        branches = compute_branches(p)["kept"]
    if entries is None:
        entries = [main_lemma_check(b, p) for b in branches]
    led = dtau_ledger(entries, p)
    oracle = oracle if oracle is not None else eta_II_oracle(p)
    e2_oracle = oracle[p]
    chi_oracle = euler_char(p, e2_oracle)
    chi_formula = {}
    for v in LITERAL_VARIANTS:
        chi_formula[v.value] = euler_char(p, eta_II(p, v).recursion)
    chi_formula[Variant.ORACLE_CALIBRATED.value] = euler_char(
        p, eta_II(p, Variant.ORACLE_CALIBRATED, oracle).recursion)
    genus = genus_if_connected(p, led.chi, led.N_p)
    slopes = []
    if g_zero_check:
        slopes = [g_zero_multiplicity(p, c) for c in type2_centers(p)]
    return VerificationReport(p, entries, led, led.chi, chi_oracle, chi_formula, e2_oracle,
                              Variant(variant), genus.value, genus.consistent, slopes,
                              branch_checks or [])
