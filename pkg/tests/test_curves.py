from collections import defaultdict
from fractions import Fraction

import mpmath
import pytest
import sympy

from periodic_curves.counting import eta_prime
from periodic_curves.curves import (
    BranchRecord, IllConditioned, IntBivarPoly, Line, canonical_conjugate, chart_poly,
    compute_branches, default_trunc, g_zero_multiplicity, gleason, gleason_poly, load_branches,
    newton_puiseux, newton_puiseux_raw, omega_pair, omega_poly, save_branches, true_period,
    type2_centers,
)
from periodic_curves.dynamics import Chart
from periodic_curves.series import DEFAULT_CONTEXT, PuiseuxSeries

a_, b_, c_ = sympy.symbols("a b c")


def symbolic_omega(n):
    """w_0 = 0, w_1 = oo, w_2 = 1, then w -> 1 + b/w + a/w^2."""
    assert n >= 2
    w = sympy.Integer(1)
    for _ in range(n - 2):
        w = sympy.cancel(1 + b_ / w + a_ / w**2)
    return w


# integer polynomials

def test_int_bivar_poly_ring_matches_sympy():
    P = IntBivarPoly({(1, 0): 2, (0, 2): -3, (0, 0): 1})
    Q = IntBivarPoly({(1, 1): 1, (0, 0): 4})
    expr = (P * Q + P).to_sympy(a_, b_).as_expr()
    assert sympy.expand(expr - ((2 * a_ - 3 * b_**2 + 1) * (a_ * b_ + 4) + 2 * a_ - 3 * b_**2 + 1)) == 0
    assert P.degree() == 2 and P.degree_a() == 1 and P.degree_b() == 2
    assert IntBivarPoly({(0, 0): 6, (1, 0): 4}).content() == 2
    assert P.evaluate(2, 1) == 2
    back = IntBivarPoly.from_sympy(sympy.Poly(expr, a_, b_))
    assert back.coeffs == (P * Q + P).coeffs


@pytest.mark.parametrize("n", [3, 4, 5])
def test_omega_matches_symbolic_iteration(n):
    N, D = omega_pair(n)
    sym = symbolic_omega(n)
    ratio = sympy.cancel(N.to_sympy(a_, b_).as_expr() / D.to_sympy(a_, b_).as_expr() - sym)
    assert ratio == 0


def test_omega_small_cases():
    # w_3 = 1 + b + a, up to a power of a carried by the unreduced recursion
    q = sympy.cancel(omega_poly(3).to_sympy(a_, b_).as_expr() / (1 + a_ + b_))
    assert q.is_Pow or q == 1 or q == a_
    assert q.free_symbols <= {a_}
    with pytest.raises(ValueError):
        omega_poly(0)
    with pytest.raises(ValueError):
        omega_pair(-1)


def test_chart_poly_minus_reverses_a_degree():
    P = omega_poly(3)
    d = P.degree_a()
    assert chart_poly(P, Chart.PLUS) == P.coeffs
    assert chart_poly(P, Chart.MINUS) == {(d - i, j): v for (i, j), v in P.coeffs.items()}
    assert chart_poly(IntBivarPoly({(0, 0): 1, (1, 1): 1, (1, 0): 1}), Chart.MINUS) == \
        {(1, 0): 1, (0, 1): 1, (0, 0): 1}


# Newton-Puiseux on curves with known branches

def _raw(H, trunc=8):
    return newton_puiseux_raw(H, Fraction(trunc))


def test_cusp_has_one_ramified_branch():
    # b^2 - t^3: b = +-t^(3/2), a single branch of multiplicity 2
    br = _raw({(0, 2): 1, (3, 0): -1})
    assert len(br) == 1 and br[0].ram == 2
    (e, c), = br[0].terms
    assert e == Fraction(3, 2) and abs(abs(c) - 1) < 1e-40


def test_shifted_cusp():
    # (b - t)^2 - t^3: b = t +- t^(3/2)
    H = {(0, 2): 1, (1, 1): -2, (2, 0): 1, (3, 0): -1}
    br = _raw(H)
    assert len(br) == 1 and br[0].ram == 2
    terms = dict(br[0].terms)
    assert abs(terms[Fraction(1)] - 1) < 1e-40 and abs(abs(terms[Fraction(3, 2)]) - 1) < 1e-40
    assert all(abs(c) < 1e-30 for e, c in br[0].terms if e not in (1, Fraction(3, 2)))


def test_two_ramified_branches_same_order():
    # (b^2 - t)(b^2 - 2t): b = +-t^(1/2) and b = +-sqrt(2) t^(1/2)
    H = {(0, 4): 1, (1, 2): -3, (2, 0): 2}
    br = _raw(H)
    assert len(br) == 2 and all(b.ram == 2 for b in br)
    with mpmath.workdps(60):
        lead = sorted(abs(dict(b.terms)[Fraction(1, 2)]) ** 2 for b in br)
    assert abs(lead[0] - 1) < 1e-40 and abs(lead[1] - 2) < 1e-40


def test_exact_smooth_branches():
    # b (b - t): b = 0 and b = t, both exact
    br = _raw({(0, 2): 1, (1, 1): -1})
    assert len(br) == 2 and all(b.exact and b.ram == 1 for b in br)
    assert sorted(len(b.terms) for b in br) == [0, 1]


def test_newton_puiseux_period_three():
    P = omega_poly(3)
    (plus, mu_p), = newton_puiseux(P, Chart.PLUS, 10)
    (minus, mu_m), = newton_puiseux(P, Chart.MINUS, 10)
    assert mu_p == mu_m == 1
    assert plus.close_to(PuiseuxSeries.from_terms({0: -1, 1: -1}))
    assert minus.close_to(PuiseuxSeries.from_terms({-1: -1, 0: -1}))


def test_canonical_conjugate_is_a_class_invariant():
    s = PuiseuxSeries.from_terms({Fraction(1, 2): 1.0, 1: 2.0, Fraction(3, 2): 0.5})
    flipped = PuiseuxSeries.from_terms({Fraction(1, 2): -1.0, 1: 2.0, Fraction(3, 2): -0.5})
    assert canonical_conjugate(s).terms() == canonical_conjugate(flipped).terms()


# branches

@pytest.mark.parametrize("p", [3, 4, 5, 6])
def test_bezout_sums_per_line(p):
    res = compute_branches(p)
    sums = defaultdict(int)
    for b in res["kept"] + res["dropped"]:
        sums[b.line] += b.mu
    # exact period p plus lower periods d | p, d >= 3, account for the whole line
    lower = sum(eta_prime(d) // 3 for d in range(3, p) if p % d == 0)
    assert sums[Line.LPLUS] == sums[Line.LMINUS] == eta_prime(p) // 3 + lower
    assert all(b.exact_period == p for b in res["kept"])
    assert all(b.residual == 0.0 for b in res["kept"])


def test_period_six_drops_period_three():
    res = compute_branches(6)
    assert sorted(b.exact_period for b in res["dropped"]) == [3, 3]
    assert {b.line for b in res["dropped"]} == {Line.LPLUS, Line.LMINUS}


def test_true_period_detects_divisor():
    b3 = compute_branches(3)["kept"][0]
    assert true_period(b3.map, 6) == 3
    assert true_period(b3.map, 3) == 3


def test_branch_json_roundtrip():
    for b in compute_branches(4)["kept"]:
        back = BranchRecord.from_json(b.to_json(), max_den=4)
        assert back.beta.terms() == b.beta.terms() and back.line is b.line and back.mu == b.mu
        assert back.limb.theta_num == b.limb.theta_num and back.limb.q == b.limb.q


def test_cache_roundtrip(tmp_path):
    kept = compute_branches(4)["kept"]
    path = save_branches(str(tmp_path), 4, default_trunc(4), 53, 1e-9, kept)
    assert path.endswith(".json")
    back = load_branches(str(tmp_path), 4, default_trunc(4), 53, 1e-9, DEFAULT_CONTEXT)
    assert [b.to_json() for b in back] == [b.to_json() for b in kept]
    assert load_branches(str(tmp_path), 5, default_trunc(5), 53, 1e-9, DEFAULT_CONTEXT) is None


# Gleason polynomials

@pytest.mark.parametrize("p,expected", [
    (1, c_), (2, c_ + 1), (3, c_**3 + 2 * c_**2 + c_ + 1),
])
def test_gleason_hand_values(p, expected):
    assert sympy.expand(gleason_poly(p).as_expr() - expected) == 0


@pytest.mark.parametrize("p", range(1, 8))
def test_gleason_matches_factorization(p):
    # Q^p(0) is the product of G_d over d | p
    z = sympy.Integer(0)
    for _ in range(p):
        z = sympy.expand(z**2 + c_)
    prod = sympy.Integer(1)
    for d in sympy.divisors(p):
        prod *= gleason_poly(d).as_expr()
    assert sympy.expand(prod - z) == 0


def test_gleason_certificate():
    g, cert = gleason(6)
    assert cert.squarefree and cert.degree == eta_prime(6) and cert.gcd_with_derivative == "1"


# type-II centers

def test_type2_centers_period_three():
    cs = type2_centers(3)
    got = sorted((round(c.a.real, 9), round(c.b.real, 9)) for c in cs)
    assert got == [(-1.0, 0.0), (1.0, -2.0)]
    assert all(c.residual < 1e-8 for c in cs)


@pytest.mark.parametrize("p,count", [(3, 2), (4, 6), (5, 20)])
def test_type2_center_counts(p, count):
    cs = type2_centers(p)
    assert len(cs) == count
    # the G-zeros along the curve are simple
    assert all(abs(g_zero_multiplicity(p, c) - 1) < 1e-3 for c in cs)


def test_type2_centers_domain():
    with pytest.raises(ValueError):
        type2_centers(2)
    assert issubclass(IllConditioned, ArithmeticError)
