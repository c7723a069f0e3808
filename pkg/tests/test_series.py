from fractions import Fraction

import numpy as np
import pytest
import sympy

from periodic_curves.series import (
    DEFAULT_CONTEXT, INF, IndeterminateOrder, Jet, PuiseuxSeries, SeriesContext, SeriesZeroDivision,
    ord0, reduce, spherical_ord,
)

T = sympy.Symbol("t")


def S(terms, trunc=None):
    return PuiseuxSeries.from_terms(terms, trunc=trunc)


def sympy_coeffs(expr, n):
    """Taylor coefficients of ``expr`` in t up to ``t^(n-1)`` (the oracle)."""
    ser = sympy.series(expr, T, 0, n).removeO()
    return {k: complex(ser.coeff(T, k)) for k in range(n)}


def assert_matches(series, coeffs, tol=1e-12):
    for k, c in coeffs.items():
        assert abs(series.coefficient(k) - c) < tol, (k, series.coefficient(k), c)


def test_infinity_sentinel():
    assert INF > Fraction(10**9) and INF >= INF and not INF < 5
    assert INF + 3 is INF
    with pytest.raises(ArithmeticError):
        -INF
    import pickle
    assert pickle.loads(pickle.dumps(INF)) is INF


def test_basic_inspection():
    s = S({Fraction(1, 2): 2.0, 3: -1.0}, trunc=5)
    assert s.ram == 2 and s.ord0() == Fraction(1, 2) and s.leading() == 2
    assert s.coefficient(Fraction(1, 3)) == 0
    with pytest.raises(IndeterminateOrder):
        s.coefficient(6)
    assert S({}).ord0() is INF and S({}).is_exact
    assert S({}, trunc=3).is_zero_to_trunc
    assert S({-1: 1.0}).reduce() is INF
    assert S({0: 2.0, 1: 1.0}).reduce() == 2
    assert S({1: 2.0}).reduce() == 0
    assert reduce(INF) is INF
    with pytest.raises(ValueError):
        ord0(INF)


def test_product_matches_sympy():
    a = S({0: 1.0, 1: 2.0, 2: -3.0})
    b = S({0: 4.0, 1: -1.0})
    prod = a * b
    assert_matches(prod, sympy_coeffs((1 + 2 * T - 3 * T**2) * (4 - T), 4))
    assert prod.is_exact


def test_geometric_quotient_matches_sympy():
    one = PuiseuxSeries.constant(1.0)
    q = one / S({0: 1.0, 1: -1.0})
    assert_matches(q, sympy_coeffs(1 / (1 - T), 10))
    assert q.trunc is not None


def test_rational_quotient_matches_sympy():
    num = S({0: 2.0, 1: 3.0, 3: 1.0})
    den = S({0: 1.0, 1: 1.0, 2: 5.0})
    q = num / den
    assert_matches(q, sympy_coeffs((2 + 3 * T + T**3) / (1 + T + 5 * T**2), 10), tol=1e-9)


def test_laurent_quotient_and_inverse():
    s = S({1: 2.0, 2: 1.0})
    inv = s.inverse()
    assert inv.ord0() == -1
    assert_matches(inv.shift(1), sympy_coeffs(1 / (2 + T), 8))


def test_puiseux_ramification_merges():
    a = S({Fraction(1, 2): 1.0})
    b = S({Fraction(1, 3): 1.0})
    c = a * b
    assert c.ram == 6 and c.ord0() == Fraction(5, 6)
    assert (a + b).ord0() == Fraction(1, 3)


def test_power_and_truncation():
    x = S({0: 1.0, 1: 1.0})
    assert_matches(x**5, sympy_coeffs((1 + T) ** 5, 6))
    assert (x**-1).trunc is not None
    assert x.truncate(1).terms() == [(Fraction(0), 1 + 0j)]


def test_truncation_propagates():
    a = S({0: 1.0}, trunc=3)
    b = S({1: 1.0})
    assert (a * b).trunc == 4
    assert (a + b).trunc == 3


def test_division_by_zero():
    with pytest.raises((SeriesZeroDivision, ZeroDivisionError)):
        PuiseuxSeries.constant(1.0) / S({})


def test_cancellation_threshold():
    # a relative cancellation at the 1e-12 level is treated as zero
    a = S({0: 1.0, 1: 1.0})
    b = S({0: 1.0 + 1e-13, 1: 1.0})
    d = a - b
    assert d.is_zero
    ctx = SeriesContext(tol_rel=1e-15)
    d2 = a.with_ctx(ctx) - b.with_ctx(ctx)
    assert not d2.is_zero


def test_evaluate():
    s = S({Fraction(1, 2): 1.0, 1: 2.0})
    t = 0.01
    assert abs(s.evaluate(t) - (np.sqrt(t) + 2 * t)) < 1e-14


def test_json_roundtrip():
    s = S({Fraction(-1, 3): 1 + 2j, Fraction(2, 3): -0.5}, trunc=4)
    r = PuiseuxSeries.from_json(s.to_json())
    assert r.terms() == s.terms() and r.trunc == s.trunc and r.ram == s.ram


def test_close_to():
    a = S({0: 1.0, 1: 2.0}, trunc=3)
    assert a.close_to(S({0: 1.0, 1: 2.0 + 1e-12}))
    assert not a.close_to(S({0: 1.0, 1: 2.1}))


def test_spherical_ord():
    a = S({0: 1.0, 2: 1.0})
    b = S({0: 1.0})
    assert spherical_ord(a, b) == 2
    assert spherical_ord(S({-1: 1.0}), INF) == 1
    # 1/t^-2 - 1/(t^-2 + 1) = t^4 - t^6 + ...
    assert spherical_ord(S({-2: 1.0}), S({-2: 1.0, 0: 1.0})) == 4
    assert spherical_ord(S({0: 1.0}), S({-1: 1.0})) == 0
    assert spherical_ord(INF, INF) is INF
    with pytest.raises(IndeterminateOrder):
        spherical_ord(S({0: 1.0}, trunc=2), S({0: 1.0}, trunc=2))


def test_jet_derivative_matches_sympy():
    # d/dbeta of (beta^2 + 1) / beta at beta = 2 + t
    beta = S({0: 2.0, 1: 1.0})
    j = Jet.variable(beta)
    f = (j * j + 1) / j
    b = sympy.Symbol("b")
    expr = sympy.diff((b**2 + 1) / b, b).subs(b, 2 + T)
    assert_matches(f.dbeta, sympy_coeffs(expr, 6), tol=1e-9)
    assert_matches(f.value, sympy_coeffs(((2 + T) ** 2 + 1) / (2 + T), 6), tol=1e-9)


def test_default_context():
    assert DEFAULT_CONTEXT.tol_rel == 1e-9
    assert DEFAULT_CONTEXT.with_depth(20).depth == 20
