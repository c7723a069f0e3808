from fractions import Fraction

import pytest
import sympy
from sympy.functions.combinatorial.numbers import mobius as sympy_mobius

from periodic_curves.counting import (
    A_of_p, Variant, count_table, divisors, eta_II, eta_prime, euler_char, genus_if_connected,
    mobius, nu2, nu2_prime, nu_q_k, totient,
)
from periodic_curves.curves import gleason_poly


# [TRIVIAL] values straight from the definitions
@pytest.mark.parametrize("n,expected", [(1, 1), (6, 1), (12, 0), (2, -1), (30, -1)])
def test_mobius_values(n, expected):
    assert mobius(n) == expected


def test_mobius_matches_sympy():
    for n in range(1, 300):
        assert mobius(n) == int(sympy_mobius(n))


def test_divisors_and_totient_match_sympy():
    for n in range(1, 200):
        assert divisors(n) == sympy.divisors(n)
        assert totient(n) == int(sympy.totient(n))


def test_eta_prime_trivial():
    assert eta_prime(1) == 1


# [DERIVED] hand values, cross-checked against the Gleason degree
@pytest.mark.parametrize("p,expected", [(3, 3), (6, 27), (4, 6), (5, 15)])
def test_eta_prime_derived(p, expected):
    assert eta_prime(p) == expected


@pytest.mark.parametrize("p", range(1, 9))
def test_eta_prime_equals_gleason_degree(p):
    assert eta_prime(p) == gleason_poly(p).degree()


@pytest.mark.parametrize("p,expected", [(3, 1), (4, 2), (6, 10)])
def test_nu2_derived(p, expected):
    assert nu2(p) == expected


def test_nu2_prime_values():
    assert nu2_prime(3) == 1
    assert nu2_prime(6) == 10 - 1
    assert [nu2_prime(p) for p in range(3, 9)] == [eta_prime(p) // 3 for p in range(3, 9)]


def test_domain_errors():
    for f in (nu2, nu2_prime):
        with pytest.raises(ValueError):
            f(2)
    with pytest.raises(ValueError):
        mobius(0)
    with pytest.raises(ValueError):
        eta_II(2)
    with pytest.raises(ValueError):
        A_of_p(2)


def test_nu_q_k_readings():
    # odd k: the KMOD reading of nu_2 agrees with the closed form
    for k in (3, 5, 7):
        assert nu_q_k(2, k, 9) == Fraction(2**k - 2, 6)
    # PMOD uses p mod q and can be non-integral
    assert nu_q_k(3, 4, 4, Variant.PMOD) == Fraction(2**4 - 2, 14)
    with pytest.raises(ValueError):
        nu_q_k(2, 3, 5, Variant.ORACLE_CALIBRATED)


def test_inversion_uses_consistent_sign():
    # the inverted form must agree with the period-by-period recursion
    for variant in (Variant.KMOD, Variant.PMOD, Variant.NU2_CLOSED_FORM):
        for p in range(3, 13):
            e = eta_II(p, variant)
            assert e.agree, (variant, p)


def test_printed_sign_disagrees_somewhere():
    assert any(eta_II(p).printed_sign != eta_II(p).recursion for p in range(3, 10))


def test_oracle_calibrated_recovers_oracle():
    # the enumerated type-II counts at p = 3, 4, 5 are 2, 6, 20
    oracle = {3: Fraction(2), 4: Fraction(6), 5: Fraction(20)}
    assert A_of_p(3, Variant.ORACLE_CALIBRATED, oracle) == -1
    for p in (3, 4, 5):
        e = eta_II(p, Variant.ORACLE_CALIBRATED, oracle)
        assert e.recursion == oracle[p]
        assert e.agree
    with pytest.raises(ValueError):
        A_of_p(3, Variant.ORACLE_CALIBRATED)
    with pytest.raises(KeyError):
        A_of_p(6, Variant.ORACLE_CALIBRATED, {6: 1})


def test_literal_variants_are_not_valid_counts():
    # every literal reading gives a negative or non-integral count at p = 4 or 5
    for variant in (Variant.KMOD, Variant.PMOD, Variant.NU2_CLOSED_FORM):
        vals = [eta_II(p, variant).recursion for p in (4, 5)]
        assert any(v < 0 or v.denominator != 1 for v in vals), variant


def test_euler_char_small_periods():
    assert euler_char(1) == 1
    assert euler_char(2) == 0
    assert euler_char(3, 2) == 0
    with pytest.raises(ValueError):
        euler_char(3)


def test_genus_caveat():
    g = genus_if_connected(3, 0, 2)
    assert g.value == 0 and g.consistent
    assert not genus_if_connected(5, Fraction(-11), 10).consistent


def test_count_table_json():
    t = count_table(6)
    d = t.to_json_dict()
    assert d["eta_prime"] == "27" and d["degree"] == "9" and d["variant"] == "kmod"
    assert t.to_json() == count_table(6).to_json()
    small = count_table(2)
    assert small.chi == 0 and small.nu2 is None
