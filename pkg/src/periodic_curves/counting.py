"""Closed-form counting quantities for the periodic curves S_p.

Everything here is exact: Python integers and :class:`fractions.Fraction`.
The type-II count has several readings of the auxiliary numbers
``nu_q(k)``; they are exposed through :class:`Variant` and never silently
merged, because disagreement between readings is itself a result.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, asdict
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Optional


class Variant(str, enum.Enum):
    """How the residue ``r`` in ``nu_q(k)`` is chosen.

    KMOD
        ``r = k mod q`` (the reading under which the displayed ``nu_2``
        closed form agrees for odd ``k``).
    PMOD
        ``r = p mod q`` exactly as printed.
    NU2_CLOSED_FORM
        ``KMOD`` for ``q >= 3`` but the explicit ``nu_2`` closed form for
        ``q = 2`` (the limb-count reading, which drops the period-2 bulb).
    ORACLE_CALIBRATED
        ``A(p)`` is back-solved from enumerated type-II counts; requires
        oracle data for every divisor ``d >= 3`` of ``p``.
    """

    KMOD = "kmod"
    PMOD = "pmod"
    NU2_CLOSED_FORM = "nu2-closed-form"
    ORACLE_CALIBRATED = "oracle-calibrated"


DEFAULT_VARIANT = Variant.KMOD


def divisors(n: int) -> list[int]:
    if n < 1:
        raise ValueError(f"divisors of non-positive integer {n}")
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def _factor(n: int) -> list[tuple[int, int]]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            k = 0
            while n % d == 0:
                n //= d
                k += 1
            out.append((d, k))
        d += 1
    if n > 1:
        out.append((n, 1))
    return out


def mobius(n: int) -> int:
    if n < 1:
        raise ValueError("mobius needs n >= 1")
    fac = _factor(n)
    if any(k > 1 for _, k in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def totient(n: int) -> int:
    out = n
    for prime, _ in _factor(n):
        out = out // prime * (prime - 1)
    return out


@lru_cache(maxsize=None)
def eta_prime(p: int) -> int:
    """Number of centers of exact period ``p`` in the quadratic family."""
    if p < 1:
        raise ValueError("period must be positive")
    total = sum(mobius(d) * 2 ** (p // d) for d in divisors(p))
    return total // 2


def nu2(p: int) -> int:
    if p < 3:
        raise ValueError("nu2 is only defined for p >= 3")
    return (2**p - 2) // 6 if p % 2 else (2**p - 4) // 6


@lru_cache(maxsize=None)
def nu2_prime(p: int) -> int:
    """Invert ``nu2(p) = sum over divisors d >= 3 of nu2_prime(d)``."""
    if p < 3:
        raise ValueError("nu2_prime is only defined for p >= 3")
    return nu2(p) - sum(nu2_prime(d) for d in divisors(p) if 3 <= d < p)


def nu_q_k(q: int, k: int, p: int, variant: Variant = DEFAULT_VARIANT) -> Fraction:
    """Piecewise ``nu_q(k)``; may be non-integral under some readings."""
    variant = Variant(variant)
    if q < 2 or k < 1:
        raise ValueError("need q >= 2 and k >= 1")
    if variant is Variant.ORACLE_CALIBRATED:
        raise ValueError("the oracle-calibrated variant has no nu_q(k) table")
    if variant is Variant.NU2_CLOSED_FORM and q == 2:
        return Fraction(2**k - 2, 6) if k % 2 else Fraction(2**k - 4, 6)
    r = (p if variant is Variant.PMOD else k) % q
    if r:
        return Fraction(2**k - 2**r, 2 * (2**q - 1))
    return Fraction(1, 2) + Fraction(2**k - 1, 2 * (2**q - 1))


def A_of_p(
    p: int,
    variant: Variant = DEFAULT_VARIANT,
    oracle: Optional[Mapping[int, Fraction]] = None,
) -> Fraction:
    """The correction term ``A(p)`` of the type-II count.

    With ``Variant.ORACLE_CALIBRATED`` the value is the one forced by the
    divisor-sum relation once ``oracle[d]`` (enumerated type-II counts) is
    known for every divisor ``d >= 3`` of ``p``.
    """
    if p < 3:
        raise ValueError("A(p) is only defined for p >= 3")
    variant = Variant(variant)
    if variant is Variant.ORACLE_CALIBRATED:
        if oracle is None:
            raise ValueError("oracle-calibrated A(p) needs enumerated eta_II values")
        missing = [d for d in divisors(p) if d >= 3 and d not in oracle]
        if missing:
            raise KeyError(f"no oracle value for periods {missing}")
        lhs = sum(Fraction(oracle[d]) / d for d in divisors(p) if d >= 3)
        return p * nu2(p) - 2 * p * lhs
    total = Fraction(0)
    for q in range(2, p):
        inner = Fraction(0)
        for k in range(1, p):
            nk = nu_q_k(q, k, p, variant)
            if nk:
                inner += nk * (2 ** (p - k - 1) - nu_q_k(q, p - k, p, variant))
        total += totient(q) * inner
    return p * total


@dataclass(frozen=True)
class EtaII:
    """Both evaluation routes of the type-II count.

    ``inversion`` is the Moebius-inverted closed form (with the sign that
    makes it consistent with the divisor-sum relation), ``recursion`` solves
    the divisor-sum relation period by period, ``printed_sign`` keeps the
    inverted form with a ``+`` in front of the ``A`` sum.
    """

    p: int
    variant: Variant
    inversion: Fraction
    recursion: Fraction
    printed_sign: Fraction

    @property
    def agree(self) -> bool:
        return self.inversion == self.recursion

    @property
    def is_integral(self) -> bool:
        return self.recursion.denominator == 1


def _eta_II_recursive(p, variant, oracle, memo):
    if p in memo:
        return memo[p]
    rhs = Fraction(nu2(p), 2) - A_of_p(p, variant, oracle) / (2 * p)
    lower = sum(_eta_II_recursive(d, variant, oracle, memo) / d
                for d in divisors(p) if 3 <= d < p)
    memo[p] = p * (rhs - lower)
    return memo[p]


def eta_II(
    p: int,
    variant: Variant = DEFAULT_VARIANT,
    oracle: Optional[Mapping[int, Fraction]] = None,
) -> EtaII:
    if p < 3:
        raise ValueError("eta_II is only defined for p >= 3")
    variant = Variant(variant)
    a_sum = sum(d * mobius(d) * A_of_p(p // d, variant, oracle)
                for d in divisors(p) if p // d >= 3)
    base = p * nu2_prime(p)
    return EtaII(
        p=p,
        variant=variant,
        inversion=Fraction(base - a_sum, 2),
        recursion=_eta_II_recursive(p, variant, oracle, {}),
        printed_sign=Fraction(base + a_sum, 2),
    )


def euler_char(p: int, eta_II_value=None) -> Fraction:
    """Euler characteristic of S_p; S_1 and S_2 are the plane and the punctured plane."""
    if p == 1:
        return Fraction(1)
    if p == 2:
        return Fraction(0)
    if eta_II_value is None:
        raise ValueError("p >= 3 needs a type-II count")
    return Fraction(2 * eta_prime(p), 3) - Fraction(eta_II_value)


@dataclass(frozen=True)
class Genus:
    value: Fraction
    consistent: bool


def genus_if_connected(p: int, chi, n_punctures: int) -> Genus:
    """Genus of the compactified curve, valid only if S_p is connected."""
    g = (2 - (Fraction(chi) + n_punctures)) / 2
    return Genus(g, g.denominator == 1 and g >= 0)


@dataclass(frozen=True)
class CountTable:
    p: int
    eta_prime: int
    nu2: Optional[int]
    nu2_prime: Optional[int]
    degree: Optional[int]
    A_p: Optional[Fraction]
    eta_II: Optional[Fraction]
    eta_II_inversion: Optional[Fraction]
    eta_II_printed_sign: Optional[Fraction]
    chi: Optional[Fraction]
    variant: Variant

    def to_json_dict(self) -> dict:
        out = {}
        for key, value in asdict(self).items():
            if isinstance(value, Variant):
                out[key] = value.value
            elif value is None:
                out[key] = None
            else:
                out[key] = str(value)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def count_table(
    p: int,
    variant: Variant = DEFAULT_VARIANT,
    oracle: Optional[Mapping[int, Fraction]] = None,
) -> CountTable:
    variant = Variant(variant)
    if p < 3:
        return CountTable(p, eta_prime(p), None, None, None, None, None, None,
                          None, euler_char(p), variant)
    e2 = eta_II(p, variant, oracle)
    return CountTable(
        p=p,
        eta_prime=eta_prime(p),
        nu2=nu2(p),
        nu2_prime=nu2_prime(p),
        degree=nu2_prime(p),
        A_p=A_of_p(p, variant, oracle),
        eta_II=e2.recursion,
        eta_II_inversion=e2.inversion,
        eta_II_printed_sign=e2.printed_sign,
        chi=euler_char(p, e2.recursion),
        variant=variant,
    )
