"""
Counting hyperbolic components and type-II centers
==================================================

Exact integer counts behind the Euler characteristic of the periodic curves.
"""

from fractions import Fraction

from periodic_curves.counting import Variant, count_table, eta_II, eta_prime, nu2

# eta'(p): number of period-p centers of z^2 + c; nu2(p): cycles of period p
print(" p  eta'(p)  nu2(p)")
for p in range(3, 11):
    print(f"{p:2d} {eta_prime(p):8d} {nu2(p):7d}")

# the divisor sum of eta' counts all roots of Q_c^p(0)
p = 12
print("\nsum of eta'(d) over d | 12 =", sum(eta_prime(d) for d in (1, 2, 3, 4, 6, 12)), "= 2^11")

# The literal readings of the type-II count give fractional or negative
# values at p = 4 and 5; the oracle-calibrated variant uses enumerated counts.
oracle = {3: Fraction(2), 4: Fraction(6), 5: Fraction(20)}
print("\nvariant             eta_II(4)   eta_II(5)")
for v in Variant:
    vals = [eta_II(q, v, oracle if v is Variant.ORACLE_CALIBRATED else None).recursion for q in (4, 5)]
    print(f"{v.value:18s} {str(vals[0]):>10s} {str(vals[1]):>11s}")

# a full table as the CLI reports it
print("\n", count_table(6).to_json())
