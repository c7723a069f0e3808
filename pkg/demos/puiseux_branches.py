"""
Newton-Puiseux expansions
=========================

First a toy curve with a cusp, then the branches of the period-5 curve with
their limbs.  Multiplicity mu is the ramification of the branch.
"""

from fractions import Fraction

from periodic_curves.curves import compute_branches, newton_puiseux_raw

# b^2 = t^3: one branch b = t^(3/2) of multiplicity 2
(cusp,) = newton_puiseux_raw({(0, 2): 1, (3, 0): -1}, Fraction(6))
print("cusp: ramification", cusp.ram, "terms", [(str(e), complex(c)) for e, c in cusp.terms])

# (b^2 - t)(b^2 - 2t): two ramified branches with the same order
for br in newton_puiseux_raw({(0, 4): 1, (1, 2): -3, (2, 0): 2}, Fraction(4)):
    print("branch: ramification", br.ram, "leading", complex(br.terms[0][1]))

# period 5: ten punctures, five on each line
res = compute_branches(5)
print("\nperiod 5, truncation", res["trunc"])
for b in res["kept"]:
    lead = " + ".join(f"({c.real:.4g}{c.imag:+.4g}j) t^{e}" for e, c in b.beta.terms()[:3])
    print(f"{b.line.value} mu={b.mu} theta={b.limb.theta_num}/{b.limb.theta_den}  beta = {lead} + ...")
