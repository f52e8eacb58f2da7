"""Product-formula self-test and archimedean calibration.

For any rational function f and degree-zero divisor D with disjoint
support, the local symbols satisfy sum over all places of <D, div f>_v = 0
exactly.  Evaluating that sum with f = x - zeta therefore measures the
end-to-end numerical error of the whole local-symbol pipeline: every
nonzero digit of the total is error.

The second half shows the archimedean calibration data directly: the small
period matrix tau of the curve and a consistency check that it is symmetric
with positive-definite imaginary part.
"""

from fractions import Fraction

from mpmath import mp

from hyperheights import (
    HyperCurve,
    PrecisionContext,
    UniPoly,
    selftest_product_formula,
)
from hyperheights.arch import period_matrix
from hyperheights.jacobian import FreeDivisor, point_entry

CTX = PrecisionContext(real_digits=30)

# y^2 + y = x^5 and the divisor D = (0,0) - (0,-1)
C = HyperCurve(UniPoly([0, 0, 0, 0, 0, 1]), UniPoly([1]))
D = FreeDivisor(((point_entry(0, 0), 1), (point_entry(0, -1), -1)))

for zeta in (3, 5, -2):
    rep = selftest_product_formula(Fraction(zeta), D, C, CTX)
    print(f"zeta = {zeta:>2}: total = {mp.nstr(mp.mpf(rep.total), 3)}  "
          f"({'PASS' if rep.passed else 'FAIL'})")
    for term in rep.per_place:
        print(f"    {term.place!s:>9}: {mp.nstr(mp.mpf(term.value), 20)}")

print("\nPeriod calibration:")
pd = period_matrix(C, CTX)
print("genus:", pd.genus)
for i in range(pd.genus):
    print("  tau row", i, ":", "  ".join(mp.nstr(pd.tau[i, j], 15) for j in range(pd.genus)))
with mp.workdps(35):
    asym = max(
        abs(pd.tau[i, j] - pd.tau[j, i])
        for i in range(pd.genus)
        for j in range(pd.genus)
    )
print("max asymmetry:", mp.nstr(asym, 3))
