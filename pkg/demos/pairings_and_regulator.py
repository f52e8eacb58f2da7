"""Height pairings and regulators.

The canonical height extends to a symmetric bilinear pairing
<P, Q> = (h(P + Q) - h(P) - h(Q)) / 2 on the Jacobian's rational points;
the regulator of a tuple of classes is the Gram determinant of that
pairing.  This script builds the 2x2 Gram matrix for a point and its
double on a genus-1 Jacobian (necessarily singular: the rows are linearly
dependent), then demonstrates the quadratic scaling law
Reg(nP, mQ) = (nm)^2 Reg(P, Q).
"""

from mpmath import mp

from hyperheights import (
    HyperCurve,
    JacPoint,
    PrecisionContext,
    UniPoly,
    pairing,
    regulator,
)
from hyperheights.jacobian import jac_mul

CTX = PrecisionContext(real_digits=30)

# y^2 + y = x^3 - x with generator P = class of (0,0) - infinity
C = HyperCurve(UniPoly([0, -1, 0, 1]), UniPoly([1]))
P = JacPoint(C, UniPoly([0, 1]), UniPoly([0]), 0)
Q = jac_mul(2, P)

print("Gram matrix of (P, 2P):")
gram = [[pairing(A, B, C, CTX) for B in (P, Q)] for A in (P, Q)]
for row in gram:
    print("  ", "  ".join(mp.nstr(v, 20) for v in row))

print("\n<P, 2P> should be 2 <P, P>:")
print("  <P, P>  =", mp.nstr(gram[0][0], 20))
print("  <P, 2P> =", mp.nstr(gram[0][1], 20))

det = gram[0][0] * gram[1][1] - gram[0][1] * gram[1][0]
print("\ndet Gram(P, 2P) (linearly dependent, so ~ 0):", mp.nstr(det, 5))

print("\nRegulator scaling on the single generator:")
r1 = regulator([P], C, CTX)
r3 = regulator([jac_mul(3, P)], C, CTX)
print("  Reg(P)   =", mp.nstr(r1, 20))
print("  Reg(3P)  =", mp.nstr(r3, 20))
print("  ratio    =", mp.nstr(r3 / r1, 10), " (expect 9)")
