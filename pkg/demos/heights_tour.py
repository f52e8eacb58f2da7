"""A tour of canonical heights across genera.

Computes the canonical height of a rational divisor class on three curves:

* genus 1 (y^2 + y = x^3 - x), where an independent doubling-limit estimate
  of the height is available as a sanity check;
* genus 2 (y^2 = x^5 + 3x^2 + 1), a published example value;
* genus 4 (y^2 = x^10 - x^3 + 1), which needs a regular-model file at p = 2.

Each run prints the per-place breakdown: the archimedean theta-function
term, and for every bad prime the length-counted intersection part plus the
rational component-pairing correction.
"""

from pathlib import Path

from hyperheights import HyperCurve, JacPoint, PrecisionContext, UniPoly, height
from hyperheights.cli import parse_model_text

CTX = PrecisionContext(real_digits=30)
FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def show(title, res):
    print(f"\n== {title} ==")
    print(f"height      : {res.total}")
    print(f"multiple    : {res.multiple_used}")
    for t in res.per_place:
        note = f"  [{t.note}]" if t.note else ""
        print(f"  place {t.place!s:>9}: {t.value}  (correction {t.correction}){note}")


# genus 1: y^2 + y = x^3 - x, generator (0, 0)
C1 = HyperCurve(UniPoly([0, -1, 0, 1]), UniPoly([1]))
P1 = JacPoint(C1, UniPoly([0, 1]), UniPoly([0]), 0)
show("genus 1, class of (0,0) - infinity", height(P1, C1, CTX))

# genus 2: y^2 = x^5 + 3x^2 + 1, class of (0,1) - (0,-1); the published
# height is 1.20910894883943045...  The input class has to be doubled
# internally before its two test divisors can be made disjoint.
C2 = HyperCurve(UniPoly([1, 0, 3, 0, 0, 1]), UniPoly([]))
P2 = JacPoint(C2, UniPoly([0, 0, 1]), UniPoly([1]), 0)
show("genus 2, class of (0,1) - (0,-1)", height(P2, C2, CTX))

# genus 4: y^2 = x^10 - x^3 + 1, a split even-degree model with two points
# at infinity.  P is the class of (one affine point) - (one infinite point),
# encoded as Mumford data (x, 1) with infinity imbalance +1.  The ambient
# model is non-regular at p = 2 where the test divisors meet, so a
# regular-model file supplies the intersection data there.  Published
# height: 0.19809838973401855...
C4 = HyperCurve(UniPoly([1, 0, 0, -1] + [0] * 6 + [1]), UniPoly([]))
P4 = JacPoint(C4, UniPoly([0, 1]), UniPoly([1]), 1)
model = parse_model_text((FIXTURES / "genus4_p2.model").read_text())
# 15 digits keeps the genus-4 period computation fast for a demo; raise
# real_digits for publication-grade accuracy.
show(
    "genus 4, with regular model at p = 2",
    height(P4, C4, PrecisionContext(real_digits=15), models={2: model}),
)
