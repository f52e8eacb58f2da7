"""Regular-model files: what they encode and when they are needed.

The local symbol at a bad prime has two pieces: a length-counted
intersection number, which only makes sense on a regular model, and a
rational correction from the component pairing of the special fiber.  When
the ambient model of the curve is regular wherever the two test divisors
meet, both pieces are computed automatically.  When it is not, the
computation refuses (ModelRequired) rather than silently returning a wrong
answer — and a model file for that prime unblocks it.

This script triggers the refusal on the genus-4 curve y^2 = x^10 - x^3 + 1
at p = 2, prints the model file that resolves it, and reruns the height.
"""

from pathlib import Path

from hyperheights import (
    HyperCurve,
    JacPoint,
    ModelRequired,
    PrecisionContext,
    UniPoly,
    height,
)
from hyperheights.cli import parse_model_text

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
CTX = PrecisionContext(real_digits=15)

C = HyperCurve(UniPoly([1, 0, 0, -1] + [0] * 6 + [1]), UniPoly([]))
P = JacPoint(C, UniPoly([0, 1]), UniPoly([1]), 1)

print("Without a model at p = 2:")
try:
    height(P, C, CTX)
except ModelRequired as exc:
    print("  ModelRequired:", exc)

model_path = FIXTURES / "genus4_p2.model"
print(f"\nThe model file ({model_path.name}), comments stripped:")
for line in model_path.read_text().splitlines():
    line = line.strip()
    if line and not line.startswith("#"):
        print("  ", line)

model = parse_model_text(model_path.read_text())
print("\ncomponents:", len(model.multiplicities),
      " multiplicities:", model.multiplicities)

res = height(P, C, CTX, models={2: model})
print("\nWith the model:")
print("  height:", res.total)
p2 = next(t for t in res.per_place if t.place == 2)
print("  p = 2 term:", p2.value, " correction:", p2.correction, " note:", p2.note)
