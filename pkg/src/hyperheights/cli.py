"""Command-line interface: height, pairing, regulator, product-formula
selftest and period-matrix calibration, with line-oriented ASCII input
formats and text/JSON reports.

Curve files ("hyperheights curve 1" header) carry ascending coefficient
lists for F and H.  Model files ("hyperheights model 1" header) carry
regular-model data for one prime: component multiplicities, intersection
matrix rows, and optional incidence hints keyed by piece labels.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import mpmath
import sympy

from .algebra import PrecisionContext, UniPoly
from .arch import period_matrix
from .errors import (
    FactorTimeout,
    HyperHeightsError,
    ModelRequired,
    NotSiegel,
    OnThetaDivisor,
    PrecisionExhausted,
)
from .heights import height, pairing, regulator, selftest_product_formula
from .heightprep import _pick_zetas, arrange_divisors
from .jacobian import (
    HyperCurve,
    JacPoint,
    MumfordDivisor,
    cantor_add,
    involution_free,
    jac_mul,
    mumford_to_free,
)
from .nonarch import ModelData

CURVE_HEADER = "hyperheights curve 1"
MODEL_HEADER = "hyperheights model 1"


# ---------------------------------------------------------------------------
# parsing


def _parse_fraction(tok: str) -> Fraction:
    return Fraction(tok)


def parse_curve_text(text: str) -> HyperCurve:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != CURVE_HEADER:
        raise ValueError(f"curve file must start with {CURVE_HEADER!r}")
    fields = {}
    for ln in lines[1:]:
        key, _, rest = ln.partition(":")
        key = key.strip().upper()
        if key not in ("F", "H") or key in fields:
            raise ValueError(f"unexpected curve file line: {ln!r}")
        fields[key] = UniPoly([_parse_fraction(t) for t in rest.split()])
    if "F" not in fields:
        raise ValueError("curve file is missing an F line")
    return HyperCurve(fields["F"], fields.get("H", UniPoly()))


def format_curve_text(C: HyperCurve) -> str:
    def row(poly):
        return " ".join(str(c) for c in poly.coeffs) or "0"

    return f"{CURVE_HEADER}\nF: {row(C.F)}\nH: {row(C.H)}\n"


def parse_model_text(text: str) -> ModelData:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != MODEL_HEADER:
        raise ValueError(f"model file must start with {MODEL_HEADER!r}")
    prime = None
    mults = None
    rows = []
    incidence = {}
    for ln in lines[1:]:
        key, _, rest = ln.partition(":")
        key = key.strip().lower()
        if key == "prime":
            prime = int(rest)
        elif key == "multiplicities":
            mults = tuple(int(t) for t in rest.split())
        elif key == "matrix":
            rows.append(tuple(_parse_fraction(t) for t in rest.split()))
        elif key == "incidence":
            label, *vec = rest.split()
            point_id = None
            if vec and vec[0].startswith("@"):
                point_id = vec[0][1:]
                vec = vec[1:]
            coords = tuple(_parse_fraction(t) for t in vec)
            incidence[label] = (coords, point_id) if point_id else coords
        else:
            raise ValueError(f"unexpected model file line: {ln!r}")
    if prime is None or mults is None or not rows:
        raise ValueError("model file needs prime, multiplicities and matrix rows")
    return ModelData(prime, mults, tuple(rows), incidence).validate()


def format_model_text(m: ModelData) -> str:
    out = [MODEL_HEADER, f"prime: {m.prime}"]
    out.append("multiplicities: " + " ".join(str(n) for n in m.multiplicities))
    for row in m.matrix:
        out.append("matrix: " + " ".join(str(c) for c in row))
    for label, val in sorted(m.incidence.items()):
        if isinstance(val, tuple) and len(val) == 2 and isinstance(val[0], tuple):
            vec, point_id = val
            out.append(
                f"incidence: {label} @{point_id} " + " ".join(str(c) for c in vec)
            )
        else:
            out.append(f"incidence: {label} " + " ".join(str(c) for c in val))
    return "\n".join(out) + "\n"


def _parse_poly(expr: str) -> UniPoly:
    x = sympy.Symbol("x")
    val = sympy.sympify(expr, locals={"x": x}, convert_xor=True, rational=True)
    poly = sympy.Poly(val, x)
    coeffs = [Fraction(int(c.p), int(c.q)) for c in map(sympy.Rational, poly.all_coeffs())]
    return UniPoly(list(reversed(coeffs)))


def parse_point(spec: str, C: HyperCurve) -> JacPoint:
    """Mumford data "a(x);b(x)" with an optional trailing ";n" for the signed
    number of extra points at infinity (split even models only)."""
    parts = [p.strip() for p in spec.split(";")]
    if len(parts) not in (2, 3):
        raise ValueError('point must look like "a(x);b(x)" or "a(x);b(x);n"')
    a = _parse_poly(parts[0])
    b = _parse_poly(parts[1])
    delta = int(parts[2]) if len(parts) == 3 else 0
    return JacPoint(C, a, b, delta)


# ---------------------------------------------------------------------------
# reports


def _fmt(v) -> str:
    return mpmath.nstr(mpmath.mpf(v), 25)


def _place_rows(per_place):
    rows = []
    for t in per_place:
        corr = str(t.correction)
        if t.note == "dodge":
            corr += " (dodge)"
        rows.append(
            {
                "place": str(t.place),
                "value": _fmt(t.value),
                "naive": str(t.naive_part) if t.place != "infinity" else _fmt(t.naive_part),
                "correction": corr,
                "note": t.note,
            }
        )
    return rows


def _emit_height(name, res, report, warnings, out):
    data = {
        "verb": name,
        "total": _fmt(res.total),
        "scale": str(res.scale),
        "multiple": res.multiple_used,
        "digits": res.digits,
        "per_place": _place_rows(res.per_place),
        "warnings": warnings,
    }
    if res.torsion_order:
        data["torsion_order"] = res.torsion_order
    if report == "json":
        out.write(json.dumps(data, indent=2) + "\n")
        return
    out.write(f"{name}: {data['total']}\n")
    out.write(f"scale: {data['scale']}   multiple: {data['multiple']}   digits: {data['digits']}\n")
    if res.torsion_order:
        out.write(f"torsion order: {res.torsion_order}\n")
    for row in data["per_place"]:
        out.write(
            f"  place {row['place']}: value {row['value']}"
            f"   naive: {row['naive']}   correction: {row['correction']}"
            + (f"   [{row['note']}]" if row["note"] else "")
            + "\n"
        )
    for w in warnings:
        out.write(f"warning: {w}\n")


# ---------------------------------------------------------------------------
# commands


def _load_common(args):
    with open(args.curve) as fh:
        C = parse_curve_text(fh.read())
    ctx = PrecisionContext(args.digits, args.padic_digits)
    models = {}
    for path in args.model or ():
        with open(path) as fh:
            m = parse_model_text(fh.read())
        models[m.prime] = m
    return C, ctx, models


def _cmd_height(args, out):
    C, ctx, models = _load_common(args)
    P = parse_point(args.point[0], C)
    zeta = Fraction(args.zeta) if args.zeta is not None else None
    res = height(P, C, ctx, models=models, zeta=zeta, jobs=args.jobs)
    _emit_height("height", res, args.report, [], out)
    return 0


def _cmd_pairing(args, out):
    C, ctx, models = _load_common(args)
    if len(args.point) != 2:
        raise ValueError("pairing needs exactly two --point arguments")
    P = parse_point(args.point[0], C)
    Q = parse_point(args.point[1], C)
    results = []
    for R in (cantor_add(P, Q, C), P, Q):
        results.append(height(R, C, ctx, models=models, jobs=args.jobs))
    with ctx.workdps():
        value = (results[0].total - results[1].total - results[2].total) / 2
    if args.report == "json":
        data = {
            "verb": "pairing",
            "value": _fmt(value),
            "heights": {
                "P+Q": _fmt(results[0].total),
                "P": _fmt(results[1].total),
                "Q": _fmt(results[2].total),
            },
            "digits": ctx.real_digits,
        }
        out.write(json.dumps(data, indent=2) + "\n")
        return 0
    out.write(f"pairing: {_fmt(value)}\n")
    for name, res in zip(("P+Q", "P", "Q"), results):
        _emit_height(f"height({name})", res, args.report, [], out)
    return 0


def _cmd_regulator(args, out):
    C, ctx, models = _load_common(args)
    pts = [parse_point(s, C) for s in args.point]
    value = regulator(pts, C, ctx, models=models, jobs=args.jobs)
    if args.report == "json":
        out.write(
            json.dumps(
                {
                    "verb": "regulator",
                    "value": _fmt(value),
                    "rank": len(pts),
                    "digits": ctx.real_digits,
                },
                indent=2,
            )
            + "\n"
        )
        return 0
    out.write(f"regulator ({len(pts)} points): {_fmt(value)}\n")
    return 0


def _cmd_selftest(args, out):
    C, ctx, models = _load_common(args)
    P = parse_point(args.point[0], C)
    # D must avoid the poles of x - zeta at infinity, so take the affine
    # representative of a multiple of P minus its hyperelliptic involution
    pair = arrange_divisors(P, C)
    Pn = jac_mul(pair.multiple_used, P)
    dt = Pn.reduced_mumford()
    affine = mumford_to_free(MumfordDivisor(dt.a, dt.b, 0, 0), C)
    D = affine - involution_free(affine, C)
    hint = Fraction(args.zeta) if args.zeta is not None else None
    (zeta,) = _pick_zetas(C, affine, 1, hint=hint)
    rep = selftest_product_formula(zeta, D, C, ctx, models=models)
    if args.report == "json":
        data = {
            "verb": "selftest",
            "zeta": str(rep.zeta),
            "total": _fmt(rep.total),
            "tolerance": _fmt(rep.tolerance),
            "passed": rep.passed,
            "per_place": _place_rows(rep.per_place),
        }
        out.write(json.dumps(data, indent=2) + "\n")
    else:
        status = "PASS" if rep.passed else "FAIL"
        out.write(
            f"product formula at zeta={rep.zeta}: sum {_fmt(rep.total)}"
            f" (tolerance {_fmt(rep.tolerance)}) {status}\n"
        )
        for row in _place_rows(rep.per_place):
            out.write(f"  place {row['place']}: value {row['value']}\n")
    return 0 if rep.passed else 4


def _cmd_calibrate(args, out):
    C, ctx, _models = _load_common(args)
    pd = period_matrix(C, ctx)
    g = C.genus
    tau_rows = [
        [_fmt(pd.tau[i, j].real) + ("+" if pd.tau[i, j].imag >= 0 else "-")
         + _fmt(abs(pd.tau[i, j].imag)) + "j" for j in range(g)]
        for i in range(g)
    ]
    data = {
        "verb": "calibrate",
        "genus": g,
        "digits": ctx.real_digits,
        "characteristic_a": [str(Fraction(a)) for a in pd.char_a],
        "characteristic_b": [str(Fraction(b)) for b in pd.char_b],
        "characteristic_substituted": bool(
            getattr(pd, "characteristic_substituted", False)
        ),
        "tau": tau_rows,
    }
    if args.report == "json":
        out.write(json.dumps(data, indent=2) + "\n")
        return 0
    out.write(f"genus {g}, {ctx.real_digits} digits\n")
    out.write(
        "theta characteristic a=(" + ", ".join(data["characteristic_a"]) + ")"
        " b=(" + ", ".join(data["characteristic_b"]) + ")"
        + (" [substituted]" if data["characteristic_substituted"] else " [default]")
        + "\n"
    )
    out.write("period matrix tau:\n")
    for row in tau_rows:
        out.write("  " + "  ".join(row) + "\n")
    return 0


# ---------------------------------------------------------------------------
# entry point


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="hyperheights",
        description="Canonical heights on Jacobians of hyperelliptic curves over Q.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    handlers = {
        "height": _cmd_height,
        "pairing": _cmd_pairing,
        "regulator": _cmd_regulator,
        "selftest": _cmd_selftest,
        "calibrate": _cmd_calibrate,
    }
    for verb, doc in (
        ("height", "canonical height of a point"),
        ("pairing", "height pairing of two points"),
        ("regulator", "Gram determinant of a list of points"),
        ("selftest", "product-formula consistency check"),
        ("calibrate", "period matrix and theta characteristic only"),
    ):
        sp = sub.add_parser(verb, help=doc)
        sp.add_argument("--curve", required=True, help="curve file")
        if verb != "calibrate":
            sp.add_argument(
                "--point",
                action="append",
                required=True,
                help='Mumford data "a(x);b(x)[;n_inf]" (repeatable)',
            )
        sp.add_argument("--model", action="append", help="model file (repeatable)")
        sp.add_argument("--digits", type=int, default=30)
        sp.add_argument("--padic-digits", type=int, default=50)
        sp.add_argument("--zeta", help="rational x-shift / selftest function x - zeta")
        sp.add_argument("--report", choices=("json", "text"), default="text")
        sp.add_argument("--jobs", type=int, default=1, help="concurrent places")
        sp.set_defaults(handler=handlers[verb])
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args, out)
    except ModelRequired as exc:
        print(f"error: regular model required: {exc}", file=sys.stderr)
        return 2
    except FactorTimeout as exc:
        print(f"error: factorization timed out: {exc}", file=sys.stderr)
        return 3
    except (PrecisionExhausted, NotSiegel, OnThetaDivisor) as exc:
        print(f"error: precision failure: {exc}", file=sys.stderr)
        return 4
    except (HyperHeightsError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
