"""Command-line surface: file-format round-trips, point parsing, report
shapes, and exit codes (2 = model required, 3 = factoring budget, 4 =
precision failure, 1 = other errors)."""

import io
import json
from fractions import Fraction
from pathlib import Path

import pytest

from hyperheights import HyperCurve, UniPoly
from hyperheights.cli import (
    format_curve_text,
    format_model_text,
    main,
    parse_curve_text,
    parse_model_text,
    parse_point,
)

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture()
def g1_curve_file(tmp_path):
    C = HyperCurve(UniPoly([0, -1, 0, 1]), UniPoly([1]))
    path = tmp_path / "g1.curve"
    path.write_text(format_curve_text(C))
    return str(path)


def _run(argv):
    out = io.StringIO()
    code = main(argv, out)
    return code, out.getvalue()


# ---------------------------------------------------------------------------
# formats


def test_curve_file_roundtrip():
    for name in ("genus4.curve", "genus2_family.curve", "genus2_torsion.curve"):
        text = (FIXTURES / name).read_text()
        C = parse_curve_text(text)
        assert parse_curve_text(format_curve_text(C)) == C


def test_model_file_roundtrip():
    m = parse_model_text((FIXTURES / "genus4_p2.model").read_text())
    m2 = parse_model_text(format_model_text(m))
    assert m2.prime == m.prime
    assert m2.multiplicities == m.multiplicities
    assert m2.matrix == m.matrix
    assert m2.incidence == m.incidence


def test_curve_file_rejects_bad_header():
    with pytest.raises(ValueError):
        parse_curve_text("something else\nF: 1 2 3\n")


def test_point_parsing():
    C = parse_curve_text((FIXTURES / "genus4.curve").read_text())
    P = parse_point("x; 1; 1", C)
    assert P.u == UniPoly([0, 1]) and P.v == UniPoly([1]) and P.delta == 1
    Q = parse_point("x^2; 1", C)  # (0,1) doubled along the fiber
    assert Q.u == UniPoly([0, 0, 1]) and Q.delta == 0


# ---------------------------------------------------------------------------
# verbs and exit codes


def test_height_text_report(g1_curve_file):
    code, text = _run(
        ["height", "--curve", g1_curve_file, "--point", "x;0", "--digits", "15"]
    )
    assert code == 0
    assert text.startswith("height: 0.05111140823996")
    assert "place infinity" in text


def test_height_json_report(g1_curve_file):
    code, text = _run(
        [
            "height",
            "--curve",
            g1_curve_file,
            "--point",
            "x;0",
            "--digits",
            "15",
            "--report",
            "json",
        ]
    )
    assert code == 0
    data = json.loads(text)
    assert data["verb"] == "height"
    assert data["total"].startswith("0.05111140823996")
    assert any(row["place"] == "infinity" for row in data["per_place"])
    assert data["multiple"] >= 1 and data["digits"] == 15


def test_pairing_equals_height(g1_curve_file):
    code, text = _run(
        [
            "pairing",
            "--curve",
            g1_curve_file,
            "--point",
            "x;0",
            "--point",
            "x;0",
            "--digits",
            "15",
            "--report",
            "json",
        ]
    )
    assert code == 0
    data = json.loads(text)
    assert data["value"].startswith("0.0511114")


def test_selftest_passes(g1_curve_file):
    code, text = _run(
        [
            "selftest",
            "--curve",
            g1_curve_file,
            "--point",
            "x;0",
            "--zeta",
            "3",
            "--digits",
            "20",
        ]
    )
    assert code == 0
    assert "PASS" in text


def test_calibrate_reports_characteristic(g1_curve_file):
    code, text = _run(
        ["calibrate", "--curve", g1_curve_file, "--digits", "15", "--report", "json"]
    )
    assert code == 0
    data = json.loads(text)
    assert data["genus"] == 1
    assert len(data["tau"]) == 1


def test_exit_code_model_required(tmp_path):
    path = tmp_path / "g4.curve"
    path.write_text((FIXTURES / "genus4.curve").read_text())
    code, _text = _run(
        ["height", "--curve", str(path), "--point", "x;1;1", "--digits", "15"]
    )
    assert code == 2


def test_model_flag_unblocks_genus4(tmp_path):
    # with the regular-model file the same height succeeds (cheap precision)
    path = tmp_path / "g4.curve"
    path.write_text((FIXTURES / "genus4.curve").read_text())
    code, text = _run(
        [
            "height",
            "--curve",
            str(path),
            "--point",
            "x;1;1",
            "--model",
            str(FIXTURES / "genus4_p2.model"),
            "--digits",
            "12",
            "--report",
            "json",
        ]
    )
    assert code == 0
    data = json.loads(text)
    assert data["total"].startswith("0.1980983897")
    p2 = next(r for r in data["per_place"] if r["place"] == "2")
    assert p2["correction"] == "-11/21"


def test_exit_code_bad_input(g1_curve_file, tmp_path):
    code, _ = _run(["height", "--curve", str(tmp_path / "nope.curve"), "--point", "x;0"])
    assert code == 1
    code, _ = _run(["height", "--curve", g1_curve_file, "--point", "x;5"])
    assert code == 1  # Mumford invariant violated
