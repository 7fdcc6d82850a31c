"""Serialization, alpha expressions, report rows, and the CLI driver."""

import json
from fractions import Fraction
from math import inf

import pytest

from gadgets import directed_ring, path3, profile

from ncg import (
    EnumerationResult,
    ProfileFormatError,
    TreeConjectureViolation,
    verify_equilibrium,
)
from ncg.cli import cmd_run
from ncg.harness import (
    build_report_row,
    enumerate_cell,
    export_dot,
    load_profile,
    parse_alpha_expression,
    profile_from_document,
    profile_to_document,
    rows_to_csv,
    save_profile,
)
from ncg.equilibrium import DeviationClass


# ---------------------------------------------------------------------------
# profile documents


def test_document_round_trip(tmp_path):
    p = profile(3, Fraction(21, 2), [(0, 1), (1, 2)])
    path = tmp_path / "p.json"
    save_profile(p, path)
    assert load_profile(path) == p
    # canonical documents round-trip byte-identically
    doc = profile_to_document(p)
    save_profile(profile_from_document(doc), path)
    assert json.loads(path.read_text()) == doc


def test_document_examples():
    doc = {"n": 3, "alpha": "5", "edges": [{"buyer": 0, "other": 1}, {"buyer": 1, "other": 2}]}
    assert profile_from_document(doc) == path3(alpha=5)
    assert profile_from_document({"n": 2, "alpha": "21/2", "edges": []}).alpha == Fraction(21, 2)
    assert profile_from_document({"n": 2, "alpha": 7, "edges": []}).alpha == Fraction(7)


@pytest.mark.parametrize(
    "doc,code",
    [
        ({"n": 2, "alpha": "1"}, "missing-field"),
        ({"n": 0, "alpha": "1", "edges": []}, "bad-n"),
        ({"n": 2, "alpha": "x", "edges": []}, "bad-alpha"),
        ({"n": 2, "alpha": "1", "edges": [{"buyer": 0, "other": 5}]}, "id-out-of-range"),
        ({"n": 3, "alpha": "1", "edges": [{"buyer": 2, "other": 2}]}, "self-loop"),
        (
            {"n": 3, "alpha": "1",
             "edges": [{"buyer": 0, "other": 1}, {"buyer": 0, "other": 1}]},
            "duplicate-edge",
        ),
        ({"n": 2, "alpha": "1", "edges": [{"buyer": 0}]}, "bad-type"),
    ],
)
def test_document_error_codes(doc, code):
    with pytest.raises(ProfileFormatError) as err:
        profile_from_document(doc)
    assert err.value.code == code


def test_load_malformed_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ProfileFormatError) as err:
        load_profile(bad)
    assert err.value.code == "malformed-json"


# ---------------------------------------------------------------------------
# dot export


def test_dot_path(tmp_path):
    out = tmp_path / "g.dot"
    export_dot(path3(), out)
    text = out.read_text()
    assert "0 -> 1;" in text and "1 -> 2;" in text
    assert text.startswith("digraph")


def test_dot_double_bought_antiparallel(tmp_path):
    out = tmp_path / "g.dot"
    export_dot(profile(2, 1, [(0, 1), (1, 0)]), out)
    text = out.read_text()
    assert "0 -> 1;" in text and "1 -> 0;" in text


def test_dot_empty_graph(tmp_path):
    out = tmp_path / "g.dot"
    export_dot(profile(3, 1, []), out)
    text = out.read_text()
    assert "->" not in text
    assert "  1;" in text


# ---------------------------------------------------------------------------
# alpha expressions


@pytest.mark.parametrize(
    "expr,n,value",
    [
        ("7", 3, Fraction(7)),
        ("21/2", 3, Fraction(21, 2)),
        ("n", 5, Fraction(5)),
        ("2n", 4, Fraction(8)),
        ("2n+1", 3, Fraction(7)),
        ("3n-3", 4, Fraction(9)),
        ("n/2", 5, Fraction(5, 2)),
        ("3n/2", 4, Fraction(6)),
        ("5n", 4, Fraction(20)),
    ],
)
def test_alpha_expressions(expr, n, value):
    assert parse_alpha_expression(expr)(n) == value


def test_alpha_expression_rejects_garbage():
    for expr in ("2(n-1)", "n^2", "alpha", ""):
        with pytest.raises(ValueError):
            parse_alpha_expression(expr)


# ---------------------------------------------------------------------------
# report rows


def test_report_row_counts_trees():
    result = enumerate_cell(3, Fraction(7), DeviationClass.parse("exact"))
    row = build_report_row(result, run_audits=False)
    assert row.ne_count == row.tree_ne_count >= 1
    assert row.non_tree_ne_count == 0
    assert row.min_girth_among_ne == inf
    assert row.profiles_scanned == 27


def test_report_row_rejects_non_tree_above_2n():
    # fabricated result: a cyclic profile passed off as an equilibrium at alpha > 2n
    ring = directed_ring(3, 7)
    fake = EnumerationResult(
        n=3, alpha=Fraction(7), profiles_scanned=1, connected_count=1,
        equilibria=((ring, verify_equilibrium(ring, DeviationClass.parse("single-add"))),),
    )
    with pytest.raises(TreeConjectureViolation):
        build_report_row(fake, run_audits=False)


def test_report_row_open_band_is_exploratory():
    # alpha inside [n, 2n): non-tree equilibria are data, not failures
    ring = directed_ring(3, 4)
    fake = EnumerationResult(
        n=3, alpha=Fraction(4), profiles_scanned=1, connected_count=1,
        equilibria=((ring, verify_equilibrium(ring, DeviationClass.parse("single-add"))),),
    )
    row = build_report_row(fake, run_audits=False)
    assert row.non_tree_ne_count == 1
    assert row.min_girth_among_ne == 3


def test_csv_shape():
    result = enumerate_cell(3, Fraction(7), DeviationClass.parse("exact"))
    text = rows_to_csv([build_report_row(result, run_audits=False)])
    lines = text.splitlines()
    assert lines[0].startswith("#")
    assert lines[1].split(",")[0] == "n"
    assert lines[2].split(",")[:2] == ["3", "7"]
    assert text.endswith("\n") and "\r" not in text


def test_parallel_and_serial_cells_agree():
    serial = enumerate_cell(3, Fraction(7), DeviationClass.parse("exact"), jobs=1)
    parallel = enumerate_cell(
        3, Fraction(7), DeviationClass.parse("exact"), jobs=2, pool_threshold=1
    )
    assert serial == parallel


# ---------------------------------------------------------------------------
# CLI


def _write_profile(tmp_path, p, name="p.json"):
    path = tmp_path / name
    save_profile(p, path)
    return str(path)


def test_cli_verify_equilibrium(tmp_path, capsys):
    path = _write_profile(tmp_path, path3(alpha=5))
    assert cmd_run(["verify", "--input", path, "--class", "exact"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["is_equilibrium"] is True
    assert out["witness"] is None
    assert out["schema_version"] == 1


def test_cli_verify_witness(tmp_path, capsys):
    path = _write_profile(tmp_path, directed_ring(3, 5))
    assert cmd_run(["verify", "--input", path]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["is_equilibrium"] is False
    assert out["witness"]["vertex"] == 0
    assert out["witness"]["delta"] == "-4"


def test_cli_enumerate_row(tmp_path, capsys):
    dump = tmp_path / "ne"
    code = cmd_run(
        ["enumerate", "--n", "3", "--alpha", "7", "--class", "exact",
         "--jobs", "1", "--dump-dir", str(dump)]
    )
    assert code == 0
    out = capsys.readouterr().out
    row = out.splitlines()[2].split(",")
    assert row[0] == "3" and row[5] == "0"  # no non-tree equilibria
    dumped = sorted(dump.glob("*.json"))
    assert len(dumped) == int(row[3])
    load_profile(dumped[0])  # dumps are valid profile documents


def test_cli_dynamics(tmp_path, capsys):
    path = _write_profile(tmp_path, directed_ring(3, 5))
    assert cmd_run(["dynamics", "--input", path, "--class", "single-delete"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["converged"] is True
    assert out["steps"][0]["delta"] == "-4"


def test_cli_audit(tmp_path, capsys):
    path = _write_profile(tmp_path, path3(alpha=7))
    assert cmd_run(["audit", "--input", path]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["certified_class"] == "exact-all-subsets"
    ids = {f["lemma_id"] for f in out["findings"]}
    assert "mincyclesize" in ids and "degree-sum" in ids


def test_cli_sweep_deterministic(tmp_path):
    args = ["sweep", "--n", "3,4", "--alpha", "2n+1,3n", "--class", "exact", "--jobs", "1"]
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cmd_run(args + ["--out", str(out_a)]) == 0
    assert cmd_run(args + ["--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    assert len(out_a.read_text().splitlines()) == 6  # comment + header + 4 cells


def test_cli_usage_errors(tmp_path, capsys):
    assert cmd_run(["verify"]) == 2  # missing --input
    assert cmd_run(["frobnicate"]) == 2
    capsys.readouterr()
    bad = tmp_path / "missing.json"
    assert cmd_run(["verify", "--input", str(bad)]) == 2
    assert cmd_run(["sweep", "--n", "3", "--alpha", "n^2"]) == 2


def test_cli_budget_error(tmp_path, capsys):
    path = _write_profile(tmp_path, profile(12, 9, [(0, i) for i in range(1, 12)]))
    assert cmd_run(["verify", "--input", path, "--budget", "100"]) == 2
    assert "budget" in capsys.readouterr().err


def test_cli_unknown_flag_rejected(capsys):
    assert cmd_run(["verify", "--input", "x.json", "--frobnicate"]) == 2
