"""Serialization, alpha grids, and the batch experiment driver.

Profile documents are plain JSON: ``{"n": int, "alpha": "p/q" | int,
"edges": [{"buyer": int, "other": int}, ...]}``.  Reports are CSV rows with
a versioned header comment; a sweep runs one exhaustive enumeration per
(n, alpha) cell.  Everything is deterministic for a fixed argv and seed,
including under worker sharding.
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import inf
from pathlib import Path

from .audit import audit_full, build_context
from .equilibrium import (
    DeviationClass,
    EnumerationResult,
    StrategyProfile,
    VerificationReport,
    profile_from_index,
    scan_profile_range,
)
from .errors import ProfileFormatError, TreeConjectureViolation
from .game import BoughtEdge
from .structure import global_girth

SCHEMA_VERSION = 1
CSV_HEADER_COMMENT = "# ncg report v1"
CSV_COLUMNS = (
    "n",
    "alpha",
    "profiles_scanned",
    "ne_count",
    "tree_ne_count",
    "non_tree_ne_count",
    "min_girth_among_ne",
    "audit_failures",
)


# ---------------------------------------------------------------------------
# profile documents


def format_fraction(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_fraction(text) -> Fraction:
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, str):
        m = re.fullmatch(r"\s*(-?\d+)\s*(?:/\s*(\d+)\s*)?", text)
        if m:
            return Fraction(int(m.group(1)), int(m.group(2) or 1))
    raise ProfileFormatError("bad-alpha", f"cannot parse rational {text!r}")


def profile_to_document(profile: StrategyProfile) -> dict:
    return {
        "n": profile.n,
        "alpha": format_fraction(profile.alpha),
        "edges": [
            {"buyer": e.buyer, "other": e.other} for e in sorted(profile.edges)
        ],
    }


def profile_from_document(doc: dict) -> StrategyProfile:
    if not isinstance(doc, dict):
        raise ProfileFormatError("bad-type", "profile document must be an object")
    for key in ("n", "alpha", "edges"):
        if key not in doc:
            raise ProfileFormatError("missing-field", f"missing field {key!r}")
    n = doc["n"]
    if not isinstance(n, int) or n < 1:
        raise ProfileFormatError("bad-n", f"n must be a positive integer, got {n!r}")
    alpha = parse_fraction(doc["alpha"])
    edges = []
    seen = set()
    for item in doc["edges"]:
        if not isinstance(item, dict) or "buyer" not in item or "other" not in item:
            raise ProfileFormatError("bad-type", f"malformed edge entry {item!r}")
        buyer, other = item["buyer"], item["other"]
        if not (isinstance(buyer, int) and isinstance(other, int)):
            raise ProfileFormatError("bad-type", f"edge ids must be integers: {item!r}")
        if not (0 <= buyer < n and 0 <= other < n):
            raise ProfileFormatError(
                "id-out-of-range", f"edge {buyer}-{other} outside [0, {n})"
            )
        if buyer == other:
            raise ProfileFormatError("self-loop", f"self-loop at {buyer}")
        if (buyer, other) in seen:
            raise ProfileFormatError(
                "duplicate-edge", f"duplicate bought edge {buyer}-{other}"
            )
        seen.add((buyer, other))
        edges.append(BoughtEdge(buyer, other))
    return StrategyProfile(n, alpha, tuple(edges))


def load_profile(path) -> StrategyProfile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ProfileFormatError("io-error", f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileFormatError("malformed-json", f"{path}: {exc}") from exc
    return profile_from_document(doc)


def save_profile(profile: StrategyProfile, path) -> None:
    doc = profile_to_document(profile)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def export_dot(profile: StrategyProfile, path) -> None:
    """Graphviz digraph; one arc per purchase, oriented buyer -> other."""
    lines = ["digraph profile {"]
    for v in range(profile.n):
        lines.append(f"  {v};")
    for e in sorted(profile.edges):
        lines.append(f"  {e.buyer} -> {e.other};")
    lines.append("}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# alpha grid expressions


def parse_alpha_expression(text: str):
    """Compile an alpha grid expression into a function of n.

    Supported forms: a constant ``p`` or ``p/q``, and the linear families
    ``a*n + b`` written ``an+b`` / ``an-b`` and ``a*n/b`` written ``an/b``.
    """
    expr = text.strip().replace(" ", "")
    m = re.fullmatch(r"(-?\d*)n(?:([+-])(\d+))?", expr)
    if m:
        a = int(m.group(1)) if m.group(1) not in ("", "-") else (-1 if m.group(1) == "-" else 1)
        b = int(m.group(3) or 0)
        if m.group(2) == "-":
            b = -b
        return lambda n: Fraction(a * n + b)
    m = re.fullmatch(r"(-?\d*)n/(\d+)", expr)
    if m:
        a = int(m.group(1)) if m.group(1) not in ("", "-") else (-1 if m.group(1) == "-" else 1)
        q = int(m.group(2))
        return lambda n: Fraction(a * n, q)
    m = re.fullmatch(r"(-?\d+)(?:/(\d+))?", expr)
    if m:
        value = Fraction(int(m.group(1)), int(m.group(2) or 1))
        return lambda n: value
    raise ValueError(f"unsupported alpha expression {text!r}")


# ---------------------------------------------------------------------------
# enumeration cells and sweeps


@dataclass(frozen=True)
class SweepSpec:
    """One batch run: every (n, alpha expression) cell under one class."""

    n_values: tuple[int, ...]
    alpha_expressions: tuple[str, ...]
    dev_class: DeviationClass
    seed: int = 0
    cap: int = 5
    budget: int = 1 << 22
    jobs: int = 1


@dataclass(frozen=True)
class ReportRow:
    """Aggregated outcome of one enumeration cell."""

    n: int
    alpha: Fraction
    profiles_scanned: int
    ne_count: int
    tree_ne_count: int
    non_tree_ne_count: int
    min_girth_among_ne: int | float
    audit_failures: int

    def csv_values(self) -> tuple[str, ...]:
        girth = "inf" if self.min_girth_among_ne == inf else str(self.min_girth_among_ne)
        return (
            str(self.n),
            format_fraction(self.alpha),
            str(self.profiles_scanned),
            str(self.ne_count),
            str(self.tree_ne_count),
            str(self.non_tree_ne_count),
            girth,
            str(self.audit_failures),
        )


def _scan_shard(args) -> tuple[int, list[tuple[int, VerificationReport]]]:
    n, p, q, class_spec, start, stop, budget = args
    dev_class = DeviationClass.parse(class_spec)
    return scan_profile_range(n, Fraction(p, q), dev_class, start, stop, budget)


def enumerate_cell(
    n: int,
    alpha: Fraction,
    dev_class: DeviationClass,
    cap: int = 5,
    budget: int = 1 << 22,
    jobs: int = 1,
    pool_threshold: int = 2000,
) -> EnumerationResult:
    """Exhaustively scan one (n, alpha) cell, optionally sharded over workers.

    Shard results are merged in index order, so parallel and serial runs
    produce identical output.  Cells below ``pool_threshold`` profiles stay
    serial regardless of ``jobs``.
    """
    from .errors import EnumerationCapError

    if n > cap:
        raise EnumerationCapError(f"n={n} above enumeration cap {cap}")
    total = 3 ** (n * (n - 1) // 2)
    if jobs <= 1 or total < pool_threshold:
        connected, found = scan_profile_range(n, alpha, dev_class, 0, total, budget)
    else:
        shard_count = jobs * 4
        step = (total + shard_count - 1) // shard_count
        shards = [
            (n, alpha.numerator, alpha.denominator, dev_class.spec(), lo, min(lo + step, total), budget)
            for lo in range(0, total, step)
        ]
        connected = 0
        found = []
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for shard_connected, shard_found in pool.map(_scan_shard, shards):
                connected += shard_connected
                found.extend(shard_found)
    equilibria = tuple(
        (profile_from_index(n, alpha, idx), report) for idx, report in found
    )
    return EnumerationResult(n, alpha, total, connected, equilibria)


def is_spanning_tree(profile: StrategyProfile) -> bool:
    """Connected with exactly n-1 underlying edges."""
    from .game import is_connected

    return is_connected(profile) and len(profile.undirected_edges()) == profile.n - 1


def build_report_row(result: EnumerationResult, run_audits: bool = True) -> ReportRow:
    """Fold one enumeration into a row; enforces the tree-only rule above 2n.

    A non-tree equilibrium at alpha > 2n is a hard failure, never a data
    point.  In the open band [n, 2n) non-tree counts are reported as
    exploratory data only.
    """
    tree = 0
    non_tree = 0
    min_girth: int | float = inf
    audit_failures = 0
    for profile, report in result.equilibria:
        if is_spanning_tree(profile):
            tree += 1
        else:
            non_tree += 1
        girth = global_girth(profile)
        min_girth = min(min_girth, girth)
        if run_audits:
            audit = audit_full(build_context(profile), ne_certificate=report)
            audit_failures += audit.summary["findings_failing"]
            audit_failures += audit.summary["bound_violations"]
    if result.alpha > 2 * result.n and non_tree > 0:
        raise TreeConjectureViolation(
            f"non-tree equilibrium at n={result.n}, alpha={result.alpha}"
        )
    return ReportRow(
        n=result.n,
        alpha=result.alpha,
        profiles_scanned=result.profiles_scanned,
        ne_count=len(result.equilibria),
        tree_ne_count=tree,
        non_tree_ne_count=non_tree,
        min_girth_among_ne=min_girth,
        audit_failures=audit_failures,
    )


def run_sweep(spec: SweepSpec) -> list[ReportRow]:
    """One ReportRow per (n, alpha) cell, in grid order."""
    rows = []
    for n in spec.n_values:
        for expr in spec.alpha_expressions:
            alpha = parse_alpha_expression(expr)(n)
            if alpha <= 0:
                raise ValueError(f"alpha expression {expr!r} is not positive at n={n}")
            result = enumerate_cell(n, alpha, spec.dev_class, spec.cap, spec.budget, spec.jobs)
            rows.append(build_report_row(result))
    return rows


def rows_to_csv(rows) -> str:
    lines = [CSV_HEADER_COMMENT, ",".join(CSV_COLUMNS)]
    lines.extend(",".join(row.csv_values()) for row in rows)
    return "\n".join(lines) + "\n"
