"""Deviation-cost bounds and structural rule checks against exact oracles.

Each bound operation prices a specific strategy rewrite (selling low-level
edges inside the big biconnected piece H, optionally rebuying the edge to
the root) and is compared, with exact rational arithmetic, against the
brute-force cost delta of actually performing the rewrite.  The structural
checks evaluate quantified statements about H, the shortest path tree, edge
classes, cycles and funnels, reporting one finding per rule.

Rules that presume an equilibrium are gated on an explicit verification
certificate; without one they still run but are flagged informational.
Bound preconditions follow what their derivations actually use: alpha > 2n,
girth >= 7, the seller inside H and distinct from the root.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import inf

from .errors import BudgetExceededError
from .equilibrium import VerificationReport, delta_cost, profile_hash
from .game import (
    BoughtEdge,
    DistanceMatrix,
    StrategyProfile,
    all_pairs_distances,
    connection_cost,
    is_connected,
)
from .structure import (
    BiconnectedDecomposition,
    CycleReport,
    Edge,
    EdgeClass,
    SptAnalysis,
    _as_edge,
    all_simple_cycles,
    build_spt,
    choose_root,
    classify_x_sets,
    compute_s_set,
    cycle_report,
    edge_subtree_size,
    global_girth,
    is_min_cycle,
    largest_biconnected_component,
)

LEMMA_IDS = (
    "mincyclesize",
    "seven-cycle",
    "directed-mincycles",
    "maxn2",
    "altpath",
    "x2position",
    "deg2",
    "obs-x1",
    "obs-x2",
    "obs-x2depth",
    "mainlemma1",
    "mainlemma2",
    "degree-sum",
)

# degree-sum is a combinatorial identity; everything else presumes equilibrium.
_NE_GATED = frozenset(set(LEMMA_IDS) - {"degree-sum"})


@dataclass(frozen=True)
class StrategyContext:
    """Everything the audits read: distances, H, the rooted tree, classes, cycles."""

    profile: StrategyProfile
    dist: DistanceMatrix
    decomposition: BiconnectedDecomposition
    h_vertices: frozenset[int]
    h_edges: frozenset[Edge]
    root: int
    spt: SptAnalysis
    x_classes: dict[Edge, EdgeClass]
    cycles: CycleReport
    girth: int | float

    @property
    def n(self) -> int:
        return self.profile.n

    @property
    def alpha(self) -> Fraction:
        return self.profile.alpha

    @property
    def has_cyclic_h(self) -> bool:
        return len(self.h_vertices) >= 3

    def connection(self, v: int) -> int | float:
        return connection_cost(self.dist, v)

    def x_level(self, edge: Edge) -> int | None:
        cls = self.x_classes.get(_as_edge(*edge))
        return cls.level if cls else None

    def in_plus(self, edge: Edge) -> bool:
        cls = self.x_classes.get(_as_edge(*edge))
        return cls.in_plus if cls else False

    def deg_h(self, v: int) -> int:
        return sum(1 for e in self.h_edges if v in e)

    def root_h_degrees(self) -> tuple[int, int]:
        """(incoming, outgoing) H-degree of the root by edge ownership."""
        incoming = outgoing = 0
        for e in self.h_edges:
            if self.root not in e:
                continue
            other = e[0] if e[1] == self.root else e[1]
            if self.profile.buys(self.root, other):
                outgoing += 1
            if self.profile.buys(other, self.root):
                incoming += 1
        return incoming, outgoing

    def sellable_edges(self, v: int, include_up: bool) -> list[tuple[Edge, int]]:
        """H-edges bought by v with minimal level <= 2; optionally v's up-edge."""
        out = []
        for e in sorted(self.h_edges):
            if v not in e or not self.profile.buys(v, e[0] if e[1] == v else e[1]):
                continue
            other = e[0] if e[1] == v else e[1]
            lv = self.x_level(e)
            if lv is not None and lv <= 2:
                out.append((e, other))
            elif include_up and self.spt.orientation(*e) == "up" and self.spt.parent[v] == other:
                out.append((e, other))
        return sorted(out, key=lambda item: item[1])


def build_context(profile: StrategyProfile) -> StrategyContext:
    """Compute the full structural bundle for a connected profile."""
    if not is_connected(profile):
        raise ValueError("audit context requires a connected profile")
    dist = all_pairs_distances(profile)
    decomposition = largest_biconnected_component(profile)
    h_vertices = decomposition.largest_vertices()
    h_edges = decomposition.largest_edges()
    root = choose_root(profile, dist, h_vertices) if h_vertices else 0
    spt = build_spt(profile, dist, root)
    x_classes = {
        c.edge: c for c in classify_x_sets(profile, spt, decomposition)
    }
    cycles = cycle_report(profile, decomposition, dist)
    return StrategyContext(
        profile=profile,
        dist=dist,
        decomposition=decomposition,
        h_vertices=h_vertices,
        h_edges=h_edges,
        root=root,
        spt=spt,
        x_classes=x_classes,
        cycles=cycles,
        girth=global_girth(profile),
    )


# ---------------------------------------------------------------------------
# deviation-cost bounds


def strategy1_bound(ctx: StrategyContext, u: int, sold: list[tuple[Edge, int]]) -> Fraction:
    """Cost-change upper bound for u selling the given bought edges.

    sold is a list of (edge, level) pairs; levels must come in as the
    minimal class levels (the nested classes make the minimal level the
    tightest valid choice).
    """
    d = ctx.spt.depth[u]
    path = ctx.spt.path_to_root(u)
    j = len(sold)
    value = Fraction(d * ctx.n)
    value -= 2 * sum(ctx.spt.subtree_size[path[l]] for l in range(d))
    value -= j * ctx.alpha
    for edge, level in sold:
        value += (2 * level + 2 * d) * edge_subtree_size(ctx.spt, *edge)
    return value


def strategy2_bound(ctx: StrategyContext, u: int, sold: list[tuple[Edge, int]]) -> Fraction:
    """Bound for selling the given edges while also buying the edge to the root.

    The midpoint subtree term only exists when the root distance is even;
    the halfway sum runs over strictly smaller path indices.
    """
    d = ctx.spt.depth[u]
    path = ctx.spt.path_to_root(u)
    j = len(sold)
    value = Fraction(ctx.n)
    if d % 2 == 0 and d // 2 < len(path):
        value -= ctx.spt.subtree_size[path[d // 2]]
    value -= 2 * sum(ctx.spt.subtree_size[path[l]] for l in range(len(path)) if 2 * l < d)
    value -= (j - 1) * ctx.alpha
    for edge, level in sold:
        value += (2 * level + d + 1) * edge_subtree_size(ctx.spt, *edge)
    return value


def strategy3_bound(ctx: StrategyContext, u: int, sold: list[tuple[Edge, int]]) -> Fraction:
    """Bound for the root-rebuy rewrite when the sold set may include u's up-edge.

    Weaker than the previous bound: only u's own subtree contributes savings.
    Up-edges carry no subtree, so their level never affects the value.
    """
    d = ctx.spt.depth[u]
    j = len(sold)
    value = Fraction(ctx.n)
    value -= (j - 1) * ctx.alpha
    value -= (d + 1) * ctx.spt.subtree_size[u]
    for edge, level in sold:
        value += (2 * level + d + 1) * edge_subtree_size(ctx.spt, *edge)
    return value


_BOUND_FNS = {
    "strategy1": strategy1_bound,
    "strategy2": strategy2_bound,
    "strategy3": strategy3_bound,
}


@dataclass(frozen=True)
class BoundComparison:
    """One bound evaluation against the exact rewrite delta."""

    lemma_id: str
    vertex: int
    sold_edges: tuple[tuple[Edge, int | None], ...]
    bought_r: bool
    bound: Fraction
    exact_delta: Fraction | float
    preconditions_met: bool
    precondition_notes: str
    dominates: bool


def audit_deviation_bound(
    ctx: StrategyContext,
    u: int,
    strategy_kind: str,
    sold_targets,
    ne_certificate: VerificationReport | None = None,
) -> BoundComparison:
    """Price one rewrite with the selected bound and execute it exactly.

    ``sold_targets`` lists the other endpoints of edges u sells.  The value
    is always computed; ``preconditions_met`` records whether the bound's
    own hypotheses held, and ``dominates`` whether exact <= bound.
    """
    if strategy_kind not in _BOUND_FNS:
        raise ValueError(f"unknown strategy kind {strategy_kind!r}")
    include_up = strategy_kind == "strategy3"
    buys_root = strategy_kind in ("strategy2", "strategy3")
    notes: list[str] = []

    sold: list[tuple[Edge, int]] = []
    recorded: list[tuple[Edge, int | None]] = []
    for t in sorted(sold_targets):
        edge = _as_edge(u, t)
        level = ctx.x_level(edge)
        recorded.append((edge, level))
        if not ctx.profile.buys(u, t):
            notes.append(f"edge {edge} is not bought by {u}")
        if edge not in ctx.h_edges:
            notes.append(f"edge {edge} lies outside H")
        is_up = (
            ctx.spt.orientation(*edge) == "up" and ctx.spt.parent[u] == t
            if edge in ctx.spt.tree_edges
            else False
        )
        if level is not None and level <= 2:
            sold.append((edge, level))
        elif include_up and is_up:
            sold.append((edge, 0))  # up-edges sit in every + class; subtree weight is 0
        else:
            notes.append(f"edge {edge} has no eligible level for {strategy_kind}")
            sold.append((edge, level if level is not None else 0))

    if not sold_targets:
        notes.append("no edges sold")
    if not ctx.has_cyclic_h:
        notes.append("no biconnected component with a cycle")
    elif u not in ctx.h_vertices:
        notes.append(f"vertex {u} outside H")
    elif u == ctx.root:
        notes.append("seller is the root")
    if not ctx.alpha > 2 * ctx.n:
        notes.append("alpha <= 2n")
    if not ctx.girth >= 7:
        notes.append("girth below 7")
    if ctx.has_cyclic_h and ctx.connection(ctx.root) > ctx.connection(u):
        notes.append("root connection cost exceeds seller's")  # impossible by construction

    bound = _BOUND_FNS[strategy_kind](ctx, u, sold)

    current = ctx.profile.targets_of(u)
    new_targets = current - {t for t in sold_targets}
    if buys_root and u != ctx.root:
        new_targets = new_targets | {ctx.root}
    elif buys_root:
        notes.append("root cannot buy an edge to itself; rewrite sells only")
    exact = delta_cost(ctx.profile, u, new_targets)

    if ne_certificate is not None and ne_certificate.is_equilibrium:
        if ne_certificate.profile_hash != profile_hash(ctx.profile):
            notes.append("certificate hash mismatch; ignored")
        elif not (exact == inf or exact >= 0):
            notes.append("certified equilibrium admits an improving rewrite")

    return BoundComparison(
        lemma_id=strategy_kind,
        vertex=u,
        sold_edges=tuple(recorded),
        bought_r=buys_root,
        bound=bound,
        exact_delta=exact,
        preconditions_met=not notes,
        precondition_notes="; ".join(notes),
        dominates=bool(exact <= bound),
    )


# ---------------------------------------------------------------------------
# structural findings


@dataclass(frozen=True)
class AuditFinding:
    """Verdict for one structural rule on one context."""

    lemma_id: str
    applicable: bool
    holds: bool | None
    informational: bool
    detail: dict = field(compare=False, default_factory=dict)


def _certified(ne_certificate: VerificationReport | None, ctx: StrategyContext) -> bool:
    return (
        ne_certificate is not None
        and ne_certificate.is_equilibrium
        and ne_certificate.profile_hash == profile_hash(ctx.profile)
    )


def _finding(lemma_id, applicable, holds, informational, **detail) -> AuditFinding:
    return AuditFinding(lemma_id, applicable, holds if applicable else None, informational, detail)


def audit_structural(
    ctx: StrategyContext,
    lemma_id: str,
    ne_certificate: VerificationReport | None = None,
) -> AuditFinding:
    """Evaluate one structural rule literally over the context."""
    if lemma_id not in LEMMA_IDS:
        raise ValueError(f"unknown lemma id {lemma_id!r}")
    informational = lemma_id in _NE_GATED and not _certified(ne_certificate, ctx)
    n = ctx.n
    alpha = ctx.alpha

    if lemma_id == "mincyclesize":
        bound = 2 * alpha / n + 2
        holds = ctx.girth == inf or ctx.girth >= bound
        witness = None
        if not holds:
            # girth may be realised outside H; scan every edge for a witness
            from .structure import smallest_cycle_through_edge

            for a, b in ctx.profile.undirected_edges():
                cyc = smallest_cycle_through_edge(ctx.profile, a, b)
                if cyc is not None and len(cyc) == ctx.girth:
                    witness = cyc
                    break
        return _finding(
            lemma_id, True, holds, informational,
            girth=ctx.girth, bound=str(bound), counter_witness=witness,
        )

    if lemma_id == "seven-cycle":
        applicable = alpha > 2 * n
        holds = ctx.girth == inf or ctx.girth >= 7
        return _finding(lemma_id, applicable, holds, informational, girth=ctx.girth)

    if lemma_id == "directed-mincycles":
        applicable = alpha > 2 * (n - 1)
        return _audit_directed_mincycles(ctx, applicable, informational)

    if lemma_id == "maxn2":
        applicable = ctx.has_cyclic_h
        violations = [
            {"vertex": v, "subtree": ctx.spt.subtree_size[v], "in_h": v in ctx.h_vertices}
            for v in range(n)
            if v != ctx.root and 2 * ctx.spt.subtree_size[v] > n
        ]
        return _finding(
            lemma_id, applicable, not violations, informational, violations=violations
        )

    if lemma_id == "altpath":
        return _audit_altpath_all(ctx, informational)

    if lemma_id == "x2position":
        applicable = ctx.has_cyclic_h and alpha > 2 * n and ctx.girth >= 7
        rows = []
        ok = True
        for (edge, cls) in sorted(ctx.x_classes.items()):
            if cls.level is None or cls.level > 2:
                continue
            for u in ctx.profile.buyers_of(*edge):
                cyc = ctx.cycles.per_vertex_cycle.get(u)
                if cyc is None:
                    continue
                required = len(cyc) // 2 - cls.level
                good = ctx.spt.depth[u] >= required
                ok = ok and good
                rows.append(
                    {"vertex": u, "edge": edge, "level": cls.level,
                     "cycle_len": len(cyc), "depth": ctx.spt.depth[u], "holds": good}
                )
        return _finding(lemma_id, applicable, ok, informational, checked=rows)

    if lemma_id == "deg2":
        return _audit_deg2(ctx, informational)

    if lemma_id == "obs-x1":
        applicable = ctx.has_cyclic_h and alpha > 2 * n and ctx.girth >= 7
        offenders = []
        for u in sorted(ctx.h_vertices):
            bought = [
                e for e in ctx.x_classes
                if _buys_edge(ctx, u, e) and _in_plus_level(ctx, e) <= 1
            ]
            if len(bought) >= 2:
                offenders.append({"vertex": u, "edges": sorted(bought)})
        return _finding(lemma_id, applicable, not offenders, informational, offenders=offenders)

    if lemma_id == "obs-x2":
        applicable = ctx.has_cyclic_h and alpha > 2 * n and ctx.girth >= 7
        triples = []
        thin_pairs = []
        for u in sorted(ctx.h_vertices):
            bought = [e for e in ctx.x_classes if _buys_edge(ctx, u, e) and _in_plus_level(ctx, e) <= 2]
            if len(bought) >= 3:
                triples.append({"vertex": u, "edges": sorted(bought)})
            for e1, e2 in combinations(sorted(bought), 2):
                union = _edge_subtree_vertices(ctx, e1) | _edge_subtree_vertices(ctx, e2)
                if not 4 * len(union) > n:
                    thin_pairs.append({"vertex": u, "edges": [e1, e2], "union": len(union)})
        holds = not triples and not thin_pairs
        return _finding(
            lemma_id, applicable, holds, informational,
            triple_buyers=triples, thin_pairs=thin_pairs,
        )

    if lemma_id == "obs-x2depth":
        applicable = ctx.has_cyclic_h and alpha > 2 * n and ctx.girth >= 7
        rows = []
        ok = True
        for u in sorted(ctx.h_vertices):
            bought = [
                e for e, c in ctx.x_classes.items()
                if c.level is not None and c.level <= 2 and _buys_edge(ctx, u, e)
            ]
            if len(bought) < 2:
                continue
            depth = ctx.spt.depth[u]
            fat_pair = any(
                4 * len(_edge_subtree_vertices(ctx, e1) | _edge_subtree_vertices(ctx, e2)) > n
                for e1, e2 in combinations(sorted(bought), 2)
            )
            good = depth >= 3 and (not fat_pair or depth == 3)
            ok = ok and good
            rows.append({"vertex": u, "depth": depth, "edges": sorted(bought), "holds": good})
        return _finding(lemma_id, applicable, ok, informational, checked=rows)

    if lemma_id == "mainlemma1":
        applicable = ctx.has_cyclic_h and alpha > 2 * n and ctx.girth >= 7
        rows = []
        ok = True
        for edge, cls in sorted(ctx.x_classes.items()):
            if cls.level != 0:
                continue
            for u0 in ctx.profile.buyers_of(*edge):
                prefix = ctx.spt.path_to_root(u0)[:3]
                deg2 = [v for v in prefix if ctx.deg_h(v) == 2]
                good = len(deg2) <= 1
                ok = ok and good
                rows.append(
                    {"vertex": u0, "out_edge": edge, "path_prefix": prefix,
                     "deg2_vertices": deg2, "holds": good}
                )
        return _finding(lemma_id, applicable, ok, informational, checked=rows)

    if lemma_id == "mainlemma2":
        applicable = ctx.has_cyclic_h and alpha > 2 * n and ctx.girth >= 7
        buyers = []
        for u in sorted(ctx.h_vertices):
            count = sum(
                1 for e, c in ctx.x_classes.items()
                if c.level is not None and c.level <= 2 and _buys_edge(ctx, u, e)
            )
            if count >= 2:
                buyers.append(u)
        deg_r = ctx.deg_h(ctx.root) if ctx.has_cyclic_h else 0
        holds = len(buyers) < deg_r
        return _finding(
            lemma_id, applicable, holds, informational,
            double_buyers=buyers, root_degree=deg_r,
        )

    if lemma_id == "degree-sum":
        t_in_h = {e for e in ctx.h_edges if e in ctx.spt.tree_edges}
        spanning = ctx.has_cyclic_h and _spans(ctx.h_vertices, t_in_h)
        applicable = spanning
        n_h = len(ctx.h_vertices)
        x0 = sum(1 for c in ctx.x_classes.values() if c.level == 0)
        degree_sum = sum(ctx.deg_h(v) for v in ctx.h_vertices)
        holds = degree_sum == 2 * (n_h - 1) + 2 * x0
        return _finding(
            lemma_id, applicable, holds, False,
            spanning=spanning, degree_sum=degree_sum, n_h=n_h, out_edges=x0,
        )

    raise AssertionError(f"unhandled lemma id {lemma_id}")


def _buys_edge(ctx: StrategyContext, v: int, edge: Edge) -> bool:
    if v not in edge:
        return False
    other = edge[0] if edge[1] == v else edge[1]
    return ctx.profile.buys(v, other)


def _in_plus_level(ctx: StrategyContext, edge: Edge) -> int | float:
    """Minimal i with the edge in the + class ladder; up-edges enter at 0."""
    cls = ctx.x_classes.get(edge)
    if cls is None:
        return inf
    if cls.level is not None:
        return cls.level
    return 0 if cls.in_plus else inf


def _edge_subtree_vertices(ctx: StrategyContext, edge: Edge) -> frozenset[int]:
    if edge not in ctx.spt.tree_edges:
        return frozenset()
    a, b = edge
    p, c = (a, b) if ctx.spt.parent[b] == a else (b, a)
    if (p, c) in ctx.spt.down_pairs:
        return ctx.spt.subtree_vertices(c)
    return frozenset()


def _spans(vertices: frozenset[int], edges: set[Edge]) -> bool:
    """Do the edges form a spanning tree of the vertex set?"""
    if not vertices:
        return False
    if len(edges) != len(vertices) - 1:
        return False
    adj: dict[int, list[int]] = {v: [] for v in vertices}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    start = next(iter(vertices))
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen == vertices


def _audit_directed_mincycles(ctx, applicable, informational) -> AuditFinding:
    coverage = "exhaustive"
    try:
        cycles = all_simple_cycles(ctx.profile)
    except BudgetExceededError:
        coverage = "smallest-per-edge-only"
        cycles = sorted(set(ctx.cycles.per_edge_cycle.values()))
    from .structure import cycle_directed

    min_cycles = [c for c in cycles if is_min_cycle(c, ctx.dist)]
    bad = [c for c in min_cycles if not cycle_directed(ctx.profile, c)]
    return _finding(
        "directed-mincycles", applicable, not bad, informational,
        coverage=coverage, min_cycle_count=len(min_cycles), non_directed=bad,
    )


def _audit_deg2(ctx, informational) -> AuditFinding:
    applicable = ctx.has_cyclic_h
    rows = []
    ok = True
    for v in sorted(ctx.h_vertices):
        if ctx.deg_h(v) != 2:
            continue
        neighbours = sorted(
            (e[0] if e[1] == v else e[1]) for e in ctx.h_edges if v in e
        )
        for u, w in ((neighbours[0], neighbours[1]), (neighbours[1], neighbours[0])):
            if not (ctx.profile.buys(u, v) and ctx.profile.buys(v, w)):
                continue
            funnel = compute_s_set(
                ctx.profile, ctx.dist, ctx.h_vertices - {v}, v, "all-paths"
            )
            some = compute_s_set(
                ctx.profile, ctx.dist, ctx.h_vertices - {v}, v, "some-path"
            )
            row = {
                "path": (u, v, w),
                "funnel_size": len(funnel.members),
                "funnel_size_some_path": len(some.members),
            }
            cyc = ctx.cycles.per_vertex_cycle.get(v)
            if cyc is not None and len(cyc) > 3:
                required = ctx.alpha / (2 * (len(cyc) - 3))
                good = len(funnel.members) >= required
                row["cycle_bound"] = str(required)
                row["cycle_bound_holds"] = good
                ok = ok and good
            else:
                row["cycle_bound"] = "gated (cycle length 3 or none)"
            if (u, v) in ctx.spt.down_pairs and (v, w) in ctx.spt.down_pairs:
                good = len(funnel.members) >= ctx.spt.subtree_size[w]
                row["subtree_bound"] = ctx.spt.subtree_size[w]
                row["subtree_bound_holds"] = good
                ok = ok and good
            rows.append(row)
    return _finding("deg2", applicable, ok, informational, checked=rows)


def audit_altpath(ctx: StrategyContext, u: int, edge, ne_certificate=None) -> AuditFinding:
    """Check the detour guarantee below one sold edge: every subtree vertex
    keeps a root route of length depth + 2*level that avoids the seller."""
    edge = _as_edge(*edge)
    informational = not _certified(ne_certificate, ctx)
    level = ctx.x_level(edge)
    applicable = (
        ctx.has_cyclic_h
        and ctx.alpha > 2 * ctx.n
        and ctx.girth >= 7
        and _buys_edge(ctx, u, edge)
        and level is not None
        and level <= 2
    )
    subtree = _edge_subtree_vertices(ctx, edge) if _buys_edge(ctx, u, edge) else frozenset()
    if not applicable:
        return _finding("altpath", False, None, informational, vertex=u, edge=edge)

    margins = {}
    holds = True
    detour = _distances_avoiding(ctx.profile, ctx.root, u)
    for w in sorted(subtree):
        allowed = ctx.spt.depth[w] + 2 * level
        actual = detour[w]
        margin = inf if actual == inf else allowed - actual
        margins[w] = margin
        if actual == inf or actual > allowed:
            holds = False
    return _finding(
        "altpath", True, holds, informational,
        vertex=u, edge=edge, level=level, margins=margins, subtree_size=len(subtree),
    )


def _audit_altpath_all(ctx, informational) -> AuditFinding:
    applicable = ctx.has_cyclic_h and ctx.alpha > 2 * ctx.n and ctx.girth >= 7
    per_edge = []
    ok = True
    for edge, cls in sorted(ctx.x_classes.items()):
        if cls.level is None or cls.level > 2:
            continue
        for u in ctx.profile.buyers_of(*edge):
            sub = audit_altpath(ctx, u, edge)
            if sub.applicable:
                ok = ok and bool(sub.holds)
                per_edge.append(
                    {"vertex": u, "edge": edge, "level": cls.level, "holds": sub.holds}
                )
    return _finding("altpath", applicable, ok, informational, checked=per_edge)


def _distances_avoiding(profile: StrategyProfile, source: int, removed: int) -> list[int | float]:
    """BFS distances from source in the graph with one vertex deleted."""
    adj = profile.adjacency()
    dist: list[int | float] = [inf] * profile.n
    if source == removed:
        return dist
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w == removed or dist[w] != inf:
                continue
            dist[w] = dist[v] + 1
            queue.append(w)
    return dist


# ---------------------------------------------------------------------------
# full audit


@dataclass(frozen=True)
class AuditReport:
    """Every structural finding plus every bound comparison for one context."""

    findings: tuple[AuditFinding, ...]
    bounds: tuple[BoundComparison, ...]
    skipped: tuple[str, ...]
    summary: dict = field(compare=False, default_factory=dict)


def eligible_sold_selections(
    ctx: StrategyContext, strategy_kind: str, max_sell: int = 2
):
    """All (vertex, sold-target-tuple) pairs a strategy audit can price."""
    include_up = strategy_kind == "strategy3"
    if not ctx.has_cyclic_h:
        return
    for u in sorted(ctx.h_vertices):
        if u == ctx.root:
            continue
        eligible = ctx.sellable_edges(u, include_up)
        targets = [other for (_, other) in eligible]
        for size in range(1, min(len(targets), max_sell) + 1):
            for combo in combinations(targets, size):
                yield u, combo


def audit_full(
    ctx: StrategyContext,
    ne_certificate: VerificationReport | None = None,
    max_bound_checks: int = 10_000,
) -> AuditReport:
    """Run every structural rule and every affordable bound comparison."""
    findings = tuple(
        audit_structural(ctx, lemma_id, ne_certificate) for lemma_id in LEMMA_IDS
    )

    bounds: list[BoundComparison] = []
    skipped: list[str] = []
    for kind in ("strategy1", "strategy2", "strategy3"):
        family = list(eligible_sold_selections(ctx, kind))
        if len(bounds) + len(family) > max_bound_checks:
            skipped.append(
                f"{kind}: {len(family)} selections over budget {max_bound_checks}"
            )
            continue
        for u, combo in family:
            bounds.append(audit_deviation_bound(ctx, u, kind, combo, ne_certificate))

    applicable = sum(1 for f in findings if f.applicable)
    holding = sum(1 for f in findings if f.applicable and f.holds)
    failing = sum(1 for f in findings if f.applicable and f.holds is False)
    dominated = sum(1 for b in bounds if b.preconditions_met and not b.dominates)
    return AuditReport(
        findings=findings,
        bounds=tuple(bounds),
        skipped=tuple(skipped),
        summary={
            "findings_applicable": applicable,
            "findings_holding": holding,
            "findings_failing": failing,
            "bounds_checked": len(bounds),
            "bound_violations": dominated,
        },
    )


# ---------------------------------------------------------------------------
# scaffold instances for bound audits


def scaffold_profile(seed: int) -> StrategyProfile:
    """Seeded girth->=7 test instance: a ring with hanging trees, random
    ownership, sometimes one long chord, and alpha drawn above 2n."""
    rng = random.Random(seed)
    ring = rng.randint(7, 12)
    extra = rng.randint(0, ring)
    n = ring + extra

    edges: list[BoughtEdge] = []
    directed_ring = rng.random() < 0.5
    for i in range(ring):
        j = (i + 1) % ring
        if directed_ring:
            edges.append(BoughtEdge(i, j))
        else:
            a, b = (i, j) if rng.random() < 0.5 else (j, i)
            edges.append(BoughtEdge(a, b))

    for v in range(ring, n):
        anchor = rng.randrange(v)  # attach to any earlier vertex: random trees
        a, b = (anchor, v) if rng.random() < 0.5 else (v, anchor)
        edges.append(BoughtEdge(a, b))

    if ring >= 12 and rng.random() < 0.5:
        a = rng.randrange(ring)
        offset = rng.randint(6, ring - 6)
        b = (a + offset) % ring
        buyer, other = (a, b) if rng.random() < 0.5 else (b, a)
        if _as_edge(a, b) not in {e.endpoints() for e in edges}:
            edges.append(BoughtEdge(buyer, other))

    if rng.random() < 0.5:
        alpha = Fraction(2 * n + rng.randint(1, n))
    else:
        alpha = Fraction(4 * n + 2 * rng.randint(1, n) - 1, 2)  # half-integer above 2n

    profile = StrategyProfile(n, alpha, tuple(edges))
    assert global_girth(profile) >= 7
    return profile
