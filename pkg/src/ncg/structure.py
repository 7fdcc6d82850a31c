"""Structural analysis of a profile's graph.

Extracts the objects the audit layer reasons about: the biconnected
decomposition and its largest piece H, a root r of minimum connection cost
inside H, a shortest path tree T rooted at r with edge orientations and
subtree sizes, the ladder of edge classes built from out-edges (X-levels),
smallest cycles through vertices and edges, and shortest-path funnels
(S-sets).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import inf

from .errors import BudgetExceededError
from .game import DistanceMatrix, StrategyProfile, connection_cost, is_connected

Edge = tuple[int, int]  # always stored as (low, high)


def _as_edge(a: int, b: int) -> Edge:
    return (a, b) if a < b else (b, a)


# ---------------------------------------------------------------------------
# biconnected decomposition


@dataclass(frozen=True)
class BiconnectedDecomposition:
    """Edge-partition of the graph into maximal biconnected pieces.

    ``components`` holds the vertex set of each piece (a bridge is a
    two-vertex piece).  ``largest`` indexes the piece with the most
    vertices, ties broken by lexicographically smallest sorted vertex list.
    """

    components: tuple[frozenset[int], ...]
    edge_components: tuple[frozenset[Edge], ...]
    largest: int | None

    def largest_vertices(self) -> frozenset[int]:
        return self.components[self.largest] if self.largest is not None else frozenset()

    def largest_edges(self) -> frozenset[Edge]:
        return self.edge_components[self.largest] if self.largest is not None else frozenset()


def _biconnected_edge_groups(n: int, adj: list[list[int]]) -> list[list[Edge]]:
    """Iterative lowpoint DFS; returns the edge set of every biconnected piece."""
    disc = [0] * n  # 0 = unvisited, else discovery time from 1
    low = [0] * n
    timer = 1
    groups: list[list[Edge]] = []
    edge_stack: list[Edge] = []
    for start in range(n):
        if disc[start]:
            continue
        disc[start] = low[start] = timer
        timer += 1
        stack: list[tuple[int, int, int]] = [(start, -1, 0)]  # (vertex, parent, next index)
        while stack:
            v, parent, i = stack[-1]
            if i < len(adj[v]):
                stack[-1] = (v, parent, i + 1)
                w = adj[v][i]
                if w == parent:
                    continue
                if not disc[w]:
                    edge_stack.append(_as_edge(v, w))
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, v, 0))
                elif disc[w] < disc[v]:  # back edge
                    edge_stack.append(_as_edge(v, w))
                    low[v] = min(low[v], disc[w])
                continue
            stack.pop()
            if not stack:
                continue
            u = stack[-1][0]
            low[u] = min(low[u], low[v])
            if low[v] >= disc[u]:
                group = []
                closing = _as_edge(u, v)
                while True:
                    e = edge_stack.pop()
                    group.append(e)
                    if e == closing:
                        break
                groups.append(group)
    return groups


def largest_biconnected_component(profile: StrategyProfile) -> BiconnectedDecomposition:
    """Decompose the underlying graph; requires a connected profile."""
    if not is_connected(profile):
        raise ValueError("biconnected decomposition requires a connected profile")
    groups = _biconnected_edge_groups(profile.n, profile.adjacency())
    packed = []
    for group in groups:
        vertices = frozenset(v for e in group for v in e)
        packed.append((vertices, frozenset(group)))
    packed.sort(key=lambda item: (-len(item[0]), sorted(item[0])))
    components = tuple(v for v, _ in packed)
    edge_components = tuple(e for _, e in packed)
    largest = 0 if packed else None
    return BiconnectedDecomposition(components, edge_components, largest)


def choose_root(profile: StrategyProfile, dist: DistanceMatrix, h_vertices) -> int:
    """Vertex of minimum connection cost inside H; ties go to the smallest id."""
    if not h_vertices:
        raise ValueError("cannot choose a root in an empty component")
    return min(h_vertices, key=lambda v: (connection_cost(dist, v), v))


# ---------------------------------------------------------------------------
# shortest path tree


@dataclass(frozen=True)
class SptAnalysis:
    """Shortest path tree from ``root`` with orientations and subtree sizes.

    A tree edge is *down* iff its parent endpoint bought it; a directed
    root-to-vertex shortest path is one whose every edge is down.  Parent
    choice prefers a down-buying neighbour that is itself reached from the
    root by an all-down path; ambiguity (possible only away from
    equilibrium) is tie-broken by smallest id and recorded in ``warnings``.
    """

    root: int
    parent: tuple[int | None, ...]
    depth: tuple[int, ...]
    subtree_size: tuple[int, ...]
    children: tuple[tuple[int, ...], ...]
    tree_edges: frozenset[Edge]
    down_pairs: frozenset[tuple[int, int]]  # (parent, child) edges bought by the parent
    down_reachable: tuple[bool, ...]
    graph_edges: frozenset[Edge]
    warnings: tuple[str, ...]

    def is_tree_edge(self, a: int, b: int) -> bool:
        return _as_edge(a, b) in self.tree_edges

    def orientation(self, a: int, b: int) -> str | None:
        """'down' or 'up' for a tree edge, None for a non-tree edge."""
        if not self.is_tree_edge(a, b):
            return None
        p, c = (a, b) if self.parent[b] == a else (b, a)
        return "down" if (p, c) in self.down_pairs else "up"

    def path_to_root(self, v: int) -> list[int]:
        """Tree path [v, parent(v), ..., root]."""
        path = [v]
        while path[-1] != self.root:
            path.append(self.parent[path[-1]])
        return path

    def subtree_vertices(self, v: int) -> frozenset[int]:
        """All vertices in the subtree rooted at ``v``."""
        out = []
        queue = [v]
        while queue:
            x = queue.pop()
            out.append(x)
            queue.extend(self.children[x])
        return frozenset(out)


def build_spt(profile: StrategyProfile, dist: DistanceMatrix, root: int) -> SptAnalysis:
    """BFS shortest path tree from ``root`` under the directed-path parent rule."""
    n = profile.n
    depth = dist[root]
    if any(depth[v] == inf for v in range(n)):
        raise ValueError("shortest path tree requires a connected profile")
    adj = profile.adjacency()
    parent: list[int | None] = [None] * n
    down_reachable = [False] * n
    down_reachable[root] = True
    down_pairs: set[tuple[int, int]] = set()
    tree_edges: set[Edge] = set()
    warnings: list[str] = []

    for v in sorted(range(n), key=lambda x: (depth[x], x)):
        if v == root:
            continue
        level_up = [p for p in adj[v] if depth[p] == depth[v] - 1]
        directed = [p for p in level_up if profile.buys(p, v) and down_reachable[p]]
        if directed:
            if len(directed) > 1:
                warnings.append(
                    f"vertex {v}: {len(directed)} directed shortest paths from the root; "
                    f"kept parent {min(directed)}"
                )
            p = min(directed)
        else:
            p = min(level_up)
        parent[v] = p
        tree_edges.add(_as_edge(p, v))
        is_down = profile.buys(p, v)
        if is_down:
            down_pairs.add((p, v))
        down_reachable[v] = down_reachable[p] and is_down

    children: list[list[int]] = [[] for _ in range(n)]
    for v in range(n):
        if parent[v] is not None:
            children[parent[v]].append(v)
    subtree = [1] * n
    for v in sorted(range(n), key=lambda x: -depth[x]):
        if parent[v] is not None:
            subtree[parent[v]] += subtree[v]
    assert subtree[root] == n

    return SptAnalysis(
        root=root,
        parent=tuple(parent),
        depth=tuple(depth),
        subtree_size=tuple(subtree),
        children=tuple(tuple(sorted(c)) for c in children),
        tree_edges=frozenset(tree_edges),
        down_pairs=frozenset(down_pairs),
        down_reachable=tuple(down_reachable),
        graph_edges=frozenset(_as_edge(*e) for e in profile.undirected_edges()),
        warnings=tuple(warnings),
    )


def edge_subtree_size(spt: SptAnalysis, a: int, b: int) -> int:
    """Subtree weight an edge carries: |T(child)| for a down-edge, else 0."""
    edge = _as_edge(a, b)
    if edge not in spt.graph_edges:
        raise ValueError(f"{edge} is not an edge of the profile")
    if edge not in spt.tree_edges:
        return 0
    p, c = (a, b) if spt.parent[b] == a else (b, a)
    if (p, c) in spt.down_pairs:
        return spt.subtree_size[c]
    return 0


# ---------------------------------------------------------------------------
# X-set edge classes


@dataclass(frozen=True)
class EdgeClass:
    """Level assignment of an H-edge in the out-edge ladder.

    Level 0 edges lie in H outside T.  A down-edge gets level i when its
    child buys an edge of level i-1; the stored level is minimal.  ``in_plus``
    additionally admits up-edges of H (the + variant of every level).
    """

    edge: Edge
    level: int | None
    in_plus: bool


def classify_x_sets(
    profile: StrategyProfile, spt: SptAnalysis, decomposition: BiconnectedDecomposition
) -> list[EdgeClass]:
    """Minimal X-levels for every edge of H; empty when H has no cycle."""
    h_vertices = decomposition.largest_vertices()
    h_edges = decomposition.largest_edges()
    if len(h_vertices) < 3:
        return []

    level: dict[Edge, int] = {}
    for e in h_edges:
        if e not in spt.tree_edges:
            level[e] = 0  # out-edge

    down_in_h = [
        (p, c) for (p, c) in spt.down_pairs if _as_edge(p, c) in h_edges
    ]
    bought_in_h: dict[int, list[Edge]] = {}
    for e in h_edges:
        for buyer in profile.buyers_of(*e):
            bought_in_h.setdefault(buyer, []).append(e)

    changed = True
    while changed:
        changed = False
        for p, c in down_in_h:
            candidates = [level[e] for e in bought_in_h.get(c, ()) if e in level]
            if not candidates:
                continue
            cand = 1 + min(candidates)
            e = _as_edge(p, c)
            if cand < level.get(e, inf):
                level[e] = cand
                changed = True

    out = []
    for e in sorted(h_edges):
        lv = level.get(e)
        is_up = e in spt.tree_edges and spt.orientation(*e) == "up"
        out.append(EdgeClass(edge=e, level=lv, in_plus=lv is not None or is_up))
    return out


# ---------------------------------------------------------------------------
# cycles


@dataclass(frozen=True)
class CycleReport:
    """Smallest cycles of H: girth, one witness per vertex and per edge.

    Every reported per-edge cycle is checked to realise all pairwise graph
    distances between its vertices (the min-cycle property).  A cycle is
    *directed* when each of its vertices buys exactly one of its two cycle
    edges.
    """

    girth: int | float
    per_vertex_cycle: dict[int, tuple[int, ...]]
    per_edge_cycle: dict[Edge, tuple[int, ...]]
    per_vertex_directed: dict[int, bool]
    per_edge_directed: dict[Edge, bool]


def smallest_cycle_through_edge(
    profile: StrategyProfile, a: int, b: int, adj: list[list[int]] | None = None
) -> tuple[int, ...] | None:
    """Lexicographically smallest among the shortest cycles using edge {a, b}.

    Returned as a vertex sequence starting at ``a`` and ending at ``b`` (the
    closing edge is b-a); None when the edge lies on no cycle.
    """
    if adj is None:
        adj = profile.adjacency()
    n = profile.n
    # BFS from b with edge a-b removed.
    dist: list[int | float] = [inf] * n
    dist[b] = 0
    queue = deque([b])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if (v, w) in ((a, b), (b, a)):
                continue
            if dist[w] == inf:
                dist[w] = dist[v] + 1
                queue.append(w)
    if dist[a] == inf:
        return None
    # Greedy min-id descent gives the lexicographically smallest shortest path.
    path = [a]
    while path[-1] != b:
        v = path[-1]
        step = min(
            w for w in adj[v] if dist[w] == dist[v] - 1 and (v, w) not in ((a, b), (b, a))
        )
        path.append(step)
    return tuple(path)


def canonical_cycle(cycle: tuple[int, ...]) -> tuple[int, ...]:
    """Rotation/reflection-invariant form: start at min vertex, smaller direction."""
    k = len(cycle)
    i = cycle.index(min(cycle))
    fwd = tuple(cycle[(i + j) % k] for j in range(k))
    bwd = tuple(cycle[(i - j) % k] for j in range(k))
    return min(fwd, bwd)


def is_min_cycle(cycle: tuple[int, ...], dist: DistanceMatrix) -> bool:
    """True iff the cycle realises the graph distance between all its pairs."""
    k = len(cycle)
    for i in range(k):
        for j in range(i + 1, k):
            along = min(j - i, k - (j - i))
            if dist[cycle[i]][cycle[j]] != along:
                return False
    return True


def cycle_directed(profile: StrategyProfile, cycle: tuple[int, ...]) -> bool:
    """True iff every cycle vertex buys exactly one of its two cycle edges."""
    k = len(cycle)
    for i, v in enumerate(cycle):
        before = cycle[(i - 1) % k]
        after = cycle[(i + 1) % k]
        bought = int(profile.buys(v, before)) + int(profile.buys(v, after))
        if bought != 1:
            return False
    return True


def cycle_report(
    profile: StrategyProfile,
    decomposition: BiconnectedDecomposition,
    dist: DistanceMatrix | None = None,
) -> CycleReport:
    """Smallest-cycle survey of the largest biconnected piece."""
    h_vertices = decomposition.largest_vertices()
    h_edges = decomposition.largest_edges()
    if len(h_vertices) < 3:
        return CycleReport(inf, {}, {}, {}, {})
    if dist is None:
        from .game import all_pairs_distances

        dist = all_pairs_distances(profile)
    adj = profile.adjacency()

    per_edge: dict[Edge, tuple[int, ...]] = {}
    girth: int | float = inf
    for e in sorted(h_edges):
        cyc = smallest_cycle_through_edge(profile, e[0], e[1], adj)
        if cyc is None:
            continue
        if not is_min_cycle(cyc, dist):
            raise AssertionError(f"smallest cycle through {e} is not a min-cycle: {cyc}")
        per_edge[e] = cyc
        girth = min(girth, len(cyc))

    per_vertex: dict[int, tuple[int, ...]] = {}
    for v in sorted(h_vertices):
        best: tuple[int, tuple[int, ...]] | None = None
        for e in sorted(h_edges):
            if v not in e or e not in per_edge:
                continue
            cyc = per_edge[e]
            key = (len(cyc), canonical_cycle(cyc))
            if best is None or key < best:
                best = key
        if best is not None:
            per_vertex[v] = best[1]

    return CycleReport(
        girth=girth,
        per_vertex_cycle=per_vertex,
        per_edge_cycle=per_edge,
        per_vertex_directed={v: cycle_directed(profile, c) for v, c in per_vertex.items()},
        per_edge_directed={e: cycle_directed(profile, c) for e, c in per_edge.items()},
    )


def global_girth(profile: StrategyProfile) -> int | float:
    """Length of the shortest cycle anywhere in the graph; inf when acyclic."""
    adj = profile.adjacency()
    best: int | float = inf
    for a, b in profile.undirected_edges():
        cyc = smallest_cycle_through_edge(profile, a, b, adj)
        if cyc is not None:
            best = min(best, len(cyc))
    return best


def all_simple_cycles(profile: StrategyProfile, limit: int = 100_000) -> list[tuple[int, ...]]:
    """Every simple cycle (length >= 3), canonicalised; budget-guarded.

    Enumerates cycles by their minimum vertex: paths out of ``s`` through
    larger vertices only, emitted when they close back to ``s`` with the
    second endpoint smaller than the last (one orientation per cycle).
    """
    adj = profile.adjacency()
    cycles: list[tuple[int, ...]] = []
    steps = 0
    for s in range(profile.n):
        stack: list[tuple[list[int], set[int]]] = [([s], {s})]
        while stack:
            path, used = stack.pop()
            v = path[-1]
            for w in adj[v]:
                steps += 1
                if steps > limit:
                    raise BudgetExceededError(
                        f"cycle enumeration exceeded {limit} steps", required=steps
                    )
                if w == s and len(path) >= 3:
                    if path[1] < path[-1]:
                        cycles.append(canonical_cycle(tuple(path)))
                elif w > s and w not in used:
                    stack.append((path + [w], used | {w}))
    cycles.sort(key=lambda c: (len(c), c))
    return cycles


# ---------------------------------------------------------------------------
# S-sets


@dataclass(frozen=True)
class SSet:
    """Vertices whose shortest routes towards ``anchor`` funnel through ``via``.

    some-path: a shortest path to some anchor vertex passes via.
    all-paths: every shortest path to every nearest anchor vertex passes via.
    """

    anchor: frozenset[int]
    via: int
    members: frozenset[int]
    variant: str


def compute_s_set(
    profile: StrategyProfile,
    dist: DistanceMatrix,
    anchor,
    via: int,
    variant: str = "all-paths",
) -> SSet:
    """Shortest-path funnel through ``via`` relative to the vertex set ``anchor``."""
    anchor = frozenset(anchor)
    if not anchor:
        raise ValueError("anchor set must be nonempty")
    if via in anchor and anchor != {via}:
        raise ValueError("via must lie outside the anchor set (or be its only member)")
    if variant not in ("some-path", "all-paths"):
        raise ValueError(f"unknown S-set variant {variant!r}")
    n = profile.n
    members = {via}

    if anchor == {via}:
        # Degenerate funnel: every reachable vertex trivially routes through via.
        members.update(x for x in range(n) if dist[x][via] != inf)
        return SSet(anchor=anchor, via=via, members=frozenset(members), variant=variant)

    if variant == "some-path":
        for x in range(n):
            if x == via or x in anchor:
                continue
            for w in anchor:
                if dist[x][via] != inf and dist[via][w] != inf:
                    if dist[x][via] + dist[via][w] == dist[x][w]:
                        members.add(x)
                        break
    else:
        # Distances with `via` deleted, one BFS per anchor vertex.
        adj = profile.adjacency()
        cut: dict[int, list[int | float]] = {}
        for w in anchor:
            if w == via:
                continue
            d: list[int | float] = [inf] * n
            d[w] = 0
            queue = deque([w])
            while queue:
                v = queue.popleft()
                for x in adj[v]:
                    if x == via or d[x] != inf:
                        continue
                    d[x] = d[v] + 1
                    queue.append(x)
            cut[w] = d
        for x in range(n):
            if x == via or x in anchor:
                continue
            nearest = min((dist[x][w] for w in anchor), default=inf)
            if nearest == inf:
                continue
            if all(cut[w][x] > dist[x][w] for w in anchor if dist[x][w] == nearest):
                members.add(x)

    return SSet(anchor=anchor, via=via, members=frozenset(members), variant=variant)
