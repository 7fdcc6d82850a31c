"""Core game model: strategy profiles, exact distances, and per-vertex costs.

Agents 0..n-1 each buy a set of incident edges at a fixed price ``alpha``.
The union of all purchases induces an undirected graph.  An agent's total
cost is ``alpha`` times the number of edges it buys plus the sum of its
graph distances to every other agent.

All arithmetic is exact: ``alpha`` and building costs are ``Fraction``s,
distances are plain ints, and ``math.inf`` marks unreachable pairs (it only
ever enters comparisons, never finite arithmetic).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import inf

# n is capped so distance sums stay small and exhaustive operations stay sane.
DEFAULT_MAX_N = 64


@dataclass(frozen=True, order=True)
class BoughtEdge:
    """One purchase: ``buyer`` pays alpha for the undirected edge {buyer, other}."""

    buyer: int
    other: int

    def endpoints(self) -> tuple[int, int]:
        """The underlying undirected edge as an ordered pair (low, high)."""
        a, b = self.buyer, self.other
        return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class StrategyProfile:
    """Immutable snapshot of every agent's bought edge set.

    The same undirected edge may be bought by both endpoints (it is paid
    twice but traversed once); the same (buyer, other) pair may not repeat.
    Self-loops are rejected outright: they never change any distance.
    """

    n: int
    alpha: Fraction
    edges: tuple[BoughtEdge, ...]
    max_n: int = DEFAULT_MAX_N

    def __post_init__(self):
        if not isinstance(self.alpha, Fraction):
            object.__setattr__(self, "alpha", Fraction(self.alpha))
        object.__setattr__(self, "edges", tuple(sorted(self.edges)))
        if self.n < 1:
            raise ValueError("profile needs at least one vertex")
        if self.n > self.max_n:
            raise ValueError(f"n={self.n} exceeds the configured cap {self.max_n}")
        seen: set[tuple[int, int]] = set()
        for e in self.edges:
            if not (0 <= e.buyer < self.n and 0 <= e.other < self.n):
                raise ValueError(f"edge {e} references a vertex outside [0, {self.n})")
            if e.buyer == e.other:
                raise ValueError(f"self-loop at vertex {e.buyer}")
            if (e.buyer, e.other) in seen:
                raise ValueError(f"duplicate bought edge {e}")
            seen.add((e.buyer, e.other))
        object.__setattr__(self, "_bought_pairs", frozenset(seen))

    # -- structure helpers ------------------------------------------------

    def undirected_edges(self) -> tuple[tuple[int, int], ...]:
        """Deduplicated underlying edges, each as (low, high), sorted."""
        return tuple(sorted({e.endpoints() for e in self.edges}))

    def adjacency(self) -> list[list[int]]:
        """Sorted adjacency lists of the underlying undirected graph."""
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for a, b in self.undirected_edges():
            adj[a].append(b)
            adj[b].append(a)
        for row in adj:
            row.sort()
        return adj

    def targets_of(self, v: int) -> frozenset[int]:
        """Vertices that ``v`` currently buys edges to."""
        return frozenset(e.other for e in self.edges if e.buyer == v)

    def buys(self, a: int, b: int) -> bool:
        """True iff ``a`` bought the edge to ``b``."""
        return (a, b) in self._bought_pairs

    def buyers_of(self, a: int, b: int) -> tuple[int, ...]:
        """Which endpoints paid for the undirected edge {a, b} (0, 1 or 2 of them)."""
        return tuple(x for x, y in ((a, b), (b, a)) if self.buys(x, y))

    def with_strategy(self, v: int, targets: frozenset[int] | set[int]) -> "StrategyProfile":
        """A new profile where ``v``'s bought edge set is replaced by ``targets``."""
        if v in targets:
            raise ValueError(f"vertex {v} cannot buy an edge to itself")
        kept = [e for e in self.edges if e.buyer != v]
        kept.extend(BoughtEdge(v, u) for u in sorted(targets))
        return StrategyProfile(self.n, self.alpha, tuple(kept), self.max_n)


@dataclass(frozen=True)
class DistanceMatrix:
    """All-pairs unweighted shortest distances; ``inf`` for separated pairs."""

    n: int
    rows: tuple[tuple[int | float, ...], ...]

    def __getitem__(self, v: int) -> tuple[int | float, ...]:
        return self.rows[v]

    def validate(self) -> None:
        """Check the defining invariants; meant for tests, O(n^3)."""
        for v in range(self.n):
            assert self.rows[v][v] == 0
            for u in range(self.n):
                assert self.rows[v][u] == self.rows[u][v]
                for w in range(self.n):
                    assert self.rows[v][w] <= self.rows[v][u] + self.rows[u][w]


@dataclass(frozen=True)
class CostBreakdown:
    """One vertex's cost, split into edge spending and total distance."""

    vertex: int
    building: Fraction
    connection: int | float
    total: Fraction | float


def _bfs_distances(adj: list[list[int]], source: int, n: int) -> list[int | float]:
    dist: list[int | float] = [inf] * n
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if dist[w] == inf:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def all_pairs_distances(profile: StrategyProfile) -> DistanceMatrix:
    """Exact distances on the underlying undirected graph, one BFS per source.

    Edge ownership is irrelevant for traversal; a bought edge can be walked
    in either direction.
    """
    adj = profile.adjacency()
    rows = tuple(tuple(_bfs_distances(adj, s, profile.n)) for s in range(profile.n))
    return DistanceMatrix(profile.n, rows)


def connection_cost(dist: DistanceMatrix, v: int) -> int | float:
    """Sum of distances from ``v`` to every other vertex; ``inf`` if any is."""
    row = dist[v]
    if any(row[u] == inf for u in range(dist.n) if u != v):
        return inf
    return sum(row[u] for u in range(dist.n) if u != v)


def vertex_cost(profile: StrategyProfile, dist: DistanceMatrix, v: int) -> CostBreakdown:
    """Building plus connection cost for ``v``; total is ``inf`` when separated."""
    building = profile.alpha * sum(1 for e in profile.edges if e.buyer == v)
    connection = connection_cost(dist, v)
    total: Fraction | float = inf if connection == inf else building + connection
    return CostBreakdown(v, building, connection, total)


def is_connected(profile: StrategyProfile) -> bool:
    """True iff every pair of vertices is at finite distance."""
    if profile.n == 1:
        return True
    reached = _bfs_distances(profile.adjacency(), 0, profile.n)
    return all(d != inf for d in reached)
