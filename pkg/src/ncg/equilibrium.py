"""Deviation generation, exact equilibrium verification, dynamics, enumeration.

An equilibrium check asks, per vertex, whether any replacement edge set
strictly lowers that vertex's total cost.  The exact class enumerates all
2^(n-1) replacement sets and is complete; the restricted classes are sound
witnesses only.  The hot paths run on bitmask adjacency with pure integer
arithmetic (alpha = p/q compared by cross-multiplication), so every verdict
is exact.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import inf

from .errors import BudgetExceededError, EnumerationCapError
from .game import BoughtEdge, StrategyProfile, is_connected

KINDS = (
    "exact-all-subsets",
    "single-add",
    "single-delete",
    "single-swap",
    "k-subset",
    "paper-strategy-1",
    "paper-strategy-2",
    "paper-strategy-3",
    "composite",
)

DEFAULT_BUDGET = 1 << 22


@dataclass(frozen=True)
class Deviation:
    """One vertex's replacement strategy: the vertices it now buys edges to."""

    vertex: int
    new_edge_set: frozenset[int]

    def __post_init__(self):
        if self.vertex in self.new_edge_set:
            raise ValueError("a vertex cannot buy an edge to itself")


@dataclass(frozen=True)
class DeviationClass:
    """A named family of deviations searched during verification."""

    kind: str
    k: int | None = None
    parts: tuple["DeviationClass", ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown deviation class kind {self.kind!r}")
        if self.kind == "k-subset" and (self.k is None or self.k < 1):
            raise ValueError("k-subset requires k >= 1")
        if self.kind == "composite" and not self.parts:
            raise ValueError("composite class needs at least one part")

    def spec(self) -> str:
        if self.kind == "k-subset":
            return f"k-subset:{self.k}"
        if self.kind == "composite":
            return ",".join(p.spec() for p in self.parts)
        return self.kind

    @staticmethod
    def parse(text: str) -> "DeviationClass":
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if not parts:
            raise ValueError("empty deviation class spec")
        classes = []
        for part in parts:
            if part in ("exact", "exact-all-subsets"):
                classes.append(DeviationClass("exact-all-subsets"))
            elif part.startswith("k-subset:"):
                classes.append(DeviationClass("k-subset", k=int(part.split(":", 1)[1])))
            elif part in KINDS:
                classes.append(DeviationClass(part))
            else:
                raise ValueError(f"unknown deviation class {part!r}")
        if len(classes) == 1:
            return classes[0]
        return DeviationClass("composite", parts=tuple(classes))


EXACT = DeviationClass("exact-all-subsets")


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one equilibrium check under one deviation class."""

    profile_hash: str
    deviation_class: str
    is_equilibrium: bool
    witness: tuple[Deviation, Fraction | float] | None
    deviations_checked: int


@dataclass(frozen=True)
class DynamicsTrace:
    """Best-response walk: each step is (vertex, deviation, exact delta < 0)."""

    steps: tuple[tuple[int, Deviation, Fraction | float], ...]
    converged: bool
    final_profile: StrategyProfile


def profile_hash(profile: StrategyProfile) -> str:
    """Stable digest of (n, alpha, sorted bought edges)."""
    payload = f"{profile.n};{profile.alpha};" + ";".join(
        f"{e.buyer},{e.other}" for e in sorted(profile.edges)
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# bitmask internals


def _masks(profile: StrategyProfile) -> list[int]:
    adj = [0] * profile.n
    for a, b in profile.undirected_edges():
        adj[a] |= 1 << b
        adj[b] |= 1 << a
    return adj


def _bfs_sum(adj: list[int], source: int, full: int) -> int | None:
    """Sum of BFS distances from source; None when the graph is not covered."""
    seen = 1 << source
    frontier = seen
    total = 0
    d = 0
    while frontier:
        d += 1
        nxt = 0
        f = frontier
        while f:
            low = f & -f
            nxt |= adj[low.bit_length() - 1]
            f ^= low
        frontier = nxt & ~seen
        seen |= frontier
        total += d * frontier.bit_count()
    return total if seen == full else None


def _stripped_adjacency(profile: StrategyProfile, v: int) -> list[int]:
    """Adjacency with v's own purchases removed (edges others bought stay)."""
    adj = [0] * profile.n
    for e in profile.edges:
        if e.buyer == v:
            continue
        adj[e.buyer] |= 1 << e.other
        adj[e.other] |= 1 << e.buyer
    return adj


def _apply_targets(base: list[int], v: int, targets_mask: int) -> list[int]:
    adj = list(base)
    adj[v] |= targets_mask
    t = targets_mask
    while t:
        low = t & -t
        adj[low.bit_length() - 1] |= 1 << v
        t ^= low
    return adj


def _set_from_mask(mask: int) -> frozenset[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return frozenset(out)


def _mask_from_set(targets) -> int:
    m = 0
    for t in targets:
        m |= 1 << t
    return m


# ---------------------------------------------------------------------------
# exact cost deltas


def delta_cost(profile: StrategyProfile, v: int, new_edge_set) -> Fraction | float:
    """Exact cost change for ``v`` adopting ``new_edge_set``, others fixed.

    Recomputes v's distance sum from scratch on the modified graph: this is
    the brute-force oracle every bound audit compares against.  Returns +inf
    when the deviation separates v from some vertex, -inf when it reconnects
    a previously separated v.
    """
    new_targets = frozenset(new_edge_set)
    if v in new_targets:
        raise ValueError("deviation may not contain a self-loop")
    if not all(0 <= t < profile.n for t in new_targets):
        raise ValueError("deviation target outside the vertex range")

    full = (1 << profile.n) - 1
    stripped = _stripped_adjacency(profile, v)
    old_targets = profile.targets_of(v)
    old_sum = _bfs_sum(_apply_targets(stripped, v, _mask_from_set(old_targets)), v, full)
    new_sum = _bfs_sum(_apply_targets(stripped, v, _mask_from_set(new_targets)), v, full)

    if new_sum is None:
        return inf
    if old_sum is None:
        return -inf
    return profile.alpha * (len(new_targets) - len(old_targets)) + (new_sum - old_sum)


def best_response_exact(
    profile: StrategyProfile, v: int, budget: int = DEFAULT_BUDGET
) -> tuple[frozenset[int], Fraction | float]:
    """Cost-minimising edge set for ``v`` over all subsets of the other vertices.

    Ties prefer fewer edges, then lexicographically smallest target set.
    The returned delta is <= 0 since the current strategy competes.
    """
    n = profile.n
    required = 1 << (n - 1)
    if required > budget:
        raise BudgetExceededError(
            f"best response needs {required} evaluations (budget {budget})",
            required=required,
        )
    others = [u for u in range(n) if u != v]
    stripped = _stripped_adjacency(profile, v)
    full = (1 << n) - 1
    p, q = profile.alpha.numerator, profile.alpha.denominator

    best_key = None
    best_set: frozenset[int] = frozenset()
    for sub in range(required):
        targets_mask = 0
        s = sub
        while s:
            low = s & -s
            targets_mask |= 1 << others[low.bit_length() - 1]
            s ^= low
        dsum = _bfs_sum(_apply_targets(stripped, v, targets_mask), v, full)
        if dsum is None:
            continue
        size = targets_mask.bit_count()
        key = (p * size + q * dsum, size, tuple(sorted(_set_from_mask(targets_mask))))
        if best_key is None or key < best_key:
            best_key = key
            best_set = _set_from_mask(targets_mask)

    if best_key is None:  # every strategy leaves v separated (n == 1 handled upstream)
        return profile.targets_of(v), Fraction(0)
    delta = delta_cost(profile, v, best_set)
    if delta > 0:  # cannot happen: current strategy is in the search space
        raise AssertionError("best response worse than current strategy")
    return best_set, delta


# ---------------------------------------------------------------------------
# deviation generators (restricted classes)


def _class_deviations(profile: StrategyProfile, v: int, cls: DeviationClass, ctx):
    """Yield candidate target sets for ``v`` in deterministic order."""
    current = profile.targets_of(v)
    others = [u for u in range(profile.n) if u != v]

    if cls.kind == "exact-all-subsets":
        for sub in range(1 << len(others)):
            s = frozenset(others[i] for i in range(len(others)) if sub >> i & 1)
            if s != current:
                yield s
    elif cls.kind == "single-add":
        for u in sorted(set(others) - current):
            yield current | {u}
    elif cls.kind == "single-delete":
        for u in sorted(current):
            yield current - {u}
    elif cls.kind == "single-swap":
        for u in sorted(current):
            for w in sorted(set(others) - current):
                yield (current - {u}) | {w}
    elif cls.kind == "k-subset":
        # All strategies within symmetric difference k of the current one.
        for size in range(1, cls.k + 1):
            for flip in combinations(others, size):
                yield current.symmetric_difference(flip)
    elif cls.kind.startswith("paper-strategy-"):
        yield from _paper_strategy_deviations(profile, v, cls.kind[-1], ctx)
    elif cls.kind == "composite":
        seen = set()
        for part in cls.parts:
            for s in _class_deviations(profile, v, part, ctx):
                if s not in seen:
                    seen.add(s)
                    yield s


def _paper_strategy_deviations(profile: StrategyProfile, v: int, which: str, ctx):
    """Sell-subsets of v's low-level H-edges, optionally rebuying the root edge.

    Strategy 1 sells bought edges of minimal level <= 2; strategies 2 and 3
    also buy the edge to the root, with 3 additionally allowed to sell v's
    bought up-edge.
    """
    if ctx is None or not ctx.has_cyclic_h or v not in ctx.h_vertices or v == ctx.root:
        return
    eligible = ctx.sellable_edges(v, include_up=(which == "3"))
    if not eligible:
        return
    current = profile.targets_of(v)
    for size in range(1, len(eligible) + 1):
        for sold in combinations(eligible, size):
            new = current - {other for (_, other) in sold}
            if which in ("2", "3"):
                new = new | {ctx.root}
            if new != current:
                yield new


def _needs_context(cls: DeviationClass) -> bool:
    if cls.kind.startswith("paper-strategy-"):
        return True
    return any(_needs_context(p) for p in cls.parts)


# ---------------------------------------------------------------------------
# verification


def verify_equilibrium(
    profile: StrategyProfile,
    dev_class: DeviationClass = EXACT,
    budget: int = DEFAULT_BUDGET,
) -> VerificationReport:
    """Check every deviation the class generates; first strict improvement wins.

    Sound for every class (a witness always beats exact recomputation);
    complete only for exact-all-subsets.  Disconnected profiles are rejected
    outright: buying edges to everyone is a finite-cost improvement over an
    infinite one.
    """
    digest = profile_hash(profile)
    if profile.n > 1 and not is_connected(profile):
        v = 0
        dev = Deviation(v, frozenset(range(1, profile.n)))
        return VerificationReport(digest, dev_class.spec(), False, (dev, -inf), 1)

    if dev_class.kind == "exact-all-subsets":
        required = profile.n * ((1 << (profile.n - 1)) - 1)
        if required > budget:
            raise BudgetExceededError(
                f"exact verification needs {required} deviation checks (budget {budget})",
                required=required,
            )
        return _verify_exact_fast(profile, digest)

    ctx = None
    if _needs_context(dev_class):
        from .audit import build_context

        ctx = build_context(profile)

    checked = 0
    for v in range(profile.n):
        for targets in _class_deviations(profile, v, dev_class, ctx):
            checked += 1
            if checked > budget:
                raise BudgetExceededError(
                    f"verification exceeded budget {budget}", required=checked
                )
            delta = delta_cost(profile, v, targets)
            if delta < 0:
                dev = Deviation(v, frozenset(targets))
                return VerificationReport(digest, dev_class.spec(), False, (dev, delta), checked)
    return VerificationReport(digest, dev_class.spec(), True, None, checked)


def _verify_exact_fast(profile: StrategyProfile, digest: str) -> VerificationReport:
    """Bitmask inner loop for the exact class; integer arithmetic only."""
    n = profile.n
    full = (1 << n) - 1
    p, q = profile.alpha.numerator, profile.alpha.denominator
    checked = 0
    for v in range(n):
        stripped = _stripped_adjacency(profile, v)
        cur_mask = _mask_from_set(profile.targets_of(v))
        cur_sum = _bfs_sum(_apply_targets(stripped, v, cur_mask), v, full)
        cur_scaled = p * cur_mask.bit_count() + q * cur_sum
        others = [u for u in range(n) if u != v]
        for sub in range(1 << (n - 1)):
            targets_mask = 0
            s = sub
            while s:
                low = s & -s
                targets_mask |= 1 << others[low.bit_length() - 1]
                s ^= low
            if targets_mask == cur_mask:
                continue
            checked += 1
            dsum = _bfs_sum(_apply_targets(stripped, v, targets_mask), v, full)
            if dsum is None:
                continue
            if p * targets_mask.bit_count() + q * dsum < cur_scaled:
                targets = _set_from_mask(targets_mask)
                delta = delta_cost(profile, v, targets)
                assert delta < 0
                return VerificationReport(
                    digest, "exact-all-subsets", False, (Deviation(v, targets), delta), checked
                )
    return VerificationReport(digest, "exact-all-subsets", True, None, checked)


# ---------------------------------------------------------------------------
# dynamics


def best_response_dynamics(
    initial: StrategyProfile,
    dev_class: DeviationClass = EXACT,
    vertex_order: str = "round-robin",
    max_iters: int = 100,
    seed: int | None = None,
    budget: int = DEFAULT_BUDGET,
) -> DynamicsTrace:
    """Iterate best improving moves until a full pass changes nothing.

    ``max_iters`` bounds the number of passes; non-convergence is a valid
    outcome and leaves ``converged`` False.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    rng = random.Random(seed)
    profile = initial
    steps: list[tuple[int, Deviation, Fraction | float]] = []
    converged = False
    for _ in range(max_iters):
        order = list(range(profile.n))
        if vertex_order == "random":
            rng.shuffle(order)
        improved = False
        for v in order:
            move = _best_class_move(profile, v, dev_class, budget)
            if move is None:
                continue
            targets, delta = move
            steps.append((v, Deviation(v, targets), delta))
            profile = profile.with_strategy(v, targets)
            improved = True
        if not improved:
            converged = True
            break
    return DynamicsTrace(tuple(steps), converged, profile)


def _best_class_move(
    profile: StrategyProfile, v: int, cls: DeviationClass, budget: int
) -> tuple[frozenset[int], Fraction | float] | None:
    """Best strictly improving deviation for v within the class, or None."""
    if cls.kind == "exact-all-subsets":
        targets, delta = best_response_exact(profile, v, budget)
        return (targets, delta) if delta < 0 else None
    ctx = None
    if _needs_context(cls):
        from .audit import build_context

        ctx = build_context(profile)
    best = None
    for targets in _class_deviations(profile, v, cls, ctx):
        delta = delta_cost(profile, v, targets)
        if delta >= 0:
            continue
        key = (delta, len(targets), tuple(sorted(targets)))
        if best is None or key < best[0]:
            best = (key, targets, delta)
    if best is None:
        return None
    return best[1], best[2]


# ---------------------------------------------------------------------------
# enumeration and random generation


@dataclass(frozen=True)
class EnumerationResult:
    """Exhaustive scan outcome over all buyer-annotated profiles."""

    n: int
    alpha: Fraction
    profiles_scanned: int
    connected_count: int
    equilibria: tuple[tuple[StrategyProfile, VerificationReport], ...]


def pair_list(n: int) -> list[tuple[int, int]]:
    """Unordered vertex pairs in lexicographic order."""
    return [(u, v) for u in range(n) for v in range(u + 1, n)]


def profile_from_index(n: int, alpha: Fraction, index: int) -> StrategyProfile:
    """Decode a base-3 profile index: per pair 0 = absent, 1/2 = lower/higher buys."""
    edges = []
    for u, v in pair_list(n):
        index, trit = divmod(index, 3)
        if trit == 1:
            edges.append(BoughtEdge(u, v))
        elif trit == 2:
            edges.append(BoughtEdge(v, u))
    return StrategyProfile(n, alpha, tuple(edges))


def scan_profile_range(
    n: int,
    alpha: Fraction,
    dev_class: DeviationClass,
    start: int,
    stop: int,
    budget: int = DEFAULT_BUDGET,
) -> tuple[int, list[tuple[int, VerificationReport]]]:
    """Verify every profile index in [start, stop); pure function of its inputs.

    Returns (connected-profile count, [(index, report)] for equilibria found).
    """
    found = []
    connected = 0
    for index in range(start, stop):
        profile = profile_from_index(n, alpha, index)
        if profile.n > 1 and not is_connected(profile):
            continue
        connected += 1
        report = verify_equilibrium(profile, dev_class, budget)
        if report.is_equilibrium:
            found.append((index, report))
    return connected, found


def enumerate_equilibria(
    n: int,
    alpha: Fraction,
    dev_class: DeviationClass = EXACT,
    cap: int = 5,
    budget: int = DEFAULT_BUDGET,
) -> EnumerationResult:
    """All equilibria among the 3^(n(n-1)/2) buyer-annotated profiles.

    Profiles with a disconnected underlying graph are skipped (they are
    never equilibria).  Deterministic: results ordered by profile index.
    """
    if n > cap:
        raise EnumerationCapError(f"n={n} above enumeration cap {cap}")
    total = 3 ** (n * (n - 1) // 2)
    connected, found = scan_profile_range(n, alpha, dev_class, 0, total, budget)
    equilibria = tuple(
        (profile_from_index(n, alpha, idx), report) for idx, report in found
    )
    return EnumerationResult(n, Fraction(alpha), total, connected, equilibria)


def canonical_profile_key(profile: StrategyProfile) -> tuple:
    """Relabeling-invariant key for cosmetic deduplication in reports.

    Minimises the sorted bought-edge list over all vertex permutations;
    enumeration itself always stays labeled (correctness first, dedup is a
    reporting convenience).  Factorial in n, intended for n <= 7.
    """
    from itertools import permutations

    n = profile.n
    base = [(e.buyer, e.other) for e in profile.edges]
    best = None
    for perm in permutations(range(n)):
        relabeled = tuple(sorted((perm[a], perm[b]) for a, b in base))
        if best is None or relabeled < best:
            best = relabeled
    return (n, profile.alpha, best)


def distinct_up_to_relabeling(profiles) -> list[StrategyProfile]:
    """One representative per relabeling class, in first-seen order."""
    seen = set()
    out = []
    for p in profiles:
        key = canonical_profile_key(p)
        if key not in seen:
            seen.add(key)
            out.append(p)
    return out


def random_profile(
    n: int,
    edge_density: float,
    seed: int,
    alpha: Fraction | int = 1,
    require_connected: bool = False,
    max_tries: int = 10_000,
) -> StrategyProfile:
    """Seeded random profile: each pair present independently, buyer by coin flip."""
    if not 0 <= edge_density <= 1:
        raise ValueError("edge_density must lie in [0, 1]")
    rng = random.Random(seed)
    for _ in range(max_tries):
        edges = []
        for u, v in pair_list(n):
            if rng.random() < edge_density:
                edges.append(BoughtEdge(u, v) if rng.random() < 0.5 else BoughtEdge(v, u))
        profile = StrategyProfile(n, Fraction(alpha), tuple(edges))
        if not require_connected or is_connected(profile):
            return profile
    raise ValueError(f"no connected profile found in {max_tries} draws")
