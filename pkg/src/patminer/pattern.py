"""Patterns and their analysis: matching order, symmetry order, properties.

A pattern is a small connected graph (2..8 vertices). Analysis turns it into
a matching order (which pattern vertex is bound at each search level, with
per-level connectivity requirements), a symmetry order (id constraints that
report each distinct match exactly once), and structural properties that
gate runtime optimizations (clique, hub vertices, tail decomposition).
"""
from __future__ import annotations

import itertools
import zlib
from dataclasses import dataclass

MAX_PATTERN_SIZE = 8

VERTEX_INDUCED = "vertex"
EDGE_INDUCED = "edge"


class Pattern:
    """Connected k-vertex pattern graph with optional vertex labels."""

    def __init__(self, size: int, edges, labels=None,
                 induced: str = EDGE_INDUCED, name: str | None = None):
        if size < 2:
            raise ValueError("pattern needs at least 2 vertices")
        if size > MAX_PATTERN_SIZE:
            raise ValueError(f"pattern size {size} exceeds the supported maximum "
                             f"of {MAX_PATTERN_SIZE}")
        if induced not in (VERTEX_INDUCED, EDGE_INDUCED):
            raise ValueError(f"unknown induced mode {induced!r}")
        self.size = size
        es = set()
        for u, v in edges:
            if u == v:
                raise ValueError("pattern may not contain self loops")
            if not (0 <= u < size and 0 <= v < size):
                raise ValueError(f"pattern edge ({u},{v}) out of range")
            es.add((min(u, v), max(u, v)))
        self.edges: tuple[tuple[int, int], ...] = tuple(sorted(es))
        adj = [set() for _ in range(size)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        self.adj: tuple[frozenset[int], ...] = tuple(frozenset(s) for s in adj)
        self.labels = None if labels is None else tuple(int(x) for x in labels)
        if self.labels is not None and len(self.labels) != size:
            raise ValueError("one label per pattern vertex required")
        self.induced = induced
        if not self._connected():
            raise ValueError("pattern must be connected")
        self._canon: tuple | None = None
        self.name = name or _default_name(self)

    def _connected(self) -> bool:
        seen = {0}
        frontier = [0]
        while frontier:
            u = frontier.pop()
            for v in self.adj[u]:
                if v not in seen:
                    seen.add(v)
                    frontier.append(v)
        return len(seen) == self.size

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degree(self, u: int) -> int:
        return len(self.adj[u])

    def is_clique(self) -> bool:
        return self.num_edges == self.size * (self.size - 1) // 2

    def with_induced(self, induced: str) -> "Pattern":
        return Pattern(self.size, self.edges, labels=self.labels,
                       induced=induced, name=self.name)

    def canonical_form(self) -> tuple:
        """Permutation-minimal encoding of (labels, edges); iso-invariant."""
        if self._canon is None:
            best = None
            for perm in itertools.permutations(range(self.size)):
                labs = (tuple(self.labels[perm.index(i)] for i in range(self.size))
                        if self.labels is not None else None)
                edges = tuple(sorted((min(perm[u], perm[v]), max(perm[u], perm[v]))
                                     for u, v in self.edges))
                enc = (labs, edges)
                if best is None or enc < best:
                    best = enc
            self._canon = (self.size, *best)
        return self._canon

    def __eq__(self, other) -> bool:
        if not isinstance(other, Pattern):
            return NotImplemented
        return (self.size == other.size and self.induced == other.induced
                and self.canonical_form() == other.canonical_form())

    def __hash__(self) -> int:
        return hash((self.induced, self.canonical_form()))

    def __repr__(self) -> str:
        return f"Pattern({self.name}, k={self.size}, edges={self.num_edges}, {self.induced})"


def _default_name(p: Pattern) -> str:
    k, e = p.size, p.num_edges
    if p.labels is None:
        if k == 2:
            return "edge"
        if p.is_clique():
            return "triangle" if k == 3 else f"{k}-clique"
        degs = tuple(sorted(p.degree(u) for u in range(k)))
        named = {
            (3, 2, (1, 1, 2)): "wedge",
            (4, 3, (1, 1, 1, 3)): "3-star",
            (4, 3, (1, 1, 2, 2)): "4-path",
            (4, 4, (2, 2, 2, 2)): "4-cycle",
            (4, 4, (1, 2, 2, 3)): "tailed-triangle",
            (4, 5, (2, 2, 3, 3)): "diamond",
        }
        if (k, e, degs) in named:
            return named[(k, e, degs)]
    digest = zlib.crc32(repr(p.canonical_form()).encode()) % 10**6
    return f"p{k}v{e}e-{digest:06d}"


# ---------------------------------------------------------------------------
# Pattern construction
# ---------------------------------------------------------------------------

def parse_pattern(path: str, induced: str = EDGE_INDUCED) -> Pattern:
    """Read a pattern edgelist over dense vertex ids 0..k-1."""
    edges = []
    max_id = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line[0] in "#%":
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'u v', got {line!r}")
            u, v = int(parts[0]), int(parts[1])
            edges.append((u, v))
            max_id = max(max_id, u, v)
    if max_id < 1:
        raise ValueError(f"{path}: pattern needs at least one edge")
    return Pattern(max_id + 1, edges, induced=induced)


def generate_clique(k: int) -> Pattern:
    if not 2 <= k <= MAX_PATTERN_SIZE:
        raise ValueError(f"clique size {k} out of range 2..{MAX_PATTERN_SIZE}")
    return Pattern(k, list(itertools.combinations(range(k), 2)))


def generate_all_motifs(k: int) -> list[Pattern]:
    """All connected k-vertex graphs up to isomorphism, vertex-induced mode."""
    if not 3 <= k <= 5:
        raise ValueError(f"motif size {k} out of range 3..5")
    pairs = list(itertools.combinations(range(k), 2))
    seen: dict[tuple, Pattern] = {}
    for mask in range(1 << len(pairs)):
        edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        if len(edges) < k - 1:
            continue
        try:
            p = Pattern(k, edges, induced=VERTEX_INDUCED)
        except ValueError:
            continue  # disconnected
        seen.setdefault(p.canonical_form(), p)
    motifs = sorted(seen.values(), key=lambda p: (p.num_edges, p.canonical_form()))
    for i, p in enumerate(motifs):
        if p.name.startswith(f"p{k}v"):
            p.name = f"{k}-motif-{i:02d}"
    return motifs


# ---------------------------------------------------------------------------
# Automorphisms
# ---------------------------------------------------------------------------

def automorphisms(p: Pattern) -> list[tuple[int, ...]]:
    """Exact automorphism group via exhaustive permutation filtering.

    Labels are respected when present. k <= 8 keeps this at <= 40320
    candidates.
    """
    k = p.size
    degs = [p.degree(u) for u in range(k)]
    out = []
    for perm in itertools.permutations(range(k)):
        ok = True
        for u in range(k):
            if degs[perm[u]] != degs[u]:
                ok = False
                break
            if p.labels is not None and p.labels[perm[u]] != p.labels[u]:
                ok = False
                break
        if not ok:
            continue
        if all(frozenset(perm[v] for v in p.adj[u]) == p.adj[perm[u]] for u in range(k)):
            out.append(perm)
    return out


# ---------------------------------------------------------------------------
# Matching orders
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatchingOrder:
    """Total order over pattern vertices plus per-level connectivity.

    `order[i]` is the pattern vertex bound at level i+1. `conn[i]` holds the
    earlier levels (1-based) the level-(i+1) vertex must connect to, `anti[i]`
    the earlier levels it must not connect to (vertex-induced patterns only).
    """

    order: tuple[int, ...]
    conn: tuple[frozenset[int], ...]
    anti: tuple[frozenset[int], ...]
    level_labels: tuple[int, ...] | None = None

    @property
    def size(self) -> int:
        return len(self.order)

    def signature(self) -> tuple:
        lab = self.level_labels or (None,) * self.size
        return tuple((tuple(sorted(c)), tuple(sorted(a)), lab[i])
                     for i, (c, a) in enumerate(zip(self.conn, self.anti)))

    def describe(self) -> str:
        lines = []
        for i in range(self.size):
            conn = ",".join(f"v{j}" for j in sorted(self.conn[i])) or "-"
            anti = ",".join(f"v{j}" for j in sorted(self.anti[i])) or "-"
            lines.append(f"level {i + 1}: u{self.order[i]}  conn[{conn}]  anti[{anti}]")
        return "\n".join(lines)


def _order_from_perm(p: Pattern, perm: tuple[int, ...]) -> MatchingOrder | None:
    k = p.size
    conn, anti = [], []
    for i in range(k):
        c = frozenset(j + 1 for j in range(i) if perm[j] in p.adj[perm[i]])
        a = (frozenset(j + 1 for j in range(i) if perm[j] not in p.adj[perm[i]])
             if p.induced == VERTEX_INDUCED else frozenset())
        if i >= 1 and not c:
            return None  # not a connected extension
        conn.append(c)
        anti.append(a)
    labels = (tuple(p.labels[v] for v in perm) if p.labels is not None else None)
    return MatchingOrder(perm, tuple(conn), tuple(anti), labels)


def enumerate_matching_orders(p: Pattern) -> list[MatchingOrder]:
    """All connected-extension orders, deduplicated by level signature."""
    seen: dict[tuple, MatchingOrder] = {}
    for perm in itertools.permutations(range(p.size)):
        mo = _order_from_perm(p, perm)
        if mo is None:
            continue
        seen.setdefault(mo.signature(), mo)
    return list(seen.values())


@dataclass(frozen=True)
class GraphStats:
    """Degree statistics the matching-order cost model consumes."""

    avg_degree: float = 16.0
    num_vertices: int = 1 << 12

    @classmethod
    def of(cls, g) -> "GraphStats":
        return cls(avg_degree=max(g.avg_degree, 1.0),
                   num_vertices=max(g.num_vertices, 2))


def order_cost(mo: MatchingOrder, stats: GraphStats) -> float:
    """Estimated search-tree size of a matching order.

    Level j is expected to offer s(j) candidates: the full vertex set at the
    root and an average neighborhood shrunk by a selectivity factor for each
    additional intersection. The cost sums the expected number of partial
    matches alive entering each level.
    """
    dbar = max(stats.avg_degree, 1.0)
    nv = max(stats.num_vertices, int(dbar) + 1)
    r = dbar / nv
    s = [dbar * r ** (len(c) - 1) for c in mo.conn]
    cost = 0.0
    width = 1.0
    for i in range(1, mo.size):
        width *= s[i - 1]
        cost += width
    return cost


def select_matching_order(orders: list[MatchingOrder],
                          stats: GraphStats | None = None) -> MatchingOrder:
    """Deterministic cost-minimizing choice; ties break on the lexicographically
    smallest level signature."""
    if not orders:
        raise ValueError("no matching orders to select from")
    stats = stats or GraphStats()
    return min(orders, key=lambda mo: (order_cost(mo, stats), mo.signature()))


# ---------------------------------------------------------------------------
# Symmetry orders
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymmetryOrder:
    """Pairs (i, j): the data vertex at level i must have a larger id than the
    one at level j. Constructed so each distinct match survives exactly once."""

    constraints: frozenset[tuple[int, int]]

    def constrains(self, i: int, j: int) -> bool:
        return (i, j) in self.constraints

    def sources_for(self, level: int) -> list[int]:
        return sorted(i for i, j in self.constraints if j == level)

    def describe(self) -> str:
        if not self.constraints:
            return "(none)"
        return ", ".join(f"v{i}>v{j}" for i, j in sorted(self.constraints))


def generate_symmetry_order(p: Pattern, mo: MatchingOrder) -> SymmetryOrder:
    """Break every pattern automorphism with per-level id constraints.

    Walks the levels of the matching order, and at each level l adds v_l > v_j
    for every level j interchangeable with l under the automorphisms that fix
    all earlier levels. The surviving match of each orbit is the one whose
    earlier levels carry the larger ids, mirroring the break conditions of the
    nested-loop search.
    """
    level_of = {v: i + 1 for i, v in enumerate(mo.order)}
    group = []
    for sigma in automorphisms(p):
        group.append(tuple(level_of[sigma[mo.order[l]]] for l in range(p.size)))
    constraints: set[tuple[int, int]] = set()
    alive = group
    for l in range(1, p.size + 1):
        orbit = {tau[l - 1] for tau in alive}
        for j in sorted(orbit):
            if j != l:
                constraints.add((l, j))
        alive = [tau for tau in alive if tau[l - 1] == l]
    return SymmetryOrder(frozenset(constraints))


# ---------------------------------------------------------------------------
# Structural properties
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PatternProperties:
    is_clique: bool
    hub_vertices: frozenset[int]
    decomposition: tuple[int, int] | None  # (prefix length, tail size t)
    automorphism_count: int


def detect_properties(p: Pattern, mo: MatchingOrder, so: SymmetryOrder) -> PatternProperties:
    """Clique/hub flags plus tail decomposition for counting rewrites.

    A decomposition (prefix, t) is reported when the last t >= 2 levels all
    draw candidates from one identical set expression over prefix levels and
    the symmetry order totally chains them, so listing those levels can be
    replaced by a binomial count.
    """
    k = p.size
    hubs = frozenset(u for u in range(k) if p.degree(u) == k - 1)
    best = None
    for t in range(2, k - 1 + 1):
        prefix = k - t
        if prefix < 2:
            break
        tail = list(range(prefix + 1, k + 1))
        sig0 = (mo.conn[tail[0] - 1], mo.anti[tail[0] - 1])
        if any(ref > prefix for ref in sig0[0] | sig0[1]):
            continue
        if p.labels is not None and len({p.labels[mo.order[l - 1]] for l in tail}) > 1:
            continue
        same_expr = all((mo.conn[l - 1], mo.anti[l - 1]) == sig0 for l in tail)
        chained = all(so.constrains(tail[i], tail[i + 1]) for i in range(t - 1))
        prefix_bounds = [frozenset(b for b in so.sources_for(l) if b <= prefix)
                         for l in tail]
        uniform_bounds = all(b == prefix_bounds[0] for b in prefix_bounds)
        if same_expr and chained and uniform_bounds:
            best = (prefix, t)
    return PatternProperties(
        is_clique=p.is_clique(),
        hub_vertices=hubs,
        decomposition=best,
        automorphism_count=len(automorphisms(p)),
    )


def describe_analysis(p: Pattern, mo: MatchingOrder, so: SymmetryOrder) -> str:
    """Debug dump of a pattern's matching order and symmetry constraints."""
    return (f"pattern {p.name} (k={p.size}, {p.induced}-induced)\n"
            f"{mo.describe()}\n"
            f"symmetry: {so.describe()}")
