"""Plan-free brute-force references used by tests and derived expectations.

Everything here enumerates naively: ordered tuples by connected extension
with no symmetry breaking, isomorphism tested per leaf, duplicates removed
by canonical key. Intentionally slow and simple; guarded to desk scale.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .pattern import EDGE_INDUCED, VERTEX_INDUCED, Pattern

_SIZE_GUARD = {2: 2000, 3: 600, 4: 260, 5: 210, 6: 80, 7: 64, 8: 64}


class OracleScaleError(ValueError):
    """Input too large for a brute-force pass; keep oracle runs desk-scale."""


def _adjacency_sets(g) -> list[frozenset[int]]:
    return [frozenset(int(x) for x in g.neighbors_of(v)) for v in range(g.num_vertices)]


def _extension_order(p: Pattern) -> list[int]:
    """A connected order of the pattern's own vertices (plan-independent)."""
    order = [0]
    while len(order) < p.size:
        for u in range(p.size):
            if u not in order and any(w in p.adj[u] for w in order):
                order.append(u)
                break
    return order


def match_key(p: Pattern, vertices: tuple[int, ...]) -> tuple:
    """Canonical identity of one match: the image edge set for edge-induced
    patterns, the vertex set for vertex-induced ones.

    `vertices[i]` is the data vertex playing pattern vertex i. (A vertex set
    alone cannot identify an edge-induced occurrence: one K4 holds six
    distinct diamonds over the same four vertices.)
    """
    if p.induced == VERTEX_INDUCED:
        return tuple(sorted(vertices))
    imgs = []
    for u, v in p.edges:
        a, b = vertices[u], vertices[v]
        imgs.append((a, b) if a < b else (b, a))
    return tuple(sorted(imgs))


@dataclass(frozen=True)
class Match:
    """One assignment of data vertices to pattern vertices.

    Two matches denote the same subgraph occurrence iff their canonical keys
    agree (they then differ only by a pattern automorphism).
    """

    pattern: Pattern
    vertices: tuple[int, ...]

    @property
    def canonical_key(self) -> tuple:
        return (self.pattern.name,) + match_key(self.pattern, self.vertices)


def brute_force_matches(g, p: Pattern):
    """All assignment tuples (data vertex per pattern vertex index), without
    symmetry breaking: |Aut(p)| assignments per distinct match."""
    if g.num_vertices > _SIZE_GUARD.get(p.size, 64):
        raise OracleScaleError(
            f"|V|={g.num_vertices} exceeds the k={p.size} oracle guard")
    if p.labels is not None and g.labels is None:
        raise ValueError("labeled pattern on an unlabeled graph")
    return _iter_matches(g, p)


def _iter_matches(g, p: Pattern):
    adj = _adjacency_sets(g)
    order = _extension_order(p)
    vertex_ok = p.induced == VERTEX_INDUCED
    labels = g.labels

    def compatible(u: int, w: int, assigned: dict[int, int]) -> bool:
        if labels is not None and p.labels is not None and int(labels[w]) != p.labels[u]:
            return False
        for u2, w2 in assigned.items():
            linked = u2 in p.adj[u]
            present = w2 in adj[w]
            if linked and not present:
                return False
            if vertex_ok and not linked and present:
                return False
        return True

    def extend(pos: int, assigned: dict[int, int]):
        if pos == p.size:
            yield tuple(assigned[u] for u in range(p.size))
            return
        u = order[pos]
        anchor = next(u2 for u2 in order[:pos] if u2 in p.adj[u])
        for w in adj[assigned[anchor]]:
            if w in assigned.values():
                continue
            if compatible(u, w, assigned):
                assigned[u] = w
                yield from extend(pos + 1, assigned)
                del assigned[u]

    u0 = order[0]
    for w in range(g.num_vertices):
        if labels is not None and p.labels is not None and int(labels[w]) != p.labels[u0]:
            continue
        yield from extend(1, {u0: w})


def brute_force_count(g, p: Pattern, induced: str | None = None) -> int:
    """Exact distinct-match count by exhaustive enumeration and dedup."""
    if induced is not None and induced != p.induced:
        p = p.with_induced(induced)
    return len({match_key(p, m) for m in brute_force_matches(g, p)})


def brute_force_assignment_count(g, p: Pattern) -> int:
    """Ordered assignments, i.e. distinct matches times |Aut(p)|."""
    return sum(1 for _ in brute_force_matches(g, p))


# ---------------------------------------------------------------------------
# Frequent subgraph mining reference
# ---------------------------------------------------------------------------

def canonical_labeled(vertices: tuple[int, ...], edges, labels) -> tuple:
    """Permutation-minimal encoding of a labeled subgraph.

    vertices: data vertex ids; edges: pairs of data vertex ids;
    labels[v]: label of data vertex v. Returns (k, label tuple, edge tuple).
    """
    k = len(vertices)
    best = None
    for perm in itertools.permutations(range(k)):
        pos = {vertices[i]: perm[i] for i in range(k)}
        lab = tuple(labels[vertices[perm.index(i)]] for i in range(k))
        enc_edges = tuple(sorted((min(pos[a], pos[b]), max(pos[a], pos[b]))
                                 for a, b in edges))
        enc = (lab, enc_edges)
        if best is None or enc < best:
            best = enc
    return (k, *best)


def pattern_from_canonical(canon: tuple, induced: str = EDGE_INDUCED) -> Pattern:
    k, labels, edges = canon
    return Pattern(k, edges, labels=labels, induced=induced)


def brute_force_fsm(g, max_edges: int, sigma_min: int) -> dict[tuple, int]:
    """Frequent labeled patterns with exact minimum-image support.

    Enumerates every connected edge-induced subgraph with up to `max_edges`
    edges, groups by canonical pattern, accumulates per-position domains over
    all isomorphisms, and keeps patterns whose minimum domain size reaches
    sigma_min. Returns canonical pattern -> support.
    """
    if g.labels is None:
        raise ValueError("FSM requires a labeled graph")
    if g.num_vertices > 120:
        raise OracleScaleError("FSM oracle guarded to 120 vertices")
    labels = [int(x) for x in g.labels]
    adj = _adjacency_sets(g)
    und_edges = [(u, v) for u in range(g.num_vertices) for v in adj[u] if u < v]

    subgraphs: set[frozenset[tuple[int, int]]] = set()
    frontier = {frozenset([e]) for e in und_edges}
    subgraphs |= frontier
    for _ in range(max_edges - 1):
        nxt = set()
        for sub in frontier:
            verts = {x for e in sub for x in e}
            for v in verts:
                for w in adj[v]:
                    e = (v, w) if v < w else (w, v)
                    if e not in sub:
                        nxt.add(sub | {e})
        frontier = nxt - subgraphs
        subgraphs |= frontier

    domains: dict[tuple, list[set[int]]] = {}
    for sub in subgraphs:
        verts = tuple(sorted({x for e in sub for x in e}))
        canon = canonical_labeled(verts, sub, labels)
        doms = domains.setdefault(canon, [set() for _ in range(canon[0])])
        k = len(verts)
        canon_lab, canon_edges = canon[1], set(canon[2])
        for perm in itertools.permutations(range(k)):
            pos = {verts[i]: perm[i] for i in range(k)}
            if tuple(labels[verts[perm.index(i)]] for i in range(k)) != canon_lab:
                continue
            mapped = {(min(pos[a], pos[b]), max(pos[a], pos[b])) for a, b in sub}
            if mapped != canon_edges:
                continue
            for i in range(k):
                doms[perm[i]].add(verts[i])
    out = {}
    for canon, doms in domains.items():
        support = min(len(d) for d in doms)
        if support >= sigma_min:
            out[canon] = support
    return out
