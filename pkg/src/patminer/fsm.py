"""Bounded-BFS frequent subgraph mining over labeled graphs.

Edge-induced subgraphs are extended level by level (one edge per level) and
processed in fixed-capacity blocks to cap intermediate memory. At each level
subgraphs are grouped by quick pattern, then canonical pattern; domain
(minimum-image) support is computed per pattern and infrequent patterns are
pruned together with their subtrees, which is sound because domain support
is anti-monotone under edge extension.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .executor import ExecutionConfig
from .graph import Graph, label_frequency
from .pattern import EDGE_INDUCED, Pattern


@dataclass
class SubgraphBlock:
    """One fixed-capacity slice of a BFS level's subgraph list."""

    rows: list  # (vertices tuple, edges tuple)
    capacity: int

    def __post_init__(self):
        if len(self.rows) > self.capacity:
            raise ValueError("block exceeds its capacity")


def _blocks(rows: list, capacity: int):
    for i in range(0, len(rows), capacity):
        yield SubgraphBlock(rows[i:i + capacity], capacity)


def _quick_key(verts: tuple, edges: tuple, labels) -> tuple:
    """Cheap structural key: the subgraph relabeled by sorted-vertex position.

    Subgraphs sharing a quick key are isomorphic via the identity renaming,
    so the (expensive) canonical form is resolved once per quick key.
    """
    idx = {v: i for i, v in enumerate(verts)}
    enc = tuple(sorted((min(idx[a], idx[b]), max(idx[a], idx[b])) for a, b in edges))
    return (tuple(int(labels[v]) for v in verts), enc)


class _Canonicalizer:
    """Quick-pattern -> canonical pattern cache, with the position maps needed
    to accumulate per-position domains."""

    def __init__(self):
        self._memo: dict[tuple, tuple] = {}

    def resolve(self, quick: tuple) -> tuple[tuple, list[tuple[int, ...]]]:
        hit = self._memo.get(quick)
        if hit is not None:
            return hit
        labs, edges = quick
        k = len(labs)
        best = None
        maps: list[tuple[int, ...]] = []
        for perm in itertools.permutations(range(k)):
            inv = [0] * k
            for i, c in enumerate(perm):
                inv[c] = i
            enc_lab = tuple(labs[inv[c]] for c in range(k))
            enc_edges = tuple(sorted((min(perm[a], perm[b]), max(perm[a], perm[b]))
                                     for a, b in edges))
            enc = (enc_lab, enc_edges)
            if best is None or enc < best:
                best = enc
                maps = [tuple(inv)]
            elif enc == best:
                maps.append(tuple(inv))
        key = (k, *best)
        out = (key, maps)
        self._memo[quick] = out
        return out


def pattern_from_key(key: tuple) -> Pattern:
    k, labels, edges = key
    return Pattern(k, edges, labels=labels, induced=EDGE_INDUCED)


def min_image_support(domains: list[set[int]]) -> int:
    """Minimum over pattern positions of the distinct data vertices mapped
    there; the standard anti-monotone domain support."""
    return min(len(d) for d in domains)


@dataclass
class FsmResult:
    frequent: dict[tuple, int]            # canonical pattern key -> support
    all_supports: dict[tuple, int]        # every surfaced pattern's support
    parent_child: set[tuple[tuple, tuple]]
    blocks_processed: int
    label_pruning: bool

    def frequent_patterns(self) -> dict[Pattern, int]:
        return {pattern_from_key(k): s for k, s in self.frequent.items()}


def run_bounded_bfs(g: Graph, max_edges: int, sigma_min: int,
                    cfg: ExecutionConfig | None = None,
                    support_aggregator=None, pattern_filter=None,
                    subgraph_filter=None, label_pruning: bool = True) -> FsmResult:
    """Mine all edge-induced patterns with <= max_edges edges and domain
    support passing the pattern filter (default: support >= sigma_min).

    Label-frequency pre-pruning drops vertices whose label cannot reach
    sigma_min; it never changes the frequent set because a pattern carrying
    an infrequent label is bounded by that label's vertex count.
    """
    if g.labels is None:
        raise ValueError("frequent subgraph mining requires a labeled graph")
    if max_edges < 1:
        raise ValueError("max_edges must be at least 1")
    cfg = cfg or ExecutionConfig()
    labels = g.labels
    aggregate = support_aggregator or (lambda key, domains: min_image_support(domains))
    keep_pattern = pattern_filter or (lambda key, support: support >= sigma_min)

    vertex_ok = np.ones(g.num_vertices, dtype=bool)
    if label_pruning and g.num_vertices:
        good = label_frequency(g).frequent_labels(sigma_min)
        vertex_ok = np.isin(labels, np.asarray(sorted(good), dtype=labels.dtype))

    canon = _Canonicalizer()
    rows: list[tuple[tuple, tuple]] = []
    for u in range(g.num_vertices):
        if not vertex_ok[u]:
            continue
        for w in g.neighbors_of(u):
            w = int(w)
            if w <= u or not vertex_ok[w]:
                continue
            verts, edges = (u, w), ((u, w),)
            if subgraph_filter is None or subgraph_filter(verts, edges):
                rows.append((verts, edges))

    frequent: dict[tuple, int] = {}
    all_supports: dict[tuple, int] = {}
    parent_child: set[tuple[tuple, tuple]] = set()
    pending_parents: dict[tuple, set] = {}
    blocks_processed = 0
    level = 1

    while rows and level <= max_edges:
        domains: dict[tuple, list[set[int]]] = {}
        row_keys: list[tuple] = []
        for block in _blocks(rows, cfg.bfs_block_size):
            blocks_processed += 1
            for verts, edges in block.rows:
                key, maps = canon.resolve(_quick_key(verts, edges, labels))
                row_keys.append(key)
                doms = domains.get(key)
                if doms is None:
                    doms = domains[key] = [set() for _ in range(key[0])]
                for pos_to_local in maps:
                    for c, li in enumerate(pos_to_local):
                        doms[c].add(verts[li])
        supports = {key: aggregate(key, doms) for key, doms in domains.items()}
        all_supports.update(supports)
        kept = {key for key, s in supports.items() if keep_pattern(key, s)}
        frequent.update({key: supports[key] for key in kept})

        for (verts, edges), key in zip(rows, row_keys):
            for parent in pending_parents.get(edges, ()):
                parent_child.add((parent, key))
        pending_parents.clear()

        if level == max_edges:
            break
        nxt: dict[tuple, tuple] = {}
        offset = 0
        for block in _blocks(rows, cfg.bfs_block_size):
            blocks_processed += 1
            for i, (verts, edges) in enumerate(block.rows):
                key = row_keys[offset + i]
                if key not in kept:
                    continue  # anti-monotone subtree pruning
                for v in verts:
                    for w in g.neighbors_of(v):
                        w = int(w)
                        if not vertex_ok[w]:
                            continue
                        e = (v, w) if v < w else (w, v)
                        if e in edges:
                            continue
                        new_edges = tuple(sorted(edges + (e,)))
                        if new_edges in nxt:
                            pending_parents[new_edges].add(key)
                            continue
                        new_verts = (verts if w in verts
                                     else tuple(sorted(verts + (w,))))
                        if subgraph_filter is None or subgraph_filter(new_verts, new_edges):
                            nxt[new_edges] = (new_verts, new_edges)
                            pending_parents[new_edges] = {key}
            offset += len(block.rows)
        rows = list(nxt.values())
        level += 1

    return FsmResult(frequent=frequent, all_supports=all_supports,
                     parent_child=parent_child,
                     blocks_processed=blocks_processed,
                     label_pruning=label_pruning)
