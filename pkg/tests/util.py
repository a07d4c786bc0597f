"""Shared builders for the test suite."""
from __future__ import annotations

import numpy as np

from patminer import graph as graph_mod
from patminer import plan as plan_mod
from patminer.pattern import (GraphStats, Pattern, detect_properties,
                              enumerate_matching_orders,
                              generate_symmetry_order, select_matching_order)


def er(n: int, p: float, seed: int, labels: int | None = None) -> graph_mod.Graph:
    rng = np.random.default_rng(seed)
    mask = np.triu(rng.random((n, n)) < p, 1)
    labs = rng.integers(0, labels, n) if labels else None
    return graph_mod.from_edges(np.argwhere(mask), num_vertices=n, labels=labs)


def complete(n: int, labels=None) -> graph_mod.Graph:
    return graph_mod.from_edges([(a, b) for a in range(n) for b in range(a + 1, n)],
                                num_vertices=n, labels=labels)


def analyze(p: Pattern, g=None):
    stats = GraphStats.of(g) if g is not None else None
    mo = select_matching_order(enumerate_matching_orders(p), stats)
    so = generate_symmetry_order(p, mo)
    return mo, so


def make_plan(p: Pattern, g=None, mode: str = "count", granularity: str = "edge",
              oriented: bool = False, rewrite: bool = False):
    mo, so = analyze(p, g)
    pl = plan_mod.build_plan(p, mo, so, mode, granularity=granularity,
                             oriented=oriented)
    if rewrite:
        props = detect_properties(p, mo, so)
        pl = plan_mod.apply_counting_rewrite(pl, props)
    return pl


DIAMOND_EDGES = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]
CYCLE4_EDGES = [(0, 1), (1, 2), (2, 3), (3, 0)]
TAILED_EDGES = [(0, 1), (0, 2), (0, 3), (1, 2)]


def diamond(induced="edge") -> Pattern:
    return Pattern(4, DIAMOND_EDGES, induced=induced)


def cycle4(induced="edge") -> Pattern:
    return Pattern(4, CYCLE4_EDGES, induced=induced)
