"""Executable search-plan IR: per-level candidate-set expressions with
symmetry bounds, buffer slots, counting rewrites and multi-pattern fusion.

A plan is one nested loop per pattern vertex. Level i's candidates are an
intersection/difference expression over the neighborhoods of earlier levels
(optionally reusing an earlier level's buffered result), its symmetry bound
is the tightest id constraint, and the terminal level carries the action
(list, count, or closed-form binomial count).
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .pattern import (MatchingOrder, Pattern, PatternProperties,
                      SymmetryOrder)

VERTEX_PARALLEL = "vertex"
EDGE_PARALLEL = "edge"

DESCEND = "descend"
EMIT_MATCH = "emit_match"
EMIT_COUNT = "emit_count"
BINOMIAL_COUNT = "binomial_count"


@dataclass(frozen=True)
class SetExpr:
    """Candidate-set expression over previously bound levels.

    base is ("universe",), ("nbr", j) for level j's neighborhood, or
    ("buf", j) reusing level j's materialized candidate set. The expression
    then intersects the neighborhoods of `intersect` levels and subtracts
    those of `subtract` levels; `label` filters candidates by vertex label.
    """

    base: tuple
    intersect: tuple[int, ...] = ()
    subtract: tuple[int, ...] = ()
    label: int | None = None

    def referenced_levels(self) -> frozenset[int]:
        refs = set(self.intersect) | set(self.subtract)
        if self.base[0] in ("nbr", "buf"):
            refs.add(self.base[1])
        return frozenset(refs)

    def render(self) -> str:
        if self.base[0] == "universe":
            out = "V"
        elif self.base[0] == "nbr":
            out = f"N(v{self.base[1]})"
        else:
            out = f"S{self.base[1]}"
        for j in self.intersect:
            out += f" & N(v{j})"
        for j in self.subtract:
            out += f" - N(v{j})"
        if self.label is not None:
            out += f" [label={self.label}]"
        return out


@dataclass(frozen=True)
class PlanLevel:
    level: int
    expr: SetExpr
    bound: int | None           # candidate < v_bound
    buffer_slot: int | None
    action: str                 # DESCEND / EMIT_MATCH / EMIT_COUNT / BINOMIAL_COUNT
    tail: int = 0               # t for BINOMIAL_COUNT


@dataclass(frozen=True)
class SearchPlan:
    pattern: Pattern
    pattern_id: str
    mode: str                   # "list" | "count"
    matching_order: MatchingOrder
    symmetry: SymmetryOrder
    levels: tuple[PlanLevel, ...]
    num_buffers: int
    parallel_granularity: str = EDGE_PARALLEL
    uses_orientation: bool = False

    @property
    def depth(self) -> int:
        return len(self.levels)

    def constrains_first_edge(self) -> bool:
        """True when the symmetry order carries v1 > v2, enabling edgelist
        reduction (and per-task filtering on full lists)."""
        return not self.uses_orientation and self.symmetry.constrains(1, 2)

    def level_label(self, level: int) -> int | None:
        return self.levels[level - 1].expr.label


def _tightest_bound(so: SymmetryOrder, level: int) -> int | None:
    """All constraints on one level are chained, so the largest source level
    holds the smallest value and the rest are transitively implied."""
    sources = so.sources_for(level)
    if not sources:
        return None
    for a, b in zip(sources, sources[1:]):
        if not so.constrains(a, b):
            raise ValueError(f"symmetry constraints on level {level} are not chained")
    return sources[-1]


def build_plan(p: Pattern, mo: MatchingOrder, so: SymmetryOrder, mode: str,
               granularity: str = EDGE_PARALLEL, oriented: bool = False,
               pattern_id: str | None = None) -> SearchPlan:
    """Lower an analyzed pattern into the nested-loop IR.

    With `oriented` the plan expects a DAG input whose edge direction already
    subsumes every symmetry constraint (valid for cliques), so bounds are
    dropped.
    """
    if mode not in ("list", "count"):
        raise ValueError(f"unknown mode {mode!r}")
    k = p.size
    if mo.size != k:
        raise ValueError("matching order does not fit the pattern")
    for i in range(1, k + 1):
        conn = frozenset(j for j in range(1, i)
                         if mo.order[j - 1] in p.adj[mo.order[i - 1]])
        if conn != mo.conn[i - 1]:
            raise ValueError("matching order is inconsistent with the pattern")
    if any(not (1 <= j < i <= k) for i, j in
           ((max(a, b), min(a, b)) for a, b in so.constraints)):
        raise ValueError("symmetry order references levels outside the plan")
    if oriented and not p.is_clique():
        raise ValueError("orientation is only sound for clique patterns")
    labels = mo.level_labels or (None,) * k

    exprs: list[SetExpr] = [SetExpr(("universe",), label=labels[0])]
    for i in range(2, k + 1):
        conn = tuple(sorted(mo.conn[i - 1]))
        anti = tuple(sorted(mo.anti[i - 1]))
        base_j = None
        for j in range(3, i):
            if (set(mo.conn[j - 1]) <= set(conn) and set(mo.anti[j - 1]) <= set(anti)
                    and labels[j - 1] == labels[i - 1]):
                base_j = j
        if base_j is not None:
            rest_c = tuple(x for x in conn if x not in mo.conn[base_j - 1])
            rest_a = tuple(x for x in anti if x not in mo.anti[base_j - 1])
            exprs.append(SetExpr(("buf", base_j), rest_c, rest_a, labels[i - 1]))
        else:
            exprs.append(SetExpr(("nbr", conn[0]), conn[1:], anti, labels[i - 1]))

    bounds = [None if oriented else _tightest_bound(so, i) for i in range(1, k + 1)]

    # Buffer a level's set only when it is read by 2+ levels (its own loop
    # plus any later expression built on it); otherwise stream it.
    referenced = {j for e in exprs if e.base[0] == "buf" for j in [e.base[1]]}
    slots: dict[int, int] = {}
    for j in sorted(referenced):
        slots[j] = len(slots)

    levels = []
    for i in range(1, k + 1):
        if i < k:
            action, tail = DESCEND, 0
        else:
            action, tail = (EMIT_COUNT, 0) if mode == "count" else (EMIT_MATCH, 0)
        levels.append(PlanLevel(level=i, expr=exprs[i - 1], bound=bounds[i - 1],
                                buffer_slot=slots.get(i), action=action, tail=tail))
    return SearchPlan(
        pattern=p, pattern_id=pattern_id or p.name, mode=mode,
        matching_order=mo, symmetry=so, levels=tuple(levels),
        num_buffers=len(slots), parallel_granularity=granularity,
        uses_orientation=oriented,
    )


def apply_counting_rewrite(plan: SearchPlan, props: PatternProperties) -> SearchPlan:
    """Replace the last t interchangeable levels by count += C(n, t).

    No-op when the pattern has no tail decomposition. The candidate set at
    the prefix boundary is shared by all t tail levels and the symmetry order
    totally chains them, so each unordered t-subset is one match.
    """
    if plan.mode != "count":
        raise ValueError("counting rewrite applies to count-mode plans only")
    if props.decomposition is None:
        return plan
    prefix, t = props.decomposition
    boundary = plan.levels[prefix]  # first tail level, carries the shared expr
    terminal = PlanLevel(level=prefix + 1, expr=boundary.expr, bound=boundary.bound,
                         buffer_slot=None, action=BINOMIAL_COUNT, tail=t)
    kept = list(plan.levels[:prefix]) + [terminal]

    # Re-run buffer assignment on the truncated level list.
    referenced = {lv.expr.base[1] for lv in kept if lv.expr.base[0] == "buf"}
    slots = {j: idx for idx, j in enumerate(sorted(referenced))}
    kept = [replace(lv, buffer_slot=slots.get(lv.level)) for lv in kept]
    return replace(plan, levels=tuple(kept), num_buffers=len(slots))


# ---------------------------------------------------------------------------
# Multi-pattern fusion
# ---------------------------------------------------------------------------

@dataclass
class PlanNode:
    """One shared loop level of a fused plan tree.

    Patterns sharing the node draw candidates from the same set expression;
    their symmetry bounds stay per-pattern and are applied as iteration
    cutoffs. Patterns whose plan ends here carry their terminal action in
    `actions`; the rest descend into `children`.
    """

    level: int
    expr: SetExpr
    members: tuple[str, ...]
    bounds: dict[str, int | None]
    actions: dict[str, tuple]           # pattern id -> (action, tail)
    buffered: bool                      # some descendant expr reuses this set
    children: tuple["PlanNode", ...]


@dataclass
class PlanForest:
    """Fused plan trees; each input pattern terminates at exactly one node."""

    roots: tuple[PlanNode, ...]
    plans: dict[str, SearchPlan]
    parallel_granularity: str
    uses_orientation: bool
    num_buffers: int

    @property
    def pattern_ids(self) -> list[str]:
        return list(self.plans)

    def single(self) -> SearchPlan:
        if len(self.plans) != 1:
            raise ValueError("forest holds more than one plan")
        return next(iter(self.plans.values()))


def _build_nodes(plans: list[SearchPlan], level: int) -> tuple[PlanNode, ...]:
    groups: dict[SetExpr, list[SearchPlan]] = {}
    for pl in plans:
        groups.setdefault(pl.levels[level - 1].expr, []).append(pl)
    nodes = []
    for expr in sorted(groups, key=lambda e: (e.base, e.intersect, e.subtract,
                                              -1 if e.label is None else e.label)):
        group = groups[expr]
        bounds = {pl.pattern_id: pl.levels[level - 1].bound for pl in group}
        actions = {}
        deeper = []
        for pl in group:
            lv = pl.levels[level - 1]
            if lv.action == DESCEND:
                deeper.append(pl)
            else:
                actions[pl.pattern_id] = (lv.action, lv.tail)
        buffered = any(pl.levels[level - 1].buffer_slot is not None for pl in group)
        children = _build_nodes(deeper, level + 1) if deeper else ()
        nodes.append(PlanNode(level=level, expr=expr,
                              members=tuple(sorted(pl.pattern_id for pl in group)),
                              bounds=bounds, actions=actions,
                              buffered=buffered, children=children))
    return tuple(nodes)


def fuse_multi_pattern(plans: list[SearchPlan]) -> PlanForest:
    """Merge plans that share level-prefix set expressions into one tree.

    Patterns share a prefix as long as their candidate-set expressions agree
    level by level; per-pattern symmetry bounds ride along and are enforced
    inside the shared loops, so per-pattern results equal independent runs.
    """
    if not plans:
        raise ValueError("nothing to fuse")
    gran = {pl.parallel_granularity for pl in plans}
    if len(gran) != 1:
        raise ValueError("cannot fuse plans with mixed parallel granularity")
    orient = {pl.uses_orientation for pl in plans}
    if len(orient) != 1:
        raise ValueError("cannot fuse oriented with unoriented plans")
    ids = [pl.pattern_id for pl in plans]
    if len(set(ids)) != len(ids):
        raise ValueError("pattern ids must be unique within a forest")
    roots = _build_nodes(list(plans), 1)
    return PlanForest(
        roots=roots,
        plans={pl.pattern_id: pl for pl in plans},
        parallel_granularity=gran.pop(),
        uses_orientation=orient.pop(),
        num_buffers=max(pl.num_buffers for pl in plans),
    )


def as_forest(plan_or_forest) -> PlanForest:
    if isinstance(plan_or_forest, PlanForest):
        return plan_or_forest
    return fuse_multi_pattern([plan_or_forest])


# ---------------------------------------------------------------------------
# Plan dump
# ---------------------------------------------------------------------------

def _emit_node(node: PlanNode, lines: list[str], indent: int) -> None:
    pad = "  " * indent
    who = ", ".join(node.members)
    set_name = f"S{node.level}"
    lines.append(f"{pad}{set_name} = {node.expr.render()}"
                 + (" -> buffer" if node.buffered else "")
                 + f"   # {who}")
    for pid in sorted(node.bounds):
        b = node.bounds[pid]
        if b is not None:
            lines.append(f"{pad}bound: v{node.level} < v{b}   # {pid}")
    emitters = [pid for pid in sorted(node.actions) if node.actions[pid][0] == EMIT_MATCH]
    for pid in sorted(node.actions):
        action, tail = node.actions[pid]
        if action == EMIT_COUNT:
            lines.append(f"{pad}count[{pid}] += |{set_name}|")
        elif action == BINOMIAL_COUNT:
            lines.append(f"{pad}count[{pid}] += C(|{set_name}|, {tail})")
    if node.children or emitters:
        lines.append(f"{pad}for v{node.level} in {set_name}:")
        for pid in emitters:
            lines.append(f"{pad}  emit match[{pid}]: (v1..v{node.level})")
        for child in node.children:
            _emit_node(child, lines, indent + 1)


def emit_source(forest: PlanForest) -> str:
    """Deterministic nested-loop pseudocode for a fused plan forest."""
    lines = [f"plan forest: granularity={forest.parallel_granularity}"
             f" oriented={str(forest.uses_orientation).lower()}"
             f" buffers={forest.num_buffers}"]
    for t, root in enumerate(forest.roots):
        lines.append(f"tree {t}:")
        lines.append(f"  for v1 in {root.expr.render()}:"
                     f"   # {', '.join(root.members)}")
        for pid in sorted(root.actions):
            lines.append(f"  terminal[{pid}] at level 1")
        for child in root.children:
            _emit_node(child, lines, 2)
    return "\n".join(lines) + "\n"
