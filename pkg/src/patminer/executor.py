"""DFS execution of search plans over a CSR graph.

Workers are logical contexts: each owns its scratch buffers and counters and
processes a contiguous slice of the task list; counters merge once at the
end, so results are independent of the worker count and task order. Tasks
are edges (levels 1-2 bound from the task) or vertices (level 1 bound, level
2 looped internally).
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from math import comb

import numpy as np

from .graph import EdgeTaskList, Graph
from .plan import (BINOMIAL_COUNT, EDGE_PARALLEL, EMIT_COUNT, EMIT_MATCH,
                   VERTEX_PARALLEL, PlanForest, PlanNode, SearchPlan,
                   SetExpr, as_forest)
from .setops import (VERTEX_DTYPE, LocalGraph, bits_to_locals, bound_list,
                     build_local_graph, contains, difference,
                     difference_count, intersect, intersect_count, mask_below,
                     popcount)

ID_WIDTH = 4  # bytes per vertex id in the worker-budget formula


class BudgetError(RuntimeError):
    """Memory budget cannot fit even a single worker's scratch."""


class StopSearch(Exception):
    """Raised internally when a match sink requests early termination."""


@dataclass
class ExecutionConfig:
    granularity: str = EDGE_PARALLEL
    workers: int = 1
    memory_budget: int | None = None     # bytes available for worker scratch
    lgs: str = "auto"                    # local graph search: auto | on | off
    lgs_delta_threshold: int = 1024
    bfs_block_size: int = 1 << 20


def resolve_worker_count(cfg: ExecutionConfig, num_buffers: int,
                         max_degree: int, num_tasks: int) -> int:
    """Workers actually instantiated.

    Under a memory budget Y this is min(Y // (X * max_degree * id width),
    number of tasks), clamped to at least one; an unconstrained run uses the
    requested count.
    """
    if cfg.memory_budget is not None:
        per_worker = max(num_buffers, 1) * max(max_degree, 1) * ID_WIDTH
        cap = cfg.memory_budget // per_worker
        if cap < 1:
            raise BudgetError(
                f"budget {cfg.memory_budget} B < one worker's scratch ({per_worker} B)")
        return max(1, min(int(cap), num_tasks))
    return max(1, min(cfg.workers, max(num_tasks, 1)))


class WorkerContext:
    """Per-worker scratch, counters and optional match sink.

    Scratch holds `num_buffers` arrays of `capacity` vertex ids; buffered
    plan levels copy their candidate sets here, and the high-water marks are
    kept for the memory-formula assertions. Counters merge only after all
    workers complete.
    """

    def __init__(self, num_buffers: int, capacity: int, pattern_ids,
                 sink=None):
        self.scratch = [np.empty(max(capacity, 1), dtype=VERTEX_DTYPE)
                        for _ in range(num_buffers)]
        self.high_water = [0] * num_buffers
        self.counts: dict[str, int] = {pid: 0 for pid in pattern_ids}
        self.sink = sink
        self.tasks_done = 0


def merge_results(contexts: list[WorkerContext]) -> dict[str, int]:
    """Elementwise sum of per-pattern counters; deterministic."""
    total: dict[str, int] = {}
    for ctx in contexts:
        for pid, c in ctx.counts.items():
            total[pid] = total.get(pid, 0) + c
    return total


@dataclass
class ExecStats:
    workers: int
    tasks: int
    num_buffers: int
    buffer_high_water: tuple[int, ...]
    elapsed_s: float


@dataclass
class RunResult:
    counts: dict[str, int]
    stats: ExecStats
    stopped_early: bool = False


# ---------------------------------------------------------------------------
# Generic sorted-list DFS over a fused plan tree
# ---------------------------------------------------------------------------

class _TreeRunner:
    def __init__(self, g: Graph, forest: PlanForest, ctx: WorkerContext):
        self.g = g
        self.forest = forest
        self.ctx = ctx
        max_k = max(pl.depth for pl in forest.plans.values())
        self.bindings = [0] * (max_k + 1)   # bindings[level] = data vertex
        self.env: dict[int, np.ndarray] = {}  # buffered sets by level

    # -- expression evaluation ----------------------------------------------

    def _term(self, j: int) -> np.ndarray:
        return self.g.neighbors_of(self.bindings[j])

    def _eval(self, expr: SetExpr) -> np.ndarray:
        if expr.base[0] == "nbr":
            s = self._term(expr.base[1])
        else:
            s = self.env[expr.base[1]]
        if expr.intersect:
            terms = sorted((self._term(j) for j in expr.intersect), key=len)
            for t in terms:
                s = intersect(s, t)
        for j in expr.subtract:
            s = difference(s, self._term(j))
        if expr.label is not None and self.g.labels is not None:
            s = s[self.g.labels[s] == expr.label]
        return s

    def _member(self, expr: SetExpr, v: int) -> bool:
        """Does data vertex v satisfy the expression? Used to discount
        already-bound vertices from count-only terminals."""
        if expr.base[0] == "nbr":
            if not contains(self._term(expr.base[1]), v):
                return False
        elif not contains(self.env[expr.base[1]], v):
            return False
        for j in expr.intersect:
            if not contains(self._term(j), v):
                return False
        for j in expr.subtract:
            if contains(self._term(j), v):
                return False
        if expr.label is not None and self.g.labels is not None:
            if int(self.g.labels[v]) != expr.label:
                return False
        return True

    def _bound_hits(self, expr: SetExpr, level: int, bound_val: int | None) -> int:
        hits = 0
        for l in range(1, level):
            v = self.bindings[l]
            if bound_val is not None and v >= bound_val:
                continue
            if self._member(expr, v):
                hits += 1
        return hits

    def _eval_count(self, expr: SetExpr, level: int, bound: int | None) -> int:
        bound_val = self.bindings[bound] if bound is not None else None
        if expr.label is not None and self.g.labels is not None:
            s = self._eval(expr)
            if bound_val is not None:
                s = bound_list(s, bound_val)
            n = len(s)
        else:
            if expr.base[0] == "nbr":
                s = self._term(expr.base[1])
            else:
                s = self.env[expr.base[1]]
            if bound_val is not None:
                s = bound_list(s, bound_val)
            ops = ([("i", j) for j in expr.intersect]
                   + [("d", j) for j in expr.subtract])
            for kind, j in ops[:-1]:
                s = (intersect if kind == "i" else difference)(s, self._term(j))
            if ops:
                kind, j = ops[-1]
                n = (intersect_count if kind == "i" else difference_count)(s, self._term(j))
            else:
                n = len(s)
        return n - self._bound_hits(expr, level, bound_val)

    # -- node execution ------------------------------------------------------

    def _count_from_set(self, s: np.ndarray, expr: SetExpr, level: int,
                        bound: int | None) -> int:
        bound_val = self.bindings[bound] if bound is not None else None
        n = len(bound_list(s, bound_val)) if bound_val is not None else len(s)
        return n - self._bound_hits(expr, level, bound_val)

    def _apply_terminals(self, node: PlanNode, active: set,
                         s: np.ndarray | None) -> None:
        for pid, (action, tail) in node.actions.items():
            if pid not in active or action == EMIT_MATCH:
                continue
            if s is not None:
                n = self._count_from_set(s, node.expr, node.level, node.bounds[pid])
            else:
                n = self._eval_count(node.expr, node.level, node.bounds[pid])
            if action == EMIT_COUNT:
                self.ctx.counts[pid] += n
            elif action == BINOMIAL_COUNT:
                self.ctx.counts[pid] += comb(n, tail)

    def exec_node(self, node: PlanNode, active: set, buf_depth: int) -> None:
        level = node.level
        emitters = [pid for pid, (a, _) in node.actions.items()
                    if a == EMIT_MATCH and pid in active]
        iterate = bool(node.children) or bool(emitters)
        if not iterate:
            self._apply_terminals(node, active, None)
            return

        s = self._eval(node.expr)
        if node.buffered:
            buf = self.ctx.scratch[buf_depth]
            n = len(s)
            buf[:n] = s
            s = buf[:n]
            if n > self.ctx.high_water[buf_depth]:
                self.ctx.high_water[buf_depth] = n
            self.env[level] = s
            child_depth = buf_depth + 1
        else:
            child_depth = buf_depth
        self._apply_terminals(node, active, s)

        cut = {}
        participants = set(emitters)
        for child in node.children:
            participants.update(pid for pid in child.members if pid in active)
        if not participants:
            return
        max_cut = 0
        for pid in participants:
            b = node.bounds[pid]
            c = len(s) if b is None else int(np.searchsorted(s, self.bindings[b]))
            cut[pid] = c
            if c > max_cut:
                max_cut = c

        bindings = self.bindings
        for idx in range(max_cut):
            v = int(s[idx])
            skip = False
            for l in range(1, level):
                if bindings[l] == v:
                    skip = True
                    break
            if skip:
                continue
            bindings[level] = v
            for pid in emitters:
                if idx < cut[pid]:
                    self._emit(pid, level)
            for child in node.children:
                child_active = {pid for pid in child.members
                                if pid in active and idx < cut[pid]}
                if child_active:
                    self.exec_node(child, child_active, child_depth)

    def _emit(self, pid: str, level: int) -> None:
        self.ctx.counts[pid] += 1
        if self.ctx.sink is not None:
            match = tuple(self.bindings[1:level + 1])
            if self.ctx.sink(pid, match):
                raise StopSearch

    # -- task entry points ----------------------------------------------------

    def run_vertex_task(self, v: int) -> None:
        labels = self.g.labels
        for root in self.forest.roots:
            if root.expr.label is not None and labels is not None \
                    and int(labels[v]) != root.expr.label:
                continue
            self.bindings[1] = int(v)
            active = set(root.members)
            for child in root.children:
                child_active = active & set(child.members)
                if child_active:
                    self.exec_node(child, child_active, 0)

    def run_edge_task(self, src: int, dst: int) -> None:
        labels = self.g.labels
        src, dst = int(src), int(dst)
        for root in self.forest.roots:
            if root.expr.label is not None and labels is not None \
                    and int(labels[src]) != root.expr.label:
                continue
            self.bindings[1] = src
            for child in root.children:
                if child.expr.label is not None and labels is not None \
                        and int(labels[dst]) != child.expr.label:
                    continue
                active = {pid for pid in child.members
                          if child.bounds[pid] is None or dst < src}
                if not active:
                    continue
                self.bindings[2] = dst
                term = {pid for pid in active if pid in child.actions}
                if term:
                    for pid in term:
                        action, tail = child.actions[pid]
                        if action == EMIT_MATCH:
                            self._emit(pid, 2)
                        elif action == EMIT_COUNT:
                            self.ctx.counts[pid] += 1
                for grandchild in child.children:
                    g_active = active & set(grandchild.members)
                    if g_active:
                        self.exec_node(grandchild, g_active, 0)


def _task_slices(num_tasks: int, workers: int) -> list[tuple[int, int]]:
    base, extra = divmod(num_tasks, workers)
    out = []
    start = 0
    for i in range(workers):
        size = base + (1 if i < extra else 0)
        out.append((start, start + size))
        start += size
    return out


def run_dfs(g: Graph, forest, tasks=None, cfg: ExecutionConfig | None = None,
            sink=None) -> RunResult:
    """Run a plan or fused forest to completion; exact per-pattern counts.

    Edge granularity binds levels 1-2 from each task edge; vertex granularity
    binds level 1 and loops level 2 internally. Results are independent of
    the worker count and of task ordering.
    """
    from .graph import all_edge_tasks, build_edge_tasks

    forest = as_forest(forest)
    cfg = cfg or ExecutionConfig()
    if forest.uses_orientation != g.oriented:
        raise ValueError("plan orientation does not match the graph "
                         f"(plan={forest.uses_orientation}, graph={g.oriented})")

    if tasks is None:
        if forest.parallel_granularity == EDGE_PARALLEL:
            plans = list(forest.plans.values())
            if len(plans) == 1:
                tasks = build_edge_tasks(g, plans[0])
            else:
                reduced = all(pl.constrains_first_edge() for pl in plans)
                arr = all_edge_tasks(g)
                if reduced and not g.oriented:
                    arr = arr[arr[:, 0] > arr[:, 1]]
                tasks = EdgeTaskList(arr, reduced=reduced and not g.oriented)
        else:
            tasks = np.arange(g.num_vertices, dtype=np.int64)

    edge_mode = isinstance(tasks, EdgeTaskList)
    task_arr = tasks.edges if edge_mode else np.asarray(tasks)
    if edge_mode and forest.parallel_granularity != EDGE_PARALLEL:
        raise ValueError("edge tasks supplied to a vertex-parallel forest")
    if not edge_mode and forest.parallel_granularity != VERTEX_PARALLEL:
        raise ValueError("vertex tasks supplied to an edge-parallel forest")

    num_tasks = len(task_arr)
    workers = resolve_worker_count(cfg, forest.num_buffers, g.max_degree, num_tasks)
    t0 = time.perf_counter()
    contexts = []
    stopped = False
    for lo, hi in _task_slices(num_tasks, workers):
        ctx = WorkerContext(forest.num_buffers, g.max_degree,
                            forest.pattern_ids, sink=sink)
        runner = _TreeRunner(g, forest, ctx)
        try:
            if edge_mode:
                for row in task_arr[lo:hi]:
                    runner.run_edge_task(row[0], row[1])
                    ctx.tasks_done += 1
            else:
                for v in task_arr[lo:hi]:
                    runner.run_vertex_task(int(v))
                    ctx.tasks_done += 1
        except StopSearch:
            stopped = True
        contexts.append(ctx)
        if stopped:
            break

    counts = merge_results(contexts)
    for pid in forest.pattern_ids:
        counts.setdefault(pid, 0)
    high = tuple(max((c.high_water[i] for c in contexts), default=0)
                 for i in range(forest.num_buffers))
    stats = ExecStats(workers=workers, tasks=num_tasks,
                      num_buffers=forest.num_buffers, buffer_high_water=high,
                      elapsed_s=time.perf_counter() - t0)
    return RunResult(counts=counts, stats=stats, stopped_early=stopped)


# ---------------------------------------------------------------------------
# Local graph search (bitmap execution for hub-rooted plans)
# ---------------------------------------------------------------------------

class _LocalRunner:
    """Executes the remaining levels of a hub-rooted plan inside the renamed
    local graph of the anchor candidate set, using bitmap rows."""

    def __init__(self, g: Graph, plan: SearchPlan, ctx: WorkerContext,
                 anchored: tuple[int, ...]):
        self.g = g
        self.plan = plan
        self.ctx = ctx
        self.anchored = anchored
        self.start_level = len(anchored) + 1
        k = plan.depth
        self.bindings = [0] * (k + 1)        # original ids for anchored levels
        self.local_of = [0] * (k + 1)        # local ids for levels >= start
        self.env_words: dict[int, np.ndarray] = {}
        # Local rows are only needed when an expression references a
        # non-anchored level; pure anchor subsets need no adjacency.
        self.needs_rows = any(
            ref not in anchored
            for lv in plan.levels[self.start_level - 1:]
            for ref in lv.expr.referenced_levels())

    def run_task(self, *verts: int) -> None:
        for level, v in enumerate(verts, start=1):
            self.bindings[level] = int(v)
        anchor = self._anchor_set()
        n = len(anchor)
        if n == 0:
            return
        self.lg = build_local_graph(self.g, anchor) if self.needs_rows else \
            LocalGraph(universe=anchor, words=np.zeros((0, 0), dtype=np.uint64))
        self.n_words = max(1, (n + 63) // 64)
        self._exec_level(self.start_level, mask_below(self.n_words, n))

    def _anchor_set(self) -> np.ndarray:
        terms = [self.g.neighbors_of(self.bindings[l]) for l in self.anchored]
        s = terms[0]
        for t in terms[1:]:
            s = intersect(s, t)
        return s

    def _words_for(self, expr: SetExpr) -> np.ndarray:
        anchor = self.lg.universe
        if expr.base[0] == "buf":
            w = self.env_words[expr.base[1]].copy()
        elif expr.base[1] in self.anchored:
            w = mask_below(self.n_words, len(anchor))
        else:
            w = self.lg.row(self.local_of[expr.base[1]]).copy()
        for j in expr.intersect:
            if j in self.anchored:
                continue
            w &= self.lg.row(self.local_of[j])
        for j in expr.subtract:
            if j in self.anchored:
                raise ValueError("hub level in a difference term")
            w &= ~self.lg.row(self.local_of[j])
        return w

    def _bound_mask(self, bound: int | None) -> np.ndarray | None:
        if bound is None:
            return None
        if bound in self.anchored:
            cutoff = int(np.searchsorted(self.lg.universe, self.bindings[bound]))
        else:
            cutoff = self.local_of[bound]
        return mask_below(self.n_words, cutoff)

    def _clear_bound_bits(self, w: np.ndarray, level: int) -> None:
        for l in range(1, level):
            if l in self.anchored:
                v = self.bindings[l]
                i = int(np.searchsorted(self.lg.universe, v))
                if i < len(self.lg.universe) and int(self.lg.universe[i]) == v:
                    w[i >> 6] &= ~(np.uint64(1) << np.uint64(i & 63))
            else:
                i = self.local_of[l]
                w[i >> 6] &= ~(np.uint64(1) << np.uint64(i & 63))

    def _exec_level(self, level: int, words: np.ndarray | None) -> None:
        lv = self.plan.levels[level - 1]
        pid = self.plan.pattern_id
        if level > self.start_level or words is None:
            words = self._words_for(lv.expr)
        self._clear_bound_bits(words, level)
        mask = self._bound_mask(lv.bound)
        visible = words if mask is None else words & mask

        if lv.action == EMIT_COUNT:
            self.ctx.counts[pid] += popcount(visible)
            return
        if lv.action == BINOMIAL_COUNT:
            self.ctx.counts[pid] += comb(popcount(visible), lv.tail)
            return

        if lv.buffer_slot is not None:
            self.env_words[level] = words
        locals_ = bits_to_locals(visible, self.lg.num_vertices)
        for i in locals_:
            i = int(i)
            self.local_of[level] = i
            self.bindings[level] = int(self.lg.universe[i])
            if lv.action == EMIT_MATCH:
                self.ctx.counts[pid] += 1
                if self.ctx.sink is not None:
                    if self.ctx.sink(pid, tuple(self.bindings[1:level + 1])):
                        raise StopSearch
            else:
                self._exec_level(level + 1, None)


def run_dfs_lgs(g: Graph, plan: SearchPlan, tasks=None,
                cfg: ExecutionConfig | None = None, sink=None) -> RunResult:
    """Hub-pattern execution confined to per-task local graphs.

    Builds the anchor candidate set from the hub level(s), renames it to a
    compact universe, and runs the remaining levels with bitmap kernels.
    Counts equal run_dfs exactly.
    """
    from .graph import build_edge_tasks

    cfg = cfg or ExecutionConfig()
    k = plan.pattern.size
    hub_first = plan.pattern.degree(plan.matching_order.order[0]) == k - 1
    if not hub_first:
        raise ValueError("local graph search requires a hub-rooted plan")
    if plan.uses_orientation != g.oriented:
        raise ValueError("plan orientation does not match the graph")
    if any(lv.expr.label is not None for lv in plan.levels):
        raise ValueError("local graph search does not support label filters")

    if plan.parallel_granularity == EDGE_PARALLEL:
        second_hub = plan.pattern.degree(plan.matching_order.order[1]) == k - 1
        if not second_hub:
            raise ValueError("edge-parallel local graph search needs hubs at "
                             "levels 1 and 2; use vertex granularity instead")
        if tasks is None:
            tasks = build_edge_tasks(g, plan)
        anchored = (1, 2)
        task_arr = tasks.edges
        edge_mode = True
    else:
        if tasks is None:
            tasks = np.arange(g.num_vertices, dtype=np.int64)
        anchored = (1,)
        task_arr = np.asarray(tasks)
        edge_mode = False
    if len(anchored) + 1 > plan.depth:
        raise ValueError("plan too shallow for local graph search")

    num_tasks = len(task_arr)
    workers = resolve_worker_count(cfg, plan.num_buffers, g.max_degree, num_tasks)
    t0 = time.perf_counter()
    contexts = []
    stopped = False
    for lo, hi in _task_slices(num_tasks, workers):
        ctx = WorkerContext(plan.num_buffers, g.max_degree, [plan.pattern_id],
                            sink=sink)
        runner = _LocalRunner(g, plan, ctx, anchored)
        try:
            if edge_mode:
                lvl2_bound = plan.levels[1].bound
                for row in task_arr[lo:hi]:
                    src, dst = int(row[0]), int(row[1])
                    if lvl2_bound is not None and not dst < src:
                        continue
                    runner.run_task(src, dst)
                    ctx.tasks_done += 1
            else:
                for v in task_arr[lo:hi]:
                    runner.run_task(int(v))
                    ctx.tasks_done += 1
        except StopSearch:
            stopped = True
        contexts.append(ctx)
        if stopped:
            break
    counts = merge_results(contexts)
    counts.setdefault(plan.pattern_id, 0)
    high = tuple(max((c.high_water[i] for c in contexts), default=0)
                 for i in range(plan.num_buffers))
    stats = ExecStats(workers=workers, tasks=num_tasks,
                      num_buffers=plan.num_buffers, buffer_high_water=high,
                      elapsed_s=time.perf_counter() - t0)
    return RunResult(counts=counts, stats=stats, stopped_early=stopped)
