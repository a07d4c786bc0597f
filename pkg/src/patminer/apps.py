"""User-facing mining applications.

Each application assembles the same pipeline: analyze patterns, gate the
applicable optimizations (with logged reasons so awareness is auditable),
lower to plans, fuse, and execute on one or more simulated devices.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import scheduler
from .executor import ExecutionConfig, RunResult, run_dfs, run_dfs_lgs
from .fsm import FsmResult, run_bounded_bfs
from .graph import EdgeTaskList, Graph, all_edge_tasks, orient
from .pattern import (EDGE_INDUCED, GraphStats, Pattern, detect_properties,
                      enumerate_matching_orders, generate_all_motifs,
                      generate_clique, generate_symmetry_order,
                      select_matching_order)
from .plan import (EDGE_PARALLEL, VERTEX_PARALLEL, SearchPlan,
                   apply_counting_rewrite, build_plan, fuse_multi_pattern)

MODE_COUNT = "count"
MODE_LIST = "list"
MODE_PATTERN_ONLY = "pattern_only"


@dataclass(frozen=True)
class OptimizationDecision:
    name: str
    applied: bool
    reason: str

    def render(self) -> str:
        state = "applied" if self.applied else "skipped"
        return f"[opt] {self.name}: {state} ({self.reason})"


@dataclass
class MiningJob:
    """One run-to-completion mining request.

    pattern_only mode is valid only for jobs that filter patterns (FSM);
    list mode never applies counting rewrites.
    """

    graph: Graph
    patterns: list[Pattern] = field(default_factory=list)
    mode: str = MODE_COUNT
    sink: Callable | None = None
    cfg: ExecutionConfig = field(default_factory=ExecutionConfig)
    devices: int = 1
    policy: str = scheduler.POLICY_CHUNKED
    alpha: int = 2
    granularity: str | None = None
    parallel_devices: bool = True
    # FSM-only settings
    sigma_min: int | None = None
    max_edges: int | None = None
    label_pruning: bool = True
    pattern_filter: Callable | None = None
    support_aggregator: Callable | None = None
    subgraph_filter: Callable | None = None


@dataclass
class JobResult:
    counts: dict[str, int]
    patterns: dict[str, Pattern]
    optimization_log: list[OptimizationDecision]
    run: RunResult | None = None
    devices: "scheduler.DevicesResult | None" = None
    fsm: FsmResult | None = None

    def log_lines(self) -> list[str]:
        return [d.render() for d in self.optimization_log]

    def applied(self, name: str) -> bool:
        return any(d.name == name and d.applied for d in self.optimization_log)


def _analyze(p: Pattern, stats: GraphStats):
    mo = select_matching_order(enumerate_matching_orders(p), stats)
    so = generate_symmetry_order(p, mo)
    return mo, so, detect_properties(p, mo, so)


def run_job(job: MiningJob) -> JobResult:
    if job.sigma_min is not None:
        return _run_fsm_job(job)
    if job.mode == MODE_PATTERN_ONLY:
        raise ValueError("pattern_only mode requires a pattern-filter job")
    if not job.patterns:
        raise ValueError("no patterns given")
    ids = [p.name for p in job.patterns]
    if len(set(ids)) != len(ids):
        raise ValueError("pattern names must be unique within a job")

    g = job.graph
    log: list[OptimizationDecision] = []
    stats = GraphStats.of(g)
    analyzed = {p.name: (p, *_analyze(p, stats)) for p in job.patterns}

    all_cliques = all(p.is_clique() for p in job.patterns)
    use_orientation = all_cliques and not g.oriented
    if g.oriented:
        if not all_cliques:
            raise ValueError("oriented input graphs only support clique patterns")
        log.append(OptimizationDecision("orientation", True, "input already oriented"))
        oriented = True
    elif use_orientation:
        g = orient(g)
        log.append(OptimizationDecision(
            "orientation", True, "all patterns are cliques; edge slots halved"))
        oriented = True
    else:
        log.append(OptimizationDecision(
            "orientation", False, "non-clique pattern present"))
        oriented = False

    granularity = job.granularity
    if granularity is None:
        if all(p.size == 3 for p in job.patterns) and len(job.patterns) > 1:
            granularity = VERTEX_PARALLEL
        else:
            granularity = job.cfg.granularity
    log.append(OptimizationDecision(
        "worker-groups", True,
        f"{granularity}-parallel tasks over {job.cfg.workers} worker context(s)"))

    plans: list[SearchPlan] = []
    rewrote = []
    for pid, (p, mo, so, props) in analyzed.items():
        pl = build_plan(p, mo, so,
                        MODE_COUNT if job.mode == MODE_COUNT else MODE_LIST,
                        granularity=granularity, oriented=oriented)
        if job.mode == MODE_COUNT and props.decomposition is not None:
            pl = apply_counting_rewrite(pl, props)
            rewrote.append(pid)
        plans.append(pl)
    if job.mode == MODE_COUNT:
        log.append(OptimizationDecision(
            "counting-rewrite", bool(rewrote),
            f"tail decomposition on: {', '.join(rewrote)}" if rewrote
            else "no pattern decomposes into an interchangeable tail"))
    else:
        log.append(OptimizationDecision(
            "counting-rewrite", False, "list mode forbids counting rewrites"))

    forest = fuse_multi_pattern(plans)
    if len(plans) > 1:
        shared = sum(1 for root in forest.roots for _ in _iter_nodes(root))
        total = sum(pl.depth for pl in plans)
        log.append(OptimizationDecision(
            "plan-fusion", shared < total,
            f"{total} plan levels fused into {shared} tree nodes"))

    # Task list
    if granularity == EDGE_PARALLEL:
        reduced = (not oriented
                   and all(pl.constrains_first_edge() for pl in plans))
        arr = all_edge_tasks(g)
        if reduced:
            arr = arr[arr[:, 0] > arr[:, 1]]
        tasks = EdgeTaskList(arr, reduced=reduced)
        if oriented:
            reason = "orientation already halves the edgelist"
        elif reduced:
            reason = "plan constrains v1 > v2; one task per undirected edge"
        else:
            reason = "no v1 > v2 constraint shared by all patterns"
        log.append(OptimizationDecision("edgelist-reduction", reduced, reason))
    else:
        tasks = np.arange(g.num_vertices, dtype=np.int64)

    log.append(OptimizationDecision(
        "adaptive-buffering", job.cfg.memory_budget is not None,
        f"memory budget {job.cfg.memory_budget} B caps worker count"
        if job.cfg.memory_budget is not None else "no memory budget configured"))

    # Local graph search gate
    use_lgs = False
    single = plans[0] if len(plans) == 1 else None
    if single is not None:
        p = single.pattern
        hub_root = p.degree(single.matching_order.order[0]) == p.size - 1
        deep_enough = single.depth >= (3 if granularity == EDGE_PARALLEL else 2)
        hub_second = (granularity != EDGE_PARALLEL
                      or p.degree(single.matching_order.order[1]) == p.size - 1)
        eligible = hub_root and hub_second and deep_enough and job.devices == 1
        if job.cfg.lgs == "off":
            log.append(OptimizationDecision(
                "local-graph-search", False, "disabled by configuration"))
        elif not eligible:
            log.append(OptimizationDecision(
                "local-graph-search", False,
                "needs hub vertices at the task-bound levels"
                if not (hub_root and hub_second)
                else "multi-device or shallow plan"))
        elif job.cfg.lgs == "on":
            use_lgs = True
            log.append(OptimizationDecision(
                "local-graph-search", True, "forced on by configuration"))
        else:  # auto
            use_lgs = g.max_degree < job.cfg.lgs_delta_threshold
            log.append(OptimizationDecision(
                "local-graph-search", use_lgs,
                f"max degree {g.max_degree} "
                f"{'<' if use_lgs else '>='} threshold {job.cfg.lgs_delta_threshold}"))
        log.append(OptimizationDecision(
            "bitmap-format", use_lgs,
            "renamed local universe fits fixed-width bitmap rows"
            if use_lgs else "sorted-list kernels"))
    else:
        log.append(OptimizationDecision(
            "local-graph-search", False, "multi-pattern forest"))

    patterns = {pid: tpl[0] for pid, tpl in analyzed.items()}
    if job.devices > 1:
        sched = scheduler.make_schedule(tasks, job.devices, job.policy,
                                        workers_y=job.cfg.workers, alpha=job.alpha)
        log.append(OptimizationDecision(
            "multi-device", True,
            f"{job.devices} device(s) under {job.policy}"
            + (f" (chunk={sched.chunk_size})" if sched.chunk_size else "")))
        dev = scheduler.run_on_devices(g, forest, sched, tasks, cfg=job.cfg,
                                       parallel=job.parallel_devices)
        return JobResult(counts=dev.counts, patterns=patterns,
                         optimization_log=log, devices=dev)
    log.append(OptimizationDecision("multi-device", False, "single device"))

    if use_lgs:
        run = run_dfs_lgs(g, single, tasks=tasks, cfg=job.cfg, sink=job.sink)
    else:
        run = run_dfs(g, forest, tasks=tasks, cfg=job.cfg, sink=job.sink)
    return JobResult(counts=run.counts, patterns=patterns,
                     optimization_log=log, run=run)


def _iter_nodes(node):
    yield node
    for c in node.children:
        yield from _iter_nodes(c)


def _run_fsm_job(job: MiningJob) -> JobResult:
    g = job.graph
    if g.labels is None:
        raise ValueError("frequent subgraph mining requires a labeled graph")
    log = [
        OptimizationDecision("bounded-bfs", True,
                             "domain support needs level-wise aggregation; "
                             f"block size {job.cfg.bfs_block_size}"),
        OptimizationDecision("label-frequency-pruning", job.label_pruning,
                             "infrequent labels cannot join frequent patterns"
                             if job.label_pruning else "disabled by configuration"),
    ]
    res = run_bounded_bfs(
        g, job.max_edges, job.sigma_min, cfg=job.cfg,
        support_aggregator=job.support_aggregator,
        pattern_filter=job.pattern_filter,
        subgraph_filter=job.subgraph_filter,
        label_pruning=job.label_pruning)
    pats = res.frequent_patterns()
    counts = {p.name: s for p, s in pats.items()}
    return JobResult(counts=counts, patterns={p.name: p for p in pats},
                     optimization_log=log, fsm=res)


# ---------------------------------------------------------------------------
# Applications
# ---------------------------------------------------------------------------

def triangle_count(g: Graph, **kw) -> int:
    """Global triangle count; orientation applies automatically."""
    res = run_job(MiningJob(graph=g, patterns=[generate_clique(3)], **kw))
    return res.counts["triangle"]


def k_clique(g: Graph, k: int, mode: str = MODE_COUNT, sink=None, **kw) -> JobResult:
    """All k-cliques (3 <= k <= 8); orientation and local-graph-search gating
    are automatic."""
    if not 3 <= k <= 8:
        raise ValueError("clique size out of range 3..8")
    return run_job(MiningJob(graph=g, patterns=[generate_clique(k)], mode=mode,
                             sink=sink, **kw))


def subgraph_listing(g: Graph, p: Pattern, mode: str = MODE_LIST, sink=None,
                     **kw) -> JobResult:
    """Complete, unique listing of an explicit edge-induced pattern."""
    if p.induced != EDGE_INDUCED:
        p = p.with_induced(EDGE_INDUCED)
    return run_job(MiningJob(graph=g, patterns=[p], mode=mode, sink=sink, **kw))


def k_motif(g: Graph, k: int, **kw) -> dict[Pattern, int]:
    """Vertex-induced counts of every k-motif via one fused plan forest.

    3-motif counting runs vertex-parallel (its wedge plan has no level-2
    constraint to seed edge tasks with)."""
    if k not in (3, 4, 5):
        raise ValueError("motif size out of range 3..5")
    motifs = generate_all_motifs(k)
    job = MiningJob(graph=g, patterns=motifs, **kw)
    if job.granularity is None:
        job.granularity = VERTEX_PARALLEL if k == 3 else EDGE_PARALLEL
    res = run_job(job)
    return {p: res.counts[p.name] for p in motifs}


def k_fsm(g: Graph, max_edges: int, sigma_min: int, **kw) -> JobResult:
    """Frequent edge-induced patterns (<= max_edges edges) by domain support."""
    return run_job(MiningJob(graph=g, patterns=[], mode=MODE_PATTERN_ONLY,
                             sigma_min=sigma_min, max_edges=max_edges, **kw))
