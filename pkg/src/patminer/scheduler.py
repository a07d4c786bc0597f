"""Task scheduling across simulated devices.

A device is an isolated worker group with its own contexts and timer; the
scheduling contribution is the partitioning policy, which needs no real
accelerators to exercise. Queues are built once per (task list, n) and can
be reused across patterns. Global counts are invariant under the policy and
the device count; only the per-device load distribution changes.
"""
from __future__ import annotations

import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .executor import ExecutionConfig, run_dfs
from .graph import EdgeTaskList, Graph
from .plan import VERTEX_PARALLEL, as_forest

POLICY_EVEN = "even_split"
POLICY_RR = "round_robin"
POLICY_CHUNKED = "chunked_rr"


@dataclass
class Schedule:
    """Assignment of task indices to device queues under a named policy.

    per_device_work is filled in after execution with the measured
    DeviceReport list (task counts and wall times)."""

    queues: list[np.ndarray]
    policy: str
    chunk_size: int | None = None
    per_device_work: "list[DeviceReport] | None" = None

    @property
    def num_devices(self) -> int:
        return len(self.queues)

    def validate_partition(self, num_tasks: int) -> None:
        seen = np.concatenate([q for q in self.queues]) if self.queues else np.empty(0)
        if len(seen) != num_tasks or len(np.unique(seen)) != num_tasks:
            raise AssertionError("queues do not partition the task index set")


def _num_tasks(tasks) -> int:
    return len(tasks.edges) if isinstance(tasks, EdgeTaskList) else len(tasks)


def split_even(tasks, n: int) -> Schedule:
    """Policy 1: n consecutive ranges whose sizes differ by at most one."""
    if n < 1:
        raise ValueError("need at least one device")
    m = _num_tasks(tasks)
    base, extra = divmod(m, n)
    queues = []
    start = 0
    for i in range(n):
        size = base + (1 if i < extra else 0)
        queues.append(np.arange(start, start + size, dtype=np.int64))
        start += size
    return Schedule(queues, POLICY_EVEN)


def split_round_robin(tasks, n: int) -> Schedule:
    """Policy 2: task j goes to queue j mod n."""
    if n < 1:
        raise ValueError("need at least one device")
    m = _num_tasks(tasks)
    idx = np.arange(m, dtype=np.int64)
    return Schedule([idx[i::n] for i in range(n)], POLICY_RR)


def split_chunked_rr(tasks, n: int, workers_y: int, alpha: int = 2) -> Schedule:
    """Policy 3: contiguous chunks of c = alpha * workers dealt round-robin.

    Degenerates to even_split when c = m / n and to round_robin when c = 1.
    """
    if n < 1:
        raise ValueError("need at least one device")
    if workers_y < 1 or alpha < 1:
        raise ValueError("workers and alpha must be positive")
    m = _num_tasks(tasks)
    c = alpha * workers_y
    idx = np.arange(m, dtype=np.int64)
    chunks = [idx[i:i + c] for i in range(0, m, c)]
    queues = []
    for i in range(n):
        mine = chunks[i::n]
        queues.append(np.concatenate(mine) if mine else np.empty(0, dtype=np.int64))
    return Schedule(queues, POLICY_CHUNKED, chunk_size=c)


def make_schedule(tasks, n: int, policy: str, workers_y: int = 1,
                  alpha: int = 2) -> Schedule:
    if policy == POLICY_EVEN:
        return split_even(tasks, n)
    if policy == POLICY_RR:
        return split_round_robin(tasks, n)
    if policy == POLICY_CHUNKED:
        return split_chunked_rr(tasks, n, workers_y, alpha)
    raise ValueError(f"unknown scheduling policy {policy!r}")


# ---------------------------------------------------------------------------
# Hub-pattern vertex partitioning
# ---------------------------------------------------------------------------

@dataclass
class DevicePartition:
    """One device's self-contained slice for hub-rooted search.

    The subgraph induces the owned vertices plus their 1-hop neighborhoods,
    so a search rooted at an owned vertex never leaves the device.
    """

    subgraph: Graph
    owned_local: np.ndarray     # local ids of the roots this device owns
    local_to_global: np.ndarray


def partition_vertices_for_hub(g: Graph, n: int, plan) -> list[DevicePartition]:
    """Split the vertex set into n ownership ranges and materialize each
    device's induced subgraph over owners + their neighborhoods."""
    if n < 1:
        raise ValueError("need at least one device")
    p = plan.pattern
    if p.degree(plan.matching_order.order[0]) != p.size - 1:
        raise ValueError("vertex partitioning applies to hub-rooted plans only")
    nv = g.num_vertices
    base, extra = divmod(nv, n)
    parts = []
    start = 0
    for i in range(n):
        size = base + (1 if i < extra else 0)
        owned = np.arange(start, start + size, dtype=np.int64)
        start += size
        if len(owned):
            lo, hi = int(g.row_offsets[owned[0]]), int(g.row_offsets[owned[-1] + 1])
            hood = g.neighbors[lo:hi].astype(np.int64)
            verts = np.unique(np.concatenate([owned, hood]))
        else:
            verts = owned
        global_to_local = np.full(nv, -1, dtype=np.int64)
        global_to_local[verts] = np.arange(len(verts))
        rows = []
        for v in verts:
            nb = g.neighbors_of(int(v)).astype(np.int64)
            keep = nb[global_to_local[nb] >= 0]
            rows.append(global_to_local[keep])
        offsets = np.zeros(len(verts) + 1, dtype=np.uint64)
        offsets[1:] = np.cumsum([len(r) for r in rows])
        flat = (np.concatenate(rows) if rows else np.empty(0, dtype=np.int64))
        sub = Graph(offsets, flat.astype(np.uint32),
                    labels=None if g.labels is None else g.labels[verts],
                    oriented=g.oriented)
        parts.append(DevicePartition(subgraph=sub,
                                     owned_local=global_to_local[owned],
                                     local_to_global=verts))
    return parts


# ---------------------------------------------------------------------------
# Device execution
# ---------------------------------------------------------------------------

@dataclass
class DeviceReport:
    device_id: int
    tasks: int
    elapsed_ms: float
    count: int


@dataclass
class DevicesResult:
    counts: dict[str, int]
    reports: list[DeviceReport]
    schedule: Schedule
    elapsed_s: float

    def load_report_csv(self) -> str:
        out = io.StringIO()
        out.write("device_id,tasks,elapsed_ms,count\n")
        for r in self.reports:
            out.write(f"{r.device_id},{r.tasks},{r.elapsed_ms:.3f},{r.count}\n")
        return out.getvalue()


def _slice_tasks(tasks, idx: np.ndarray):
    if isinstance(tasks, EdgeTaskList):
        return EdgeTaskList(tasks.edges[idx], reduced=tasks.reduced)
    return np.asarray(tasks)[idx]


def _run_device(args):
    device_id, g, forest, tasks, cfg = args
    t0 = time.perf_counter()
    result = run_dfs(g, forest, tasks=tasks, cfg=cfg)
    elapsed = (time.perf_counter() - t0) * 1000.0
    return device_id, result.counts, elapsed, len(tasks.edges if isinstance(tasks, EdgeTaskList) else tasks)


def run_on_devices(g: Graph, forest, schedule: Schedule, tasks,
                   cfg: ExecutionConfig | None = None,
                   parallel: bool = True) -> DevicesResult:
    """Execute each queue on its own device worker group and merge.

    With `parallel`, devices run as separate processes (the scaling path);
    otherwise they run back to back, which still yields honest per-device
    load timings for imbalance analysis.
    """
    forest = as_forest(forest)
    cfg = cfg or ExecutionConfig()
    schedule.validate_partition(_num_tasks(tasks))
    jobs = [(i, g, forest, _slice_tasks(tasks, q), cfg)
            for i, q in enumerate(schedule.queues)]
    t0 = time.perf_counter()
    outcomes = []
    if parallel and schedule.num_devices > 1:
        with ProcessPoolExecutor(max_workers=schedule.num_devices) as pool:
            outcomes = list(pool.map(_run_device, jobs))
    else:
        outcomes = [_run_device(j) for j in jobs]
    elapsed = time.perf_counter() - t0

    counts: dict[str, int] = {}
    reports = []
    for device_id, dev_counts, ms, ntasks in sorted(outcomes):
        for pid, c in dev_counts.items():
            counts[pid] = counts.get(pid, 0) + c
        reports.append(DeviceReport(device_id=device_id, tasks=ntasks,
                                    elapsed_ms=ms, count=sum(dev_counts.values())))
    schedule.per_device_work = reports
    return DevicesResult(counts=counts, reports=reports, schedule=schedule,
                         elapsed_s=elapsed)


def run_partitioned_hub(g: Graph, plan, n: int,
                        cfg: ExecutionConfig | None = None,
                        parallel: bool = False) -> DevicesResult:
    """Hub-pattern execution over per-device induced subgraphs.

    Each device searches only the sub-trees rooted at its owned vertices;
    per-device counts sum to the global count with no cross-device access.
    """
    cfg = cfg or ExecutionConfig()
    if plan.parallel_granularity != VERTEX_PARALLEL:
        raise ValueError("hub partitioning drives vertex-parallel plans")
    parts = partition_vertices_for_hub(g, n, plan)
    reports = []
    counts: dict[str, int] = {}
    t0 = time.perf_counter()
    for i, part in enumerate(parts):
        t1 = time.perf_counter()
        res = run_dfs(part.subgraph, plan, tasks=part.owned_local, cfg=cfg)
        ms = (time.perf_counter() - t1) * 1000.0
        for pid, c in res.counts.items():
            counts[pid] = counts.get(pid, 0) + c
        reports.append(DeviceReport(device_id=i, tasks=len(part.owned_local),
                                    elapsed_ms=ms, count=sum(res.counts.values())))
    sched = Schedule([p.owned_local for p in parts], POLICY_EVEN,
                     per_device_work=reports)
    return DevicesResult(counts=counts, reports=reports, schedule=sched,
                         elapsed_s=time.perf_counter() - t0)
