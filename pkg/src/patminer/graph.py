"""Data graph in CSR form plus the input statistics the runtime consumes.

Graphs are immutable after construction and safe to share across workers.
Preprocessing (dedup, self-loop removal, neighbor sorting) happens once at
build time; `orient` and `reorder_by_degree` return new graphs.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .setops import VERTEX_DTYPE, contains

MAX_VERTEX_ID = 2**32 - 1

_CSR_MAGIC = b"GCSR"
_CSR_VERSION = 1
_FLAG_LABELED = 1 << 0
_FLAG_ORIENTED = 1 << 1


class GraphParseError(ValueError):
    """Malformed input file; message carries the offending line number."""


@dataclass
class LabelStats:
    """Per-label vertex counts of a labeled graph."""

    frequency: dict[int, int]

    def frequent_labels(self, sigma_min: int) -> set[int]:
        return {lab for lab, c in self.frequency.items() if c >= sigma_min}


class Graph:
    """Immutable CSR adjacency, optionally labeled, optionally oriented.

    Neighbor lists are strictly ascending with no duplicates or self-loops.
    `num_edges` counts directed edge slots: twice the undirected edge count
    unless the graph is oriented.
    """

    def __init__(self, row_offsets: np.ndarray, neighbors: np.ndarray,
                 labels: np.ndarray | None = None, oriented: bool = False):
        self.row_offsets = np.ascontiguousarray(row_offsets, dtype=np.uint64)
        self.neighbors = np.ascontiguousarray(neighbors, dtype=VERTEX_DTYPE)
        self.labels = None if labels is None else np.ascontiguousarray(labels, dtype=VERTEX_DTYPE)
        self.oriented = bool(oriented)
        self.num_vertices = len(self.row_offsets) - 1
        self.num_edges = int(self.row_offsets[-1]) if len(self.row_offsets) else 0
        degs = np.diff(self.row_offsets).astype(np.int64)
        self.degrees = degs
        self.max_degree = int(degs.max()) if len(degs) else 0
        for arr in (self.row_offsets, self.neighbors, self.degrees):
            arr.setflags(write=False)
        if self.labels is not None:
            self.labels.setflags(write=False)
        self._label_stats: LabelStats | None = None

    # -- accessors ---------------------------------------------------------

    def neighbors_of(self, v: int) -> np.ndarray:
        return self.neighbors[int(self.row_offsets[v]):int(self.row_offsets[v + 1])]

    def degree(self, v: int) -> int:
        return int(self.degrees[v])

    @property
    def avg_degree(self) -> float:
        return self.num_edges / self.num_vertices if self.num_vertices else 0.0

    def has_edge(self, u: int, v: int) -> bool:
        return contains(self.neighbors_of(u), v)

    def validate(self) -> None:
        off = self.row_offsets
        if len(off) != self.num_vertices + 1 or int(off[0]) != 0:
            raise ValueError("bad row offsets")
        if np.any(np.diff(off.astype(np.int64)) < 0):
            raise ValueError("row offsets must be non-decreasing")
        if int(off[-1]) != len(self.neighbors):
            raise ValueError("row offsets do not cover the neighbor array")
        if len(self.neighbors) and int(self.neighbors.max()) >= self.num_vertices:
            raise ValueError("neighbor id out of range")
        for v in range(self.num_vertices):
            nb = self.neighbors_of(v)
            if len(nb) > 1 and not np.all(nb[1:] > nb[:-1]):
                raise ValueError(f"neighbor list of vertex {v} not strictly ascending")
            if contains(nb, v):
                raise ValueError(f"self loop at vertex {v}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        same_labels = (self.labels is None) == (other.labels is None) and (
            self.labels is None or np.array_equal(self.labels, other.labels))
        return (self.oriented == other.oriented
                and np.array_equal(self.row_offsets, other.row_offsets)
                and np.array_equal(self.neighbors, other.neighbors)
                and same_labels)

    def __repr__(self) -> str:
        kind = "oriented" if self.oriented else "undirected"
        lab = ", labeled" if self.labels is not None else ""
        return (f"Graph({kind}{lab}, |V|={self.num_vertices}, "
                f"edge slots={self.num_edges}, max degree={self.max_degree})")


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def from_edges(edges, num_vertices: int | None = None,
               labels: np.ndarray | None = None) -> Graph:
    """Build a preprocessed symmetric CSR graph from an (m, 2) edge array.

    Self-loops and duplicate edges are dropped; both directions are stored.
    """
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if num_vertices is None:
        num_vertices = int(e.max()) + 1 if len(e) else 0
    if labels is not None and len(labels) > num_vertices:
        num_vertices = len(labels)
    n = int(num_vertices)
    if labels is not None and len(labels) != n:
        raise ValueError(f"label file covers {len(labels)} vertices, graph has {n}")
    e = e[e[:, 0] != e[:, 1]]
    if len(e):
        both = np.concatenate([e, e[:, ::-1]])
        keys = np.unique(both[:, 0] * np.int64(n) + both[:, 1])
        src = (keys // n).astype(np.int64)
        dst = (keys % n).astype(VERTEX_DTYPE)
    else:
        src = np.empty(0, dtype=np.int64)
        dst = np.empty(0, dtype=VERTEX_DTYPE)
    counts = np.bincount(src, minlength=n)
    row_offsets = np.zeros(n + 1, dtype=np.uint64)
    row_offsets[1:] = np.cumsum(counts)
    return Graph(row_offsets, dst, labels=labels, oriented=False)


def load_edgelist(path: str, labeled: bool = False,
                  label_path: str | None = None) -> Graph:
    """Load a whitespace "u v" edgelist; '#'/'%' lines are comments.

    With labeled=True a label file (default: <path>.labels, one integer per
    line, line i labeling vertex i) assigns dense small-integer labels in
    first-seen order.
    """
    edges = []
    max_id = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line[0] in "#%":
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphParseError(f"{path}:{lineno}: expected 'u v', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise GraphParseError(f"{path}:{lineno}: non-integer vertex id") from exc
            if u < 0 or v < 0:
                raise GraphParseError(f"{path}:{lineno}: negative vertex id")
            if u > MAX_VERTEX_ID or v > MAX_VERTEX_ID:
                raise GraphParseError(f"{path}:{lineno}: vertex id exceeds 32-bit capacity")
            edges.append((u, v))
            if u > max_id:
                max_id = u
            if v > max_id:
                max_id = v

    labels = None
    if labeled:
        labels = _load_labels(label_path or path + ".labels")
    edge_arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return from_edges(edge_arr, num_vertices=max_id + 1, labels=labels)


def _load_labels(path: str) -> np.ndarray:
    remap: dict[int, int] = {}
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line[0] in "#%":
                continue
            try:
                val = int(line.split()[0])
            except ValueError as exc:
                raise GraphParseError(f"{path}:{lineno}: non-integer label") from exc
            out.append(remap.setdefault(val, len(remap)))
    return np.asarray(out, dtype=VERTEX_DTYPE)


# ---------------------------------------------------------------------------
# Preprocessing
# ---------------------------------------------------------------------------

def orient(g: Graph) -> Graph:
    """Give every edge a direction: keep u->v iff (deg_u, u) < (deg_v, v).

    The degree-based total order keeps the resulting DAG's maximum out-degree
    low. Edge slots are halved and acyclicity is guaranteed by totality.
    """
    if g.oriented:
        raise ValueError("graph is already oriented")
    n = g.num_vertices
    src = np.repeat(np.arange(n, dtype=np.int64), g.degrees)
    dst = g.neighbors.astype(np.int64)
    du = g.degrees[src]
    dv = g.degrees[dst]
    keep = (du < dv) | ((du == dv) & (src < dst))
    new_counts = np.bincount(src[keep], minlength=n)
    row_offsets = np.zeros(n + 1, dtype=np.uint64)
    row_offsets[1:] = np.cumsum(new_counts)
    return Graph(row_offsets, g.neighbors[keep], labels=g.labels, oriented=True)


def reorder_by_degree(g: Graph) -> tuple[Graph, np.ndarray]:
    """Rename vertices so degrees are non-increasing in id order (ties by id).

    Returns the renamed graph and the permutation mapping new id -> old id.
    All pattern counts are invariant under the renaming.
    """
    n = g.num_vertices
    perm = np.lexsort((np.arange(n), -g.degrees))  # new -> old
    inv = np.empty(n, dtype=np.int64)
    inv[perm] = np.arange(n)
    src = np.repeat(np.arange(n, dtype=np.int64), g.degrees)
    new_edges = np.column_stack([inv[src], inv[g.neighbors.astype(np.int64)]])
    labels = None if g.labels is None else g.labels[perm]
    out = from_edges(new_edges, num_vertices=n, labels=labels)
    return out, perm


def label_frequency(g: Graph) -> LabelStats:
    """Exact per-label vertex counts. Usage error on unlabeled graphs."""
    if g.labels is None:
        raise ValueError("graph is not labeled")
    if g._label_stats is None:
        vals, counts = np.unique(g.labels, return_counts=True)
        g._label_stats = LabelStats({int(k): int(c) for k, c in zip(vals, counts)})
    return g._label_stats


# ---------------------------------------------------------------------------
# Edge task lists
# ---------------------------------------------------------------------------

@dataclass
class EdgeTaskList:
    """Flattened (src, dst) task seeds for edge-parallel search.

    When `reduced`, only src > dst instances are kept: exactly one task per
    undirected edge, valid when the plan's symmetry order carries v1 > v2.
    """

    edges: np.ndarray  # (m, 2) vertex ids
    reduced: bool

    def __len__(self) -> int:
        return len(self.edges)


def all_edge_tasks(g: Graph) -> np.ndarray:
    src = np.repeat(np.arange(g.num_vertices, dtype=np.int64), g.degrees)
    return np.column_stack([src, g.neighbors.astype(np.int64)])


def build_edge_tasks(g: Graph, plan) -> EdgeTaskList:
    """Edgelist for a plan: reduced to src > dst iff the plan constrains v1 > v2."""
    wants_reduction = plan.constrains_first_edge()
    if g.oriented:
        if wants_reduction:
            raise ValueError("edgelist reduction is redundant on an oriented graph")
        return EdgeTaskList(all_edge_tasks(g), reduced=False)
    tasks = all_edge_tasks(g)
    if wants_reduction:
        tasks = tasks[tasks[:, 0] > tasks[:, 1]]
        return EdgeTaskList(tasks, reduced=True)
    return EdgeTaskList(tasks, reduced=False)


# ---------------------------------------------------------------------------
# Binary CSR layout (little-endian)
# ---------------------------------------------------------------------------

def save_csr(g: Graph, path: str) -> None:
    flags = 0
    if g.labels is not None:
        flags |= _FLAG_LABELED
    if g.oriented:
        flags |= _FLAG_ORIENTED
    with open(path, "wb") as fh:
        fh.write(_CSR_MAGIC)
        fh.write(struct.pack("<IQQI", _CSR_VERSION, g.num_vertices, g.num_edges, flags))
        fh.write(g.row_offsets.astype("<u8").tobytes())
        fh.write(g.neighbors.astype("<u4").tobytes())
        if g.labels is not None:
            fh.write(g.labels.astype("<u4").tobytes())


def load_csr(path: str) -> Graph:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _CSR_MAGIC:
            raise GraphParseError(f"{path}: bad magic {magic!r}")
        version, nv, ne, flags = struct.unpack("<IQQI", fh.read(24))
        if version != _CSR_VERSION:
            raise GraphParseError(f"{path}: unsupported version {version}")
        row_offsets = np.frombuffer(fh.read(8 * (nv + 1)), dtype="<u8")
        neighbors = np.frombuffer(fh.read(4 * ne), dtype="<u4")
        labels = None
        if flags & _FLAG_LABELED:
            labels = np.frombuffer(fh.read(4 * nv), dtype="<u4")
    return Graph(row_offsets.copy(), neighbors.copy(),
                 labels=None if labels is None else labels.copy(),
                 oriented=bool(flags & _FLAG_ORIENTED))
