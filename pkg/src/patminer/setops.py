"""Hot inner kernels: intersection, difference and bounding over sorted vertex
lists, plus bitmap adjacency over a renamed local universe.

All sorted-list inputs are strictly ascending numpy arrays of vertex ids.
Operations are pure; callers own any scratch they copy results into.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

VERTEX_DTYPE = np.uint32

# Below this size ratio a sort/merge pass beats per-element binary search.
_MERGE_RATIO = 4

_EMPTY = np.empty(0, dtype=VERTEX_DTYPE)


def bound_list(a: np.ndarray, y: int) -> np.ndarray:
    """Prefix of sorted list `a` strictly below `y` (binary-search early exit)."""
    return a[: int(np.searchsorted(a, y, side="left"))]


def _membership(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Boolean mask over `a`: which elements are present in sorted `b`."""
    if len(b) == 0:
        return np.zeros(len(a), dtype=bool)
    idx = np.searchsorted(b, a, side="left")
    clipped = np.minimum(idx, len(b) - 1)
    return (b[clipped] == a) & (idx < len(b))


def intersect(a: np.ndarray, b: np.ndarray, bound: int | None = None) -> np.ndarray:
    """Sorted intersection of two sorted lists, optionally limited to ids < bound.

    Searches each element of the shorter list in the longer one; a merge pass
    is used instead when the lists are of comparable length.
    """
    if bound is not None:
        a = bound_list(a, bound)
        b = bound_list(b, bound)
    if len(a) > len(b):
        a, b = b, a
    if len(a) == 0:
        return _EMPTY
    if len(b) < _MERGE_RATIO * len(a):
        return np.intersect1d(a, b, assume_unique=True)
    return a[_membership(a, b)]


def intersect_count(a: np.ndarray, b: np.ndarray, bound: int | None = None) -> int:
    """Cardinality of the (optionally bounded) intersection; no output list."""
    if bound is not None:
        a = bound_list(a, bound)
        b = bound_list(b, bound)
    if len(a) > len(b):
        a, b = b, a
    if len(a) == 0:
        return 0
    return int(np.count_nonzero(_membership(a, b)))


def difference(a: np.ndarray, b: np.ndarray, bound: int | None = None) -> np.ndarray:
    """Elements of `a` not in `b`, optionally limited to ids < bound."""
    if bound is not None:
        a = bound_list(a, bound)
    if len(a) == 0:
        return _EMPTY
    if len(b) == 0:
        return a
    return a[~_membership(a, b)]


def difference_count(a: np.ndarray, b: np.ndarray, bound: int | None = None) -> int:
    """Cardinality of the (optionally bounded) difference."""
    if bound is not None:
        a = bound_list(a, bound)
    if len(a) == 0:
        return 0
    if len(b) == 0:
        return len(a)
    return int(len(a) - np.count_nonzero(_membership(a, b)))


def contains(a: np.ndarray, x: int) -> bool:
    """Membership test in a sorted list."""
    i = int(np.searchsorted(a, x, side="left"))
    return i < len(a) and int(a[i]) == int(x)


# ---------------------------------------------------------------------------
# Bitmap adjacency over a renamed local universe
# ---------------------------------------------------------------------------

_WORD_BITS = 64
_ONE = np.uint64(1)


@dataclass
class LocalGraph:
    """Adjacency of a small vertex set, renamed to 0..n-1 and stored as bitmaps.

    `universe` keeps the original ids in ascending order, so local-id order
    preserves original-id order and symmetry bounds survive the renaming.
    Row i's bit j is set iff universe[i] and universe[j] are adjacent in the
    host graph.
    """

    universe: np.ndarray           # ascending original ids
    words: np.ndarray              # shape (n, ceil(n/64)), uint64

    @property
    def num_vertices(self) -> int:
        return len(self.universe)

    def row(self, i: int) -> np.ndarray:
        if not 0 <= i < len(self.universe):
            raise IndexError(f"local row {i} out of range (n={len(self.universe)})")
        return self.words[i]


def build_local_graph(g, anchor_set: np.ndarray) -> LocalGraph:
    """Rename `anchor_set` to 0..n-1 and record its induced host adjacency.

    anchor_set must be sorted ascending with no duplicates.
    """
    anchor = np.asarray(anchor_set, dtype=VERTEX_DTYPE)
    if len(anchor) > 1 and not np.all(anchor[1:] > anchor[:-1]):
        raise ValueError("anchor set must be strictly ascending")
    n = len(anchor)
    n_words = max(1, (n + _WORD_BITS - 1) // _WORD_BITS)
    words = np.zeros((n, n_words), dtype=np.uint64)
    for i in range(n):
        nbrs = g.neighbors_of(int(anchor[i]))
        local = np.nonzero(_membership(anchor, nbrs))[0]
        if len(local) == 0:
            continue
        shifts = np.left_shift(_ONE, (local & (_WORD_BITS - 1)).astype(np.uint64))
        np.bitwise_or.at(words[i], local >> 6, shifts)
    return LocalGraph(universe=anchor, words=words)


def mask_below(n_words: int, bound: int) -> np.ndarray:
    """Word mask keeping only bit positions strictly below `bound`."""
    m = np.zeros(n_words, dtype=np.uint64)
    full = bound >> 6
    m[:full] = np.uint64(0xFFFFFFFFFFFFFFFF)
    rem = bound & (_WORD_BITS - 1)
    if rem and full < n_words:
        m[full] = (_ONE << np.uint64(rem)) - _ONE
    return m


def popcount(words: np.ndarray) -> int:
    return int(np.bitwise_count(words).sum())


def bitmap_intersect_count(lg: LocalGraph, row_i: int, row_j: int,
                           bound: int | None = None) -> int:
    """Popcount of two ANDed local rows, masked below `bound` (a local id)."""
    w = lg.row(row_i) & lg.row(row_j)
    if bound is not None:
        w = w & mask_below(len(w), bound)
    return popcount(w)


def bits_to_locals(words: np.ndarray, n: int) -> np.ndarray:
    """Local ids of the set bits, ascending."""
    flat = np.unpackbits(words.view(np.uint8), bitorder="little")
    ids = np.nonzero(flat[:n])[0]
    return ids
