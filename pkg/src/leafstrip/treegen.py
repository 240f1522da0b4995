"""Increasing trees: sampling, exhaustive enumeration, structural queries, I/O.

An increasing tree on ``[n] = {1, ..., n}`` is stored as a parent array
indexed by label, with ``parent[v] < v`` for every ``v >= 2`` and vertex 1
as the root. A uniform random recursive tree is sampled by attaching vertex
``v`` to a uniform vertex of ``{1, ..., v - 1}``, which is the same as
drawing a uniform increasing tree.

Randomness
----------
``generate_rrt(n, seed)`` draws from ``numpy.random.Generator(PCG64(seed))``.
All ``n - 1`` parent choices come from a single call to
``Generator.integers`` with per-vertex upper bounds, which uses Lemire's
unbiased bounded-integer method. The same ``(n, seed)`` gives bit-identical
parent arrays on every platform numpy supports.
"""

from __future__ import annotations

import functools
import itertools
import math
import os
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import _kernels

MAX_ENUMERATION_N = 10


@functools.lru_cache(maxsize=32)
def _label_order(n: int) -> np.ndarray:
    order = np.arange(1, n + 1, dtype=np.int64)
    order.flags.writeable = False
    return order


def _csr(n: int, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    idx = np.argsort(src, kind="stable")
    counts = np.bincount(src, minlength=n + 1)
    indptr = np.zeros(n + 2, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, dst[idx].astype(np.int64)


@dataclass(frozen=True, eq=False)
class IncreasingTree:
    """Rooted tree on ``[n]`` whose labels increase away from the root (vertex 1).

    ``parent`` has length ``n + 1``; entries 0 and 1 are 0.
    """

    parent: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(self.parent, dtype=np.int64)
        if p.ndim != 1 or p.shape[0] < 2:
            raise ValueError("parent array must have length n + 1 >= 2")
        if p[0] != 0 or p[1] != 0:
            raise ValueError("parent[0] and parent[1] must be 0")
        v = np.arange(2, p.shape[0])
        if np.any(p[2:] < 1) or np.any(p[2:] >= v):
            bad = int(v[(p[2:] < 1) | (p[2:] >= v)][0])
            raise ValueError(f"parent({bad}) = {int(p[bad])} is not in [1, {bad - 1}]")
        p.flags.writeable = False
        object.__setattr__(self, "parent", p)

    @classmethod
    def _trusted(cls, parent: np.ndarray) -> "IncreasingTree":
        # skips validation; only for arrays built to be increasing
        t = object.__new__(cls)
        parent.flags.writeable = False
        object.__setattr__(t, "parent", parent)
        return t

    @classmethod
    def from_parents(cls, parents: Sequence[int]) -> "IncreasingTree":
        """Build from ``(parent(2), ..., parent(n))``."""
        return cls(np.concatenate([[0, 0], np.asarray(parents, dtype=np.int64)]))

    @property
    def n(self) -> int:
        return self.parent.shape[0] - 1

    @property
    def order(self) -> np.ndarray:
        return _label_order(self.n)

    def parent_of(self, v: int) -> int:
        return int(self.parent[v])

    def parents(self) -> tuple[int, ...]:
        """The parent-choice vector ``(parent(2), ..., parent(n))``."""
        return tuple(int(x) for x in self.parent[2:])

    def edges(self) -> np.ndarray:
        """``(parent, child)`` pairs, one per non-root vertex, as an ``(n-1, 2)`` array."""
        child = np.arange(2, self.n + 1, dtype=np.int64)
        return np.column_stack([self.parent[2:], child])

    @functools.cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        """``children[v]`` lists the children of ``v`` in increasing label order."""
        kids: list[list[int]] = [[] for _ in range(self.n + 1)]
        for v in range(2, self.n + 1):
            kids[int(self.parent[v])].append(v)
        return tuple(tuple(k) for k in kids)

    @functools.cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        return _csr(self.n, self.edges())

    def rooted(self) -> tuple[np.ndarray, np.ndarray]:
        return self.parent, self.order

    def __eq__(self, other):
        if not isinstance(other, IncreasingTree):
            return NotImplemented
        return np.array_equal(self.parent, other.parent)

    def __hash__(self):
        return hash(self.parent.tobytes())

    def __repr__(self):
        if self.n <= 12:
            return f"IncreasingTree(parents={self.parents()})"
        return f"IncreasingTree(n={self.n})"


@dataclass(frozen=True, eq=False)
class EdgeList:
    """An unrooted tree on ``[n]`` given by its edges (an ``(n-1, 2)`` array)."""

    n: int
    edges: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if self.n < 1:
            raise ValueError("tree must have at least one vertex")
        if e.shape[0] != self.n - 1:
            raise ValueError(f"a tree on {self.n} vertices has {self.n - 1} edges, got {e.shape[0]}")
        if e.size and (e.min() < 1 or e.max() > self.n):
            raise ValueError("edge endpoint outside [1, n]")
        e.flags.writeable = False
        object.__setattr__(self, "edges", e)
        _, _, reached = _kernels.bfs_rooting(*self.csr, self.n, 1)
        if reached != self.n:
            raise ValueError("edge list is not connected")

    @functools.cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        return _csr(self.n, self.edges)

    def rooted(self, root: int = 1) -> tuple[np.ndarray, np.ndarray]:
        parent, order, _ = _kernels.bfs_rooting(*self.csr, self.n, root)
        return parent, order

    def edge_set(self) -> set[frozenset[int]]:
        return {frozenset((int(u), int(v))) for u, v in self.edges}


@dataclass(frozen=True)
class TreeSplit:
    """The two pieces left after cutting the edge between vertices 1 and 2.

    ``lower`` holds vertex 2 and its descendants, ``upper`` everything else.
    Both are sorted arrays of original labels.
    """

    upper: np.ndarray
    lower: np.ndarray
    upper_tree: IncreasingTree
    lower_tree: IncreasingTree

    @property
    def sizes(self) -> tuple[int, int]:
        return len(self.upper), len(self.lower)


def generate_rrt(n: int, seed: int) -> IncreasingTree:
    """Sample a uniform random recursive tree on ``[n]`` from ``seed``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    parent = np.zeros(n + 1, dtype=np.int64)
    if n >= 2:
        rng = np.random.Generator(np.random.PCG64(seed))
        parent[2:] = rng.integers(0, np.arange(1, n, dtype=np.int64)) + 1
    return IncreasingTree._trusted(parent)


def enumerate_increasing_trees(n: int) -> Iterator[IncreasingTree]:
    """Yield all ``(n-1)!`` increasing trees on ``[n]``.

    Trees come in lexicographic order of ``(parent(2), ..., parent(n))``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > MAX_ENUMERATION_N:
        raise ValueError(
            f"enumeration is limited to n <= {MAX_ENUMERATION_N} "
            f"({math.factorial(n - 1)} trees requested)"
        )
    for choice in itertools.product(*(range(1, v) for v in range(2, n + 1))):
        yield IncreasingTree.from_parents(choice)


def depths(t: IncreasingTree) -> np.ndarray:
    """Distance of every vertex from the root; index 0 is unused."""
    return _kernels.depths(t.parent, t.order)


def height(t: IncreasingTree) -> int:
    return int(depths(t).max())


def subtree_size(t: IncreasingTree, v: int) -> int:
    if not 1 <= v <= t.n:
        raise ValueError(f"vertex {v} not in [1, {t.n}]")
    return int(_kernels.subtree_sizes(t.parent, t.order)[v])


def descendants(t: IncreasingTree, v: int) -> np.ndarray:
    """Sorted labels of the subtree rooted at ``v`` (including ``v``)."""
    inside = np.zeros(t.n + 1, dtype=bool)
    inside[v] = True
    # parents precede children, so one forward pass suffices
    for u in range(v + 1, t.n + 1):
        inside[u] = inside[t.parent[u]]
    return np.flatnonzero(inside)


def induced_increasing_tree(t: IncreasingTree, labels: np.ndarray) -> IncreasingTree:
    """Relabel a connected vertex set closed under parents (except its minimum) to ``[m]``.

    Order-preserving relabelling keeps the tree increasing.
    """
    labels = np.sort(np.asarray(labels, dtype=np.int64))
    rank = np.zeros(t.n + 1, dtype=np.int64)
    rank[labels] = np.arange(1, len(labels) + 1)
    parent = np.zeros(len(labels) + 1, dtype=np.int64)
    parent[2:] = rank[t.parent[labels[1:]]]
    return IncreasingTree(parent)


def split_at_two(t: IncreasingTree) -> TreeSplit:
    if t.n < 2:
        raise ValueError("split_at_two needs n >= 2")
    lower = descendants(t, 2)
    mask = np.ones(t.n + 1, dtype=bool)
    mask[0] = False
    mask[lower] = False
    upper = np.flatnonzero(mask)
    return TreeSplit(upper, lower, induced_increasing_tree(t, upper), induced_increasing_tree(t, lower))


def permute_labels(t: IncreasingTree | EdgeList, sigma: Sequence[int]) -> EdgeList:
    """Relabel vertex ``v`` as ``sigma[v - 1]`` and forget the root."""
    s = np.asarray(sigma, dtype=np.int64)
    n = t.n
    if s.shape != (n,) or not np.array_equal(np.sort(s), np.arange(1, n + 1)):
        raise ValueError("sigma must be a permutation of [1, n]")
    image = np.concatenate([[0], s])
    edges = t.edges() if isinstance(t, IncreasingTree) else t.edges
    return EdgeList(n, image[edges])


def write_edge_list(t: IncreasingTree | EdgeList, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        fh.write(format_edge_list(t))


def format_edge_list(t: IncreasingTree | EdgeList) -> str:
    edges = t.edges() if isinstance(t, IncreasingTree) else t.edges
    lines = [f"# n={t.n}"] + [f"{u} {v}" for u, v in edges]
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> EdgeList:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ValueError("missing '# n=<n>' header")
    head = lines[0].lstrip("#").strip()
    if not head.startswith("n="):
        raise ValueError(f"malformed header {lines[0]!r}")
    try:
        n = int(head[2:])
    except ValueError:
        raise ValueError(f"malformed header {lines[0]!r}") from None
    edges = []
    for ln in lines[1:]:
        if ln.startswith("#"):
            continue
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"malformed edge line {ln!r}")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise ValueError(f"malformed edge line {ln!r}") from None
    return EdgeList(n, np.array(edges, dtype=np.int64).reshape(-1, 2))


def read_edge_list(path: str | os.PathLike) -> EdgeList:
    with open(path) as fh:
        return parse_edge_list(fh.read())


def as_increasing_tree(e: EdgeList) -> IncreasingTree:
    """Interpret an edge list (parent first) as an increasing tree rooted at 1."""
    parent = np.zeros(e.n + 1, dtype=np.int64)
    seen = np.zeros(e.n + 1, dtype=bool)
    for u, v in e.edges:
        if seen[v]:
            raise ValueError(f"vertex {v} has two parents")
        seen[v] = True
        parent[v] = u
    if e.n >= 2 and seen[1]:
        raise ValueError("vertex 1 must be the root")
    return IncreasingTree(parent)
