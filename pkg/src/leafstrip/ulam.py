"""Ulam-Harris coordinates for increasing trees and the zone-flipping involution.

A node of the Ulam-Harris tree is a tuple of positive integers; ``()`` is
the root. The *zone* of a node is its digit sum. An increasing tree embeds
canonically: the children of each vertex take child slots ``1, 2, 3, ...``
of their parent's node in increasing label order.

The child-sibling code of ``(n1, ..., nj)`` is the bit string
``1 0^(n1-1) 1 0^(n2-1) ... 1 0^(nj-1)``; its length is the zone and its
number of ones is the depth. Complementing bits ``2..j`` of every code maps
increasing trees to increasing trees, preserves zones and the subtrees
hanging off zone-``j`` nodes, and reflects depths inside the first ``j``
zones (``depth + flipped depth = zone + 1``).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import _kernels
from .treegen import IncreasingTree, enumerate_increasing_trees

UlamNode = tuple[int, ...]


class MalformedCode(ValueError):
    """A bit string that is not the child-sibling code of any node."""


@dataclass(frozen=True)
class BitString:
    """Bit string of explicit ``length``; ``value`` holds the bits, first bit most significant."""

    value: int
    length: int

    def __post_init__(self):
        if self.length < 0 or self.value < 0 or self.value >> self.length:
            raise ValueError(f"value {self.value} does not fit in {self.length} bits")

    @classmethod
    def from_str(cls, bits: str) -> "BitString":
        if bits and set(bits) - {"0", "1"}:
            raise ValueError(f"not a bit string: {bits!r}")
        return cls(int(bits, 2) if bits else 0, len(bits))

    def __str__(self):
        return format(self.value, f"0{self.length}b") if self.length else ""

    def __len__(self):
        return self.length

    def ones(self) -> int:
        return self.value.bit_count()


def zone(u: UlamNode) -> int:
    return sum(u)


def nodes_in_zone(z: int) -> Iterator[UlamNode]:
    """All Ulam-Harris nodes with digit sum ``z`` (the compositions of ``z``)."""
    if z == 0:
        yield ()
        return
    for first in range(1, z + 1):
        for rest in nodes_in_zone(z - first):
            yield (first,) + rest


def ell(u: UlamNode) -> BitString:
    value = 0
    length = 0
    for d in u:
        if d < 1:
            raise ValueError(f"Ulam-Harris digits must be positive, got {u}")
        value = (value << d) | (1 << (d - 1))
        length += d
    return BitString(value, length)


def ell_inv(b: BitString | str) -> UlamNode:
    s = str(b)
    if not s:
        return ()
    if s[0] != "1":
        raise MalformedCode(f"child-sibling code must start with 1, got {s!r}")
    digits = []
    for bit in s:
        if bit == "1":
            digits.append(1)
        else:
            digits[-1] += 1
    return tuple(digits)


def flip_f(j: int, b: BitString | str) -> BitString:
    """Complement bit positions ``2..min(j, len(b))`` (1-based from the left)."""
    if j < 2:
        raise ValueError(f"flip index must be >= 2, got {j}")
    if isinstance(b, str):
        b = BitString.from_str(b)
    m = min(j, b.length)
    if m < 2:
        return b
    mask = ((1 << (m - 1)) - 1) << (b.length - m)
    return BitString(b.value ^ mask, b.length)


@dataclass(frozen=True)
class Embedding:
    """Ulam-Harris node of every vertex; ``emb[v]`` for ``v`` in ``1..n``."""

    nodes: tuple[UlamNode, ...]

    def __getitem__(self, v: int) -> UlamNode:
        if v < 1:
            raise IndexError(v)
        return self.nodes[v - 1]

    def __len__(self):
        return len(self.nodes)

    def items(self) -> Iterator[tuple[int, UlamNode]]:
        return enumerate(self.nodes, start=1)

    def zones(self) -> list[int]:
        return [sum(u) for u in self.nodes]


def _child_slots(t: IncreasingTree) -> np.ndarray:
    # slot[v] = 1 + number of smaller siblings of v
    counter = np.zeros(t.n + 1, dtype=np.int64)
    slot = np.zeros(t.n + 1, dtype=np.int64)
    for v in range(2, t.n + 1):
        p = t.parent[v]
        counter[p] += 1
        slot[v] = counter[p]
    return slot


def embed_phi(t: IncreasingTree) -> Embedding:
    slot = _child_slots(t)
    nodes: list[UlamNode] = [()]
    for v in range(2, t.n + 1):
        nodes.append(nodes[t.parent[v] - 1] + (int(slot[v]),))
    return Embedding(tuple(nodes))


def codes(t: IncreasingTree) -> list[BitString]:
    """Child-sibling code of every vertex's node; index ``v - 1``."""
    slot = _child_slots(t)
    out = [BitString(0, 0)]
    for v in range(2, t.n + 1):
        pc = out[t.parent[v] - 1]
        s = int(slot[v])
        out.append(BitString((pc.value << s) | (1 << (s - 1)), pc.length + s))
    return out


def flip_tree(t: IncreasingTree, j: int) -> IncreasingTree:
    """The increasing tree encoded by ``v -> ell_inv(flip_f(j, ell(phi(v))))``."""
    flipped = [flip_f(j, c) for c in codes(t)]
    where = {(c.length, c.value): v for v, c in enumerate(flipped, start=1)}
    parent = np.zeros(t.n + 1, dtype=np.int64)
    for v in range(2, t.n + 1):
        c = flipped[v - 1]
        tz = (c.value & -c.value).bit_length() - 1
        key = (c.length - tz - 1, c.value >> (tz + 1))
        if key not in where:
            raise AssertionError(f"flipped node of vertex {v} has no parent in the image")
        parent[v] = where[key]
    return IncreasingTree(parent)


def format_embedding(t: IncreasingTree) -> str:
    """Debug dump: ``v<TAB>n1.n2...nj<TAB>code`` per vertex, ordered by label."""
    emb = embed_phi(t)
    lines = [f"{v}\t{'.'.join(map(str, u))}\t{ell(u)}" for v, u in emb.items()]
    return "\n".join(lines) + "\n"


def tall_zone_set(t: IncreasingTree, zone_target: int, height_threshold: int,
                  emb: Embedding | None = None) -> frozenset[int]:
    """Vertices in ``zone_target`` whose subtree height is at least ``height_threshold``."""
    emb = embed_phi(t) if emb is None else emb
    h = _kernels.subtree_heights(t.parent, t.order)
    return frozenset(v for v, u in emb.items() if sum(u) == zone_target and h[v] >= height_threshold)


@dataclass
class Check:
    passed: bool = True
    witness: int | None = None
    detail: str = ""

    def fail(self, v: int, detail: str) -> None:
        if self.passed:
            self.passed = False
            self.witness = v
            self.detail = detail


@dataclass
class FlipReport:
    k: int
    zone: int
    height_threshold: int
    checks: dict[str, Check] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failures(self) -> dict[str, Check]:
        return {name: c for name, c in self.checks.items() if not c.passed}


def verify_flip_properties(t: IncreasingTree, k: int, height_threshold: int | None = None,
                           zone_target: int | None = None) -> FlipReport:
    """Check the zone-flip properties of ``t`` with flip index ``4k``.

    Checks ``zones`` (zones preserved), ``subtrees`` (subtrees of zone-``4k``
    vertices unchanged and the tall zone-``4k`` set unchanged), ``heights``
    (depth + flipped depth = zone + 1 within the first ``4k`` zones), plus
    ``increasing`` (the image re-embeds to the flipped nodes) and
    ``involution``. ``height_threshold`` defaults to ``m_n - k``;
    ``zone_target`` overrides ``4k`` for small-tree experiments.
    """
    from .rootfind import m_n

    j = 4 * k if zone_target is None else zone_target
    thr = m_n(t.n) - k if height_threshold is None else height_threshold
    rep = FlipReport(k=k, zone=j, height_threshold=thr)
    chk = {name: Check() for name in ("increasing", "involution", "zones", "subtrees", "heights")}
    rep.checks = chk

    emb = embed_phi(t)
    try:
        tb = flip_tree(t, j)
    except (AssertionError, ValueError) as exc:
        chk["increasing"].fail(0, str(exc))
        return rep
    emb_b = embed_phi(tb)

    for v, u in emb.items():
        if ell(emb_b[v]) != flip_f(j, ell(u)):
            chk["increasing"].fail(v, f"embedding of flipped tree disagrees at vertex {v}")
        if zone(emb_b[v]) != zone(u):
            chk["zones"].fail(v, f"zone {zone(u)} -> {zone(emb_b[v])}")
        z = zone(u)
        if 1 <= z <= j and len(u) + len(emb_b[v]) != z + 1:
            chk["heights"].fail(v, f"depths {len(u)} + {len(emb_b[v])} != {z + 1}")

    anc, anc_b = _zone_ancestor(t, emb, j), _zone_ancestor(tb, emb_b, j)
    moved = (anc != anc_b) | ((anc > 0) & (anc != np.arange(t.n + 1)) & (t.parent != tb.parent))
    if moved.any():
        w = int(np.flatnonzero(moved)[0])
        v = int(anc[w] or anc_b[w])
        chk["subtrees"].fail(v, f"subtree of zone-{j} vertex {v} changed at vertex {w}")

    s = tall_zone_set(t, j, thr, emb)
    sb = tall_zone_set(tb, j, thr, emb_b)
    if s != sb:
        chk["subtrees"].fail(min(s ^ sb), f"tall zone-{j} sets differ: {sorted(s)} vs {sorted(sb)}")

    if flip_tree(tb, j) != t:
        chk["involution"].fail(0, "flipping twice does not return the input")
    return rep


def _zone_ancestor(t: IncreasingTree, emb: Embedding, z: int) -> np.ndarray:
    # the unique ancestor-or-self in zone z, 0 if none (zones strictly increase downwards)
    anc = np.zeros(t.n + 1, dtype=np.int64)
    for v, u in emb.items():
        anc[v] = v if sum(u) == z else (anc[t.parent[v]] if v > 1 else 0)
    return anc


@dataclass(frozen=True)
class FlipCounts:
    """Exact counts over all increasing trees on ``[n]``."""

    n: int
    zone: int
    height_threshold: int
    depth_threshold: int
    trees: int
    nonempty: int
    deep: int
    bijective: bool
    joint_law_equal: bool

    @property
    def fraction(self) -> float:
        return self.deep / self.nonempty if self.nonempty else 1.0


def exact_flip_counts(n: int, k: int = 1, height_threshold: int = 0,
                      zone_target: int | None = None) -> FlipCounts:
    """Exact counts behind the "at least half are deep" bound.

    Over all ``(n-1)!`` trees: how many have a nonempty tall zone set ``S``,
    how many of those have a vertex of ``S`` at depth ``>= ceil(zone / 2)``
    (``2k`` for the default zone ``4k``), whether flipping is a bijection, and
    whether the multiset of (embedding, ``S``) pairs equals that of
    (flipped embedding, flipped ``S``).
    """
    j = 4 * k if zone_target is None else zone_target
    depth_thr = math.ceil(j / 2)
    trees = list(enumerate_increasing_trees(n))
    images: Counter = Counter()
    law: Counter = Counter()
    law_b: Counter = Counter()
    nonempty = deep = 0
    for t in trees:
        emb = embed_phi(t)
        s = tall_zone_set(t, j, height_threshold, emb)
        tb = flip_tree(t, j)
        images[tb] += 1
        emb_b = embed_phi(tb)
        law[(emb.nodes, s)] += 1
        law_b[(emb_b.nodes, tall_zone_set(tb, j, height_threshold, emb_b))] += 1
        if s:
            nonempty += 1
            if any(len(emb[v]) >= depth_thr for v in s):
                deep += 1
    bijective = len(images) == len(trees) and all(c == 1 for c in images.values()) \
        and set(images) == set(trees)
    return FlipCounts(n, j, height_threshold, depth_thr, len(trees), nonempty, deep,
                      bijective, law == law_b)
