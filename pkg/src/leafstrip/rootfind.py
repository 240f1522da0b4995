"""Root confidence sets: leaf stripping and two baselines.

Leaf stripping removes every vertex of degree at most one, simultaneously,
for a given number of rounds. With round budget ``m_n - k`` the survivors
form the confidence set ``R_k``. Vertex 1 survives exactly when it has two
children whose subtrees have height at least ``m_n - k - 1``.

Baselines:

* Jordan centrality: rank vertices by the size of the largest component
  left after deleting them (smaller is more central). Prior work bounds the
  size needed for error ``eps`` by ``(11 / eps) log(1 / eps)``.
* Greedy likelihood: delete a uniformly random leaf at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .treegen import EdgeList, IncreasingTree

ALGORITHMS = ("leafstrip", "jordan", "greedy")

Tree = IncreasingTree | EdgeList


@dataclass(frozen=True)
class ConfidenceSet:
    vertices: frozenset[int]
    rounds_performed: int
    algorithm: str

    def __contains__(self, v):
        return v in self.vertices

    def __len__(self):
        return len(self.vertices)

    def sorted(self) -> list[int]:
        return sorted(self.vertices)


def m_n(n: int) -> int:
    """Round budget ``ceil(e ln n - 1.5 ln ln(n + 1))``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return math.ceil(math.e * math.log(n) - 1.5 * math.log(math.log(n + 1)))


def _rooted(t: Tree) -> tuple[np.ndarray, np.ndarray]:
    return t.rooted()


def _mask_to_set(mask: np.ndarray) -> frozenset[int]:
    return frozenset(int(v) for v in np.flatnonzero(mask))


def leaf_strip(t: Tree, rounds: int) -> ConfidenceSet:
    """Survivors of ``rounds`` rounds of simultaneous removal of all degree <= 1 vertices."""
    if rounds < 0:
        raise ValueError(f"rounds must be >= 0, got {rounds}")
    indptr, indices = t.csr
    alive = _kernels.peel(indptr, indices, t.n, rounds)
    return ConfidenceSet(_mask_to_set(alive), rounds, "leafstrip")


def strip_rounds(n: int, k: int) -> int:
    return max(m_n(n) - k, 0)


def confidence_set_Rk(t: Tree, k: int) -> ConfidenceSet:
    return leaf_strip(t, strip_rounds(t.n, k))


def survival_rounds(t: Tree) -> np.ndarray:
    """``s[v]`` such that ``v`` survives ``r`` rounds of stripping iff ``s[v] >= r``."""
    s, _ = _kernels.strip_survival(*_rooted(t))
    return s


def root_captured_characterization(t: IncreasingTree, k: int) -> bool:
    """Whether vertex 1 has two children with subtrees of height ``>= m_n - k - 1``."""
    need = m_n(t.n) - k - 1
    h = _kernels.subtree_heights(t.parent, t.order)
    kids = np.flatnonzero(t.parent == 1)
    kids = kids[kids >= 2]
    return int(np.count_nonzero(h[kids] >= need)) >= 2


def jordan_scores(t: Tree) -> np.ndarray:
    """Largest component size of ``t - v`` for every ``v``; index 0 unused."""
    return _kernels.jordan(*_rooted(t))


def jordan_confidence_set(t: Tree, size: int) -> ConfidenceSet:
    """The ``size`` most central vertices; ties go to the smaller label."""
    if not 1 <= size <= t.n:
        raise ValueError(f"size must be in [1, {t.n}], got {size}")
    scores = jordan_scores(t)[1:]
    labels = np.arange(1, t.n + 1)
    pick = np.lexsort((labels, scores))[:size] + 1
    return ConfidenceSet(frozenset(int(v) for v in pick), 0, "jordan")


def greedy_likelihood_strip(t: Tree, survivors: int, seed: int | np.random.Generator) -> ConfidenceSet:
    if not 1 <= survivors <= t.n:
        raise ValueError(f"survivors must be in [1, {t.n}], got {survivors}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.Generator(np.random.PCG64(seed))
    indptr, indices = t.csr
    alive = _kernels.greedy_peel(indptr, indices, t.n, survivors, rng)
    return ConfidenceSet(_mask_to_set(alive), t.n - survivors, "greedy")
