"""Compiled inner loops shared by the tree, root-finding and simulation code.

Every kernel takes a rooted view of a tree as two arrays:

``parent``
    int64 array of length ``n + 1`` indexed by vertex label; ``parent[root]``
    is 0 and index 0 is unused.
``order``
    int64 array of the ``n`` vertex labels in an order where every parent
    precedes its children (``1..n`` for an increasing tree, BFS order in
    general).

Adjacency-based kernels take CSR arrays ``indptr`` / ``indices`` over labels
``0..n`` (row 0 empty).
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def depths(parent, order):
    n = order.shape[0]
    depth = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n):
        v = order[i]
        depth[v] = depth[parent[v]] + 1
    return depth


@njit(cache=True, nogil=True)
def subtree_heights(parent, order):
    n = order.shape[0]
    h = np.zeros(n + 1, dtype=np.int64)
    for i in range(n - 1, 0, -1):
        v = order[i]
        p = parent[v]
        if h[v] + 1 > h[p]:
            h[p] = h[v] + 1
    return h


@njit(cache=True, nogil=True)
def subtree_sizes(parent, order):
    n = order.shape[0]
    size = np.ones(n + 1, dtype=np.int64)
    size[0] = 0
    for i in range(n - 1, 0, -1):
        v = order[i]
        size[parent[v]] += size[v]
    return size


@njit(cache=True, nogil=True)
def strip_survival(parent, order):
    """Number of leaf-stripping rounds each vertex survives, and the tree height.

    A vertex outlives ``r`` rounds iff at least two of its branches (the
    components left after deleting it, measured by the farthest vertex from
    it) reach distance ``r``. The returned ``s[v]`` is the second-largest
    branch reach of ``v`` (0 when ``v`` has fewer than two branches), so
    ``v`` survives ``r`` rounds iff ``s[v] >= r``.
    """
    n = order.shape[0]
    # columns: best child reach, second-best child reach, reach via parent, depth;
    # interleaved so the random parent lookups touch one cache line
    w = np.zeros((n + 1, 4), dtype=np.int32)
    for i in range(n - 1, 0, -1):
        v = order[i]
        p = parent[v]
        d = w[v, 0] + 1
        if d > w[p, 0]:
            w[p, 1] = w[p, 0]
            w[p, 0] = d
        elif d > w[p, 1]:
            w[p, 1] = d

    s = np.zeros(n + 1, dtype=np.int64)
    height = 0
    r = order[0]
    s[r] = w[r, 1]
    for i in range(1, n):
        v = order[i]
        p = parent[v]
        dv = w[p, 3] + 1
        w[v, 3] = dv
        if dv > height:
            height = dv
        mine = w[v, 0] + 1
        sib = w[p, 1] if w[p, 0] == mine else w[p, 0]
        up = 1 + (w[p, 2] if w[p, 2] > sib else sib)
        w[v, 2] = up
        a = w[v, 0]
        b = w[v, 1]
        # second largest of (a, b, up) given a >= b
        if up >= a:
            s[v] = a
        elif up >= b:
            s[v] = up
        else:
            s[v] = b
    return s, height


@njit(cache=True, nogil=True)
def peel(indptr, indices, n, rounds):
    """Frontier leaf peeling; returns the alive mask after ``rounds`` rounds."""
    alive = np.ones(n + 1, dtype=np.bool_)
    alive[0] = False
    deg = np.empty(n + 1, dtype=np.int64)
    queued = np.zeros(n + 1, dtype=np.bool_)
    frontier = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    nf = 0
    for v in range(1, n + 1):
        deg[v] = indptr[v + 1] - indptr[v]
        if deg[v] <= 1:
            frontier[nf] = v
            nf += 1
            queued[v] = True
    for _ in range(rounds):
        if nf == 0:
            break
        for i in range(nf):
            alive[frontier[i]] = False
        nn = 0
        for i in range(nf):
            v = frontier[i]
            for e in range(indptr[v], indptr[v + 1]):
                u = indices[e]
                if alive[u]:
                    deg[u] -= 1
                    if deg[u] <= 1 and not queued[u]:
                        queued[u] = True
                        nxt[nn] = u
                        nn += 1
        frontier, nxt = nxt, frontier
        nf = nn
    return alive


@njit(cache=True, nogil=True)
def bfs_rooting(indptr, indices, n, root):
    parent = np.zeros(n + 1, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    seen = np.zeros(n + 1, dtype=np.bool_)
    order[0] = root
    seen[root] = True
    head = 0
    tail = 1
    while head < tail:
        v = order[head]
        head += 1
        for e in range(indptr[v], indptr[v + 1]):
            u = indices[e]
            if not seen[u]:
                seen[u] = True
                parent[u] = v
                order[tail] = u
                tail += 1
    return parent, order, tail


@njit(cache=True, nogil=True)
def jordan(parent, order):
    n = order.shape[0]
    size = subtree_sizes(parent, order)
    biggest_child = np.zeros(n + 1, dtype=np.int64)
    for i in range(n - 1, 0, -1):
        v = order[i]
        p = parent[v]
        if size[v] > biggest_child[p]:
            biggest_child[p] = size[v]
    score = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        v = order[i]
        rest = n - size[v]
        score[v] = rest if rest > biggest_child[v] else biggest_child[v]
    return score


@njit(cache=True, nogil=True)
def greedy_peel(indptr, indices, n, survivors, rng):
    """Delete a uniformly random current leaf until ``survivors`` remain."""
    alive = np.ones(n + 1, dtype=np.bool_)
    alive[0] = False
    deg = np.empty(n + 1, dtype=np.int64)
    leaves = np.empty(n, dtype=np.int64)
    pos = np.full(n + 1, -1, dtype=np.int64)
    nl = 0
    for v in range(1, n + 1):
        deg[v] = indptr[v + 1] - indptr[v]
        if deg[v] <= 1:
            leaves[nl] = v
            pos[v] = nl
            nl += 1
    remaining = n
    while remaining > survivors:
        i = rng.integers(0, nl)
        v = leaves[i]
        nl -= 1
        last = leaves[nl]
        leaves[i] = last
        pos[last] = i
        pos[v] = -1
        alive[v] = False
        remaining -= 1
        for e in range(indptr[v], indptr[v + 1]):
            u = indices[e]
            if alive[u]:
                deg[u] -= 1
                if deg[u] <= 1 and pos[u] < 0:
                    leaves[nl] = u
                    pos[u] = nl
                    nl += 1
    return alive
