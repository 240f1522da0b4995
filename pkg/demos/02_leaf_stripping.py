"""Leaf stripping next to the two baselines.

Each round deletes every vertex of degree at most one. After m_n - k rounds
the survivors form the confidence set R_k. The Jordan-centre set of the same
size and the greedy likelihood peel are shown for comparison.
"""

from leafstrip.rootfind import (
    confidence_set_Rk,
    greedy_likelihood_strip,
    jordan_confidence_set,
    m_n,
    root_captured_characterization,
)
from leafstrip.treegen import generate_rrt

n = 5000
print(f"n={n}, m_n={m_n(n)}")
for seed in range(5):
    t = generate_rrt(n, seed)
    for k in (2, 5):
        r = confidence_set_Rk(t, k)
        size = max(len(r), 1)
        jordan = jordan_confidence_set(t, size)
        greedy = greedy_likelihood_strip(t, size, seed)
        # the root survives iff two of its branches are tall enough
        assert root_captured_characterization(t, k) == (1 in r)
        print(f"seed={seed} k={k} |R_k|={len(r):3d} root in R_k={1 in r!s:5} "
              f"jordan={1 in jordan!s:5} greedy={1 in greedy!s:5}")
