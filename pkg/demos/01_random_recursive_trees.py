"""Sampling random recursive trees and the split at vertex 2.

Removing the edge above vertex 2 cuts the tree in two. The piece holding
vertex 2 has a uniform size on {1, ..., n-1}; this script checks that
exactly for small n and by a chi-square test for a larger one.
"""

import math

import numpy as np

from leafstrip import montecarlo as mc
from leafstrip.treegen import enumerate_increasing_trees, format_edge_list, generate_rrt, height, split_at_two

t = generate_rrt(12, seed=7)
print(format_edge_list(t))
print("height", height(t))

for n in range(2, 8):
    sizes = np.bincount([len(split_at_two(t).lower) for t in enumerate_increasing_trees(n)])[1:]
    print(f"n={n}: {math.factorial(n - 1)} trees, lower-part sizes {sizes.tolist()}")

cfg = mc.ExperimentConfig(n=500, trials=20_000, master_seed=1, experiment="uniformity")
u = mc.run_uniformity(cfg).uniformity
print(f"n=500, {u.samples} samples, {len(u.bins)} bins: chi2={u.statistic:.1f} dof={u.dof} p={u.p_value:.3f}")
