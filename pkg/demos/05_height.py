"""Tree height against m_n.

The number of stripping rounds is anchored at m_n, which tracks the height
of the tree up to a bounded offset.
"""

from leafstrip import montecarlo as mc

for n in (10**3, 10**4, 10**5):
    h = mc.run_height(mc.ExperimentConfig(n=n, trials=1000, master_seed=2, experiment="height")).height
    spread = {k: round(p, 3) for k, p in h.tail.items() if k <= 5}
    print(f"n={n:>6} m_n={h.m_n} mean height={h.mean_height:.2f} offset={h.mean_offset:+.2f} "
          f"P(|H - m_n| >= k)={spread}")
