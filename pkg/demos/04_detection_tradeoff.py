"""How many rounds to hold back: error against confidence-set size.

Stopping k rounds early lowers the chance of losing the root while the set
grows. The table picks, for each target error eps, the least k that meets it
and reports the eps-quantile of |R_k| there.
"""

from leafstrip import montecarlo as mc

cfg = mc.ExperimentConfig(n=20_000, trials=2000, master_seed=5, experiment="tradeoff",
                          k_values=tuple(range(1, 13)), epsilon_grid=(0.2, 0.1, 0.05, 0.02))
res = mc.run_tradeoff(cfg)
for s in res.summaries:
    lo, hi = s.error_ci
    print(f"k={s.k:2d} error={s.error_rate:.3f} [{lo:.3f}, {hi:.3f}] "
          f"median |R_k|={s.size_quantiles['50']} q90={s.size_quantiles['90']}")
print()
for row in res.tradeoff:
    print(f"eps={row.epsilon:<5} k={row.k} error={row.error} size quantile={row.size_quantile}")
