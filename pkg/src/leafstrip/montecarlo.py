"""Seeded Monte Carlo experiments on random recursive trees.

Every trial ``i`` draws its tree from ``derive_seed(master_seed, i)``, so a
run is reproducible regardless of how trials are spread over threads.
Results are gathered in trial order before any aggregation.

Statistical conventions
-----------------------
* Error rates carry two-sided 95% Wilson score intervals.
* Quantiles use the nearest-rank rule: the ``q``-quantile of ``N`` sorted
  samples is the ``ceil(q N)``-th smallest (numpy's ``inverted_cdf``).
* Chi-square uniformity tests merge adjacent values into equal-width bins
  so that every bin expects at least 20 samples.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from . import __version__, _kernels
from .rootfind import ALGORITHMS, greedy_likelihood_strip, leaf_strip, m_n, strip_rounds
from .treegen import IncreasingTree, enumerate_increasing_trees, generate_rrt
from .ulam import exact_flip_counts, verify_flip_properties

EXPERIMENTS = ("detection", "size", "height", "uniformity", "tradeoff", "lemma-verify")
CSV_HEADER = ("trial", "seed", "captured", "set_size", "height", "k", "n")
_NEEDS_K = ("detection", "size", "tradeoff")
_Z95 = float(stats.norm.ppf(0.975))


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    trials: int
    master_seed: int = 0
    experiment: str = "detection"
    k_values: tuple[int, ...] = ()
    algorithm: str = "leafstrip"
    epsilon_grid: tuple[float, ...] | None = None
    exhaustive: bool = False
    n_max: int | None = None
    height_threshold: int | None = None
    size_cap: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "k_values", tuple(int(k) for k in self.k_values))
        if self.epsilon_grid is not None:
            object.__setattr__(self, "epsilon_grid", tuple(float(e) for e in self.epsilon_grid))
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.trials < 1 and not self.exhaustive:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 bits")
        if self.experiment in _NEEDS_K and not self.k_values:
            raise ValueError(f"experiment {self.experiment!r} needs at least one k")
        if any(k < 0 for k in self.k_values):
            raise ValueError("k values must be >= 0")
        if self.epsilon_grid and any(not 0 < e <= 1 for e in self.epsilon_grid):
            raise ValueError("epsilon values must lie in (0, 1]")


def derive_seed(master_seed: int, trial_index: int) -> int:
    """64-bit seed of a trial: the first word of ``SeedSequence([master_seed, trial_index])``."""
    ss = np.random.SeedSequence([master_seed, trial_index])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True, slots=True)
class TrialRecord:
    trial: int
    seed: int | None
    n: int
    height: int
    k: int | None = None
    captured: bool | None = None
    set_size: int | None = None
    aux: dict | None = None

    def csv_row(self) -> str:
        cells = (self.trial, self.seed, self.captured, self.set_size, self.height, self.k, self.n)
        return ",".join("" if c is None else str(int(c)) for c in cells)


def wilson_interval(successes: int, total: int, z: float = _Z95) -> tuple[float, float]:
    if total == 0:
        return 0.0, 1.0
    p = successes / total
    denom = 1 + z * z / total
    centre = (p + z * z / (2 * total)) / denom
    half = z * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == total else min(1.0, centre + half)
    return lo, hi


def nearest_rank(samples: Sequence[int] | np.ndarray, q: float) -> int:
    a = np.asarray(samples)
    if q >= 1:
        return int(a.max())
    return int(np.quantile(a, q, method="inverted_cdf"))


@dataclass
class SummaryStats:
    k: int
    rounds: int
    trials: int
    failures: int
    error_rate: float
    error_ci: tuple[float, float]
    size_cap: int
    joint_rate: float
    mean_size: float
    size_std: float
    size_quantiles: dict[str, int]
    frac_at_least_2_pow_4k: float
    height_histogram: dict[int, int] = field(default_factory=dict)


@dataclass
class HeightSummary:
    n: int
    m_n: int
    trials: int
    mean_height: float
    mean_offset: float
    histogram: dict[int, int]
    tail: dict[int, float]


@dataclass
class UniformityReport:
    n: int
    samples: int
    bins: list[tuple[int, int]]
    observed: list[int]
    expected: list[float]
    statistic: float
    dof: int
    p_value: float


@dataclass
class TradeoffRow:
    epsilon: float
    k: int | None
    error: float | None
    size_quantile: int | None
    k_floor: float
    below_floor_max_error: float | None


@dataclass
class LemmaReport:
    mode: str
    trees_checked: int = 0
    failures: list[dict] = field(default_factory=list)
    counts: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list[TrialRecord]
    summaries: list[SummaryStats] = field(default_factory=list)
    height: HeightSummary | None = None
    uniformity: UniformityReport | None = None
    tradeoff: list[TradeoffRow] | None = None
    lemma: LemmaReport | None = None

    @property
    def ok(self) -> bool:
        return self.lemma is None or self.lemma.passed

    def summary_dict(self) -> dict:
        out = {"tool": "leafstrip", "version": __version__, "config": asdict(self.config)}
        if self.summaries:
            out["summaries"] = [asdict(s) for s in self.summaries]
        for name in ("height", "uniformity", "lemma"):
            val = getattr(self, name)
            if val is not None:
                out[name] = asdict(val)
        if self.lemma is not None:
            out["lemma"]["passed"] = self.lemma.passed
        if self.tradeoff is not None:
            out["tradeoff"] = [asdict(r) for r in self.tradeoff]
        return out

    def csv_text(self) -> str:
        return "\n".join([",".join(CSV_HEADER)] + [r.csv_row() for r in self.records]) + "\n"

    def write(self, csv_path: str | os.PathLike, json_path: str | os.PathLike) -> None:
        atomic_write(csv_path, self.csv_text())
        atomic_write(json_path, json.dumps(self.summary_dict(), indent=2, default=_jsonable) + "\n")


def _jsonable(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"not JSON serialisable: {type(obj)}")


def atomic_write(path: str | os.PathLike, text: str) -> None:
    """Write via a temporary file in the target directory and rename over ``path``."""
    path = os.fspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)), prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _map_trials(fn: Callable[[int], list[TrialRecord]], trials: int,
                threads: int | None) -> list[TrialRecord]:
    threads = threads or os.cpu_count() or 1
    if threads <= 1 or trials < 2:
        return [rec for i in range(trials) for rec in fn(i)]
    chunk = max(1, min(256, trials // (4 * threads)))
    starts = range(0, trials, chunk)

    def run(start: int) -> list[TrialRecord]:
        return [rec for i in range(start, min(start + chunk, trials)) for rec in fn(i)]

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return [rec for part in pool.map(run, starts) for rec in part]


def _confidence_trial(cfg: ExperimentConfig, i: int) -> list[TrialRecord]:
    seed = derive_seed(cfg.master_seed, i)
    t = generate_rrt(cfg.n, seed)
    return _confidence_records(cfg, t, i, seed)


def _confidence_records(cfg: ExperimentConfig, t: IncreasingTree, i: int,
                        seed: int | None) -> list[TrialRecord]:
    s, height = _kernels.strip_survival(t.parent, t.order)
    # survivors_at[r] = #{v : s[v] >= r}
    survivors_at = np.cumsum(np.bincount(s[1:])[::-1])[::-1]
    s_root = int(s[1])
    jordan_rank = None
    out = []
    for k in cfg.k_values:
        r = strip_rounds(cfg.n, k)
        size = int(survivors_at[r]) if r < len(survivors_at) else 0
        captured = s_root >= r
        if cfg.algorithm == "jordan":
            if jordan_rank is None:
                score = _kernels.jordan(t.parent, t.order)
                jordan_rank = int(np.count_nonzero(score[1:] < score[1]))
            size = max(size, 1)
            captured = jordan_rank < size
        elif cfg.algorithm == "greedy":
            size = max(size, 1)
            rng = np.random.Generator(np.random.PCG64([seed or 0, i, k]))
            captured = 1 in greedy_likelihood_strip(t, size, rng)
        out.append(TrialRecord(i, seed, cfg.n, int(height), k, bool(captured), size))
    return out


def _summarise(cfg: ExperimentConfig, records: list[TrialRecord]) -> list[SummaryStats]:
    by_k: dict[int, list[TrialRecord]] = {k: [] for k in cfg.k_values}
    for rec in records:
        by_k[rec.k].append(rec)
    mn = m_n(cfg.n)
    heights = Counter()
    seen = set()
    for rec in records:
        if rec.trial not in seen:
            seen.add(rec.trial)
            heights[rec.height - mn] += 1
    out = []
    for k, recs in by_k.items():
        sizes = np.array([r.set_size for r in recs], dtype=np.int64)
        caught = np.array([r.captured for r in recs], dtype=bool)
        fails = int(np.count_nonzero(~caught))
        cap = cfg.size_cap if cfg.size_cap is not None else 2 ** (4 * k - 1)
        out.append(SummaryStats(
            k=k,
            rounds=strip_rounds(cfg.n, k),
            trials=len(recs),
            failures=fails,
            error_rate=fails / len(recs),
            error_ci=wilson_interval(fails, len(recs)),
            size_cap=cap,
            joint_rate=float(np.mean(caught & (sizes <= cap))),
            mean_size=float(sizes.mean()),
            size_std=float(sizes.std(ddof=1)) if len(sizes) > 1 else 0.0,
            size_quantiles={
                "50": nearest_rank(sizes, 0.5),
                "90": nearest_rank(sizes, 0.9),
                "99": nearest_rank(sizes, 0.99),
                "max": int(sizes.max()),
            },
            frac_at_least_2_pow_4k=float(np.mean(sizes >= 2 ** (4 * k))),
            height_histogram=dict(sorted(heights.items())),
        ))
    return out


def _confidence_records_all(cfg: ExperimentConfig, threads: int | None) -> list[TrialRecord]:
    if cfg.exhaustive:
        return [rec for i, t in enumerate(enumerate_increasing_trees(cfg.n))
                for rec in _confidence_records(cfg, t, i, None)]
    return _map_trials(lambda i: _confidence_trial(cfg, i), cfg.trials, threads)


def run_detection(cfg: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    """Estimate ``P{1 not in R_k}`` and the joint capture-and-small event for each ``k``.

    The joint event is ``1 in R_k and |R_k| <= size_cap`` with ``size_cap``
    defaulting to ``2**(4k - 1)``. The same trees serve every ``k``.
    """
    records = _confidence_records_all(cfg, threads)
    return ExperimentResult(cfg, records, _summarise(cfg, records))


def run_size(cfg: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    """Quantiles of ``|R_k|`` per ``k``; also the fraction with ``|R_k| >= 2**(4k)``."""
    return run_detection(cfg, threads)


def _height_trial(cfg: ExperimentConfig, i: int) -> list[TrialRecord]:
    seed = derive_seed(cfg.master_seed, i)
    t = generate_rrt(cfg.n, seed)
    d = _kernels.depths(t.parent, t.order)
    return [TrialRecord(i, seed, cfg.n, int(d.max()))]


def run_height(cfg: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    records = _map_trials(lambda i: _height_trial(cfg, i), cfg.trials, threads)
    mn = m_n(cfg.n)
    hts = np.array([r.height for r in records], dtype=np.int64)
    off = hts - mn
    top = int(np.abs(off).max())
    summary = HeightSummary(
        n=cfg.n,
        m_n=mn,
        trials=len(records),
        mean_height=float(hts.mean()),
        mean_offset=float(off.mean()),
        histogram={int(o): int(c) for o, c in zip(*np.unique(off, return_counts=True))},
        tail={k: float(np.mean(np.abs(off) >= k)) for k in range(top + 2)},
    )
    return ExperimentResult(cfg, records, height=summary)


def _lower_size_trial(cfg: ExperimentConfig, i: int) -> list[TrialRecord]:
    seed = derive_seed(cfg.master_seed, i)
    t = generate_rrt(cfg.n, seed)
    return [_lower_size_record(t, i, seed)]


def _lower_size_record(t: IncreasingTree, i: int, seed: int | None) -> TrialRecord:
    size = _kernels.subtree_sizes(t.parent, t.order)
    d = _kernels.depths(t.parent, t.order)
    return TrialRecord(i, seed, t.n, int(d.max()), set_size=int(size[2]))


def uniformity_test(values: np.ndarray, n: int, min_expected: float = 20.0) -> UniformityReport:
    """Chi-square test of ``values`` against the uniform law on ``{1, ..., n-1}``."""
    m = n - 1
    samples = len(values)
    counts = np.bincount(values, minlength=n)[1:n]
    # narrowest width whose bins all expect >= min_expected; array_split widths are w or w + 1
    width = max(1, math.ceil(min_expected * m / samples)) if samples else m
    nbins = max(1, m // width)
    groups = np.array_split(np.arange(1, n), nbins)
    observed = [int(counts[g - 1].sum()) for g in groups]
    expected = [samples * len(g) / m for g in groups]
    if nbins < 2:
        stat, p = 0.0, 1.0
    else:
        stat, p = stats.chisquare(observed, expected)
    return UniformityReport(n, samples, [(int(g[0]), int(g[-1])) for g in groups],
                            observed, expected, float(stat), nbins - 1, float(p))


def run_uniformity(cfg: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    """Chi-square test of the size of vertex 2's subtree against ``Unif{1..n-1}``.

    CSV rows carry that subtree size in the ``set_size`` column.
    """
    if cfg.n < 2:
        raise ValueError("uniformity needs n >= 2")
    if cfg.exhaustive:
        records = [_lower_size_record(t, i, None) for i, t in enumerate(enumerate_increasing_trees(cfg.n))]
    else:
        records = _map_trials(lambda i: _lower_size_trial(cfg, i), cfg.trials, threads)
    values = np.array([r.set_size for r in records], dtype=np.int64)
    return ExperimentResult(cfg, records, uniformity=uniformity_test(values, cfg.n))


def tradeoff_table(summaries: list[SummaryStats], records: list[TrialRecord],
                   epsilons: Sequence[float]) -> list[TradeoffRow]:
    """For each ``eps``: the least swept ``k`` with error ``<= eps`` and the ``eps``-quantile of ``|R_k|`` there."""
    by_k: dict[int, list[int]] = {}
    for rec in records:
        by_k.setdefault(rec.k, []).append(rec.set_size)
    ordered = sorted(summaries, key=lambda s: s.k)
    rows = []
    for eps in epsilons:
        floor = math.log(1 / (4 * eps)) if eps < 0.25 else 0.0
        below = [s.error_rate for s in ordered if s.k < floor]
        hit = next((s for s in ordered if s.error_rate <= eps), None)
        rows.append(TradeoffRow(
            epsilon=eps,
            k=hit.k if hit else None,
            error=hit.error_rate if hit else None,
            size_quantile=nearest_rank(by_k[hit.k], eps) if hit else None,
            k_floor=floor,
            below_floor_max_error=max(below) if below else None,
        ))
    return rows


def run_tradeoff(cfg: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    res = run_detection(cfg, threads)
    grid = cfg.epsilon_grid or (0.2, 0.1, 0.05, 0.02)
    res.tradeoff = tradeoff_table(res.summaries, res.records, grid)
    return res


def _flip_failures(report, **where) -> list[dict]:
    return [dict(where, property=name, witness=c.witness, detail=c.detail)
            for name, c in report.failures().items()]


def run_lemma_verify(cfg: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    """Check the zone-flip properties exhaustively (all trees, ``n <= n_max``) or on sampled trees.

    Exhaustive mode also checks, for every height threshold ``h`` in
    ``0..n-1`` (or the configured one), that flipping is a bijection, that
    (embedding, tall set) has the same law before and after flipping, and
    that at least half of the trees with a nonempty tall set have a deep
    member. Sampled mode uses the threshold ``m_n - k``.
    """
    ks = cfg.k_values or (1,)
    if cfg.exhaustive:
        report = LemmaReport("exhaustive")
        records: list[TrialRecord] = []
        for n in range(1, (cfg.n_max or cfg.n) + 1):
            thresholds = [cfg.height_threshold] if cfg.height_threshold is not None else range(n)
            for k in ks:
                for h in thresholds:
                    fc = exact_flip_counts(n, k, h)
                    report.counts.append(asdict(fc) | {"fraction": fc.fraction})
                    if not fc.bijective:
                        report.failures.append(dict(n=n, k=k, threshold=h, property="bijection"))
                    if not fc.joint_law_equal:
                        report.failures.append(dict(n=n, k=k, threshold=h, property="joint-law"))
                    if fc.nonempty and 2 * fc.deep < fc.nonempty:
                        report.failures.append(dict(n=n, k=k, threshold=h, property="half-deep",
                                                    detail=f"{fc.deep}/{fc.nonempty}"))
                    for t in enumerate_increasing_trees(n):
                        rep = verify_flip_properties(t, k, h)
                        report.trees_checked += 1
                        report.failures += _flip_failures(rep, n=n, k=k, threshold=h,
                                                          parents=list(t.parents()))
        return ExperimentResult(cfg, records, lemma=report)

    def trial(i: int) -> list[TrialRecord]:
        seed = derive_seed(cfg.master_seed, i)
        t = generate_rrt(cfg.n, seed)
        recs = _confidence_records(replace(cfg, k_values=ks), t, i, seed)
        out = []
        for rec, k in zip(recs, ks):
            rep = verify_flip_properties(t, k)
            fails = _flip_failures(rep, trial=i, seed=seed, k=k)
            out.append(TrialRecord(rec.trial, rec.seed, rec.n, rec.height, k, rec.captured,
                                   rec.set_size, {"failures": fails}))
        return out

    records = _map_trials(trial, cfg.trials, threads)
    report = LemmaReport("sampled", trees_checked=len(records))
    for rec in records:
        report.failures += rec.aux["failures"]
    return ExperimentResult(cfg, records, lemma=report)


RUNNERS = {
    "detection": run_detection,
    "size": run_size,
    "height": run_height,
    "uniformity": run_uniformity,
    "tradeoff": run_tradeoff,
    "lemma-verify": run_lemma_verify,
}


def run(cfg: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    return RUNNERS[cfg.experiment](cfg, threads)


def exact_rates(n: int, k: int) -> tuple[float, float, float]:
    """Exact ``P{1 not in R_k}``, ``E|R_k|`` and ``Var|R_k|`` over all increasing trees on ``[n]``.

    Runs the frontier-peeling ``leaf_strip`` on every tree, independently of
    the survival-round kernel the samplers use.
    """
    misses = []
    sizes = []
    for t in enumerate_increasing_trees(n):
        r = leaf_strip(t, strip_rounds(n, k))
        misses.append(1 not in r)
        sizes.append(len(r))
    sz = np.array(sizes, dtype=float)
    return float(np.mean(misses)), float(sz.mean()), float(sz.var())
