"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 runtime or verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import montecarlo as mc
from .rootfind import confidence_set_Rk, leaf_strip
from .treegen import as_increasing_tree, format_edge_list, generate_rrt, read_edge_list
from .ulam import flip_tree, format_embedding

EXIT_USAGE = 1
EXIT_FAILURE = 2

KINDS = {
    "detection": "detection",
    "size": "size",
    "height": "height",
    "uniformity": "uniformity",
    "tradeoff": "tradeoff",
    "verify": "lemma-verify",
    "lemma-verify": "lemma-verify",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_k_values(text: str) -> tuple[int, ...]:
    """``"3"``, ``"2:12"`` (inclusive) or ``"1,3,5"``."""
    try:
        if ":" in text:
            a, b = text.split(":")
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError
            return tuple(range(lo, hi + 1))
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid k value or range {text!r}") from None


def parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number list {text!r}") from None


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _seed(text: str) -> int:
    v = _nonneg(text)
    if v >= 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="leafstrip", description="Leaf-stripping root confidence sets for random recursive trees.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="sample a random recursive tree as an edge list")
    g.add_argument("--n", type=_positive, required=True, help="number of vertices")
    g.add_argument("--seed", type=_seed, default=0, help="64-bit seed")
    g.add_argument("--out", help="output path (default: stdout)")

    s = sub.add_parser("strip", help="leaf-strip an edge-list tree and print the survivors")
    s.add_argument("path", help="edge-list file")
    grp = s.add_mutually_exclusive_group(required=True)
    grp.add_argument("--k", type=_nonneg, help="strip m_n - k rounds")
    grp.add_argument("--rounds", type=_nonneg, help="strip exactly this many rounds")

    e = sub.add_parser("embed", help="print the Ulam-Harris embedding of an increasing tree")
    e.add_argument("path", help="edge-list file, parent first in each line")
    e.add_argument("--out", help="output path (default: stdout)")

    f = sub.add_parser("flip", help="apply the zone-flipping involution to an increasing tree")
    f.add_argument("path", help="edge-list file, parent first in each line")
    grp = f.add_mutually_exclusive_group(required=True)
    grp.add_argument("--k", type=_positive, help="flip the first 4k zones")
    grp.add_argument("--j", type=int, help="flip the first j zones (j >= 2)")
    f.add_argument("--out", help="output path (default: stdout)")

    x = sub.add_parser("experiment", help="run a Monte Carlo experiment")
    x.add_argument("--config", help="key = value file mirroring these flags; flags win")
    x.add_argument("--kind", choices=sorted(KINDS))
    x.add_argument("--n", type=_positive)
    x.add_argument("--k", type=parse_k_values, help="k, a:b (inclusive) or a,b,c")
    x.add_argument("--trials", type=_positive)
    x.add_argument("--seed", type=_seed)
    x.add_argument("--algorithm", choices=["leafstrip", "jordan", "greedy"])
    x.add_argument("--epsilon-grid", type=parse_floats, help="comma-separated epsilons for tradeoff")
    x.add_argument("--exhaustive", action="store_true", default=None, help="enumerate all trees instead of sampling")
    x.add_argument("--n-max", type=_positive, help="largest n for exhaustive verification")
    x.add_argument("--threads", type=_positive, help="worker threads (default: all cores)")
    x.add_argument("--out", help="output prefix; writes PREFIX.csv and PREFIX.json")

    v = sub.add_parser("verify", help="check the zone-flip properties (shorthand for experiment --kind verify)")
    v.add_argument("--n-max", type=_positive, help="check every tree with n <= n-max")
    v.add_argument("--exhaustive", action="store_true", default=None)
    v.add_argument("--n", type=_positive, help="tree size in sampled mode")
    v.add_argument("--k", type=parse_k_values)
    v.add_argument("--trials", type=_positive)
    v.add_argument("--seed", type=_seed)
    v.add_argument("--threads", type=_positive)
    v.add_argument("--out", help="output prefix; writes PREFIX.csv and PREFIX.json")
    return p


def _emit(text: str, out: str | None) -> None:
    if out:
        mc.atomic_write(out, text)
    else:
        sys.stdout.write(text)


def read_config_file(path: str) -> dict[str, str]:
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (part.strip() for part in line.split("=", 1))
            values[key.replace("-", "_")] = val
    return values


_CONFIG_TYPES = {
    "kind": str, "n": _positive, "k": parse_k_values, "trials": _positive, "seed": _seed,
    "algorithm": str, "epsilon_grid": parse_floats, "n_max": _positive, "threads": _positive,
    "out": str, "exhaustive": lambda s: s.lower() in ("1", "true", "yes", "on"),
}


def _merge_config(args: argparse.Namespace) -> None:
    if not getattr(args, "config", None):
        return
    for key, raw in read_config_file(args.config).items():
        if key not in _CONFIG_TYPES:
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, key, None) is None:
            try:
                setattr(args, key, _CONFIG_TYPES[key](raw))
            except argparse.ArgumentTypeError as exc:
                raise UsageError(f"config key {key!r}: {exc}") from None


def _experiment_config(args: argparse.Namespace) -> mc.ExperimentConfig:
    kind = KINDS.get(args.kind or "")
    if kind is None:
        raise UsageError("--kind is required")
    exhaustive = bool(args.exhaustive)
    if kind == "lemma-verify" and exhaustive:
        n_max = args.n_max or args.n
        if n_max is None:
            raise UsageError("exhaustive verification needs --n-max")
        if n_max > 10:
            raise UsageError("exhaustive verification is limited to n-max <= 10")
        return mc.ExperimentConfig(n=n_max, trials=1, master_seed=args.seed or 0, experiment=kind,
                                   k_values=args.k or (1,), exhaustive=True, n_max=n_max)
    if args.n is None:
        raise UsageError("--n is required")
    if args.trials is None and not exhaustive:
        raise UsageError("--trials is required")
    try:
        return mc.ExperimentConfig(
            n=args.n,
            trials=args.trials or 1,
            master_seed=args.seed or 0,
            experiment=kind,
            k_values=args.k or (),
            algorithm=getattr(args, "algorithm", None) or "leafstrip",
            epsilon_grid=getattr(args, "epsilon_grid", None),
            exhaustive=exhaustive,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _summary_lines(res: mc.ExperimentResult) -> list[str]:
    lines = []
    for s in res.summaries:
        lo, hi = s.error_ci
        q = s.size_quantiles
        lines.append(f"k={s.k} rounds={s.rounds} error={s.error_rate:.4f} [{lo:.4f},{hi:.4f}] "
                     f"size50={q['50']} size90={q['90']} size99={q['99']} sizemax={q['max']}")
    if res.tradeoff:
        for row in res.tradeoff:
            lines.append(f"eps={row.epsilon:g} k={row.k} error={row.error} size_quantile={row.size_quantile}")
    if res.height:
        h = res.height
        lines.append(f"n={h.n} m_n={h.m_n} mean_height={h.mean_height:.3f} mean_offset={h.mean_offset:+.3f}")
    if res.uniformity:
        u = res.uniformity
        lines.append(f"chi2={u.statistic:.3f} dof={u.dof} p={u.p_value:.4g}")
    if res.lemma:
        lm = res.lemma
        lines.append(f"lemma-verify {lm.mode}: trees={lm.trees_checked} "
                     f"failures={len(lm.failures)} {'PASS' if lm.passed else 'FAIL'}")
    return lines


def _run_experiment(args: argparse.Namespace) -> int:
    _merge_config(args)
    cfg = _experiment_config(args)
    res = mc.run(cfg, threads=args.threads)
    if args.out:
        prefix = args.out[:-4] if args.out.endswith(".csv") else args.out
        res.write(prefix + ".csv", prefix + ".json")
    for line in _summary_lines(res):
        print(line)
    if not res.ok:
        report = {"status": "verification-failed", "failures": res.lemma.failures}
        sys.stderr.write(json.dumps(report, default=mc._jsonable) + "\n")
        return EXIT_FAILURE
    return 0


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "generate":
        _emit(format_edge_list(generate_rrt(args.n, args.seed)), args.out)
    elif args.command == "strip":
        tree = read_edge_list(args.path)
        res = leaf_strip(tree, args.rounds) if args.rounds is not None else confidence_set_Rk(tree, args.k)
        _emit("".join(f"{v}\n" for v in res.sorted()), None)
    elif args.command == "embed":
        _emit(format_embedding(as_increasing_tree(read_edge_list(args.path))), args.out)
    elif args.command == "flip":
        j = 4 * args.k if args.k is not None else args.j
        if j < 2:
            raise UsageError("--j must be >= 2")
        t = as_increasing_tree(read_edge_list(args.path))
        _emit(format_edge_list(flip_tree(t, j)), args.out)
    elif args.command == "experiment":
        return _run_experiment(args)
    elif args.command == "verify":
        args.kind = "verify"
        return _run_experiment(args)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except UsageError as exc:
        print(f"leafstrip: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"leafstrip: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
