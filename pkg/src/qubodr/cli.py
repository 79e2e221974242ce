"""Command line interface.

Subcommands: generate, compress, verify, solve, evaluate, bench. Every
command is a thin shell over the library; identical parameters give
identical library results. All randomness flows from --seed flags.

Exit codes: 0 success, 1 verification failure, 2 usage or config error,
3 enumeration cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import (
    CapExceededError,
    ConfigError,
    QuboError,
    apply_update,
    energy,
    optimum_included,
    solve_exhaustive,
    DEFAULT_ENUM_CAP,
)
from .metrics import EntryValues, ratio_log2
from .problems import FAMILIES, suite
from .reports import (
    ExperimentConfig,
    PolicySpec,
    default_horizon,
    run_experiment,
    run_policy,
    write_report,
)
from .sampling import simulated_annealing
from . import serialize

OK = 0
VERIFY_FAILED = 1
USAGE_ERROR = 2
CAP_EXCEEDED = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qubodr",
        description="Dynamic-range compression toolkit for QUBO matrices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write benchmark instance files")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--size", type=int, required=True, help="number of variables")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("compress", help="reduce the dynamic range of an instance")
    p.add_argument("instance", help="instance JSON or matrix text file")
    p.add_argument(
        "--policy",
        default="greedy",
        choices=["greedy", "randomized", "rollout", "bnb", "merge"],
    )
    p.add_argument("--horizon", type=int, default=None, help="update budget T")
    p.add_argument(
        "--rollout-depth",
        type=int,
        default=None,
        help="rollout tail length: truncation depth for rollout, "
        "completion length for bnb",
    )
    p.add_argument("--index-mode", default="all", choices=["all", "impact"])
    p.add_argument(
        "--preserve",
        default="inclusion",
        choices=["inclusion", "witness"],
        help="keep every optimizer optimal, or only the first one",
    )
    p.add_argument("--update-depth", type=int, default=1)
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--out", default=None, help="trace file to write")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("verify", help="replay a trace and check the optimum")
    p.add_argument("instance")
    p.add_argument("trace")
    p.add_argument("--cap", type=int, default=DEFAULT_ENUM_CAP)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("solve", help="solve an instance exactly or by annealing")
    p.add_argument("instance")
    p.add_argument("--method", default="exhaustive", choices=["exhaustive", "sa"])
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--sweeps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=DEFAULT_ENUM_CAP)
    p.set_defaults(func=cmd_solve)

    for name, help_text in (
        ("evaluate", "run an experiment config and write reports"),
        ("bench", "run an experiment config with wall-time measurement"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="experiment config JSON file")
        p.add_argument("--out-dir", required=True)
        p.add_argument("--jobs", type=int, default=None)
        p.add_argument("--no-figures", action="store_true")
        p.set_defaults(func=cmd_evaluate, bench=(name == "bench"))

    return parser


def cmd_generate(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    instances = suite(args.family, args.size, args.count, args.seed)
    for idx, inst in enumerate(instances):
        path = out / f"{args.family}_n{args.size}_{idx:03d}.json"
        serialize.write_instance(path, inst)
    print(f"wrote {len(instances)} instances to {out}")
    return OK


def _policy_spec_from_args(args) -> PolicySpec:
    kwargs = {
        "name": args.policy,
        "kind": args.policy,
        "mode": args.index_mode,
        "horizon": args.horizon,
        "top_k": args.top_k,
        "update_depth": args.update_depth,
        "prune": not args.no_prune,
    }
    if args.policy != "merge":
        kwargs["preserve"] = args.preserve
    elif args.preserve != "inclusion":
        raise ConfigError("--preserve does not apply to 'merge'")
    if args.policy == "rollout":
        kwargs["tail_depth"] = args.rollout_depth
    elif args.policy == "bnb":
        kwargs["tail"] = 1 if args.rollout_depth is None else args.rollout_depth
    elif args.rollout_depth is not None:
        raise ConfigError(f"--rollout-depth does not apply to {args.policy!r}")
    return PolicySpec(**kwargs)


def cmd_compress(args) -> int:
    inst = serialize.read_instance(args.instance)
    spec = _policy_spec_from_args(args)
    trace, report = run_policy(inst.matrix, spec, rng_key=[args.seed])
    if args.out:
        serialize.write_trace(args.out, inst.matrix, trace.steps, spec.preserve)
    pruned = report.pruned_fraction if report else 0.0
    print(f"{trace.initial_dr!r} {trace.final_dr!r} {pruned!r}")
    return OK


def cmd_verify(args) -> int:
    inst = serialize.read_instance(args.instance)
    initial_ref, steps, preserve = serialize.read_trace(args.trace)
    Q = inst.matrix
    if "n" in initial_ref and initial_ref["n"] != Q.n:
        print(f"dimension mismatch: trace expects n={initial_ref['n']}, got {Q.n}")
        return VERIFY_FAILED
    if "sha256" in initial_ref:
        digest = serialize.matrix_sha256(Q)
        if digest != initial_ref["sha256"]:
            print("instance does not match the trace's initial matrix fingerprint")
            return VERIFY_FAILED
    cur = Q
    for idx, (k, l, w, dr) in enumerate(steps):
        try:
            cur = apply_update(cur, (k, l), w)
        except (ValueError, QuboError) as exc:
            print(f"step {idx}: replay failed: {exc}")
            return VERIFY_FAILED
        ev = EntryValues.from_matrix(cur)
        got = 0.0 if ev.degenerate else ratio_log2(ev.dr_ratio())
        if got != dr:
            print(f"step {idx}: recorded DR {dr!r} but replay gives {got!r}")
            return VERIFY_FAILED
    if preserve == "witness":
        wit = solve_exhaustive(Q, cap=args.cap).sorted_optimizers()[0]
        final = solve_exhaustive(cur, cap=args.cap)
        if energy(cur, wit) != final.optimum_energy:
            print("designated optimizer of the input is no longer optimal")
            return VERIFY_FAILED
    elif not optimum_included(Q, cur, cap=args.cap):
        print("optimum not preserved: some optimizer of the input is lost")
        return VERIFY_FAILED
    print("ok")
    return OK


def cmd_solve(args) -> int:
    inst = serialize.read_instance(args.instance)
    Q = inst.matrix
    if args.method == "exhaustive":
        result = solve_exhaustive(Q, cap=args.cap)
        best = result.sorted_optimizers()[0]
        bits = "".join(str(b) for b in best)
        print(
            f"{serialize.value_token(result.optimum_energy)} {bits} "
            f"optimizers={len(result.optimizers)}"
        )
        return OK
    samples = simulated_annealing(
        Q, args.samples, args.sweeps, seed=args.seed
    )
    best_idx = min(range(len(samples)), key=lambda i: samples.energies[i])
    best_e = samples.energies[best_idx]
    bits = "".join(str(int(b)) for b in samples.assignments[best_idx])
    hits = samples.n_optimal(best_e)
    print(f"{serialize.value_token(best_e)} {bits} best_count={hits}")
    return OK


def cmd_evaluate(args) -> int:
    with open(args.config) as fh:
        obj = json.load(fh)
    config = ExperimentConfig.from_obj(obj)
    if args.jobs is not None:
        if args.jobs < 1:
            raise ConfigError("--jobs must be positive")
        config.jobs = args.jobs
    report = run_experiment(config, bench=args.bench)
    paths = write_report(report, args.out_dir)
    if not args.no_figures:
        from .figures import render_report_figures

        paths.extend(render_report_figures(report.rows, args.out_dir))
    for path in paths:
        print(path)
    return OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CAP_EXCEEDED
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
