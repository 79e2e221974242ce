"""Experiment orchestration: suites -> policies -> sampling -> report files.

A report row is one (instance, policy) pair. Compressed matrices are
always evaluated under the ORIGINAL matrix: the whole point of
optimum-preserving compression is that a sample drawn from the compressed
problem scores exactly on the problem you actually wanted to solve.

Instances are independent work units; with jobs > 1 they are distributed
over a process pool. All randomness derives from per-instance seeds, so
reports are byte-identical for any worker count.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import ConfigError, QuboMatrix, solve_exhaustive, DEFAULT_ENUM_CAP
from .metrics import EntryValues, coeff_ratio, max_coeff_ratio, ratio_log2
from .preserve import INCLUSION, WITNESS, ExactIntervalProvider
from .problems import FAMILIES, make_instance, suite
from .sampling import simulated_annealing
from .search import (
    ALL,
    IMPACT,
    ReductionTrace,
    SearchReport,
    branch_and_bound,
    greedy_reduce,
    randomized_reduce,
    rollout_reduce,
    value_merge_reduce,
)
from . import serialize

CSV_COLUMNS = [
    "family",
    "n",
    "seed",
    "policy",
    "horizon",
    "dr_initial",
    "dr_final",
    "rel_reduction",
    "cmax_initial",
    "cmax_final",
    "pruned_fraction",
    "median_rel_energy",
    "n_opt",
]

POLICY_KINDS = ("none", "greedy", "randomized", "rollout", "bnb", "merge")


def default_horizon(n: int) -> int:
    """Logarithmic default budget: ceil(2 * log2(n))."""
    return max(1, math.ceil(2 * math.log2(max(n, 2))))


@dataclass(frozen=True)
class PolicySpec:
    """One configured compression policy (a report row per instance).

    ``preserve`` selects the interval semantics: "inclusion" keeps every
    optimizer of the original problem optimal, "witness" keeps one
    designated optimizer (the lexicographically first) optimal. Witness
    intervals are wider, so compression makes progress even on instances
    whose symmetric co-optima freeze the inclusion intervals.
    """

    name: str
    kind: str
    mode: str = ALL
    horizon: int | None = None
    top_k: int | None = None
    tail_depth: int | None = None
    tail: int = 1
    update_depth: int = 1
    prune: bool = True
    preserve: str = INCLUSION

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ConfigError(f"unknown policy kind {self.kind!r}")
        if self.mode not in (ALL, IMPACT):
            raise ConfigError(f"unknown index mode {self.mode!r}")
        if self.preserve not in (INCLUSION, WITNESS):
            raise ConfigError(f"unknown preserve mode {self.preserve!r}")
        if self.preserve == WITNESS and self.kind in ("none", "merge"):
            raise ConfigError(f"{self.kind!r} does not take a preserve mode")
        if self.horizon is not None and self.horizon < 0:
            raise ConfigError("horizon must be nonnegative")
        if self.top_k is not None and self.top_k < 1:
            raise ConfigError("top_k must be positive")
        if self.tail_depth is not None and self.tail_depth < 0:
            raise ConfigError("rollout depth must be nonnegative")
        if self.tail < 0:
            raise ConfigError("tail must be nonnegative")
        if self.update_depth < 1:
            raise ConfigError("update_depth must be positive")
        if (
            self.kind == "bnb"
            and self.horizon is not None
            and self.tail > self.horizon
        ):
            raise ConfigError("tail must not exceed the horizon")

    @classmethod
    def from_obj(cls, obj: dict) -> "PolicySpec":
        if not isinstance(obj, dict):
            raise ConfigError("policy spec must be an object")
        known = {
            "name",
            "kind",
            "mode",
            "horizon",
            "top_k",
            "tail_depth",
            "tail",
            "update_depth",
            "prune",
            "preserve",
        }
        extra = set(obj) - known
        if extra:
            raise ConfigError(f"unknown policy keys: {sorted(extra)}")
        if "kind" not in obj:
            raise ConfigError("policy spec needs a 'kind'")
        kwargs = dict(obj)
        kwargs.setdefault("name", kwargs["kind"])
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def run_policy(
    Q: QuboMatrix,
    spec: PolicySpec,
    rng_key: list[int] | None = None,
    enum_cap: int = DEFAULT_ENUM_CAP,
) -> tuple[ReductionTrace, SearchReport | None]:
    """Execute one policy; returns its trace plus search counters for bnb."""
    horizon = spec.horizon if spec.horizon is not None else default_horizon(Q.n)
    if spec.kind == "none" or horizon == 0:
        ev = EntryValues.from_matrix(Q)
        ratio = Fraction(1) if ev.degenerate else ev.dr_ratio()
        return ReductionTrace(ratio_log2(ratio), ratio, [], Q, ratio), None
    provider = witness = None
    if spec.preserve == WITNESS:
        witness = solve_exhaustive(Q, cap=enum_cap).sorted_optimizers()[0]
        provider = ExactIntervalProvider(cap=enum_cap, mode=WITNESS)
    if spec.kind == "greedy":
        return greedy_reduce(Q, horizon, spec.mode, provider, witness=witness), None
    if spec.kind == "randomized":
        rng = np.random.default_rng(rng_key if rng_key is not None else 0)
        return (
            randomized_reduce(
                Q, horizon, rng, spec.top_k or 4, spec.mode, provider, witness=witness
            ),
            None,
        )
    if spec.kind == "rollout":
        return (
            rollout_reduce(
                Q,
                horizon,
                spec.mode,
                provider,
                top_k=spec.top_k,
                tail_depth=spec.tail_depth,
                witness=witness,
            ),
            None,
        )
    if spec.kind == "bnb":
        tail = min(spec.tail, horizon)
        report = branch_and_bound(
            Q,
            horizon,
            tail=tail,
            mode=spec.mode,
            update_depth=spec.update_depth,
            prune=spec.prune,
            provider=provider,
            witness=witness,
        )
        return report.trace, report
    if spec.kind == "merge":
        return value_merge_reduce(Q, horizon), None
    raise ConfigError(f"unknown policy kind {spec.kind!r}")


@dataclass
class ExperimentConfig:
    families: list[str]
    sizes: list[int]
    count: int
    base_seed: int
    policies: list[PolicySpec]
    sa: dict | None = None
    jobs: int = 1
    enum_cap: int = DEFAULT_ENUM_CAP

    def __post_init__(self):
        for fam in self.families:
            if fam not in FAMILIES:
                raise ConfigError(f"unknown family {fam!r}")
        for n in self.sizes:
            if not isinstance(n, int) or n < 1:
                raise ConfigError("sizes must be positive integers")
        if self.count < 0:
            raise ConfigError("count must be nonnegative")
        if not self.policies:
            raise ConfigError("at least one policy is required")
        names = [p.name for p in self.policies]
        if len(set(names)) != len(names):
            raise ConfigError("policy names must be unique")
        if self.jobs < 1:
            raise ConfigError("jobs must be positive")
        if self.sa is not None:
            extra = set(self.sa) - {"samples", "sweeps", "beta_range", "precision_bits"}
            if extra:
                raise ConfigError(f"unknown sa keys: {sorted(extra)}")
            if self.sa.get("samples", 0) < 1 or self.sa.get("sweeps", 0) < 1:
                raise ConfigError("sa needs positive 'samples' and 'sweeps'")
            if self.sa.get("precision_bits") is not None and self.sa["precision_bits"] < 1:
                raise ConfigError("sa precision_bits must be positive")
            for n in self.sizes:
                if n > self.enum_cap:
                    raise ConfigError(
                        "sampling rows need the exact optimum; size "
                        f"{n} exceeds the enumeration cap {self.enum_cap}"
                    )

    @classmethod
    def from_obj(cls, obj: dict) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        known = {
            "families",
            "sizes",
            "count",
            "base_seed",
            "policies",
            "sa",
            "jobs",
            "enum_cap",
        }
        extra = set(obj) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        for key in ("families", "sizes", "count", "policies"):
            if key not in obj:
                raise ConfigError(f"config needs {key!r}")
        kwargs = dict(obj)
        kwargs.setdefault("base_seed", 0)
        kwargs["policies"] = [PolicySpec.from_obj(p) for p in obj["policies"]]
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


@dataclass
class ExperimentReport:
    rows: list[dict]
    traces: dict[str, dict]
    timings: list[dict] = field(default_factory=list)

    def csv_text(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow([_cell(row[c]) for c in CSV_COLUMNS])
        return out.getvalue()

    def json_text(self) -> str:
        rows = []
        for row in self.rows:
            obj = {c: _jsonable(row[c]) for c in CSV_COLUMNS}
            obj["trace"] = self.traces[_row_id(row)]
            rows.append(obj)
        return serialize.canonical_json({"rows": rows}) + "\n"

    def timings_csv_text(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["family", "n", "seed", "policy", "wall_time_s"])
        for t in self.timings:
            writer.writerow(
                [t["family"], t["n"], t["seed"], t["policy"], repr(t["wall_time_s"])]
            )
        return out.getvalue()


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _row_id(row: dict) -> str:
    return f"{row['family']}/{row['n']}/{row['seed']}/{row['policy']}"


def _check_cmax_invariant(Q: QuboMatrix) -> None:
    # exact: max|v| / min nonzero |v| <= maxD / minD, hence C_max <= 2^DR
    ev = EntryValues.from_matrix(Q)
    if ev.degenerate:
        return
    try:
        c = coeff_ratio(Q)
    except Exception:
        return
    if c > ev.dr_ratio():
        raise AssertionError("coefficient ratio exceeded 2^DR")


def _safe_cmax(Q: QuboMatrix) -> float:
    try:
        return max_coeff_ratio(Q)
    except Exception:
        return math.nan


def _instance_rows(args) -> tuple[tuple, list[dict], dict[str, dict], list[dict]]:
    (key, family, n, seed, specs, sa, enum_cap, bench) = args
    inst = make_instance(family, n, seed)
    Q = inst.matrix
    _check_cmax_invariant(Q)
    ev0 = EntryValues.from_matrix(Q)
    dr_initial = 0.0 if ev0.degenerate else ratio_log2(ev0.dr_ratio())
    cmax_initial = _safe_cmax(Q)
    optimum = None
    if sa is not None:
        optimum = solve_exhaustive(Q, cap=enum_cap).optimum_energy
    rows: list[dict] = []
    traces: dict[str, dict] = {}
    timings: list[dict] = []
    for p_idx, spec in enumerate(specs):
        started = time.perf_counter()
        trace, report = run_policy(Q, spec, rng_key=[seed, p_idx], enum_cap=enum_cap)
        elapsed = time.perf_counter() - started
        final = trace.final
        _check_cmax_invariant(final)
        horizon = spec.horizon if spec.horizon is not None else default_horizon(n)
        dr_final = trace.final_dr
        rel = (dr_initial - dr_final) / dr_initial if dr_initial > 0 else 0.0
        med = nopt = None
        if sa is not None:
            samples = simulated_annealing(
                final,
                sa["samples"],
                sa["sweeps"],
                beta_range=sa.get("beta_range"),
                seed=[seed, p_idx, 1],
                score_matrix=Q,
                precision_bits=sa.get("precision_bits"),
            )
            med = samples.median_relative_energy(optimum)
            nopt = samples.n_optimal(optimum)
        row = {
            "family": family,
            "n": n,
            "seed": seed,
            "policy": spec.name,
            "horizon": horizon,
            "dr_initial": dr_initial,
            "dr_final": dr_final,
            "rel_reduction": rel,
            "cmax_initial": cmax_initial,
            "cmax_final": _safe_cmax(final),
            "pruned_fraction": report.pruned_fraction if report else None,
            "median_rel_energy": med,
            "n_opt": nopt,
        }
        rows.append(row)
        traces[_row_id(row)] = serialize.trace_to_obj(Q, trace.steps, spec.preserve)
        if bench:
            timings.append(
                {
                    "family": family,
                    "n": n,
                    "seed": seed,
                    "policy": spec.name,
                    "wall_time_s": elapsed,
                }
            )
    return key, rows, traces, timings


def run_experiment(config: ExperimentConfig, bench: bool = False) -> ExperimentReport:
    """Run every (family, size, instance, policy) cell of the config.

    Rows come out in config order regardless of how many worker processes
    computed them; reruns with identical seeds give identical bytes.
    """
    units = []
    for f_idx, family in enumerate(config.families):
        for s_idx, n in enumerate(config.sizes):
            instances = suite(family, n, config.count, config.base_seed)
            for i_idx, inst in enumerate(instances):
                units.append(
                    (
                        (f_idx, s_idx, i_idx),
                        family,
                        n,
                        inst.seed,
                        config.policies,
                        config.sa,
                        config.enum_cap,
                        bench,
                    )
                )
    results: dict[tuple, tuple] = {}
    if config.jobs > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            for key, rows, traces, timings in pool.map(
                _instance_rows, units, chunksize=1
            ):
                results[key] = (rows, traces, timings)
    else:
        for unit in units:
            key, rows, traces, timings = _instance_rows(unit)
            results[key] = (rows, traces, timings)
    all_rows: list[dict] = []
    all_traces: dict[str, dict] = {}
    all_timings: list[dict] = []
    for key in sorted(results):
        rows, traces, timings = results[key]
        all_rows.extend(rows)
        all_traces.update(traces)
        all_timings.extend(timings)
    return ExperimentReport(all_rows, all_traces, all_timings)


def write_report(report: ExperimentReport, out_dir, stem: str = "report") -> list:
    """Write CSV + JSON (and timings when present); returns written paths."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    csv_path = out / f"{stem}.csv"
    csv_path.write_text(report.csv_text())
    paths.append(csv_path)
    json_path = out / f"{stem}.json"
    json_path.write_text(report.json_text())
    paths.append(json_path)
    if report.timings:
        t_path = out / f"{stem}_timings.csv"
        t_path.write_text(report.timings_csv_text())
        paths.append(t_path)
    return paths
