"""Compression policies: greedy, randomized, rollout lookahead, tree search.

The state space is the set of matrices reachable from the input by
optimum-preserving single-entry updates; an action names the entry (k, l)
with k <= l, and the applied update value is chosen by
:func:`qubodr.preserve.select_update` inside the preserving interval.
Every policy below minimizes the final dynamic range over a fixed horizon
of such updates:

* the base policy greedily takes the action with the best one-step DR;
* the randomized variant samples uniformly among the top-k one-step actions;
* rollout selection scores each candidate action by completing it with a
  base-policy tail and picks the best completion (never worse than the
  base policy itself);
* branch-and-bound explores the action tree exactly to a chosen depth,
  completes leaves with base-policy tails, and prunes subtrees whose DR
  lower bound already exceeds the incumbent.

Action candidate sets come in two flavors: "all" enumerates every upper
triangle entry, "impact" keeps at most four entries that can actually
change the value structure (an entry at the minimum value, one at the
maximum, and the two realizing the smallest gap).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .core import (
    Action,
    QuboMatrix,
    apply_update,
)
from .metrics import EntryValues, ratio_log2
from .bounds import dr_lb_ratio_nums
from .preserve import ExactIntervalProvider, select_update_scored

ALL = "all"
IMPACT = "impact"
_MODES = (ALL, IMPACT)

ONE = Fraction(1)


@dataclass(frozen=True)
class StepRecord:
    """One applied update: the entry, the exact value added, the DR after."""

    action: Action
    w: Fraction
    dr_after: float


@dataclass(frozen=True)
class StepChoice:
    """A policy decision with the resulting state; internal ratios are exact."""

    action: Action
    w: Fraction
    matrix: QuboMatrix
    ratio: Fraction

    def record(self) -> StepRecord:
        return StepRecord(self.action, self.w, ratio_log2(self.ratio))


@dataclass
class ReductionTrace:
    """A run of a policy: applied steps plus initial and final state info."""

    initial_dr: float
    initial_ratio: Fraction
    steps: list[StepRecord]
    final: QuboMatrix
    final_ratio: Fraction

    @property
    def final_dr(self) -> float:
        return ratio_log2(self.final_ratio)

    @property
    def cumulative_reward(self) -> float:
        """Sum of per-step DR drops; telescopes to initial minus final DR."""
        total = 0.0
        prev = self.initial_dr
        for s in self.steps:
            total += prev - s.dr_after
            prev = s.dr_after
        return total


@dataclass
class SearchReport:
    """Branch-and-bound outcome with node accounting."""

    trace: ReductionTrace
    nodes_expanded: int
    nodes_pruned: int
    best_dr_curve: list[float] = field(default_factory=list)

    @property
    def pruned_fraction(self) -> float:
        total = self.nodes_expanded + self.nodes_pruned
        return self.nodes_pruned / total if total else 0.0


def _ratio_or_one(ev: EntryValues) -> Fraction:
    return ONE if ev.degenerate else ev.dr_ratio()


def candidate_actions(
    Q: QuboMatrix, mode: str = ALL, values: EntryValues | None = None
) -> list[Action]:
    """Actions considered at a state, ordered lexicographically.

    Mode "all" lists every upper-triangle position. Mode "impact" keeps at
    most four: the lexicographically smallest entries holding the minimum
    value, the maximum value, and the two values realizing the smallest
    gap. A target value held by no stored entry (0 can be purely
    structural) simply contributes no action.
    """
    if mode not in _MODES:
        raise ValueError(f"unknown index mode {mode!r}")
    n = Q.n
    if mode == ALL:
        return [(i, j) for i in range(n) for j in range(i, n)]
    ev = values if values is not None else EntryValues.from_matrix(Q)
    if ev.degenerate:
        return []
    vals = ev.vals
    gaps = [vals[i + 1] - vals[i] for i in range(len(vals) - 1)]
    g = min(range(len(gaps)), key=lambda i: (gaps[i], i))
    targets = {vals[0], vals[-1], vals[g], vals[g + 1]}
    found: dict[int, Action] = {}
    nums = Q.nums
    for i in range(n):
        for j in range(i, n):
            v = int(nums[i, j])
            if v in targets and v not in found:
                found[v] = (i, j)
                if len(found) == len(targets):
                    return sorted(set(found.values()))
    return sorted(set(found.values()))


_default_provider = ExactIntervalProvider()


def _score_actions(
    Q: QuboMatrix,
    ev: EntryValues,
    mode: str,
    provider,
    witness,
) -> list[tuple[Fraction, Action, Fraction]]:
    """(resulting ratio, action, w) for each candidate action, best first."""
    acts = candidate_actions(Q, mode, ev)
    if not acts:
        return []
    ivs = provider.intervals(Q, acts, witness)
    scored = []
    for a in acts:
        w, ratio = select_update_scored(Q, a, ivs[a], ev)
        scored.append((ratio, a, w))
    scored.sort(key=lambda t: (t[0], t[1]))
    return scored


def base_policy_step(
    Q: QuboMatrix,
    mode: str = ALL,
    provider=None,
    values: EntryValues | None = None,
    witness: Sequence[int] | None = None,
) -> StepChoice | None:
    """Greedy one-step choice; None when no action strictly improves the DR."""
    provider = provider or _default_provider
    ev = values if values is not None else EntryValues.from_matrix(Q)
    if ev.degenerate:
        return None
    scored = _score_actions(Q, ev, mode, provider, witness)
    if not scored:
        return None
    ratio, a, w = scored[0]
    if ratio >= ev.dr_ratio():
        return None
    return StepChoice(a, w, apply_update(Q, a, w), ratio)


def randomized_base_step(
    Q: QuboMatrix,
    rng: np.random.Generator,
    top_k: int = 4,
    mode: str = ALL,
    provider=None,
    values: EntryValues | None = None,
    witness: Sequence[int] | None = None,
) -> StepChoice | None:
    """Sample uniformly among the top-k one-step actions.

    Stops (returns None) only when even the best action cannot improve the
    DR; a sampled non-improving action is still applied, so runs are noisy
    but stalls are detected exactly.
    """
    if top_k < 1:
        raise ValueError("top_k must be positive")
    provider = provider or _default_provider
    ev = values if values is not None else EntryValues.from_matrix(Q)
    if ev.degenerate:
        return None
    scored = _score_actions(Q, ev, mode, provider, witness)
    if not scored or scored[0][0] >= ev.dr_ratio():
        return None
    ratio, a, w = scored[int(rng.integers(0, min(top_k, len(scored))))]
    return StepChoice(a, w, apply_update(Q, a, w), ratio)


def _greedy_tail(
    Q: QuboMatrix,
    steps: int,
    mode: str,
    provider,
    witness,
) -> tuple[QuboMatrix, Fraction, list[StepRecord]]:
    """Run the base policy up to ``steps`` times; exact final ratio included."""
    cur = Q
    records: list[StepRecord] = []
    ratio = _ratio_or_one(EntryValues.from_matrix(cur))
    for _ in range(steps):
        choice = base_policy_step(cur, mode, provider, witness=witness)
        if choice is None:
            break
        records.append(choice.record())
        cur = choice.matrix
        ratio = choice.ratio
    return cur, ratio, records


def rollout_selection_step(
    Q: QuboMatrix,
    residual: int,
    mode: str = ALL,
    provider=None,
    top_k: int | None = None,
    tail_depth: int | None = None,
    values: EntryValues | None = None,
    witness: Sequence[int] | None = None,
) -> StepChoice | None:
    """One lookahead step: score candidates by base-policy completion.

    ``residual`` is the number of updates still allowed including this one.
    ``top_k`` restricts the scored candidates to the k best one-step actions
    (the simplified variant); ``tail_depth`` caps the completion length
    (the truncated variant, which forfeits the improvement guarantee).
    """
    if residual < 1:
        return None
    provider = provider or _default_provider
    ev = values if values is not None else EntryValues.from_matrix(Q)
    if ev.degenerate:
        return None
    scored = _score_actions(Q, ev, mode, provider, witness)
    if not scored:
        return None
    if top_k is not None:
        if top_k < 1:
            raise ValueError("top_k must be positive")
        scored = scored[:top_k]
    tail = residual - 1 if tail_depth is None else min(tail_depth, residual - 1)
    best = None
    for one_step_ratio, a, w in scored:
        child = apply_update(Q, a, w)
        _, final_ratio, _ = _greedy_tail(child, tail, mode, provider, witness)
        key = (final_ratio, one_step_ratio, a)
        if best is None or key < best[0]:
            best = (key, a, w, child, one_step_ratio)
    _, a, w, child, one_step_ratio = best
    if best[0][0] >= ev.dr_ratio():
        return None
    return StepChoice(a, w, child, one_step_ratio)


StepFn = Callable[[QuboMatrix, int], StepChoice | None]


def _run_policy(Q: QuboMatrix, steps: int, step_fn: StepFn) -> ReductionTrace:
    ev0 = EntryValues.from_matrix(Q)
    initial_ratio = _ratio_or_one(ev0)
    cur = Q
    records: list[StepRecord] = []
    ratio = initial_ratio
    for t in range(steps):
        choice = step_fn(cur, t)
        if choice is None:
            break
        records.append(choice.record())
        cur = choice.matrix
        ratio = choice.ratio
    return ReductionTrace(
        ratio_log2(initial_ratio), initial_ratio, records, cur, ratio
    )


def greedy_reduce(
    Q: QuboMatrix,
    steps: int,
    mode: str = ALL,
    provider=None,
    witness: Sequence[int] | None = None,
) -> ReductionTrace:
    """Base policy for up to ``steps`` updates; stops at a fixed point."""
    return _run_policy(
        Q, steps, lambda cur, t: base_policy_step(cur, mode, provider, witness=witness)
    )


def randomized_reduce(
    Q: QuboMatrix,
    steps: int,
    rng: np.random.Generator,
    top_k: int = 4,
    mode: str = ALL,
    provider=None,
    witness: Sequence[int] | None = None,
) -> ReductionTrace:
    """Randomized base policy; deterministic for a given generator state."""
    return _run_policy(
        Q,
        steps,
        lambda cur, t: randomized_base_step(
            cur, rng, top_k, mode, provider, witness=witness
        ),
    )


def rollout_reduce(
    Q: QuboMatrix,
    steps: int,
    mode: str = ALL,
    provider=None,
    top_k: int | None = None,
    tail_depth: int | None = None,
    witness: Sequence[int] | None = None,
) -> ReductionTrace:
    """Rollout-selection policy over the full horizon.

    With the default full-length completions the final DR is provably
    at most the base policy's final DR from the same state and horizon.
    """
    return _run_policy(
        Q,
        steps,
        lambda cur, t: rollout_selection_step(
            cur, steps - t, mode, provider, top_k, tail_depth, witness=witness
        ),
    )


def branch_and_bound(
    Q: QuboMatrix,
    horizon: int,
    tail: int = 1,
    mode: str = ALL,
    update_depth: int = 1,
    prune: bool = True,
    provider=None,
    witness: Sequence[int] | None = None,
) -> SearchReport:
    """Exact search over the first ``horizon - tail`` updates.

    The action tree is explored depth first, children in one-step-DR order.
    Each leaf is completed with a ``tail``-step base-policy rollout; nodes
    at depths that are multiples of ``update_depth`` also complete early to
    tighten the incumbent. A node is pruned exactly when the DR lower bound
    over its remaining budget exceeds the incumbent, so pruning never
    changes the returned optimum, only the node counters.
    """
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    if not 0 <= tail <= horizon:
        raise ValueError("tail length must satisfy 0 <= tail <= horizon")
    if update_depth < 1:
        raise ValueError("update_depth must be positive")
    provider = provider or _default_provider
    tree_depth = horizon - tail

    ev0 = EntryValues.from_matrix(Q)
    initial_ratio = _ratio_or_one(ev0)

    _, inc_ratio, inc_records = _greedy_tail(Q, horizon, mode, provider, witness)
    incumbent: list = [inc_ratio, inc_records]
    curve: list[Fraction] = [inc_ratio] + [None] * tree_depth
    counters = {"expanded": 0, "pruned": 0}

    def consider(ratio: Fraction, records: list[StepRecord], depth: int) -> None:
        if curve[depth] is None or ratio < curve[depth]:
            curve[depth] = ratio
        if ratio < incumbent[0]:
            incumbent[0] = ratio
            incumbent[1] = records

    def visit(
        cur: QuboMatrix, ev: EntryValues, depth: int, path: list[StepRecord]
    ) -> None:
        counters["expanded"] += 1
        residual = horizon - depth
        if ev.degenerate:
            consider(ONE, list(path), depth)
            return
        if depth == tree_depth:
            _, ratio, recs = _greedy_tail(cur, residual, mode, provider, witness)
            consider(ratio, path + recs, depth)
            return
        if depth and depth % update_depth == 0:
            _, ratio, recs = _greedy_tail(cur, residual, mode, provider, witness)
            consider(ratio, path + recs, depth)
        scored = _score_actions(Q=cur, ev=ev, mode=mode, provider=provider, witness=witness)
        for ratio, a, w in scored:
            child = apply_update(cur, a, w)
            ev_child = EntryValues.from_matrix(child)
            if prune and not ev_child.degenerate:
                res_child = residual - 1
                if len(ev_child.vals) >= res_child + 2:
                    bound = dr_lb_ratio_nums(ev_child.vals, res_child)
                    if incumbent[0] < bound:
                        counters["pruned"] += 1
                        continue
            rec = StepRecord(a, w, ratio_log2(ratio))
            visit(child, ev_child, depth + 1, path + [rec])

    visit(Q, ev0, 0, [])

    # Assemble the incumbent trace; replaying the recorded steps gives the
    # final matrix exactly.
    cur = Q
    for rec in incumbent[1]:
        cur = apply_update(cur, rec.action, rec.w)
    trace = ReductionTrace(
        ratio_log2(initial_ratio), initial_ratio, incumbent[1], cur, incumbent[0]
    )
    best_curve: list[float] = []
    running = None
    for v in curve:
        if v is not None and (running is None or v < running):
            running = v
        best_curve.append(ratio_log2(running))
    return SearchReport(
        trace, counters["expanded"], counters["pruned"], best_curve
    )


def value_merge_reduce(Q: QuboMatrix, rounds: int) -> ReductionTrace:
    """Non-preserving value merging: per round, the better of two moves.

    Either every entry holding the extreme value on the cheaper side moves
    onto its neighboring distinct value, or the smallest gap is eliminated
    by merging its movable endpoint into the other endpoint (0 never
    moves; for interior endpoints the side with the smaller far gap moves).
    The optimum is NOT protected; this trades solution preservation for
    unconditional range reduction. Traces record one step per moved entry.
    """
    if rounds < 0:
        raise ValueError("rounds must be nonnegative")
    ev0 = EntryValues.from_matrix(Q)
    initial_ratio = _ratio_or_one(ev0)
    cur = Q
    records: list[StepRecord] = []
    ratio = initial_ratio
    for _ in range(rounds):
        ev = EntryValues.from_matrix(cur)
        vals = ev.vals
        if len(vals) <= 2:
            break
        options: list[tuple[Fraction, int, int, int]] = []
        # option order encodes the tie preference: extreme move first
        if vals[-1] != 0 or vals[0] != 0:
            span_rm_max = max(vals[-2], 0) - min(vals[0], 0)
            span_rm_min = max(vals[-1], 0) - min(vals[1], 0)
            sides = []
            if vals[-1] != 0:
                sides.append((span_rm_max, 0, vals[-1], vals[-2]))
            if vals[0] != 0:
                sides.append((span_rm_min, 1, vals[0], vals[1]))
            sides.sort()
            _, _, src, dst = sides[0]
            res = ev.dr_after_delete(src)
            r = ONE if res is None else Fraction(res[0], res[1])
            options.append((r, 0, src, dst))
        gaps = [vals[i + 1] - vals[i] for i in range(len(vals) - 1)]
        g = min(range(len(gaps)), key=lambda i: (gaps[i], i))
        left_v, right_v = vals[g], vals[g + 1]
        if left_v == 0:
            src, dst = right_v, left_v
        elif right_v == 0:
            src, dst = left_v, right_v
        else:
            dl = gaps[g - 1] if g >= 1 else None
            dr = gaps[g + 1] if g + 1 < len(gaps) else None
            if dl is None:
                src, dst = right_v, left_v
            elif dr is None:
                src, dst = left_v, right_v
            else:
                src, dst = (left_v, right_v) if dl <= dr else (right_v, left_v)
        res = ev.dr_after_delete(src)
        r = ONE if res is None else Fraction(res[0], res[1])
        options.append((r, 1, src, dst))
        options.sort(key=lambda t: (t[0], t[1]))
        _, _, src, dst = options[0]

        entries = [
            (i, j)
            for i in range(cur.n)
            for j in range(i, cur.n)
            if int(cur.nums[i, j]) == src
        ]
        w = Fraction(dst - src, cur.den)
        # the distinct set only changes when the last entry leaves the value
        res = ev.dr_after_delete(src)
        merged_ratio = ONE if res is None else Fraction(res[0], res[1])
        mid_dr = ratio_log2(ratio)
        for idx, (i, j) in enumerate(entries):
            last = idx == len(entries) - 1
            records.append(
                StepRecord((i, j), w, ratio_log2(merged_ratio) if last else mid_dr)
            )
        if cur.nums.dtype == object:
            nums = np.array(
                [[int(v) for v in row] for row in cur.nums], dtype=object
            )
        else:
            nums = cur.nums.copy()
        for i, j in entries:
            nums[i, j] = dst
        cur = QuboMatrix(cur.n, cur.den, nums)
        ratio = merged_ratio
    return ReductionTrace(
        ratio_log2(initial_ratio), initial_ratio, records, cur, ratio
    )
