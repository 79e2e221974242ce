"""Optimum-preserving update intervals and update value selection.

For a matrix Q and an action (k, l), adding w to entry (k, l) shifts the
energy of exactly the assignments with z_k * z_l = 1 (call that side A;
its complement is B, which always contains the all-zeros assignment).
The set of w values that keeps every current optimizer optimal is a
closed interval containing 0:

* optimizers on both sides: only w = 0 preserves them, the interval is [0, 0];
* all optimizers in A: any decrease helps, increases are capped by the
  best B energy, giving (-inf, min_B - E*];
* all optimizers in B: mirrored, [E* - min_A, +inf).

A second, wider semantics tracks one designated optimizer ("witness")
instead of the whole optimal set; the witness then stays optimal although
other ties may be lost. Both are computed exactly from one energy
enumeration shared across all actions of a state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import (
    DEFAULT_ENUM_CAP,
    Action,
    EnergyTable,
    QuboMatrix,
    _check_action,
)
from .metrics import EntryValues

INCLUSION = "inclusion"
WITNESS = "witness"


@dataclass(frozen=True)
class UpdateInterval:
    """Closed interval of preserving update values; always contains 0.

    Unbounded sides are ``-math.inf`` / ``math.inf``; finite bounds are
    exact rationals and belong to the interval.
    """

    lower: Fraction | float
    upper: Fraction | float

    def __post_init__(self):
        if not (self.lower <= 0 <= self.upper):
            raise ValueError(f"interval [{self.lower}, {self.upper}] must contain 0")

    def __contains__(self, w) -> bool:
        return self.lower <= w <= self.upper

    @property
    def is_point(self) -> bool:
        return self.lower == 0 == self.upper

    def finite_bounds(self) -> list[Fraction]:
        out = []
        if self.lower != -math.inf:
            out.append(self.lower)
        if self.upper != math.inf:
            out.append(self.upper)
        return out


def _witness_index(Q: QuboMatrix, witness: Sequence[int]) -> int:
    bits = [int(b) for b in witness]
    if len(bits) != Q.n or any(b not in (0, 1) for b in bits):
        raise ValueError("witness must be a 0/1 assignment of length n")
    return sum(b << i for i, b in enumerate(bits))


class ExactIntervalProvider:
    """Computes preserving intervals by exhaustive enumeration.

    mode "inclusion" (default) preserves the complete optimal set; mode
    "witness" preserves one designated optimizer, which the caller must
    supply (and which must actually be optimal). Callers with matrices
    above the enumeration cap need a different provider implementing the
    same ``intervals`` signature.
    """

    def __init__(self, cap: int = DEFAULT_ENUM_CAP, mode: str = INCLUSION):
        if mode not in (INCLUSION, WITNESS):
            raise ValueError(f"unknown interval mode {mode!r}")
        self.cap = cap
        self.mode = mode

    def intervals(
        self,
        Q: QuboMatrix,
        actions: Iterable[Action],
        witness: Sequence[int] | None = None,
    ) -> dict[Action, UpdateInterval]:
        table = EnergyTable(Q, cap=self.cap)
        emin = table.minimum()
        widx = None
        if self.mode == WITNESS:
            if witness is None:
                raise ValueError("witness mode needs a designated optimizer")
            widx = _witness_index(Q, witness)
            if table.energy_at(widx) != emin:
                raise ValueError("witness is not an optimizer of the matrix")
        out: dict[Action, UpdateInterval] = {}
        for action in actions:
            k, l = _check_action(Q, action)
            min_a, min_b, opt_a, opt_b = table.action_stats(k, l)
            if widx is not None:
                in_a = (widx >> k) & (widx >> l) & 1
            elif opt_a and opt_b:
                out[(k, l)] = UpdateInterval(Fraction(0), Fraction(0))
                continue
            else:
                in_a = opt_a
            if in_a:
                out[(k, l)] = UpdateInterval(
                    -math.inf, Fraction(min_b - emin, Q.den)
                )
            else:
                out[(k, l)] = UpdateInterval(
                    Fraction(emin - min_a, Q.den), math.inf
                )
        return out

    def interval(
        self,
        Q: QuboMatrix,
        action: Action,
        witness: Sequence[int] | None = None,
    ) -> UpdateInterval:
        return self.intervals(Q, [action], witness)[_check_action(Q, action)]


def preserving_interval(
    Q: QuboMatrix,
    action: Action,
    cap: int = DEFAULT_ENUM_CAP,
    mode: str = INCLUSION,
    witness: Sequence[int] | None = None,
) -> UpdateInterval:
    """Exact interval of update values for ``action`` that preserve the optimum."""
    return ExactIntervalProvider(cap=cap, mode=mode).interval(Q, action, witness)


def select_update(
    Q: QuboMatrix,
    action: Action,
    interval: UpdateInterval,
    values: EntryValues | None = None,
) -> Fraction:
    """Pick the update value inside ``interval`` that minimizes the DR.

    Candidates are 0, the moves landing entry (k, l) exactly on another
    distinct value of the matrix (these are the moves that can shrink the
    value set), and the finite interval endpoints. Ties prefer w = 0,
    then the smallest magnitude.
    """
    return _select(Q, action, interval, values)[0]


def select_update_scored(
    Q: QuboMatrix,
    action: Action,
    interval: UpdateInterval,
    values: EntryValues | None = None,
) -> tuple[Fraction, Fraction]:
    """Like :func:`select_update` but also returns the resulting DR ratio.

    A fully collapsed value set (only 0 left) scores as ratio 1, the best
    possible outcome; search layers treat such states as terminal.
    """
    return _select(Q, action, interval, values)


def _select(
    Q: QuboMatrix,
    action: Action,
    interval: UpdateInterval,
    values: EntryValues | None,
) -> tuple[Fraction, Fraction]:
    k, l = _check_action(Q, action)
    ev = values if values is not None else EntryValues.from_matrix(Q)
    den = Q.den
    q_num = int(Q.nums[k, l])

    lo = interval.lower if interval.lower == -math.inf else interval.lower * den
    hi = interval.upper if interval.upper == math.inf else interval.upper * den

    cand_nums = {0}
    for v in ev.vals:
        cand_nums.add(v - q_num)
    exotic: list[Fraction] = []
    for bound in interval.finite_bounds():
        scaled = bound * den
        if scaled.denominator == 1:
            cand_nums.add(int(scaled))
        else:
            exotic.append(bound)

    best_key = None
    best_w: Fraction | None = None
    for w_num in sorted(cand_nums):
        if not (lo <= w_num <= hi):
            continue
        res = ev.dr_after_move(q_num, q_num + w_num)
        ratio = Fraction(1) if res is None else Fraction(res[0], res[1])
        wf = Fraction(w_num, den)
        key = (ratio, 0 if w_num == 0 else 1, abs(wf), wf)
        if best_key is None or key < best_key:
            best_key = key
            best_w = wf
    for w in exotic:
        # Endpoint off the matrix lattice (custom provider): score it on a
        # temporarily refined lattice so the comparison stays exact.
        scale = math.lcm(den, w.denominator) // den
        ev2 = EntryValues(
            den * scale,
            [v * scale for v in ev.vals],
            {v * scale: c for v, c in ev.counts.items()},
        )
        w_num2 = int(w * den * scale)
        res = ev2.dr_after_move(q_num * scale, q_num * scale + w_num2)
        ratio = Fraction(1) if res is None else Fraction(res[0], res[1])
        key = (ratio, 1, abs(w), w)
        if best_key is None or key < best_key:
            best_key = key
            best_w = w
    assert best_w is not None and best_key is not None  # 0 is always admissible
    return best_w, best_key[0]
