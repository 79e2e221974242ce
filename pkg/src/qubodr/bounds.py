"""Reachability bounds on the dynamic range under a budget of updates.

Each single-entry update can remove at most one value from the distinct
value set (by landing the entry on another value), and can never remove 0.
Two optimistic consequences bound what any sequence of ``steps`` updates
can reach from a given matrix:

* the span maxD cannot fall below the best allocation of removals to the
  low and high ends of the sorted value list (0 staying put);
* the smallest gap minD cannot grow beyond a greedy simulation that each
  round deletes the currently smallest gap by moving one of its endpoints,
  merging it into the smaller neighboring gap (or dropping it outright at
  the boundary), again never moving 0.

The ratio of the two gives a lower bound on the dynamic range reachable
within the budget, used to prune branch-and-bound nodes. All arithmetic
is exact on lattice numerators; only the final log2 is a float.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import DegenerateMatrixError, QuboMatrix
from .metrics import EntryValues, _log2_fraction


def span_lb_nums(vals: list[int], steps: int) -> int:
    """Smallest reachable maxD (numerator) after ``steps`` value removals.

    ``vals`` is the sorted distinct value list including 0. Removals never
    eliminate 0; spending removals past 0 clamps the surviving end to 0.
    """
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    p = len(vals)
    if p < 2:
        raise DegenerateMatrixError("need at least 2 distinct values")
    best = None
    for i in range(min(steps, p - 1) + 1):
        j = steps - i
        left = min(vals[i], 0)
        ri = p - 1 - j
        right = max(vals[ri], 0) if ri >= 0 else 0
        span = right - left
        if best is None or span < best:
            best = span
    return best


def min_gap_ub_nums(vals: list[int], steps: int) -> int:
    """Largest reachable minD (numerator) after ``steps`` gap eliminations.

    Requires at least ``steps + 2`` distinct values so that a gap remains.
    Each round deletes one endpoint of the smallest gap (ties at the lower
    position): never 0, otherwise the endpoint whose far-side neighboring
    gap is smaller, with a missing neighbor counting as infinite. Deleting
    an interior value merges its two gaps; deleting a boundary value just
    drops the gap.
    """
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    p = len(vals)
    if p < steps + 2:
        raise DegenerateMatrixError(
            f"need at least steps + 2 = {steps + 2} distinct values, have {p}"
        )
    cur = list(vals)
    for _ in range(steps):
        gaps = [cur[i + 1] - cur[i] for i in range(len(cur) - 1)]
        g = min(range(len(gaps)), key=lambda i: (gaps[i], i))
        left_v, right_v = cur[g], cur[g + 1]
        if left_v == 0:
            drop = g + 1
        elif right_v == 0:
            drop = g
        else:
            dl = gaps[g - 1] if g >= 1 else None
            dr = gaps[g + 1] if g + 1 < len(gaps) else None
            if dl is None and dr is None:
                raise AssertionError("unreachable: at least 2 gaps guaranteed")
            if dl is None:
                drop = g + 1
            elif dr is None:
                drop = g
            else:
                drop = g if dl <= dr else g + 1
        del cur[drop]
    return min(cur[i + 1] - cur[i] for i in range(len(cur) - 1))


def max_dist_lower_bound(Q: QuboMatrix, steps: int) -> Fraction:
    """Lower bound on the maxD of any matrix reachable in ``steps`` updates."""
    ev = EntryValues.from_matrix(Q)
    return Fraction(span_lb_nums(ev.vals, steps), Q.den)


def min_dist_upper_bound(Q: QuboMatrix, steps: int) -> Fraction:
    """Upper bound on the minD of any matrix reachable in ``steps`` updates."""
    ev = EntryValues.from_matrix(Q)
    return Fraction(min_gap_ub_nums(ev.vals, steps), Q.den)


def dr_lb_ratio_nums(vals: list[int], steps: int) -> Fraction:
    """Exact ratio form of the DR lower bound, clamped at 1."""
    span = span_lb_nums(vals, steps)
    gap = min_gap_ub_nums(vals, steps)
    ratio = Fraction(span, gap)
    return ratio if ratio >= 1 else Fraction(1)


def dr_lb_ratio(Q: QuboMatrix, steps: int) -> Fraction:
    ev = EntryValues.from_matrix(Q)
    return dr_lb_ratio_nums(ev.vals, steps)


def dr_lower_bound(Q: QuboMatrix, steps: int) -> float:
    """Lower bound on DR(reachable in ``steps`` updates), clamped at 0 bits."""
    return _log2_fraction(dr_lb_ratio(Q, steps))


@dataclass(frozen=True)
class BoundPair:
    """The two reachability bounds and the DR bound they imply."""

    max_dist_lb: Fraction
    min_dist_ub: Fraction
    dr_lb: float


def bound_pair(Q: QuboMatrix, steps: int) -> BoundPair:
    ev = EntryValues.from_matrix(Q)
    span = span_lb_nums(ev.vals, steps)
    gap = min_gap_ub_nums(ev.vals, steps)
    ratio = Fraction(span, gap)
    if ratio < 1:
        ratio = Fraction(1)
    return BoundPair(
        Fraction(span, Q.den), Fraction(gap, Q.den), _log2_fraction(ratio)
    )
