"""Dynamic range and value-structure metrics of QUBO matrices.

The central quantity is the dynamic range

    DR(Q) = log2(maxD / minD)

where maxD is the largest and minD the smallest distance between distinct
values of Q. The value set always contains 0 because the strict lower
triangle does. DR bounds the number of bits a hardware sampler needs to
represent the coefficients, and the smallest coefficient-magnitude ratio
is provably at most 2^DR.

Distances are computed over the distinct value set, never the entry
multiset, so duplicated entries cannot produce zero gaps. Comparisons
between dynamic ranges are done on exact rational ratios (maxD / minD);
floats only appear in reported log values.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from .core import DegenerateMatrixError, QuboMatrix


def _log2_fraction(fr: Fraction) -> float:
    """log2 of a positive rational, safe for huge numerators."""
    p, q = fr.numerator, fr.denominator
    if p <= 0:
        raise ValueError("log2 of a non-positive ratio")
    shift = p.bit_length() - q.bit_length()
    if shift > 0:
        q <<= shift
    elif shift < 0:
        p <<= -shift
    return shift + math.log2(p / q)


class EntryValues:
    """Sorted distinct values of a matrix with entry multiplicities.

    Works on integer numerators over the matrix lattice. 0 is always a
    member of the value set regardless of whether any stored entry is 0.
    This is the workhorse behind candidate scoring: `dr_after_move` answers
    "what would (maxD, minD) be if one entry moved from value a to value b"
    without building the new matrix. A move disturbs at most three of the
    sorted adjacent gaps, so after caching the four smallest gaps each query
    costs O(log p) instead of a full rescan.
    """

    __slots__ = ("den", "vals", "counts", "_gaps", "_top")

    def __init__(self, den: int, vals: list[int], counts: dict[int, int]):
        self.den = den
        self.vals = vals
        self.counts = counts
        self._gaps: list[int] | None = None
        self._top: list[tuple[int, int]] | None = None

    @classmethod
    def from_matrix(cls, Q: QuboMatrix) -> "EntryValues":
        counts = dict(Counter(Q.upper_nums()))
        vals = sorted(set(counts) | {0})
        return cls(Q.den, vals, counts)

    def __len__(self) -> int:
        return len(self.vals)

    @property
    def degenerate(self) -> bool:
        return len(self.vals) < 2

    def span_num(self) -> int:
        if self.degenerate:
            raise DegenerateMatrixError("single distinct value; maxD undefined")
        return self.vals[-1] - self.vals[0]

    def min_gap_num(self) -> int:
        if self.degenerate:
            raise DegenerateMatrixError("single distinct value; minD undefined")
        return self._gap_cache()[1][0][0]

    def _gap_cache(self) -> tuple[list[int], list[tuple[int, int]]]:
        if self._gaps is None:
            vals = self.vals
            gaps = [vals[i + 1] - vals[i] for i in range(len(vals) - 1)]
            order = sorted(range(len(gaps)), key=lambda i: (gaps[i], i))[:4]
            self._gaps = gaps
            self._top = [(gaps[i], i) for i in order]
        return self._gaps, self._top

    def dr_ratio(self) -> Fraction:
        """Exact maxD / minD; always >= 1."""
        return Fraction(self.span_num(), self.min_gap_num())

    def _vanishes(self, old: int) -> bool:
        return old != 0 and self.counts.get(old, 0) == 1

    def dr_after_move(self, old: int, new: int) -> tuple[int, int] | None:
        """(maxD, minD) numerators after one entry moves from old to new.

        Returns None when fewer than 2 distinct values would remain. The
        receiver is not modified.
        """
        if old == new:
            if self.degenerate:
                return None
            return self.span_num(), self.min_gap_num()
        remove = old if self._vanishes(old) else None
        insert = new if (new != 0 and new not in self.counts) else None
        if remove is None and insert is None:
            if self.degenerate:
                return None
            return self.span_num(), self.min_gap_num()
        return self._after(remove, insert)

    def dr_after_delete(self, value: int) -> tuple[int, int] | None:
        """(maxD, minD) numerators after every entry holding ``value`` merges
        onto some other existing value (the value disappears from the set)."""
        if value == 0 or value not in self.counts:
            raise ValueError("only a present nonzero value can be deleted")
        return self._after(value, None)

    def _after(self, remove: int | None, insert: int | None) -> tuple[int, int] | None:
        vals = self.vals
        p = len(vals)
        if p - (remove is not None) + (insert is not None) < 2:
            return None
        lo, hi = 0, p - 1
        if remove is not None:
            if vals[0] == remove:
                lo = 1
            if vals[-1] == remove:
                hi = p - 2
        vmin, vmax = vals[lo], vals[hi]
        if insert is not None:
            vmin = min(vmin, insert)
            vmax = max(vmax, insert)
        gaps, top = self._gap_cache()
        excl = set()
        cands = []
        left = right = None
        if remove is not None:
            ri = bisect_left(vals, remove)
            if ri > 0:
                excl.add(ri - 1)
                left = vals[ri - 1]
            if ri < p - 1:
                excl.add(ri)
                right = vals[ri + 1]
        if insert is not None:
            xi = bisect_left(vals, insert)
            if 0 < xi < p:
                excl.add(xi - 1)
            lo_nb = vals[xi - 1] if xi > 0 else None
            hi_nb = vals[xi] if xi < p else None
            if lo_nb == remove:
                lo_nb = vals[xi - 2] if xi > 1 else None
            if hi_nb == remove:
                hi_nb = vals[xi + 1] if xi + 1 < p else None
            if lo_nb is not None:
                cands.append(insert - lo_nb)
            if hi_nb is not None:
                cands.append(hi_nb - insert)
        if left is not None and right is not None:
            if insert is None or not left < insert < right:
                cands.append(right - left)
        best = None
        for g, pos in top:
            if pos not in excl:
                best = g
                break
        else:
            if len(excl) < len(gaps):
                best = min(g for i, g in enumerate(gaps) if i not in excl)
        for c in cands:
            if best is None or c < best:
                best = c
        if best is None:
            return None
        return vmax - vmin, best


@dataclass(frozen=True)
class ValueView:
    """Distinct values and entry multiset of one matrix."""

    den: int
    distinct_nums: tuple[int, ...]
    counts: dict[int, int] = field(repr=False)
    n: int = 0

    @property
    def distinct_values(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(v, self.den) for v in self.distinct_nums)

    @property
    def m(self) -> int:
        return self.n * self.n

    def sorted_entries(self) -> list[Fraction]:
        """All n^2 entry values sorted ascending, lower-triangle zeros included."""
        structural_zeros = self.n * (self.n - 1) // 2
        out = []
        for v in self.distinct_nums:
            mult = self.counts.get(v, 0)
            if v == 0:
                mult += structural_zeros
            out.extend([Fraction(v, self.den)] * mult)
        return out


@dataclass(frozen=True)
class GapStructure:
    """Adjacent-value gaps of the sorted distinct values.

    ``rho`` orders gap positions by nondecreasing gap size, ties broken by
    the lower position. ``zero_position`` locates the value 0 in the sorted
    distinct list. All indices are 0-based.
    """

    den: int
    gap_nums: tuple[int, ...]
    rho: tuple[int, ...]
    zero_position: int

    @property
    def gaps(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(g, self.den) for g in self.gap_nums)

    @property
    def smallest(self) -> Fraction:
        return Fraction(self.gap_nums[self.rho[0]], self.den)


def value_view(Q: QuboMatrix) -> ValueView:
    ev = EntryValues.from_matrix(Q)
    return ValueView(Q.den, tuple(ev.vals), dict(ev.counts), Q.n)


def gap_structure(Q: QuboMatrix) -> GapStructure:
    ev = EntryValues.from_matrix(Q)
    if ev.degenerate:
        raise DegenerateMatrixError("gap structure needs at least 2 distinct values")
    vals = ev.vals
    gaps = tuple(vals[i + 1] - vals[i] for i in range(len(vals) - 1))
    rho = tuple(sorted(range(len(gaps)), key=lambda i: (gaps[i], i)))
    return GapStructure(Q.den, gaps, rho, vals.index(0))


def dr_ratio(Q: QuboMatrix) -> Fraction:
    """Exact maxD / minD of the distinct value set (>= 1)."""
    return EntryValues.from_matrix(Q).dr_ratio()


def dynamic_range(Q: QuboMatrix) -> float:
    """DR(Q) = log2(maxD / minD) over distinct values; 0 is always a value.

    Raises :class:`DegenerateMatrixError` when the matrix has fewer than
    two distinct values (the all-zero matrix).
    """
    return _log2_fraction(dr_ratio(Q))


def ratio_log2(fr: Fraction) -> float:
    """Report-side conversion of an exact DR ratio to log2 bits."""
    return _log2_fraction(fr)


def bits_required(Q: QuboMatrix) -> int:
    """Smallest integer b with maxD / minD <= 2^b (ceil of the DR)."""
    fr = dr_ratio(Q)
    p, q = fr.numerator, fr.denominator
    b = max(0, p.bit_length() - q.bit_length() - 1)
    while (q << b) < p:
        b += 1
    return b


def coeff_ratio(Q: QuboMatrix) -> Fraction:
    """Exact largest-to-smallest nonzero coefficient magnitude ratio."""
    ev = EntryValues.from_matrix(Q)
    nonzero = [abs(v) for v in ev.vals if v != 0]
    if not nonzero:
        raise DegenerateMatrixError("all-zero matrix has no coefficient ratio")
    return Fraction(max(nonzero), min(nonzero))


def max_coeff_ratio(Q: QuboMatrix) -> float:
    """Float view of :func:`coeff_ratio`; provably at most 2^DR."""
    fr = coeff_ratio(Q)
    try:
        return fr.numerator / fr.denominator
    except OverflowError:
        return math.inf
