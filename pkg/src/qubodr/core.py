"""Exact QUBO matrix core: states, energies, exhaustive solving, updates.

A problem instance is an upper triangular n x n real matrix Q. A binary
assignment z in {0,1}^n has energy

    E(z) = sum_{i <= j} Q[i, j] * z[i] * z[j]

and solving the instance means finding the assignments of minimum energy.

Matrix values are stored as exact rationals on a shared integer lattice:
every entry equals ``nums[i, j] / den`` for a common positive integer
``den``. All updates, energy comparisons and value collisions are then
exact integer arithmetic. This matters because the compression machinery
built on top of this module moves coefficients onto each other and onto
energy-difference thresholds; under floating point those collisions land
one ulp off and the whole value structure degrades. Floats appear only as
derived, read-only views.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

# Exhaustive enumeration refuses to run above this many variables unless
# the caller raises the cap explicitly.
DEFAULT_ENUM_CAP = 24

# Integer magnitudes below this bound are safe in int64 intermediate sums.
_INT64_SAFE = 1 << 62

Action = tuple[int, int]
Assignment = tuple[int, ...]


class QuboError(Exception):
    """Base class for errors raised by this package."""


class CapExceededError(QuboError):
    """Exhaustive enumeration was requested above the configured cap."""


class DegenerateMatrixError(QuboError):
    """A metric is undefined because the matrix has a single distinct value."""


class ConfigError(QuboError):
    """An experiment or CLI configuration is invalid."""


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, numbers.Integral):
        return Fraction(int(x))
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"matrix values must be finite, got {x!r}")
        return Fraction(x)
    return Fraction(x)


class QuboMatrix:
    """Immutable upper triangular QUBO matrix with exact rational entries.

    Entries are kept as integer numerators over a single shared denominator.
    Use :meth:`from_dense` or :meth:`from_entries` to build one; arithmetic
    on instances goes through :func:`apply_update`, which returns a new
    matrix and never mutates.
    """

    __slots__ = ("n", "den", "nums", "_float", "_abs_sum")

    def __init__(self, n: int, den: int, nums: np.ndarray):
        # Internal constructor: callers must pass a consistent lattice.
        if n < 1:
            raise ValueError("matrix dimension must be at least 1")
        if den < 1:
            raise ValueError("lattice denominator must be positive")
        self.n = n
        self.den = den
        nums = np.asarray(nums)
        if nums.shape != (n, n):
            raise ValueError(f"numerator array must be {n}x{n}")
        nums.setflags(write=False)
        self.nums = nums
        self._float = None
        self._abs_sum = None

    # ----- construction -------------------------------------------------

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence]) -> "QuboMatrix":
        """Build a matrix from a dense square table of numbers.

        Values below the diagonal must be exactly zero. Accepts ints,
        floats, Fractions and Decimals; floats are converted exactly.
        """
        table = [list(r) for r in rows]
        n = len(table)
        if n == 0 or any(len(r) != n for r in table):
            raise ValueError("matrix must be square and non-empty")
        fracs = [[_to_fraction(v) for v in r] for r in table]
        for i in range(n):
            for j in range(i):
                if fracs[i][j] != 0:
                    raise ValueError(
                        f"entry ({i}, {j}) below the diagonal must be zero"
                    )
        den = 1
        for i in range(n):
            for j in range(i, n):
                den = math.lcm(den, fracs[i][j].denominator)
        return cls(n, den, _num_array(n, den, fracs))

    @classmethod
    def from_entries(
        cls, n: int, entries: Iterable[tuple[int, int, object]]
    ) -> "QuboMatrix":
        """Build from sparse ``(i, j, value)`` triples; omitted entries are 0.

        Indices are 0-based with i <= j. Duplicate positions are rejected.
        """
        if n < 1:
            raise ValueError("matrix dimension must be at least 1")
        seen: dict[tuple[int, int], Fraction] = {}
        for i, j, v in entries:
            i, j = int(i), int(j)
            if not (0 <= i <= j < n):
                raise ValueError(f"entry position ({i}, {j}) out of range for n={n}")
            if (i, j) in seen:
                raise ValueError(f"duplicate entry at ({i}, {j})")
            seen[(i, j)] = _to_fraction(v)
        den = 1
        for v in seen.values():
            den = math.lcm(den, v.denominator)
        nums = [[0] * n for _ in range(n)]
        big = False
        for (i, j), v in seen.items():
            q = int(v.numerator) * (den // v.denominator)
            nums[i][j] = q
            big = big or abs(q) >= _INT64_SAFE
        dtype = object if big else np.int64
        return cls(n, den, np.array(nums, dtype=dtype))

    # ----- views ---------------------------------------------------------

    def value(self, i: int, j: int) -> Fraction:
        """Exact value at (i, j)."""
        return Fraction(int(self.nums[i, j]), self.den)

    def iter_upper(self) -> Iterator[tuple[int, int, Fraction]]:
        """Yield (i, j, value) over the upper triangle, including zeros."""
        for i in range(self.n):
            for j in range(i, self.n):
                yield i, j, Fraction(int(self.nums[i, j]), self.den)

    def upper_nums(self) -> list[int]:
        """Numerators of the upper triangle (diagonal included), row-major."""
        n = self.n
        return [int(self.nums[i, j]) for i in range(n) for j in range(i, n)]

    def to_float_array(self) -> np.ndarray:
        """Read-only float64 mirror. Approximate; for sampling and display."""
        if self._float is None:
            if self.nums.dtype == object:
                f = np.array(
                    [[float(Fraction(int(v), self.den)) for v in row] for row in self.nums],
                    dtype=np.float64,
                )
            else:
                f = self.nums.astype(np.float64) / float(self.den)
            f.setflags(write=False)
            self._float = f
        return self._float

    def abs_num_sum(self) -> int:
        """Sum of |numerator| over the upper triangle (exact int)."""
        if self._abs_sum is None:
            self._abs_sum = sum(abs(v) for v in self.upper_nums())
        return self._abs_sum

    def with_denominator(self, den: int) -> "QuboMatrix":
        """Same matrix on a coarser-compatible lattice (den multiple of self.den)."""
        if den == self.den:
            return self
        if den % self.den:
            raise ValueError("new denominator must be a multiple of the current one")
        k = den // self.den
        if self.nums.dtype == object:
            nums = np.array(
                [[int(v) * k for v in row] for row in self.nums], dtype=object
            )
        else:
            top = int(np.abs(self.nums).max(initial=0)) * k
            if top >= _INT64_SAFE:
                nums = np.array(
                    [[int(v) * k for v in row] for row in self.nums], dtype=object
                )
            else:
                nums = self.nums * np.int64(k)
        return QuboMatrix(self.n, den, nums)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuboMatrix):
            return NotImplemented
        if self.n != other.n:
            return False
        if self.den == other.den:
            return bool(np.array_equal(self.nums, other.nums))
        a = self.upper_nums()
        b = other.upper_nums()
        return all(x * other.den == y * self.den for x, y in zip(a, b))

    __hash__ = None  # mutable ndarray payload; equality is by value

    def __repr__(self) -> str:
        return f"QuboMatrix(n={self.n}, den={self.den})"


def _num_array(n: int, den: int, fracs: list[list[Fraction]]) -> np.ndarray:
    nums = [
        [int(f.numerator) * (den // f.denominator) for f in row] for row in fracs
    ]
    big = any(abs(v) >= _INT64_SAFE for row in nums for v in row)
    return np.array(nums, dtype=object if big else np.int64)


# ----- energies and enumeration ------------------------------------------


def _check_assignment(Q: QuboMatrix, z: Sequence[int]) -> list[int]:
    if len(z) != Q.n:
        raise ValueError(f"assignment length {len(z)} does not match n={Q.n}")
    bits = [int(b) for b in z]
    if any(b not in (0, 1) for b in bits):
        raise ValueError("assignment entries must be 0 or 1")
    return bits


def energy(Q: QuboMatrix, z: Sequence[int]) -> Fraction:
    """Exact energy of assignment z under Q."""
    bits = _check_assignment(Q, z)
    total = 0
    nums = Q.nums
    for i, bi in enumerate(bits):
        if not bi:
            continue
        row = nums[i]
        for j in range(i, Q.n):
            if bits[j]:
                total += int(row[j])
    return Fraction(total, Q.den)


def batch_energy_nums(Q: QuboMatrix, states: np.ndarray) -> list[int]:
    """Energy numerators for a batch of assignments (rows of ``states``)."""
    states = np.asarray(states)
    if states.ndim != 2 or states.shape[1] != Q.n:
        raise ValueError("states must be a 2-d array with n columns")
    if Q.nums.dtype == object or Q.abs_num_sum() >= _INT64_SAFE:
        out = []
        nums = Q.nums
        for row in states:
            bits = [int(b) for b in row]
            total = 0
            for i, bi in enumerate(bits):
                if bi:
                    total += sum(
                        int(nums[i, j]) for j in range(i, Q.n) if bits[j]
                    )
            out.append(total)
        return out
    X = states.astype(np.int64)
    E = np.einsum("si,ij,sj->s", X, Q.nums, X)
    return [int(v) for v in E]


class EnergyTable:
    """Energies of all 2^n assignments of one matrix, as lattice numerators.

    Index bit i of the table position encodes z_i. Built by repeated
    doubling: extending the enumeration by one variable appends, for each
    existing assignment, its energy plus the single-bit delta of switching
    that variable on. Cost is O(2^n * n) exact integer operations, either
    vectorized in int64 (when magnitude bounds allow) or on Python ints.
    """

    __slots__ = ("n", "den", "energies", "_emin")

    def __init__(self, Q: QuboMatrix, cap: int = DEFAULT_ENUM_CAP):
        if Q.n > cap:
            raise CapExceededError(
                f"n={Q.n} exceeds the enumeration cap of {cap}"
            )
        self.n = Q.n
        self.den = Q.den
        if Q.nums.dtype != object and Q.abs_num_sum() < _INT64_SAFE:
            self.energies = _sweep_int64(Q.nums, Q.n)
        else:
            self.energies = _sweep_bigint(Q.nums, Q.n)
        self._emin = None

    def minimum(self) -> int:
        """Lowest energy numerator."""
        if self._emin is None:
            if isinstance(self.energies, list):
                self._emin = min(self.energies)
            else:
                self._emin = int(self.energies.min())
        return self._emin

    def optimizer_indices(self) -> list[int]:
        """Table positions attaining the minimum, ascending."""
        emin = self.minimum()
        if isinstance(self.energies, list):
            return [i for i, e in enumerate(self.energies) if e == emin]
        return [int(i) for i in np.nonzero(self.energies == emin)[0]]

    def energy_at(self, index: int) -> int:
        return int(self.energies[index])

    def action_stats(self, k: int, l: int) -> tuple[int, int, bool, bool]:
        """For action (k, l): (min over A, min over B, opt in A, opt in B).

        A is the set of assignments with z_k * z_l = 1 (z_k = 1 when k = l),
        B its complement. Both sides are non-empty for any valid action.
        """
        emin = self.minimum()
        if isinstance(self.energies, list):
            min_a = min_b = None
            for idx, e in enumerate(self.energies):
                if (idx >> k) & (idx >> l) & 1:
                    if min_a is None or e < min_a:
                        min_a = e
                else:
                    if min_b is None or e < min_b:
                        min_b = e
            return min_a, min_b, min_a == emin, min_b == emin
        idx = np.arange(len(self.energies), dtype=np.int64)
        mask = ((idx >> k) & (idx >> l) & 1).astype(bool)
        min_a = int(self.energies[mask].min())
        min_b = int(self.energies[~mask].min())
        return min_a, min_b, min_a == emin, min_b == emin


def _sweep_int64(nums: np.ndarray, n: int) -> np.ndarray:
    E = np.zeros(1, dtype=np.int64)
    idx = np.arange(1 << n, dtype=np.int64)
    for k in range(n):
        m = len(E)
        c = np.zeros(m, dtype=np.int64)
        for i in range(k):
            v = int(nums[i, k])
            if v:
                c += v * ((idx[:m] >> i) & 1)
        E = np.concatenate([E, E + (int(nums[k, k]) + c)])
    return E


def _sweep_bigint(nums: np.ndarray, n: int) -> list[int]:
    E = [0]
    for k in range(n):
        m = len(E)
        c = [0] * m
        for i in range(k):
            v = int(nums[i, k])
            if v:
                step = 1 << i
                base = step
                while base < m:
                    for code in range(base, min(base + step, m)):
                        c[code] += v
                    base += step << 1
        d = int(nums[k, k])
        E.extend(E[code] + d + c[code] for code in range(m))
    return E


@dataclass(frozen=True)
class SolveResult:
    """Exhaustive solution: exact optimum energy and the complete tie set."""

    optimum_energy: Fraction
    optimizers: frozenset[Assignment]

    def sorted_optimizers(self) -> list[Assignment]:
        return sorted(self.optimizers)


def _index_to_bits(index: int, n: int) -> Assignment:
    return tuple((index >> i) & 1 for i in range(n))


def solve_exhaustive(Q: QuboMatrix, cap: int = DEFAULT_ENUM_CAP) -> SolveResult:
    """Enumerate all assignments and return the optimum with every tie.

    Raises :class:`CapExceededError` when n exceeds ``cap`` (default 24).
    """
    table = EnergyTable(Q, cap=cap)
    emin = table.minimum()
    opts = frozenset(_index_to_bits(i, Q.n) for i in table.optimizer_indices())
    return SolveResult(Fraction(emin, Q.den), opts)


def optimum_included(
    Q: QuboMatrix, Qp: QuboMatrix, cap: int = DEFAULT_ENUM_CAP
) -> bool:
    """True iff every optimizer of Q is an optimizer of Qp.

    This is the preservation relation the compression search maintains:
    a modified matrix may enlarge the optimal set but must not lose any
    optimizer of the original. Decided by exhaustive enumeration.
    """
    if Q.n != Qp.n:
        raise ValueError("matrices must share a dimension")
    ta = EnergyTable(Q, cap=cap)
    tb = EnergyTable(Qp, cap=cap)
    emin_b = tb.minimum()
    for index in ta.optimizer_indices():
        if tb.energy_at(index) != emin_b:
            return False
    return True


# ----- updates -------------------------------------------------------------


def _check_action(Q: QuboMatrix, action: Action) -> Action:
    k, l = action
    k, l = int(k), int(l)
    if not (0 <= k <= l < Q.n):
        raise ValueError(f"action ({k}, {l}) out of range for n={Q.n}; need k <= l")
    return k, l


def apply_update(Q: QuboMatrix, action: Action, w) -> QuboMatrix:
    """Return Q with ``w`` added to entry ``action``; Q itself is untouched.

    The addition is exact: applying (action, w) and then (action, -w)
    reproduces the original matrix bit for bit.
    """
    k, l = _check_action(Q, action)
    wf = _to_fraction(w)
    if wf == 0:
        return Q
    den = math.lcm(Q.den, wf.denominator)
    base = Q.with_denominator(den)
    w_num = int(wf.numerator) * (den // wf.denominator)
    new_val = int(base.nums[k, l]) + w_num
    if base.nums.dtype == object or abs(new_val) >= _INT64_SAFE:
        nums = np.array([[int(v) for v in row] for row in base.nums], dtype=object)
        nums[k, l] = new_val
    else:
        nums = base.nums.copy()
        nums[k, l] = new_val
    return QuboMatrix(Q.n, den, nums)
