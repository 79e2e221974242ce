"""Simulated annealing sampler and solution-quality scoring.

The chain dynamics run in floating point on a copy of the matrix
normalized by its largest magnitude (mirroring how physical annealers
auto-scale programmed couplings into a fixed range, which is exactly why
a smaller dynamic range helps). Reported sample energies are computed
EXACTLY on the lattice of the scoring matrix, so optimality counts and
medians never inherit float noise from the dynamics.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import QuboMatrix, batch_energy_nums

DEFAULT_BETA_RANGE = (0.1, 50.0)


def relative_energy(E, E_star) -> float:
    """(E - E*) / E, the relative distance of a sample to the optimum.

    Exactly 0 when E equals the optimum. Undefined (NaN) when E = 0 but
    the optimum is not; such rows are excluded from medians. The
    denominator is the sample energy, so signs can flip for negative
    energies; values are reported as computed, not normalized.
    """
    e = Fraction(E)
    star = Fraction(E_star)
    if e == star:
        return 0.0
    if e == 0:
        return math.nan
    return float((e - star) / e)


@dataclass
class SampleSet:
    """Sampled assignments with exact energies under the scoring matrix."""

    assignments: np.ndarray
    energies: list[Fraction]
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.energies)

    def n_optimal(self, optimum) -> int:
        opt = Fraction(optimum)
        return sum(1 for e in self.energies if e == opt)

    def relative_energies(self, optimum) -> list[float]:
        return [relative_energy(e, optimum) for e in self.energies]

    def median_relative_energy(self, optimum) -> float:
        vals = [r for r in self.relative_energies(optimum) if not math.isnan(r)]
        if not vals:
            return math.nan
        return float(statistics.median(vals))


def beta_schedule(beta_range: tuple[float, float], sweeps: int) -> np.ndarray:
    b0, b1 = float(beta_range[0]), float(beta_range[1])
    if b0 <= 0 or b1 <= 0:
        raise ValueError("inverse temperatures must be positive")
    if sweeps == 1:
        return np.array([b1])
    return b0 * (b1 / b0) ** (np.arange(sweeps) / (sweeps - 1))


def simulated_annealing(
    Q: QuboMatrix,
    n_samples: int,
    sweeps: int,
    beta_range: tuple[float, float] | None = None,
    seed: int = 0,
    score_matrix: QuboMatrix | None = None,
    precision_bits: int | None = None,
) -> SampleSet:
    """Metropolis single-flip chains with a geometric cooling schedule.

    Runs ``n_samples`` independent chains on ``Q`` for ``sweeps`` full
    variable sweeps each, vectorized across chains. ``score_matrix``
    (default ``Q``) is the matrix the returned energies are computed
    under; pass the original matrix when sampling a compressed one.

    ``precision_bits`` emulates a device that can only program couplings
    on a fixed grid: the normalized matrix the chains see is rounded to
    that many fractional bits. Matrices whose value structure needs more
    bits are silently distorted, exactly like on analog hardware; scoring
    still happens exactly under ``score_matrix``, so the distortion shows
    up honestly in the reported energies.
    """
    if n_samples < 1 or sweeps < 1:
        raise ValueError("n_samples and sweeps must be positive")
    if precision_bits is not None and precision_bits < 1:
        raise ValueError("precision_bits must be positive")
    scorer = score_matrix if score_matrix is not None else Q
    if scorer.n != Q.n:
        raise ValueError("scoring matrix dimension mismatch")
    if beta_range is None:
        beta_range = DEFAULT_BETA_RANGE

    n = Q.n
    dense = Q.to_float_array()
    scale = float(np.abs(dense).max())
    if scale > 0:
        dense = dense / scale
    if precision_bits is not None:
        grid = float(2**precision_bits)
        dense = np.round(dense * grid) / grid
    sym = dense + dense.T
    diag = np.diag(dense).copy()
    np.fill_diagonal(sym, 0.0)

    rng = np.random.default_rng(seed)
    states = rng.integers(0, 2, size=(n_samples, n)).astype(np.float64)
    betas = beta_schedule(beta_range, sweeps)
    for beta in betas:
        for i in range(n):
            delta = (1.0 - 2.0 * states[:, i]) * (diag[i] + states @ sym[:, i])
            accept = rng.random(n_samples) < np.exp(-beta * np.maximum(delta, 0.0))
            states[accept, i] = 1.0 - states[accept, i]

    bits = states.astype(np.uint8)
    nums = batch_energy_nums(scorer, bits)
    energies = [Fraction(v, scorer.den) for v in nums]
    meta = {
        "n_samples": n_samples,
        "sweeps": sweeps,
        "beta_range": [float(beta_range[0]), float(beta_range[1])],
        "seed": seed,
    }
    if precision_bits is not None:
        meta["precision_bits"] = precision_bits
    return SampleSet(bits, energies, meta)
