"""Benchmark instance families: subset sum, 2-means clustering, random MRFs.

Each generator emits a QuboMatrix on an exact lattice; suites draw the
family parameters from seeded generators so that every instance is
regenerable bit-exactly from its (family, params, seed) triple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import QuboMatrix, _to_fraction

SUBSET_SUM = "subset_sum"
BIN_CLUSTERING = "bin_clustering"
MRF = "mrf"
FAMILIES = (SUBSET_SUM, BIN_CLUSTERING, MRF)

# coordinate / potential lattices: coarse enough for int64 energy sweeps,
# fine enough that distinct draws stay distinct
_POINT_GRID = 1 << 10
_MRF_GRID = 1 << 12


def gen_subset_sum(values: Sequence, target) -> QuboMatrix:
    """Squared-penalty encoding of subset sum: minimize (sum_i a_i z_i - S)^2.

    Expanding the square and dropping the constant S^2 gives
    Q_ii = a_i^2 - 2 S a_i and Q_ij = 2 a_i a_j. When some subset hits the
    target exactly, the optimum energy is exactly -S^2.
    """
    a = [_to_fraction(v) for v in values]
    if not a:
        raise ValueError("values must be nonempty")
    s = _to_fraction(target)
    n = len(a)
    entries = []
    for i in range(n):
        entries.append((i, i, a[i] * a[i] - 2 * s * a[i]))
        for j in range(i + 1, n):
            entries.append((i, j, 2 * a[i] * a[j]))
    return QuboMatrix.from_entries(n, entries)


def gen_bin_clustering(points: Sequence[Sequence]) -> QuboMatrix:
    """Two-cluster assignment QUBO over pairwise squared distances.

    With D_ij the squared Euclidean distance, minimizing the within-cluster
    pair scatter sum_{i<j} D_ij [z_i z_j + (1-z_i)(1-z_j)] expands (up to a
    constant) to Q_ij = 2 D_ij and Q_ii = -sum_{j != i} D_ij. The energy is
    invariant under flipping all labels.
    """
    pts = [[_to_fraction(c) for c in p] for p in points]
    n = len(pts)
    if n < 2:
        raise ValueError("need at least 2 points")
    if any(len(p) != len(pts[0]) for p in pts):
        raise ValueError("points must share one dimension")
    dist = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d = sum((x - y) ** 2 for x, y in zip(pts[i], pts[j]))
            dist[i][j] = dist[j][i] = d
    entries = []
    for i in range(n):
        entries.append((i, i, -sum(dist[i][j] for j in range(n) if j != i)))
        for j in range(i + 1, n):
            entries.append((i, j, 2 * dist[i][j]))
    return QuboMatrix.from_entries(n, entries)


def gen_mrf(
    n_vars: int, edge_density: float, potential_scale: float, seed: int
) -> QuboMatrix:
    """Random pairwise binary MRF with log-uniform potential magnitudes.

    Unary potentials sit on the diagonal; each pair (i, j) carries a
    coupling with probability ``edge_density``. Magnitudes are drawn
    log-uniformly over [1/potential_scale, potential_scale] with random
    signs, then snapped to a fixed dyadic grid (floored at one grid step),
    which yields the large initial dynamic ranges typical of MAP inference
    instances.
    """
    if n_vars < 1:
        raise ValueError("n_vars must be positive")
    if not 0 < edge_density <= 1:
        raise ValueError("edge_density must be in (0, 1]")
    if potential_scale <= 1:
        raise ValueError("potential_scale must exceed 1")
    rng = np.random.default_rng(seed)
    half = math.log2(potential_scale)

    def draw() -> Fraction:
        e = rng.uniform(-half, half)
        sign = 1 if rng.integers(0, 2) else -1
        num = max(1, round(2.0**e * _MRF_GRID))
        return Fraction(sign * num, _MRF_GRID)

    entries = []
    for i in range(n_vars):
        entries.append((i, i, draw()))
    for i in range(n_vars):
        for j in range(i + 1, n_vars):
            if rng.random() < edge_density:
                entries.append((i, j, draw()))
    return QuboMatrix.from_entries(n_vars, entries)


@dataclass(frozen=True)
class ProblemInstance:
    """A generated benchmark instance, regenerable from its descriptor."""

    family: str
    params: dict
    seed: int
    matrix: QuboMatrix


def regenerate(family: str, params: dict, seed: int) -> QuboMatrix:
    """Rebuild the matrix of an instance from its descriptor, bit-exactly."""
    if family == SUBSET_SUM:
        return gen_subset_sum(params["values"], params["target"])
    if family == BIN_CLUSTERING:
        return gen_bin_clustering(params["points"])
    if family == MRF:
        return gen_mrf(
            params["n_vars"], params["edge_density"], params["potential_scale"], seed
        )
    raise ValueError(f"unknown family {family!r}")


def _grid(x: float, grid: int) -> Fraction:
    return Fraction(round(x * grid), grid)


def _draw_subset_sum(n: int, rng: np.random.Generator) -> dict:
    values = [int(v) for v in rng.integers(1, 1000, size=n)]
    mask = rng.integers(0, 2, size=n)
    if not mask.any():
        mask[int(rng.integers(0, n))] = 1
    target = int(sum(v for v, m in zip(values, mask) if m))
    return {"values": values, "target": target}


def _draw_bin_clustering(n: int, rng: np.random.Generator) -> dict:
    dim = 2
    separation = 4.0 + 4.0 * rng.random()
    centers = [np.zeros(dim), np.full(dim, separation)]
    points = []
    for i in range(n):
        raw = centers[i % 2] + rng.normal(0.0, 0.5, size=dim)
        points.append([_grid(float(c), _POINT_GRID) for c in raw])
    return {"points": points}


def make_instance(family: str, n: int, seed: int) -> ProblemInstance:
    """Draw one instance of the family at dimension ``n`` from ``seed``."""
    if family == SUBSET_SUM:
        params = _draw_subset_sum(n, np.random.default_rng(seed))
    elif family == BIN_CLUSTERING:
        params = _draw_bin_clustering(n, np.random.default_rng(seed))
    elif family == MRF:
        params = {"n_vars": n, "edge_density": 0.5, "potential_scale": 1e6}
    else:
        raise ValueError(f"unknown family {family!r}")
    return ProblemInstance(family, params, seed, regenerate(family, params, seed))


def suite(family: str, n: int, count: int, base_seed: int) -> list[ProblemInstance]:
    """Independent instances with per-instance seeds derived from one seed."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    master = np.random.default_rng(np.random.SeedSequence(base_seed))
    seeds = [int(s) for s in master.integers(0, 2**63, size=count)]
    return [make_instance(family, n, seed) for seed in seeds]
