"""Samplers for the four processes on a uniform grid over [0, 1].

All samplers have a batch form returning a ``(count, grid_n+1)`` value
matrix (row = one path, column k = time k/grid_n) and a single-path form
returning a :class:`PathSample`.  Batches are what the distance experiments
consume; the matrices avoid building thousands of small objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .lattice_law import LatticeLaw, grid_ceil, kappa
from .walk_pmf import DEFAULT_SIZE_CAP, sum_pmf_tables

KINDS = ("walk", "conditioned_walk", "brownian_bridge", "empirical_process",
         "brownian_motion")


@dataclass(frozen=True)
class RngStream:
    """Reproducible random source: same (seed, stream_id) means the same
    sample sequence, bit for bit.  Parallel consumers take disjoint ids."""

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if self.seed < 0 or self.stream_id < 0:
            raise ValidationError("seed and stream_id must be nonnegative")

    def generator(self) -> np.random.Generator:
        return np.random.default_rng([self.seed, self.stream_id])

    def substream(self, offset: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id + offset)


@dataclass
class PathSample:
    """A piecewise-linear path: values at times k/grid_n, linear between."""

    grid_n: int
    values: np.ndarray
    kind: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid_n + 1,):
            raise ValidationError(
                f"expected {self.grid_n + 1} values, got {self.values.shape}")
        if self.kind not in KINDS:
            raise ValidationError(f"unknown path kind {self.kind!r}")

    def value_at(self, t: float) -> float:
        """Exact linear-interpolant value at time t in [0, 1]."""
        pos = t * self.grid_n
        j = math.floor(pos + 1e-9)
        if j >= self.grid_n:
            return float(self.values[self.grid_n])
        frac = max(pos - j, 0.0)
        if frac <= 1e-9:
            return float(self.values[j])
        return float(self.values[j] + frac * (self.values[j + 1] - self.values[j]))

    def supnorm(self) -> float:
        """Sup of |path|; exact because extrema sit at grid points."""
        return float(np.abs(self.values).max())

    def resample(self, grid_n: int) -> np.ndarray:
        """Values on a finer uniform grid.  Exact (same interpolant) when
        grid_n is a multiple of this path's grid."""
        if grid_n == self.grid_n:
            return self.values
        src = np.arange(self.grid_n + 1) / self.grid_n
        dst = np.arange(grid_n + 1) / grid_n
        return np.interp(dst, src, self.values)


def wrap_paths(matrix: np.ndarray, kind: str) -> list[PathSample]:
    grid_n = matrix.shape[1] - 1
    return [PathSample(grid_n=grid_n, values=row, kind=kind) for row in matrix]


def matrix_value_at(matrix: np.ndarray, t: float) -> np.ndarray:
    """Interpolated value at time t for every row of a path matrix."""
    grid_n = matrix.shape[1] - 1
    pos = t * grid_n
    j = math.floor(pos + 1e-9)
    if j >= grid_n:
        return matrix[:, grid_n].copy()
    frac = max(pos - j, 0.0)
    if frac <= 1e-9:
        return matrix[:, j].copy()
    return matrix[:, j] + frac * (matrix[:, j + 1] - matrix[:, j])


def restrict_matrix(matrix: np.ndarray, t: float) -> np.ndarray:
    """Row-wise freeze at time t (matrix form of :func:`restrict`)."""
    if not 0.0 <= t <= 1.0:
        raise ValidationError("t must lie in [0, 1]")
    grid_n = matrix.shape[1] - 1
    cut = grid_ceil(grid_n * t)
    out = matrix.copy()
    out[:, cut:] = matrix_value_at(matrix, t)[:, None]
    return out


def restrict(path: PathSample, t: float) -> PathSample:
    """Freeze the path at time t: values at grid points >= t become path(t)."""
    if not 0.0 <= t <= 1.0:
        raise ValidationError("t must lie in [0, 1]")
    cut = grid_ceil(path.grid_n * t)
    out = path.values.copy()
    out[cut:] = path.value_at(t)
    return PathSample(grid_n=path.grid_n, values=out, kind=path.kind)


# ---------------------------------------------------------------------------
# unconditioned lattice walk

def walk_matrix(law: LatticeLaw, n: int, count: int, rng: RngStream) -> np.ndarray:
    """count interpolated walks: n iid increments, cumulative sums / sqrt(n)."""
    if n < 1 or count < 1:
        raise ValidationError("n and count must be >= 1")
    gen = rng.generator()
    idx = gen.choice(len(law.zs), size=(count, n), p=np.asarray(law.probs))
    increments = law.values[idx]
    out = np.zeros((count, n + 1))
    np.cumsum(increments, axis=1, out=out[:, 1:])
    out /= math.sqrt(n)
    return out


def sample_walk_path(law: LatticeLaw, n: int, rng: RngStream) -> PathSample:
    return wrap_paths(walk_matrix(law, n, 1, rng), "walk")[0]


# ---------------------------------------------------------------------------
# walk conditioned to return to 0 at time 1

class ConditionedWalkSampler:
    """Sequential exact sampler of the kappa*n-step walk forced to end at 0.

    Each increment is drawn with probability proportional to
    law(x) * q_{r-1}(target - partial - x), where q_j is the exact j-step
    sum pmf and r counts the remaining steps; the resulting path law is
    exactly the conditional law.  All arithmetic runs on integer lattice
    indices, so the final sum is 0 exactly.
    """

    def __init__(self, law: LatticeLaw, n: int,
                 size_cap: int = DEFAULT_SIZE_CAP):
        if n < 1:
            raise ValidationError("n must be >= 1")
        self.law = law
        self.n = n
        self.kappa = kappa(law)
        self.steps = self.kappa * n
        target = -self.steps * law.offset_b / law.span_h
        self.z_target = round(target)
        if abs(target - self.z_target) > 1e-9:
            raise ValidationError(
                f"0 is not on the {self.steps}-step lattice of {law.name!r}")
        self.tables = sum_pmf_tables(law, self.steps, size_cap=size_cap)
        self.z_atoms = np.asarray(law.zs, dtype=np.int64)
        self.p_atoms = np.asarray(law.probs)
        self.z_min = law.z_min()

    def matrix(self, count: int, rng: RngStream) -> np.ndarray:
        if count < 1:
            raise ValidationError("count must be >= 1")
        gen = rng.generator()
        m = self.steps
        sigma = np.zeros(count, dtype=np.int64)
        z_steps = np.empty((count, m), dtype=np.int64)
        for k in range(m):
            r = m - k
            table = self.tables[r - 1]
            need = self.z_target - sigma
            idx = need[None, :] - self.z_atoms[:, None] - (r - 1) * self.z_min
            valid = (idx >= 0) & (idx < table.size)
            w = self.p_atoms[:, None] * np.where(
                valid, table[np.clip(idx, 0, table.size - 1)], 0.0)
            totals = w.sum(axis=0)
            assert (totals > 0).all(), "conditioned transition hit a zero denominator"
            cum = np.cumsum(w / totals, axis=0)
            u = gen.random(count)
            choice = np.minimum((cum < u[None, :]).sum(axis=0),
                                len(self.z_atoms) - 1)
            picked = self.z_atoms[choice]
            z_steps[:, k] = picked
            sigma += picked
        assert (sigma == self.z_target).all()
        zsum = np.zeros((count, m + 1), dtype=np.int64)
        np.cumsum(z_steps, axis=1, out=zsum[:, 1:])
        ks = np.arange(m + 1, dtype=float)
        values = (ks * self.law.offset_b + self.law.span_h * zsum) / math.sqrt(m)
        values[:, 0] = 0.0
        values[:, m] = 0.0
        return values


def conditioned_matrix(law: LatticeLaw, n: int, count: int, rng: RngStream,
                       size_cap: int = DEFAULT_SIZE_CAP) -> np.ndarray:
    return ConditionedWalkSampler(law, n, size_cap=size_cap).matrix(count, rng)


def sample_conditioned_path(law: LatticeLaw, n: int, rng: RngStream) -> PathSample:
    return wrap_paths(conditioned_matrix(law, n, 1, rng), "conditioned_walk")[0]


# ---------------------------------------------------------------------------
# Gaussian processes

def motion_matrix(grid_n: int, count: int, rng: RngStream) -> np.ndarray:
    """Brownian motion on the grid via iid Gaussian increments."""
    if grid_n < 1 or count < 1:
        raise ValidationError("grid_n and count must be >= 1")
    gen = rng.generator()
    out = np.zeros((count, grid_n + 1))
    steps = gen.standard_normal((count, grid_n)) / math.sqrt(grid_n)
    np.cumsum(steps, axis=1, out=out[:, 1:])
    return out


def bridge_matrix(grid_n: int, count: int, rng: RngStream) -> np.ndarray:
    """Brownian bridge: sample a motion, subtract t * (endpoint)."""
    out = motion_matrix(grid_n, count, rng)
    ts = np.arange(grid_n + 1) / grid_n
    out -= ts[None, :] * out[:, -1:]
    return out


def sample_brownian_bridge(grid_n: int, rng: RngStream) -> PathSample:
    return wrap_paths(bridge_matrix(grid_n, 1, rng), "brownian_bridge")[0]


# ---------------------------------------------------------------------------
# empirical process of uniform samples

def empirical_matrix(n: int, count: int, rng: RngStream) -> np.ndarray:
    """sqrt(n) * (F_n - F) evaluated at the grid k/n and interpolated."""
    if n < 1 or count < 1:
        raise ValidationError("n and count must be >= 1")
    gen = rng.generator()
    u = gen.random((count, n))
    bins = np.floor(u * n).astype(np.int64)  # U in [k/n,(k+1)/n) lands in bin k
    counts = np.zeros((count, n), dtype=np.int64)
    rows = np.repeat(np.arange(count), n)
    np.add.at(counts, (rows, bins.ravel()), 1)
    out = np.zeros((count, n + 1))
    np.cumsum(counts, axis=1, out=out[:, 1:])
    out[:, 1:] -= np.arange(1, n + 1)[None, :]
    out /= math.sqrt(n)
    return out


def sample_empirical_process(n: int, rng: RngStream) -> PathSample:
    return wrap_paths(empirical_matrix(n, 1, rng), "empirical_process")[0]
