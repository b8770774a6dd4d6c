"""De-conditioning identities: bridge expectations as weighted plain ones.

The discrete identity says that for any bounded functional of the walk
frozen at time t, conditioning on a zero endpoint is equivalent to weighting
the unconditioned walk by the remaining-sum pmf ratio of
:func:`bridge_rate.local_limit.walk_bridge_weight`.  The continuous analogue
weights Brownian motion by the Gaussian ratio of
:func:`bridge_rate.local_limit.bridge_weight`.  Both are verified here by
exact enumeration and exercised by Monte Carlo estimators.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import TooLarge, ValidationError
from .lattice_law import LatticeLaw, grid_ceil, kappa
from .path_sim import (PathSample, RngStream, matrix_value_at, motion_matrix,
                       restrict, restrict_matrix, walk_matrix, wrap_paths)
from .walk_pmf import exact_pmf, sum_pmf_tables

ENUM_CAP = 10_000_000


@dataclass(frozen=True)
class TestFunctional:
    """A test functional with declared sup bound and Lipschitz constant
    (with respect to the sup norm on paths)."""

    name: str
    evaluator: Callable[[PathSample], float]
    lip_const: float
    sup_bound: float

    def __call__(self, path: PathSample) -> float:
        return self.evaluator(path)


def _abs_area(path: PathSample) -> float:
    """Exact integral of |interpolant| (splits segments at sign changes)."""
    v = path.values
    a, b = v[:-1], v[1:]
    width = 1.0 / path.grid_n
    same = a * b >= 0
    trap = 0.5 * (np.abs(a) + np.abs(b)) * width
    denom = np.abs(a) + np.abs(b)
    cross = np.where(denom > 0, 0.5 * (a * a + b * b) / np.maximum(denom, 1e-300),
                     0.0) * width
    return float(np.where(same, trap, cross).sum())


def functional_battery() -> tuple[TestFunctional, ...]:
    """Five bounded 1-Lipschitz functionals used across the test suites."""
    return (
        TestFunctional("const_one", lambda p: 1.0, 0.0, 1.0),
        TestFunctional("clipped_supnorm", lambda p: min(p.supnorm(), 1.0), 1.0, 1.0),
        TestFunctional("midpoint_clipped",
                       lambda p: float(np.clip(p.value_at(0.5), -1.0, 1.0)),
                       1.0, 1.0),
        TestFunctional("clipped_abs_area", lambda p: min(1.0, _abs_area(p)), 1.0, 1.0),
        TestFunctional("sine_pair_mean",
                       lambda p: math.sin(0.5 * (p.value_at(0.25) + p.value_at(0.75))),
                       1.0, 1.0),
    )


def splus_value(path: PathSample, t: float) -> float:
    """Rescaled ceil(grid_n * t)-step prefix sum of a walk path."""
    return float(path.values[grid_ceil(path.grid_n * t)])


def weighted_expectation(law: LatticeLaw, n: int, t: float, F: TestFunctional,
                         samples: int, rng: RngStream) -> tuple[float, float]:
    """Monte Carlo of F(frozen walk) times the discrete bridge weight.

    Unconditioned kappa*n-step walks only; the weight makes the average
    estimate the conditioned expectation.  Returns (estimate, stderr).
    """
    if not 0.0 < t < 1.0:
        raise ValidationError("t must lie in (0, 1)")
    m = kappa(law) * n
    matrix = walk_matrix(law, m, samples, rng)
    cut = grid_ceil(m * t)
    splus = matrix[:, cut]
    numer = exact_pmf(law, m, 1.0 - t)
    denom = exact_pmf(law, m, 1.0).prob_at(0.0)
    weights = numer.prob_at_array(-splus) / denom
    frozen = wrap_paths(restrict_matrix(matrix, t), "walk")
    fvals = np.fromiter((F(p) for p in frozen), dtype=float, count=samples)
    prod = fvals * weights
    est = float(prod.mean())
    stderr = float(prod.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return est, stderr


def _enumerate_sequences(law: LatticeLaw, steps: int):
    """Yield (z_cumsum array of length steps+1, probability) per sequence."""
    zs = np.asarray(law.zs, dtype=np.int64)
    for combo in itertools.product(range(len(zs)), repeat=steps):
        prob = 1.0
        for i in combo:
            prob *= law.probs[i]
        cum = np.zeros(steps + 1, dtype=np.int64)
        np.cumsum(zs[list(combo)], out=cum[1:])
        yield cum, prob


def _path_from_zsum(law: LatticeLaw, zsum: np.ndarray) -> PathSample:
    m = zsum.size - 1
    ks = np.arange(m + 1, dtype=float)
    values = (ks * law.offset_b + law.span_h * zsum) / math.sqrt(m)
    return PathSample(grid_n=m, values=values, kind="walk")


def conditioned_expectation_enum(law: LatticeLaw, n: int, t: float,
                                 F: TestFunctional) -> float:
    """Exact conditioned expectation by brute force over all sequences."""
    m = kappa(law) * n
    if len(law.zs) ** m > ENUM_CAP:
        raise TooLarge(f"{len(law.zs)}^{m} sequences exceed the enumeration cap")
    target = round(-m * law.offset_b / law.span_h)
    total = 0.0
    mass = 0.0
    for cum, prob in _enumerate_sequences(law, m):
        if cum[-1] != target:
            continue
        mass += prob
        total += prob * F(restrict(_path_from_zsum(law, cum), t))
    if mass <= 0:
        raise ValidationError(f"law {law.name!r} has zero return mass at {m} steps")
    return total / mass


def deconditioning_sides(law: LatticeLaw, n: int, t: float,
                         F: TestFunctional) -> tuple[float, float]:
    """Both sides of the de-conditioning identity as exact finite sums.

    The left side enumerates full zero-sum sequences; the right side
    enumerates ceil(kappa*n*t)-step prefixes and weights them with exact
    pmf ratios.  The identity makes the two equal up to roundoff.
    """
    if not 0.0 < t < 1.0:
        raise ValidationError("t must lie in (0, 1)")
    m = kappa(law) * n
    p = grid_ceil(m * t)
    if len(law.zs) ** max(m, p) > ENUM_CAP:
        raise TooLarge("enumeration cap exceeded")
    lhs = conditioned_expectation_enum(law, n, t, F)

    tables = sum_pmf_tables(law, m)
    target = round(-m * law.offset_b / law.span_h)
    z_min = law.z_min()
    denom = tables[m][target - m * z_min]
    rhs = 0.0
    for cum, prob in _enumerate_sequences(law, p):
        idx = (target - cum[-1]) - (m - p) * z_min
        weight = tables[m - p][idx] / denom if 0 <= idx < tables[m - p].size else 0.0
        if weight == 0.0:
            continue
        full = np.zeros(m + 1, dtype=np.int64)
        full[:p + 1] = cum
        path = restrict(_path_from_zsum(law, full), t)
        rhs += prob * F(path) * weight
    return float(lhs), float(rhs)


def deconditioning_residual(law: LatticeLaw, n: int, t: float,
                            F: TestFunctional) -> float:
    """|lhs - rhs| of :func:`deconditioning_sides`."""
    lhs, rhs = deconditioning_sides(law, n, t, F)
    return abs(lhs - rhs)


def bridge_weighted_expectation(t: float, F: TestFunctional, samples: int,
                                grid_n: int, rng: RngStream) -> tuple[float, float]:
    """Monte Carlo of F(frozen Brownian motion) times the Gaussian bridge
    weight; estimates the frozen-bridge expectation without conditioning."""
    if not 0.0 < t < 1.0:
        raise ValidationError("t must lie in (0, 1)")
    matrix = motion_matrix(grid_n, samples, rng)
    bt = matrix_value_at(matrix, t)
    weights = np.exp(-bt * bt / (2.0 * (1.0 - t))) / math.sqrt(1.0 - t)
    frozen = wrap_paths(restrict_matrix(matrix, t), "brownian_motion")
    fvals = np.fromiter((F(p) for p in frozen), dtype=float, count=samples)
    prod = fvals * weights
    est = float(prod.mean())
    stderr = float(prod.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return est, stderr
