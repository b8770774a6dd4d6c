"""Bounded-Lipschitz (Fortet-Mourier) and Wasserstein-1 distances between
empirical path measures under the sup-norm ground distance.

The defining dual program maximizes the integral difference over functions
with sup norm at most 1 and Lipschitz constant at most 1.  On a finite
support that program is, by LP duality, an optimal-transport problem whose
ground cost is the sup-norm distance truncated at 2 (the truncation encodes
the sup-norm box; dropping it gives Wasserstein-1).  Uniform same-size
measures reduce further to an assignment problem, which is how the large
instances in the rate experiments are solved exactly.  A direct LP on the
dual variables is kept as a small-instance reference path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import linear_sum_assignment, linprog
from scipy.sparse import coo_matrix
from scipy.spatial.distance import cdist

from .errors import SizeCap, SolverFailure, ValidationError
from .path_sim import PathSample, RngStream

LP_ATOM_CAP = 4000
DUAL_REFERENCE_CAP = 200
FM_CUTOFF = 2.0  # cost ceiling induced by the unit sup-norm box


@dataclass(frozen=True)
class DistanceEstimate:
    value: float
    kind: str                      # "fm" or "w1"
    solver_status: str             # "optimal" or "tol_reached"
    half_width: float = 0.0        # bootstrap CI half-width, 0 if exact
    sizes: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if self.value < -1e-12:
            raise ValidationError("distances are nonnegative")
        if self.kind == "fm" and self.value > FM_CUTOFF + 1e-9:
            raise ValidationError("bounded-Lipschitz distance cannot exceed 2")


@dataclass
class EmpiricalMeasure:
    """Finitely many weighted paths standing in for a law on path space."""

    paths: list[PathSample]
    weights: np.ndarray | None = None

    def __post_init__(self):
        if not self.paths:
            raise ValidationError("an empirical measure needs at least one path")
        if self.weights is None:
            self.weights = np.full(len(self.paths), 1.0 / len(self.paths))
        else:
            self.weights = np.asarray(self.weights, dtype=float)
            if self.weights.shape != (len(self.paths),):
                raise ValidationError("one weight per path required")
            if (self.weights < 0).any():
                raise ValidationError("weights must be nonnegative")
            if abs(self.weights.sum() - 1.0) > 1e-12:
                raise ValidationError("weights must sum to 1")

    def is_uniform(self) -> bool:
        return bool(np.allclose(self.weights, 1.0 / len(self.paths),
                                rtol=0.0, atol=1e-12))

    def dedup(self) -> "EmpiricalMeasure":
        """Merge identical paths, summing their weights."""
        seen: dict[tuple, int] = {}
        paths: list[PathSample] = []
        weights: list[float] = []
        for p, w in zip(self.paths, self.weights):
            key = (p.grid_n, p.values.tobytes())
            if key in seen:
                weights[seen[key]] += w
            else:
                seen[key] = len(paths)
                paths.append(p)
                weights.append(float(w))
        arr = np.asarray(weights)
        return EmpiricalMeasure(paths, arr / arr.sum())


def path_supnorm(p: PathSample, q: PathSample) -> float:
    """Exact sup-norm distance between the two linear interpolants.

    The difference of interpolants is piecewise linear with kinks only at
    the two grids' points, so the max over both grids is the true sup.
    """
    if p.grid_n == q.grid_n:
        return float(np.abs(p.values - q.values).max())
    tp = np.arange(p.grid_n + 1) / p.grid_n
    tq = np.arange(q.grid_n + 1) / q.grid_n
    d1 = np.abs(p.values - np.interp(tp, tq, q.values)).max()
    d2 = np.abs(q.values - np.interp(tq, tp, p.values)).max()
    return float(max(d1, d2))


def _common_grid(measures: list[EmpiricalMeasure]) -> int:
    grids = sorted({p.grid_n for m in measures for p in m.paths})
    g = 1
    for x in grids:
        g = g * x // math.gcd(g, x)
        if g > 1 << 20:
            raise SizeCap("path grids have no small common refinement")
    return g


def _matrix_on(measure: EmpiricalMeasure, grid_n: int) -> np.ndarray:
    return np.stack([p.resample(grid_n) for p in measure.paths])


def _cost_matrix(mu: EmpiricalMeasure, nu: EmpiricalMeasure,
                 cutoff: float | None) -> np.ndarray:
    g = _common_grid([mu, nu])
    a = _matrix_on(mu, g)
    b = _matrix_on(nu, g)
    cost = cdist(a, b, "chebyshev")
    if cutoff is not None:
        np.minimum(cost, cutoff, out=cost)
    return cost


def _transport_value(wa: np.ndarray, wb: np.ndarray, cost: np.ndarray) -> float:
    """Exact optimal-transport cost between two finite weighted supports."""
    m, k = cost.shape
    uniform = (m == k
               and np.allclose(wa, 1.0 / m, rtol=0.0, atol=1e-12)
               and np.allclose(wb, 1.0 / k, rtol=0.0, atol=1e-12))
    if uniform:
        rows, cols = linear_sum_assignment(cost)
        return float(cost[rows, cols].sum() / m)
    if m * k > 4_000_000:
        raise SizeCap("transport LP too large for non-uniform weights")
    # primal transport LP: minimize <cost, plan> over couplings of (wa, wb)
    ones = np.ones(m * k)
    row_con = np.repeat(np.arange(m), k)
    col_con = m + np.tile(np.arange(k), m)
    a_eq = coo_matrix(
        (np.concatenate([ones, ones]),
         (np.concatenate([row_con, col_con]), np.tile(np.arange(m * k), 2))),
        shape=(m + k, m * k))
    res = linprog(cost.ravel(), A_eq=a_eq,
                  b_eq=np.concatenate([wa, wb]), method="highs")
    if not res.success:
        raise SolverFailure(f"transport LP failed: {res.message}")
    return float(res.fun)


def _distance(mu: EmpiricalMeasure, nu: EmpiricalMeasure, kind: str,
              size_cap: int = LP_ATOM_CAP) -> DistanceEstimate:
    mu = mu.dedup()
    nu = nu.dedup()
    m, k = len(mu.paths), len(nu.paths)
    if m + k > size_cap:
        raise SizeCap(f"{m}+{k} atoms exceed the LP cap of {size_cap}")
    cutoff = FM_CUTOFF if kind == "fm" else None
    cost = _cost_matrix(mu, nu, cutoff)
    value = _transport_value(mu.weights, nu.weights, cost)
    return DistanceEstimate(value=max(value, 0.0), kind=kind,
                            solver_status="optimal", sizes=(m, k))


def fm_empirical(mu: EmpiricalMeasure, nu: EmpiricalMeasure,
                 size_cap: int = LP_ATOM_CAP) -> DistanceEstimate:
    """Exact bounded-Lipschitz distance between two discrete path measures."""
    return _distance(mu, nu, "fm", size_cap)


def w1_empirical(mu: EmpiricalMeasure, nu: EmpiricalMeasure,
                 size_cap: int = LP_ATOM_CAP) -> DistanceEstimate:
    """Exact Wasserstein-1 distance (no sup-norm box on test functions)."""
    return _distance(mu, nu, "w1", size_cap)


def fm_bootstrap(mu_sampler: Callable[[int, RngStream], EmpiricalMeasure],
                 nu_sampler: Callable[[int, RngStream], EmpiricalMeasure],
                 m: int, k: int, reps: int, rng: RngStream,
                 kind: str = "fm") -> DistanceEstimate:
    """Distance on one (m, k) draw plus a spread estimate over fresh redraws.

    half_width is 1.96 times the standard deviation of the distance over
    ``reps`` independent sample pairs; the reported value is the first draw.
    """
    if reps < 20:
        raise ValidationError("reps must be >= 20 for a usable half-width")
    values = []
    for i in range(reps):
        mu = mu_sampler(m, rng.substream(2 * i))
        nu = nu_sampler(k, rng.substream(2 * i + 1))
        values.append(_distance(mu, nu, kind).value)
    arr = np.asarray(values)
    return DistanceEstimate(value=float(arr[0]), kind=kind,
                            solver_status="optimal",
                            half_width=float(1.96 * arr.std(ddof=1)),
                            sizes=(m, k))


def dual_lp_value(mu: EmpiricalMeasure, nu: EmpiricalMeasure,
                  bounded: bool) -> float:
    """Small-instance reference: solve the dual program directly.

    Variables are the test function's values on the combined support, with
    pairwise Lipschitz constraints and, when ``bounded``, the [-1, 1] box.
    Kept independent of the transport route as a cross-check.
    """
    mu = mu.dedup()
    nu = nu.dedup()
    support: list[PathSample] = list(mu.paths) + list(nu.paths)
    n = len(support)
    if n > DUAL_REFERENCE_CAP:
        raise SizeCap(f"dual LP reference capped at {DUAL_REFERENCE_CAP} atoms")
    c = np.concatenate([mu.weights, -nu.weights])
    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            dist[i, j] = dist[j, i] = path_supnorm(support[i], support[j])
    rows, cols, data, rhs = [], [], [], []
    r = 0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            rows += [r, r]
            cols += [i, j]
            data += [1.0, -1.0]
            rhs.append(dist[i, j])
            r += 1
    a_ub = coo_matrix((data, (rows, cols)), shape=(r, n))
    if bounded:
        bounds = [(-1.0, 1.0)] * n
    else:
        # pin one value: the objective is shift-invariant because the
        # weights on each side sum to 1
        bounds = [(0.0, 0.0)] + [(None, None)] * (n - 1)
    res = linprog(-c, A_ub=a_ub, b_ub=np.asarray(rhs), bounds=bounds,
                  method="highs")
    if not res.success:
        raise SolverFailure(f"dual LP failed: {res.message}")
    return float(-res.fun)
