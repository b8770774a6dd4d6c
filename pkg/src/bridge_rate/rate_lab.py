"""Experiment drivers: distance-decay tables, rate extraction, the
empirical-process equivalence check, and sample-path inequality spot checks.
"""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import TooLarge, ValidationError
from .lattice_law import LatticeLaw, make_poisson_minus_one
from .local_limit import (DEFAULT_QUAD, TIME_WINDOW_EXP, QuadratureSpec, rho,
                          tau)
from .fm_distance import DistanceEstimate, EmpiricalMeasure, fm_bootstrap
from .path_sim import (ConditionedWalkSampler, RngStream, bridge_matrix,
                       empirical_matrix, restrict_matrix, wrap_paths)

# integration-range exponents used by the built-in rate experiments
TAU_DELTAS = {"rademacher": 1.0 / 6.0, "poisson1": 1.0 / 12.0}
DEFAULT_TAU_DELTA = 1.0 / 6.0


@dataclass(frozen=True)
class RateTableRow:
    n: int
    fm_value: float
    fm_half_width: float
    rho_value: float
    tau_value: float
    wallclock_s: float


def tau_delta_for(law: LatticeLaw) -> float:
    return TAU_DELTAS.get(law.name, DEFAULT_TAU_DELTA)


def _conditioned_measure_sampler(law: LatticeLaw, n: int):
    sampler = ConditionedWalkSampler(law, n)

    def sample(count: int, rng: RngStream) -> EmpiricalMeasure:
        return EmpiricalMeasure(wrap_paths(sampler.matrix(count, rng),
                                           "conditioned_walk"))
    return sample


def _bridge_measure_sampler(grid_n: int):
    def sample(count: int, rng: RngStream) -> EmpiricalMeasure:
        return EmpiricalMeasure(wrap_paths(bridge_matrix(grid_n, count, rng),
                                           "brownian_bridge"))
    return sample


def _empirical_measure_sampler(n: int):
    def sample(count: int, rng: RngStream) -> EmpiricalMeasure:
        return EmpiricalMeasure(wrap_paths(empirical_matrix(n, count, rng),
                                           "empirical_process"))
    return sample


def convergence_table(law: LatticeLaw, n_list: list[int], m_samples: int,
                      grid_bridge: int, rng: RngStream, reps: int = 20,
                      quad: QuadratureSpec = DEFAULT_QUAD,
                      tau_delta: float | None = None,
                      threads: int = 1) -> list[RateTableRow]:
    """One row per n: conditioned-walk-to-bridge distance with bootstrap
    half-width, plus the two local-limit error functionals at s = 1.

    The bridge is sampled on max(grid_bridge, n) points so its discretization
    error stays below the Monte Carlo noise.  Rows use disjoint RNG streams,
    so the output is identical whatever ``threads`` is.
    """
    delta = tau_delta if tau_delta is not None else tau_delta_for(law)

    def one_row(idx_n: tuple[int, int]) -> RateTableRow:
        idx, n = idx_n
        start = time.perf_counter()
        base = rng.substream(100_000 * (idx + 1))
        est = fm_bootstrap(_conditioned_measure_sampler(law, n),
                           _bridge_measure_sampler(max(grid_bridge, n)),
                           m_samples, m_samples, reps, base)
        row = RateTableRow(n=n, fm_value=est.value,
                           fm_half_width=est.half_width,
                           rho_value=rho(law, n),
                           tau_value=tau(law, n, delta, 1.0, quad),
                           wallclock_s=time.perf_counter() - start)
        return row

    jobs = list(enumerate(n_list))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one_row, jobs))
    return [one_row(job) for job in jobs]


def loglog_slope(pairs: list[tuple[float, float]]) -> tuple[float, float]:
    """OLS slope of log(value) against log(n), with its standard error."""
    if len(pairs) < 4:
        raise ValidationError("need at least 4 points for a slope fit")
    ns = np.asarray([p[0] for p in pairs], dtype=float)
    vals = np.asarray([p[1] for p in pairs], dtype=float)
    if (vals <= 0).any() or (ns <= 0).any():
        raise ValidationError("log-log fit needs positive values")
    x = np.log(ns)
    y = np.log(vals)
    xc = x - x.mean()
    sxx = float((xc * xc).sum())
    slope = float((xc * y).sum() / sxx)
    resid = y - (y.mean() + slope * xc)
    dof = len(pairs) - 2
    stderr = math.sqrt(float((resid * resid).sum()) / dof / sxx) if dof else 0.0
    return slope, stderr


def gc_equivalence_check(n: int, m_samples: int, rng: RngStream,
                         reps: int = 20) -> DistanceEstimate:
    """Distance between the empirical process and the conditioned centered
    Poisson walk at the same n.  The two laws coincide, so the value should
    be indistinguishable from the same-law baseline of
    :func:`gc_baseline`."""
    law = make_poisson_minus_one()
    return fm_bootstrap(_empirical_measure_sampler(n),
                        _conditioned_measure_sampler(law, n),
                        m_samples, m_samples, reps, rng)


def gc_baseline(n: int, m_samples: int, rng: RngStream,
                reps: int = 20) -> DistanceEstimate:
    """Same-law control: two independent empirical-process samples."""
    return fm_bootstrap(_empirical_measure_sampler(n),
                        _empirical_measure_sampler(n),
                        m_samples, m_samples, reps, rng.substream(1))


def gc_exact_tv(n: int) -> float:
    """Exact total-variation distance between the grid law of the empirical
    process and the conditioned centered Poisson walk's grid law.

    Both laws are enumerated: the walk by all increment tuples with zero
    total, the empirical process through bin counts (multinomial).  Feasible
    for n <= 4.
    """
    if n > 4:
        raise TooLarge("exact grid-law enumeration is capped at n = 4")
    law = make_poisson_minus_one()

    walk: dict[tuple[int, ...], float] = {}
    zs = law.zs
    probs = law.probs
    for combo in itertools.product(range(len(zs)), repeat=n):
        picked = [zs[i] for i in combo]
        if sum(picked) != 0:
            continue
        prob = 1.0
        for i in combo:
            prob *= probs[i]
        key = tuple(np.cumsum(picked))
        walk[key] = walk.get(key, 0.0) + prob
    total = sum(walk.values())
    walk = {k: v / total for k, v in walk.items()}

    emp: dict[tuple[int, ...], float] = {}
    log_nfact = math.lgamma(n + 1)
    for counts in itertools.product(range(n + 1), repeat=n):
        if sum(counts) != n:
            continue
        logp = log_nfact - n * math.log(n)
        for c in counts:
            logp -= math.lgamma(c + 1)
        key = tuple(np.cumsum([c - 1 for c in counts]))
        emp[key] = emp.get(key, 0.0) + math.exp(logp)

    keys = set(walk) | set(emp)
    return 0.5 * sum(abs(walk.get(k, 0.0) - emp.get(k, 0.0)) for k in keys)


def freeze_time(n: int) -> float:
    """The experiment's freeze point t_n = 1 - n**(-1/9), clamped to [0, 1)."""
    return max(0.0, 1.0 - n ** (-TIME_WINDOW_EXP))


@dataclass(frozen=True)
class SpotCheckRow:
    n: int
    lhs: float
    lhs_stderr: float
    rhs: float
    rhs_stderr: float
    passed: bool


def inequality_spotchecks(law: LatticeLaw, n_list: list[int], m_samples: int,
                          rng: RngStream) -> list[SpotCheckRow]:
    """Monte Carlo check that the conditioned walk's tail movement after the
    freeze time is controlled by twice its early-window sup norm:
    E||S - S_frozen(t_n)|| <= 2 E||S frozen at 1-t_n|| on bridge samples."""
    rows = []
    for idx, n in enumerate(n_list):
        t_n = freeze_time(n)
        sampler = ConditionedWalkSampler(law, n)
        matrix = sampler.matrix(m_samples, rng.substream(7_000 + idx))
        tail = np.abs(matrix - restrict_matrix(matrix, t_n)).max(axis=1)
        head = np.abs(restrict_matrix(matrix, 1.0 - t_n)).max(axis=1)
        lhs, rhs = float(tail.mean()), float(head.mean())
        lhs_se = float(tail.std(ddof=1) / math.sqrt(m_samples))
        rhs_se = float(head.std(ddof=1) / math.sqrt(m_samples))
        combined = math.sqrt(lhs_se ** 2 + 4.0 * rhs_se ** 2)
        rows.append(SpotCheckRow(n=n, lhs=lhs, lhs_stderr=lhs_se, rhs=rhs,
                                 rhs_stderr=rhs_se,
                                 passed=lhs <= 2.0 * rhs + 3.0 * combined))
    return rows


def inequality_enum(law: LatticeLaw, n: int) -> tuple[float, float]:
    """Exact (lhs, rhs) of the spot-check inequality by full enumeration of
    the conditioned walk; lhs <= 2*rhs must hold exactly."""
    from .rn_weighting import _enumerate_sequences, _path_from_zsum

    sampler = ConditionedWalkSampler(law, n)
    steps = sampler.steps
    if len(law.zs) ** steps > 1_000_000:
        raise TooLarge("enumeration cap exceeded")
    t_n = freeze_time(n)
    target = sampler.z_target
    lhs = rhs = mass = 0.0
    for cum, prob in _enumerate_sequences(law, steps):
        if cum[-1] != target:
            continue
        path = _path_from_zsum(law, cum)
        row = path.values[None, :]
        tail = float(np.abs(row - restrict_matrix(row, t_n)).max())
        head = float(np.abs(restrict_matrix(row, 1.0 - t_n)).max())
        lhs += prob * tail
        rhs += prob * head
        mass += prob
    return lhs / mass, rhs / mass
