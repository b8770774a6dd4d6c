"""Local-limit error functionals and the bridge reweighting functions.

``rho`` measures the gap between the walk's exact return probability and the
Gaussian density at 0; ``tau`` integrates the characteristic-function error
that drives the uniform local limit theorem; ``local_limit_error`` is that
uniform error itself, evaluated exactly over the finite support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import QuadratureFailure, UnknownLaw, ValidationError
from .lattice_law import LatticeLaw, char_fn, grid_floor, kappa, support_set
from .walk_pmf import exact_pmf, gaussian_density, pmf_at_zero_closed

RATE_EXPONENT = 1.0 / 18.0  # scaling exponent of the return-probability gap
DELTA_MIN = 1.0 / 18.0      # admissible integration-range exponents exceed this

# Window exponent for the bridge freeze time t_n = 1 - n**(-TIME_WINDOW_EXP).
TIME_WINDOW_EXP = 1.0 / 9.0


@dataclass(frozen=True)
class QuadratureSpec:
    method: str = "adaptive-simpson"
    abs_tol: float = 1e-8
    max_depth: int = 40

    def __post_init__(self):
        if self.method != "adaptive-simpson":
            raise ValidationError(f"unknown quadrature method {self.method!r}")
        if self.abs_tol <= 0:
            raise ValidationError("abs_tol must be positive")
        if not 0 < self.max_depth <= 60:
            raise ValidationError("max_depth must lie in 1..60")


DEFAULT_QUAD = QuadratureSpec()


def complex_int_power(z: complex, k: int) -> complex:
    """z**k by square-and-multiply; exact integer exponent, no polar form."""
    if k < 0:
        raise ValidationError("exponent must be nonnegative")
    result = complex(1.0, 0.0)
    base = complex(z)
    while k:
        if k & 1:
            result *= base
        base *= base
        k >>= 1
    return result


def _adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                      abs_tol: float, max_depth: int) -> float:
    """Recursive Simpson with Richardson correction on [a, b]."""
    def simpson(fa, fm, fb, h):
        return h / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, m, b, fa, fm, fb, whole, tol, depth):
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = f(lm)
        frm = f(rm)
        left = simpson(fa, flm, fm, m - a)
        right = simpson(fm, frm, fb, b - m)
        err = (left + right - whole) / 15.0
        if abs(err) <= tol:
            return left + right + err
        if depth >= max_depth:
            raise QuadratureFailure(
                f"tolerance {tol:.2e} unmet at depth {max_depth}")
        return (recurse(a, lm, m, fa, flm, fm, left, tol / 2.0, depth + 1)
                + recurse(m, rm, b, fm, frm, fb, right, tol / 2.0, depth + 1))

    if a == b:
        return 0.0
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    whole = simpson(fa, fm, fb, b - a)
    return recurse(a, m, b, fa, fm, fb, whole, abs_tol, 0)


def rho(law: LatticeLaw, n: int) -> float:
    """Scaled gap between the exact return probability and gaussian_density(1, 0)."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    k = kappa(law)
    try:
        p0 = pmf_at_zero_closed(law, n)
    except UnknownLaw:
        p0 = exact_pmf(law, k * n, 1.0).prob_at(0.0)
    scaled = math.sqrt(k * n) / law.span_h * p0
    return n ** RATE_EXPONENT * abs(scaled - gaussian_density(1.0, 0.0))


def tau(law: LatticeLaw, n: int, delta: float, s: float,
        quad: QuadratureSpec = DEFAULT_QUAD,
        char_override: Callable[[float], complex] | None = None) -> float:
    """Integrated characteristic-function error over [-n**delta, n**delta].

    The integrand compares the rescaled floor(n*s)-step walk's characteristic
    function with its Gaussian limit exp(-s*u^2/2).  ``char_override`` is a
    test hook replacing the law's characteristic function.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    if delta <= DELTA_MIN:
        raise ValidationError(f"delta must exceed {DELTA_MIN}")
    if not 0.0 < s <= 1.0:
        raise ValidationError("s must lie in (0, 1]")
    phi = char_override if char_override is not None else (
        lambda u: char_fn(law, u))
    steps = grid_floor(n * s)
    rootn = math.sqrt(n)

    def integrand(u: float) -> float:
        return abs(complex_int_power(phi(u / rootn), steps)
                   - math.exp(-0.5 * s * u * u))

    # The integrand is even in u: phi(-x) is the conjugate of phi(x) and the
    # Gaussian term is real, so integrate the half line and double.
    half = _adaptive_simpson(integrand, 0.0, n ** delta,
                             quad.abs_tol / 2.0, quad.max_depth)
    return 2.0 * half


def default_s_grid(n: int) -> list[float]:
    """Sixteenths of the unit interval clipped below by n**(-1/9)."""
    lo = n ** (-TIME_WINDOW_EXP)
    return [k / 16.0 for k in range(1, 17) if k / 16.0 >= lo] or [1.0]


def tau_sup(law: LatticeLaw, n: int, delta: float, s_grid: list[float],
            quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Worst integrated error over a grid of time arguments."""
    if not s_grid:
        raise ValidationError("s_grid must be nonempty")
    return max(tau(law, n, delta, s, quad) for s in s_grid)


def local_limit_error(law: LatticeLaw, n: int, s: float) -> float:
    """sup over the lattice of |sqrt(n)/h * pmf - gaussian density|.

    The sup runs over the exact support, extended outward until both the pmf
    and the density fall below 1e-16.
    """
    if not 0.0 < s <= 1.0:
        raise ValidationError("s must lie in (0, 1]")
    pmf = exact_pmf(law, n, s)
    scale = math.sqrt(n) / law.span_h
    worst = 0.0
    for x, p in zip(pmf.values, pmf.probs):
        worst = max(worst, abs(scale * p - gaussian_density(s, x)))
    # beyond the support the pmf is 0 but the Gaussian may not be negligible
    sup = pmf.support
    for direction, edge in ((-1, pmf.z_start), (1, pmf.z_start + pmf.probs.size - 1)):
        z = edge + direction
        while True:
            g = gaussian_density(s, sup.anchor + z * sup.step)
            if g < 1e-16:
                break
            worst = max(worst, g)
            z += direction
    return worst


def bridge_weight(t: float, x: float) -> float:
    """Density weight turning Brownian-motion expectations into bridge ones.

    Equals gaussian_density(1-t, -x) / gaussian_density(1, 0); undefined at
    t = 1 where the bridge law is singular with respect to the motion.
    """
    if not 0.0 <= t < 1.0:
        raise ValidationError("t must lie in [0, 1)")
    return math.exp(-x * x / (2.0 * (1.0 - t))) / math.sqrt(1.0 - t)


def walk_bridge_weight(law: LatticeLaw, n: int, t: float, x: float) -> float:
    """Discrete analogue of bridge_weight built from exact walk pmfs.

    Ratio of the remaining-sum pmf at -x to the full-walk return probability,
    both for the kappa*n-step walk.  Off-lattice x gives 0 by convention.
    """
    if not 0.0 <= t < 1.0:
        raise ValidationError("t must lie in [0, 1)")
    k = kappa(law)
    m = k * n
    numer = exact_pmf(law, m, 1.0 - t).prob_at(-x)
    denom = exact_pmf(law, m, 1.0).prob_at(0.0)
    if denom <= 0.0:
        raise ValidationError(f"law {law.name!r} has zero return mass at {m} steps")
    return numer / denom
