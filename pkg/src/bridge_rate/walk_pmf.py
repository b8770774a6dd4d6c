"""Exact finite distributions of rescaled partial sums, plus closed forms.

Convolutions run on integer lattice indices; the 1/sqrt(n) rescaling only
appears in reported values, so supports stay exact however many steps are
convolved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import SizeCap, UnknownLaw, ValidationError
from .lattice_law import LatticeLaw, LatticeSupport, grid_floor

DEFAULT_SIZE_CAP = 2_000_000


@dataclass(frozen=True)
class WalkPmf:
    """Distribution of the rescaled floor(n*t)-step sum of a lattice law.

    ``probs[i]`` is the probability of the value ``anchor + (z_start+i)*step``.
    """

    law_name: str
    n: int
    t: float
    steps: int
    anchor: float
    step: float
    z_start: int
    probs: np.ndarray

    @property
    def support(self) -> LatticeSupport:
        return LatticeSupport(anchor=self.anchor, step=self.step)

    @property
    def values(self) -> np.ndarray:
        z = self.z_start + np.arange(self.probs.size)
        return self.anchor + z * self.step

    def prob_at(self, x: float) -> float:
        """Probability of the value x; 0.0 for off-lattice or off-support x."""
        if self.steps == 0:
            return 1.0 if abs(x) <= 1e-12 else 0.0
        z = self.support.index_of(x)
        if z is None:
            return 0.0
        i = z - self.z_start
        if 0 <= i < self.probs.size:
            return float(self.probs[i])
        return 0.0

    def prob_at_array(self, xs: np.ndarray) -> np.ndarray:
        """Vectorized prob_at: off-lattice and off-support entries give 0."""
        xs = np.asarray(xs, dtype=float)
        if self.steps == 0:
            return np.where(np.abs(xs) <= 1e-12, 1.0, 0.0)
        raw = (xs - self.anchor) / self.step
        z = np.rint(raw)
        on = np.abs(raw - z) <= 1e-9 * np.maximum(1.0, np.abs(raw))
        i = z.astype(np.int64) - self.z_start
        ok = on & (i >= 0) & (i < self.probs.size)
        return np.where(ok, self.probs[np.clip(i, 0, self.probs.size - 1)], 0.0)


@lru_cache(maxsize=128)
def _convolved(law: LatticeLaw, steps: int) -> np.ndarray:
    """pmf of the unscaled ``steps``-fold sum, indexed from steps*min(zs)."""
    base = law.prob_array()
    if steps == 0:
        out = np.ones(1)
    elif steps == 1:
        out = base.copy()
    else:
        half = _convolved(law, steps // 2)
        out = np.convolve(half, half)
        if steps % 2:
            out = np.convolve(out, base)
    out.setflags(write=False)  # cached array is shared by every WalkPmf
    return out


def sum_pmf_tables(law: LatticeLaw, max_steps: int,
                   size_cap: int = DEFAULT_SIZE_CAP) -> list[np.ndarray]:
    """All unscaled j-step sum pmfs for j = 0..max_steps.

    Table j is indexed from j*min(zs).  Used by the bridge sampler, which
    needs every intermediate step count.
    """
    width = law.z_max() - law.z_min()
    total = (max_steps + 1) * (max_steps * width // 2 + 1)
    if max_steps * width + 1 > size_cap or total > 4 * size_cap:
        raise SizeCap(f"sum pmf tables for {max_steps} steps exceed the cap")
    base = law.prob_array()
    tables = [np.ones(1)]
    for _ in range(max_steps):
        tables.append(np.convolve(tables[-1], base))
    return tables


def exact_pmf(law: LatticeLaw, n: int, t: float,
              size_cap: int = DEFAULT_SIZE_CAP) -> WalkPmf:
    """Exact law of the rescaled floor(n*t)-step partial sum."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    if not 0.0 <= t <= 1.0:
        raise ValidationError("t must lie in [0, 1]")
    j = grid_floor(n * t)
    width = law.z_max() - law.z_min()
    if j * width + 1 > size_cap:
        raise SizeCap(f"{j}-step support ({j * width + 1} points) exceeds "
                      f"the cap of {size_cap}")
    probs = _convolved(law, j) if j else np.ones(1)
    rootn = math.sqrt(n)
    return WalkPmf(law_name=law.name, n=n, t=t, steps=j,
                   anchor=j * law.offset_b / rootn, step=law.span_h / rootn,
                   z_start=j * law.z_min(), probs=probs)


def pmf_at_zero_closed(law: LatticeLaw, n: int) -> float:
    """Closed-form return probability at the walk's natural return time.

    For the fair +/-1 law this is the 2n-step probability of 0 (a central
    binomial); for centered Poisson increments it is the n-step probability
    of 0 (a Poisson point mass).  Both are accumulated term by term in log
    space, which keeps the relative error near machine precision even for
    n in the tens of thousands.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    if law.name == "rademacher":
        return math.exp(math.fsum(math.log1p(-1.0 / (2.0 * k))
                                  for k in range(1, n + 1)))
    if law.name == "poisson1":
        return math.exp(math.fsum(math.log(n / k)
                                  for k in range(1, n + 1)) - n)
    raise UnknownLaw(f"no closed form for law {law.name!r}; use exact_pmf")


def gaussian_density(t: float, x: float) -> float:
    """Centered Gaussian density with variance t."""
    if t <= 0:
        raise ValidationError("t must be positive")
    return math.exp(-x * x / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)
