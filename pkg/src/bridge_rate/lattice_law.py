"""Lattice increment distributions and their analytic attributes.

A law lives on ``offset_b + span_h * Z`` with ``span_h`` maximal.  Atom
positions are stored as exact integer indices on that lattice so that
convolutions and bridge conditioning never suffer float drift.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import KappaNotFound, UnknownLaw, ValidationError

_PROB_TOL = 1e-12
_LATTICE_TOL = 1e-12
_MOMENT_TOL = 1e-10

# Grid times are rationals k/n evaluated in floats; snap within 1e-9 of an
# integer before truncating so that e.g. floor(5 * 0.6) comes out as 3.
_SNAP = 1e-9


def grid_floor(x: float) -> int:
    """floor(x) robust to float representation of rational grid times."""
    return math.floor(x + _SNAP)


def grid_ceil(x: float) -> int:
    """ceil(x) robust to float representation of rational grid times."""
    return math.ceil(x - _SNAP)


def _float_gcd(values: list[float], tol: float = 1e-9) -> float:
    g = 0.0
    for v in values:
        b = abs(v)
        a = g
        while b > tol:
            a, b = b, a % b
        g = a
    return g


@dataclass(frozen=True)
class LatticeSupport:
    """The lattice carrying a rescaled partial sum: ``anchor + step * Z``."""

    anchor: float
    step: float

    def index_of(self, x: float, tol: float = 1e-9) -> int | None:
        """Integer lattice index of ``x``, or None if ``x`` is off-lattice."""
        z = round((x - self.anchor) / self.step)
        if abs(self.anchor + z * self.step - x) <= tol * max(1.0, abs(x)):
            return z
        return None


@dataclass(frozen=True)
class LatticeLaw:
    """An increment distribution supported on ``offset_b + span_h * Z``.

    ``zs[i]`` is the integer lattice index of the i-th atom, so the atom
    value is ``offset_b + span_h * zs[i]`` exactly.  ``truncation_tail`` is
    the probability mass dropped when a countable law was truncated to a
    finite table (0.0 for exact laws).
    """

    name: str
    offset_b: float
    span_h: float
    zs: tuple[int, ...]
    probs: tuple[float, ...]
    truncation_tail: float = 0.0

    @property
    def values(self) -> np.ndarray:
        return self.offset_b + self.span_h * np.asarray(self.zs, dtype=float)

    @property
    def atoms(self) -> tuple[tuple[float, float], ...]:
        return tuple(zip(self.values.tolist(), self.probs))

    def mean(self) -> float:
        return math.fsum(v * p for v, p in self.atoms)

    def variance(self) -> float:
        m = self.mean()
        return math.fsum(p * (v - m) ** 2 for v, p in self.atoms)

    def prob_array(self) -> np.ndarray:
        """Dense pmf over the integer index range [min(zs), max(zs)]."""
        lo, hi = min(self.zs), max(self.zs)
        out = np.zeros(hi - lo + 1)
        for z, p in zip(self.zs, self.probs):
            out[z - lo] = p
        return out

    def z_min(self) -> int:
        return min(self.zs)

    def z_max(self) -> int:
        return max(self.zs)


def from_atoms(name: str, atoms: list[tuple[float, float]],
               truncation_tail: float = 0.0) -> LatticeLaw:
    """Build a law from (value, probability) pairs, normalizing (b, h).

    The span is the gcd of the pairwise value differences; the offset is the
    representative of the atoms' common residue in [0, span).
    """
    if len(atoms) < 2:
        raise ValidationError("a lattice law needs at least two atoms")
    values = [float(v) for v, _ in atoms]
    probs = [float(p) for _, p in atoms]
    if any(p < 0 or p > 1 for p in probs):
        raise ValidationError("atom probabilities must lie in [0, 1]")
    total = math.fsum(probs)
    if abs(total - 1.0) > 1e-9:
        raise ValidationError(f"atom probabilities sum to {total}, not 1")
    probs = [p / total for p in probs]
    if len(set(values)) != len(values):
        raise ValidationError("duplicate atom values")

    diffs = [v - values[0] for v in values[1:]]
    h = _float_gcd(diffs)
    if h <= 0:
        raise ValidationError("degenerate support: zero span")
    b = values[0] - h * math.floor(values[0] / h + _SNAP)
    if abs(b - h) < 1e-9 * max(1.0, h):
        b = 0.0
    zs = []
    for v in values:
        z = round((v - b) / h)
        if abs(b + h * z - v) > _LATTICE_TOL * max(1.0, abs(v)):
            raise ValidationError(f"atom {v} is off the lattice {b} + {h}*Z")
        zs.append(z)
    g = 0
    for z in zs[1:]:
        g = math.gcd(g, z - zs[0])
    if g > 1:  # enlarge h until the index gcd is 1 (span maximality)
        h *= g
        b = values[0] - h * math.floor(values[0] / h + _SNAP)
        zs = [round((v - b) / h) for v in values]
    return LatticeLaw(name=name, offset_b=b, span_h=h, zs=tuple(zs),
                      probs=tuple(probs), truncation_tail=truncation_tail)


def make_rademacher() -> LatticeLaw:
    """Fair +/-1 increments: span 2, offset 1, mean 0, variance 1."""
    return from_atoms("rademacher", [(-1.0, 0.5), (1.0, 0.5)])


def make_poisson_minus_one(truncation_K: int = 30) -> LatticeLaw:
    """Centered unit-rate Poisson increments X = P - 1, truncated at P = K.

    K >= 20 keeps the dropped tail below 1e-15 so the stored law still has
    mean 0 and variance 1 within 1e-10.
    """
    if truncation_K < 20:
        raise ValidationError("truncation_K must be >= 20 to keep moments exact")
    probs = [math.exp(-1.0 - math.lgamma(k + 1)) for k in range(truncation_K + 1)]
    tail = max(0.0, 1.0 - math.fsum(probs))
    atoms = [(float(k - 1), p) for k, p in zip(range(truncation_K + 1), probs)]
    return from_atoms("poisson1", atoms, truncation_tail=tail)


_BUILTINS = {
    "rademacher": make_rademacher,
    "poisson1": make_poisson_minus_one,
    "poisson-1": make_poisson_minus_one,
    "poisson_minus_one": make_poisson_minus_one,
}


def load_law(name_or_path: str) -> LatticeLaw:
    """Resolve a built-in law name or a JSON law-definition file.

    The file schema is ``{"name": str, "atoms": [[value, prob], ...]}``.
    """
    key = name_or_path.lower()
    if key in _BUILTINS:
        return _BUILTINS[key]()
    try:
        with open(name_or_path) as fh:
            spec = json.load(fh)
    except FileNotFoundError:
        raise UnknownLaw(f"unknown law {name_or_path!r}: not a built-in "
                         f"({', '.join(sorted(set(_BUILTINS)))}) and not a file")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"law file {name_or_path!r} is not valid JSON: {exc}")
    if "atoms" not in spec:
        raise ValidationError(f"law file {name_or_path!r} has no 'atoms' entry")
    atoms = [(float(v), float(p)) for v, p in spec["atoms"]]
    return from_atoms(str(spec.get("name", name_or_path)), atoms)


def require_standardized(law: LatticeLaw) -> None:
    """Rate experiments assume mean 0, variance 1 increments."""
    if abs(law.mean()) > _MOMENT_TOL or abs(law.variance() - 1.0) > _MOMENT_TOL:
        raise ValidationError(
            f"law {law.name!r} has mean {law.mean():.3e}, variance "
            f"{law.variance():.6f}; rate experiments need mean 0, variance 1")


def char_fn(law: LatticeLaw, u: float) -> complex:
    """Characteristic function: sum of prob * exp(i*u*value) over atoms."""
    acc_re = math.fsum(p * math.cos(u * v) for v, p in law.atoms)
    acc_im = math.fsum(p * math.sin(u * v) for v, p in law.atoms)
    return complex(acc_re, acc_im)


def char_values(law: LatticeLaw, u: np.ndarray) -> np.ndarray:
    """Vectorized characteristic function over an array of frequencies."""
    u = np.asarray(u, dtype=float)
    vals = law.values
    probs = np.asarray(law.probs)
    return (probs * np.exp(1j * np.multiply.outer(u, vals))).sum(axis=-1)


def support_set(law: LatticeLaw, n: int, t: float) -> LatticeSupport:
    """Lattice carrying the rescaled floor(n*t)-step partial sum."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    if not 0.0 <= t <= 1.0:
        raise ValidationError("t must lie in [0, 1]")
    j = grid_floor(n * t)
    rootn = math.sqrt(n)
    return LatticeSupport(anchor=j * law.offset_b / rootn, step=law.span_h / rootn)


def _reachable(law: LatticeLaw, steps: int) -> np.ndarray:
    """Boolean table of z-sums reachable in ``steps`` steps with positive mass."""
    base = np.zeros(law.z_max() - law.z_min() + 1, dtype=bool)
    for z, p in zip(law.zs, law.probs):
        if p > 0:
            base[z - law.z_min()] = True
    reach = np.array([True])
    for _ in range(steps):
        reach = np.convolve(reach.astype(np.int64), base.astype(np.int64)) > 0
    return reach


def kappa(law: LatticeLaw, n_max: int = 64, probe_n: int = 8) -> int:
    """Smallest k such that the k*n-step walk returns to 0 with positive
    probability for every n.

    The n-uniform criterion is symbolic (k * offset_b must lie on the span
    lattice); positivity of the actual return mass is then verified for
    n = 1..probe_n by exact reachability.
    """
    for k in range(1, n_max + 1):
        ratio = k * law.offset_b / law.span_h
        if abs(ratio - round(ratio)) > 1e-9:
            continue
        ok = True
        for n in range(1, probe_n + 1):
            steps = k * n
            target = -steps * law.offset_b / law.span_h
            z0 = round(target)
            if abs(target - z0) > 1e-9:
                ok = False
                break
            reach = _reachable(law, steps)
            idx = z0 - steps * law.z_min()
            if not (0 <= idx < reach.size and reach[idx]):
                ok = False
                break
        if ok:
            return k
    raise KappaNotFound(f"no k <= {n_max} gives a positive return probability")
