"""Lattice descriptions, scenario potentials and the local density
approximation (LDA) for the average single-site entanglement.

Sites are 0-based in arrays; the scenario formulas below are written
with 1-based site labels i = 1..N, as in the density CSV format.
"""

from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, DensitySourceError, ValidationError
from .functional import (
    DENSITY_CLAMP,
    InteractionPoint,
    l_hom_attractive,
    l_hom_exact_u0,
    l_hom_repulsive,
)
from .specfun import DEFAULT_QUADRATURE, QuadratureConfig, alpha

log = logging.getLogger(__name__)


class Boundary(str, enum.Enum):
    OPEN = "open"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class LatticeSpec:
    n_sites: int
    boundary: Boundary
    potential: tuple[float, ...]
    n_up: int
    n_down: int

    def __post_init__(self):
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        object.__setattr__(self, "potential", tuple(float(v) for v in self.potential))
        if self.n_sites < 1:
            raise ConfigurationError(f"n_sites must be >= 1, got {self.n_sites}")
        if len(self.potential) != self.n_sites:
            raise ConfigurationError(
                f"potential has {len(self.potential)} entries for {self.n_sites} sites"
            )
        for name in ("n_up", "n_down"):
            k = getattr(self, name)
            if not 0 <= k <= self.n_sites:
                raise ConfigurationError(f"{name}={k} outside [0, {self.n_sites}]")
        if not np.all(np.isfinite(self.potential)):
            raise ConfigurationError("potential must be finite")

    @classmethod
    def uniform(cls, n_sites, n_up, n_down, boundary="periodic"):
        return cls(n_sites, boundary, (0.0,) * n_sites, n_up, n_down)

    def with_potential(self, potential) -> "LatticeSpec":
        return LatticeSpec(self.n_sites, self.boundary, tuple(potential),
                           self.n_up, self.n_down)

    @property
    def n_particles(self) -> int:
        return self.n_up + self.n_down

    def bonds(self) -> list[tuple[int, int]]:
        """Nearest-neighbour bonds (i, j) with i < j, 0-based."""
        out = [(i, i + 1) for i in range(self.n_sites - 1)]
        if self.boundary is Boundary.PERIODIC and self.n_sites > 2:
            out.append((0, self.n_sites - 1))
        return out


@dataclass(frozen=True)
class DensityProfile:
    densities: tuple[float, ...]

    def __post_init__(self):
        clean = []
        for i, n in enumerate(self.densities):
            n = float(n)
            # 1-based site labels in messages, matching the CSV files
            if not np.isfinite(n) or n < -DENSITY_CLAMP or n > 2.0 + DENSITY_CLAMP:
                raise ValidationError(f"site {i + 1}: density {n!r} outside [0, 2]")
            clean.append(min(max(n, 0.0), 2.0))
        if not clean:
            raise ValidationError("empty density profile")
        object.__setattr__(self, "densities", tuple(clean))

    def __len__(self):
        return len(self.densities)

    @property
    def total(self) -> float:
        return float(sum(self.densities))


def _site_entropy(n: float, u: float, a: float | None) -> float:
    pt = InteractionPoint(n, u)
    if u > 0:
        return l_hom_repulsive(pt, a)
    if u < 0:
        return l_hom_attractive(pt, a)
    return l_hom_exact_u0(pt.n)


def l_lda(profile: DensityProfile, u: float,
          cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Average over sites of the homogeneous functional at each local density."""
    a = alpha(abs(u), cfg).value if u != 0 else None
    return ordered_mean([_site_entropy(n, u, a) for n in profile.densities])


def ordered_mean(values) -> float:
    """Mean accumulated as deviations from the first value.

    Identical inputs return that value bit for bit; the sum is exact
    (fsum), so the result does not depend on evaluation order either.
    """
    values = [float(v) for v in values]
    x0 = values[0]
    return x0 + math.fsum(v - x0 for v in values) / len(values)


# -- scenario potentials ---------------------------------------------------

def _require_even(n_sites: int, what: str):
    if n_sites < 2 or n_sites % 2:
        raise ConfigurationError(f"{what} needs an even number of sites, got {n_sites}")


def harmonic_potential(n_sites: int, k: float) -> tuple[float, ...]:
    """V_i = k (i - i0)^2 with i0 = N/2 + 1 (1-based labels)."""
    _require_even(n_sites, "harmonic_potential")
    if k < 0:
        raise ConfigurationError(f"trap curvature must be >= 0, got {k}")
    i0 = n_sites // 2 + 1
    return tuple(k * (i - i0) ** 2 for i in range(1, n_sites + 1))


def superlattice_potential(n_sites: int, delta_v: float, period: int) -> tuple[float, ...]:
    """Square wave: 0 on the first half of every cell, delta_v on the second."""
    if period < 2 or period % 2:
        raise ConfigurationError(f"superlattice period must be even and >= 2, got {period}")
    if n_sites % period:
        raise ConfigurationError(f"period {period} does not divide {n_sites} sites")
    half = period // 2
    return tuple(0.0 if (i % period) < half else float(delta_v) for i in range(n_sites))


def impurity_potential(n_sites: int, v: float) -> tuple[float, ...]:
    """Single impurity of strength v on site N/2 + 1 (1-based)."""
    _require_even(n_sites, "impurity_potential")
    pot = [0.0] * n_sites
    pot[n_sites // 2] = float(v)
    return tuple(pot)


def impurity_set_potential(n_sites: int, sites, v: float) -> tuple[float, ...]:
    """V on every (0-based) site of ``sites``, zero elsewhere."""
    pot = [0.0] * n_sites
    for s in sites:
        pot[s] = float(v)
    return tuple(pot)


SCENARIOS = {
    "harmonic": lambda n_sites, p, **kw: harmonic_potential(n_sites, p),
    "superlattice": lambda n_sites, p, period=2, **kw: superlattice_potential(n_sites, p, period),
    "impurity": lambda n_sites, p, **kw: impurity_potential(n_sites, p),
}


# -- parameter scans -------------------------------------------------------

@dataclass(frozen=True)
class ScanResult:
    params: tuple[float, ...]
    l_lda: tuple[float, ...]
    dl_dparam: tuple[float, ...]
    # True where the derivative is one-sided (the two grid endpoints)
    one_sided: tuple[bool, ...] = field(default=())
    # optional exact comparison values, filled when the density source has them
    l_exact: tuple[float, ...] | None = None


def finite_difference(x: Sequence[float], y: Sequence[float]) -> np.ndarray:
    """Central differences inside, first-order one-sided at the endpoints.

    Works on non-uniform grids (three-point central formula).
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    d = np.empty_like(y)
    h0 = x[1:-1] - x[:-2]
    h1 = x[2:] - x[1:-1]
    d[1:-1] = (h0**2 * y[2:] - h1**2 * y[:-2] + (h1**2 - h0**2) * y[1:-1]) / (h0 * h1 * (h0 + h1))
    d[0] = (y[1] - y[0]) / (x[1] - x[0])
    d[-1] = (y[-1] - y[-2]) / (x[-1] - x[-2])
    return d


DensitySource = Callable[[float, tuple], "DensityProfile | tuple[DensityProfile, float]"]


def scan_with_derivative(
    potential_of: Callable[[float], Sequence[float]],
    grid: Sequence[float],
    u: float,
    source: DensitySource,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
    threads: int = 1,
) -> ScanResult:
    """LDA entropy over a parameter grid plus its derivative.

    ``source(param, potential)`` returns a DensityProfile, or a tuple
    (DensityProfile, exact_average_L) when it can also report the exact
    value (the ED source does).
    """
    grid = [float(g) for g in grid]
    if len(grid) < 3:
        raise ConfigurationError(f"scan needs at least 3 grid points, got {len(grid)}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigurationError("scan grid must be strictly increasing")

    def one(p):
        try:
            got = source(p, tuple(potential_of(p)))
        except Exception as exc:
            raise DensitySourceError(f"density source failed at param={p!r}: {exc}") from exc
        profile, exact = got if isinstance(got, tuple) else (got, None)
        return l_lda(profile, u, cfg), exact

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, grid))
    else:
        rows = [one(p) for p in grid]
    values = [r[0] for r in rows]
    exact = [r[1] for r in rows]
    deriv = finite_difference(grid, values)
    flags = tuple(i in (0, len(grid) - 1) for i in range(len(grid)))
    return ScanResult(
        tuple(grid),
        tuple(values),
        tuple(float(d) for d in deriv),
        flags,
        tuple(exact) if all(e is not None for e in exact) else None,
    )
