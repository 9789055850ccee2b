"""Disordered-impurity ensembles.

Every realization places exactly round(C N / 100) impurities of strength V.
The sites come from a generator seeded by (master_seed, sample_index)
alone, so a realization does not depend on which worker computed it or
in which order.  The same site set is reused for every V of the grid.

A complemented spec uses the set complements of the realizations of the
spec with concentration 100 - C.  Since V 1_S = V - V 1_{S^c} and a
constant shift does not change the ground state at fixed particle
number, (C, V, S) and (100 - C, -V, S^c) give identical densities.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, DensitySourceError, HubbardEntError
from .lattice import Boundary, impurity_set_potential, l_lda
from .sources import EDSource, EnsembleDirectorySource
from .specfun import DEFAULT_QUADRATURE, QuadratureConfig

log = logging.getLogger(__name__)

MAX_FAILED_FRACTION = 0.05
_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class EnsembleSpec:
    n_sites: int
    n_up: int
    n_down: int
    u: float
    concentration: float
    strength_grid: tuple[float, ...]
    samples: int
    master_seed: int
    boundary: Boundary = Boundary.PERIODIC
    complemented: bool = False

    def __post_init__(self):
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        object.__setattr__(self, "strength_grid", tuple(float(v) for v in self.strength_grid))
        if not 0.0 <= self.concentration <= 100.0:
            raise ConfigurationError(f"concentration {self.concentration} outside [0, 100]")
        if self.samples < 1:
            raise ConfigurationError(f"samples must be >= 1, got {self.samples}")
        if self.n_sites < 2:
            raise ConfigurationError(f"n_sites must be >= 2, got {self.n_sites}")
        if not (0 <= self.n_up <= self.n_sites and 0 <= self.n_down <= self.n_sites):
            raise ConfigurationError("particle numbers outside [0, n_sites]")
        if not self.strength_grid:
            raise ConfigurationError("empty strength grid")

    @property
    def impurity_count(self) -> int:
        if self.complemented:
            return self.n_sites - _count(100.0 - self.concentration, self.n_sites)
        return _count(self.concentration, self.n_sites)


def _count(concentration: float, n_sites: int) -> int:
    # half-up rounding, so C and 100 - C split N exactly when C N / 100 ends in .5
    return int(math.floor(concentration * n_sites / 100.0 + 0.5))


def sample_seed(master_seed: int, sample_index: int) -> int:
    """64-bit seed of one realization, derived by SeedSequence hashing."""
    ss = np.random.SeedSequence([int(master_seed) & _SEED_MASK, int(sample_index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def realize_impurities(spec: EnsembleSpec, sample_index: int) -> tuple[int, ...]:
    """Sorted 0-based impurity sites of one realization."""
    if not 0 <= sample_index < spec.samples:
        raise ConfigurationError(f"sample_index {sample_index} outside [0, {spec.samples})")
    base_conc = 100.0 - spec.concentration if spec.complemented else spec.concentration
    m = _count(base_conc, spec.n_sites)
    rng = np.random.default_rng(sample_seed(spec.master_seed, sample_index))
    chosen = sorted(int(s) for s in rng.choice(spec.n_sites, size=m, replace=False))
    if spec.complemented:
        chosen_set = set(chosen)
        return tuple(i for i in range(spec.n_sites) if i not in chosen_set)
    return tuple(chosen)


def complement_spec(spec: EnsembleSpec) -> EnsembleSpec:
    return replace(
        spec,
        concentration=100.0 - spec.concentration,
        strength_grid=tuple(-v for v in spec.strength_grid),
        complemented=not spec.complemented,
    )


@dataclass(frozen=True)
class RealizationRecord:
    sample_index: int
    seed: int
    sites: tuple[int, ...]
    strength: float
    l_lda: float | None
    l_exact: float | None = None
    error: str | None = None


@dataclass(frozen=True)
class StrengthPoint:
    strength: float
    mean_l: float
    stderr: float
    n_samples: int
    n_failed: int = 0


@dataclass(frozen=True)
class EnsembleResult:
    spec: EnsembleSpec
    points: tuple[StrengthPoint, ...]
    records: tuple[RealizationRecord, ...] = field(repr=False)

    @property
    def mean_l(self) -> np.ndarray:
        return np.array([p.mean_l for p in self.points])


def mean_and_stderr(values) -> tuple[float, float]:
    """Mean and sample standard error, summed in the given order.

    Deviations from the first value are accumulated, so identical inputs
    return that value exactly with zero error.
    """
    values = [float(v) for v in values]
    n = len(values)
    if n == 0:
        return math.nan, math.nan
    x0 = values[0]
    dev = [v - x0 for v in values]
    mean_dev = math.fsum(dev) / n
    mean = x0 + mean_dev
    if n < 2:
        return mean, math.nan
    var = math.fsum((d - mean_dev) ** 2 for d in dev) / (n - 1)
    return mean, math.sqrt(var) / math.sqrt(n)


def _evaluate(task):
    spec, source, cfg, k, v = task
    sites = realize_impurities(spec, k)
    seed = sample_seed(spec.master_seed, k)
    try:
        if isinstance(source, EnsembleDirectorySource):
            profile, exact = source.load(k, v), None
        else:
            pot = impurity_set_potential(spec.n_sites, sites, v)
            profile, exact = source(v, pot)
        if len(profile) != spec.n_sites:
            raise DensitySourceError(f"profile has {len(profile)} sites, expected {spec.n_sites}")
        return RealizationRecord(k, seed, sites, v, l_lda(profile, spec.u, cfg), exact)
    except HubbardEntError as exc:
        return RealizationRecord(k, seed, sites, v, None, None, f"{type(exc).__name__}: {exc}")


def make_source(spec: EnsembleSpec, source="ed"):
    """'ed', a path-like directory, or an already built source."""
    if source == "ed":
        return EDSource(spec.n_sites, spec.n_up, spec.n_down, spec.u, spec.boundary)
    if isinstance(source, (EDSource, EnsembleDirectorySource)):
        return source
    return EnsembleDirectorySource(source)


def ensemble_curve(spec: EnsembleSpec, source="ed", threads: int = 1,
                   cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> EnsembleResult:
    """Mean LDA entanglement and standard error for every strength in the grid.

    Failed realizations are kept in the audit records and left out of the
    averages; more than 5% failures overall aborts the run.
    """
    source = make_source(spec, source)
    tasks = [(spec, source, cfg, k, v) for v in spec.strength_grid for k in range(spec.samples)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(_evaluate, tasks, chunksize=max(1, len(tasks) // (4 * threads))))
    else:
        records = [_evaluate(t) for t in tasks]

    failed = [r for r in records if r.error is not None]
    if len(failed) > MAX_FAILED_FRACTION * len(records):
        raise DensitySourceError(
            f"{len(failed)} of {len(records)} realizations failed; first: {failed[0].error}"
        )
    for r in failed:
        log.warning("excluded sample %d at V=%s: %s", r.sample_index, r.strength, r.error)

    points = []
    for i, v in enumerate(spec.strength_grid):
        block = records[i * spec.samples:(i + 1) * spec.samples]
        good = [r.l_lda for r in block if r.error is None]
        mean, err = mean_and_stderr(good)
        points.append(StrengthPoint(v, mean, err, len(good), len(block) - len(good)))
    return EnsembleResult(spec, tuple(points), tuple(records))


def plateau_windows(strengths, values, rel_variation: float = 0.03):
    """Maximal contiguous windows over which (max - min)/max < rel_variation.

    Returns (width, start, stop) triples sorted widest first.
    """
    x = np.asarray(strengths, float)
    y = np.asarray(values, float)
    out = []
    for i in range(len(x)):
        for j in range(len(x) - 1, i, -1):
            seg = y[i:j + 1]
            if (seg.max() - seg.min()) < rel_variation * abs(seg.max()):
                out.append((float(x[j] - x[i]), float(x[i]), float(x[j])))
                break
    out.sort(key=lambda t: -t[0])
    return out
