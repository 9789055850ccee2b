"""Where density profiles come from: exact diagonalization or files.

A source is called as ``source(param, potential)`` and returns either a
DensityProfile or (DensityProfile, exact average L).  Both sources are
picklable so they can be shipped to worker processes.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from pathlib import Path

from .csvio import read_density_csv
from .ed import solve
from .errors import ConfigurationError, DensitySourceError
from .lattice import Boundary, LatticeSpec


class DegenerateGroundState(DensitySourceError):
    pass


@dataclass(frozen=True)
class EDSource:
    n_sites: int
    n_up: int
    n_down: int
    u: float
    boundary: Boundary = Boundary.OPEN
    tol: float = 1e-10

    def __call__(self, param, potential):
        spec = LatticeSpec(self.n_sites, self.boundary, tuple(potential), self.n_up, self.n_down)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = solve(spec, self.u, self.tol)
        if res.ground.degenerate:
            raise DegenerateGroundState(
                f"degenerate ground state (gap {res.ground.gap_estimate:.2e})"
            )
        return res.probabilities.profile(), res.probabilities.average_entropy


_NUM = r"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"


def _index_files(path: Path, pattern: re.Pattern):
    if not path.is_dir():
        raise ConfigurationError(f"density directory {path} does not exist")
    found = {}
    for f in sorted(path.iterdir()):
        m = pattern.fullmatch(f.name)
        if m:
            found[tuple(float(g) for g in m.groups())] = f
    return found


def _lookup(found, key, what):
    for k, f in found.items():
        if all(abs(a - b) <= 1e-9 * max(1.0, abs(b)) for a, b in zip(k, key)):
            return f
    raise DensitySourceError(f"no density file for {what}")


@dataclass(frozen=True)
class ScanDirectorySource:
    """One file ``param_<value>.csv`` per scan parameter value."""

    path: Path

    def __call__(self, param, potential=None):
        found = _index_files(Path(self.path), re.compile(rf"param_{_NUM}\.csv"))
        return read_density_csv(_lookup(found, (float(param),), f"param={param}"))


@dataclass(frozen=True)
class EnsembleDirectorySource:
    """One file ``sample_<k>_V_<v>.csv`` per realization and strength."""

    path: Path

    def load(self, sample_index: int, strength: float):
        found = _index_files(Path(self.path), re.compile(rf"sample_(\d+)_V_{_NUM}\.csv"))
        return read_density_csv(
            _lookup(found, (float(sample_index), float(strength)),
                    f"sample {sample_index}, V={strength}")
        )


def parse_source(text: str):
    """'ed' or 'dir:<path>' as used on the command line."""
    if text == "ed":
        return "ed", None
    if text.startswith("dir:") and len(text) > 4:
        return "dir", Path(text[4:])
    raise ConfigurationError(f"source must be 'ed' or 'dir:<path>', got {text!r}")
