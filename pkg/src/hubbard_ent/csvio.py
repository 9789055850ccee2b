"""Density CSV files and number formatting shared by every output."""

from __future__ import annotations

import csv
import io
from pathlib import Path

from .errors import ValidationError
from .lattice import DensityProfile

DENSITY_HEADER = ("site", "density")


def fmt(x: float) -> str:
    """Shortest repr that round-trips (17 significant digits at most)."""
    x = float(x)
    if x == 0.0:
        return "0.0"
    return repr(x)


def format_density_csv(profile: DensityProfile) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DENSITY_HEADER)
    for i, n in enumerate(profile.densities, start=1):
        w.writerow((i, fmt(n)))
    return buf.getvalue()


def write_density_csv(path, profile: DensityProfile) -> None:
    Path(path).write_text(format_density_csv(profile))


def parse_density_csv(text: str, source: str = "<string>") -> DensityProfile:
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows or tuple(c.strip() for c in rows[0]) != DENSITY_HEADER:
        raise ValidationError(f"{source}: header must be 'site,density'")
    densities = []
    for line, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise ValidationError(f"{source}:{line}: expected 2 columns, got {len(row)}")
        try:
            site, n = int(row[0]), float(row[1])
        except ValueError:
            raise ValidationError(f"{source}:{line}: unparsable row {row!r}") from None
        if site != len(densities) + 1:
            raise ValidationError(
                f"{source}:{line}: sites must be 1-based ascending, got {site}"
            )
        densities.append(n)
    try:
        return DensityProfile(tuple(densities))
    except ValidationError as exc:
        raise ValidationError(f"{source}: {exc}") from None


def read_density_csv(path) -> DensityProfile:
    path = Path(path)
    return parse_density_csv(path.read_text(), str(path))


def read_potential_csv(path) -> tuple[float, ...]:
    """Per-site potential in the same two-column layout (header 'site,potential')."""
    path = Path(path)
    rows = [r for r in csv.reader(io.StringIO(path.read_text())) if r]
    if not rows or [c.strip() for c in rows[0]] != ["site", "potential"]:
        raise ValidationError(f"{path}: header must be 'site,potential'")
    values = []
    for line, row in enumerate(rows[1:], start=2):
        try:
            site, v = int(row[0]), float(row[1])
        except (ValueError, IndexError):
            raise ValidationError(f"{path}:{line}: unparsable row {row!r}") from None
        if site != len(values) + 1:
            raise ValidationError(f"{path}:{line}: sites must be 1-based ascending")
        values.append(v)
    return tuple(values)
