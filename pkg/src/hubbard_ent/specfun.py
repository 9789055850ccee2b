"""Bessel functions and the half-filling double occupancy alpha(u).

alpha(u) = 2 * int_0^inf J0(x) J1(x) g(x) dx,  g(x) = e^{ux/2} / (1 + e^{ux/2})^2

Since J0 J1 = -(1/2) d(J0^2)/dx, integrating by parts gives

alpha(u) = g(0) + int_0^inf J0(x)^2 g'(x) dx = 1/4 + int_0^inf J0^2 g' dx

which is what :func:`alpha` evaluates.  The weight g' is smooth, single
signed and decays like e^{-ux/2}, so a panel Gauss-Legendre rule with a
truncation point chosen from the weight converges without any special
treatment of the oscillations.  :func:`alpha_direct` integrates the
original form panel by panel between consecutive zeros of J0 J1 and is
kept as the cross-check route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special
from scipy.interpolate import PchipInterpolator

from .errors import ConvergenceError, DomainError

__all__ = [
    "QuadratureConfig",
    "AlphaValue",
    "AlphaTable",
    "bessel_j0",
    "bessel_j1",
    "alpha",
    "alpha_direct",
    "weight",
    "weight_derivative",
]


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    max_panels: int = 200_000
    truncation_floor: float = 1e-16

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_panels < 1:
            raise DomainError(f"max_panels must be >= 1, got {self.max_panels}")
        if not self.truncation_floor > 0:
            raise DomainError(
                f"truncation_floor must be positive, got {self.truncation_floor}"
            )


DEFAULT_QUADRATURE = QuadratureConfig()


@dataclass(frozen=True)
class AlphaValue:
    """alpha evaluated at coupling ``u``; ``error`` is the certified bound."""

    u: float
    value: float
    error: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.value <= 0.25):
            raise DomainError(f"alpha({self.u}) = {self.value} outside (0, 1/4]")

    def __float__(self):
        return self.value


def _check_arg(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("Bessel argument must be finite")
    if np.any(arr < 0):
        raise DomainError("Bessel argument must be non-negative")
    return arr


def bessel_j0(x):
    """J0(x) for finite x >= 0 (scalar or array)."""
    arr = _check_arg(x)
    out = special.j0(arr)
    return float(out) if out.ndim == 0 else out


def bessel_j1(x):
    """J1(x) for finite x >= 0 (scalar or array)."""
    arr = _check_arg(x)
    out = special.j1(arr)
    return float(out) if out.ndim == 0 else out


def weight(x, u):
    """g(x) = e^{ux/2}/(1+e^{ux/2})^2, written to avoid overflow."""
    e = np.exp(-0.5 * u * np.asarray(x, dtype=float))
    return e / (1.0 + e) ** 2


def weight_derivative(x, u):
    """dg/dx = -(u/2) e^{-ux/2} (1 - e^{-ux/2}) / (1 + e^{-ux/2})^3."""
    e = np.exp(-0.5 * u * np.asarray(x, dtype=float))
    return -0.5 * u * e * (1.0 - e) / (1.0 + e) ** 3


def _truncation_point(u: float, floor: float) -> float:
    # g(x) <= e^{-ux/2}, and the discarded tail is bounded by g(x_max)
    # because |J0^2| <= 1 and g' is single signed.
    return 2.0 * math.log(1.0 / floor) / u


_GL_LO = np.polynomial.legendre.leggauss(16)
_GL_HI = np.polynomial.legendre.leggauss(24)


def _panel_sums(f, a, b, rule):
    nodes, wts = rule
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = mid[:, None] + half[:, None] * nodes[None, :]
    return half * (f(x) @ wts)


def _adaptive_panels(f, edges, tol, max_panels):
    """Sum f over the panels given by ``edges``, bisecting until the
    16/24-point Gauss-Legendre disagreement is below ``tol`` in total.

    Returns (integral, error_estimate, panels_used).
    """
    a = edges[:-1].copy()
    b = edges[1:].copy()
    span = edges[-1] - edges[0]
    total = 0.0
    err = 0.0
    used = len(a)
    while len(a):
        if used > max_panels:
            raise ConvergenceError(
                f"quadrature exceeded {max_panels} panels", achieved=err
            )
        hi = _panel_sums(f, a, b, _GL_HI)
        lo = _panel_sums(f, a, b, _GL_LO)
        diff = np.abs(hi - lo)
        ok = diff <= tol * (b - a) / span
        total += float(np.sum(hi[ok]))
        err += float(np.sum(diff[ok]))
        a, b = a[~ok], b[~ok]
        mid = 0.5 * (a + b)
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
        used += len(a) // 2
    return total, err, used


def alpha(u: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> AlphaValue:
    """Exact half-filling double occupancy of the repulsive 1D Hubbard chain.

    Raises DomainError for u < 0 (pass |u| for attractive couplings) and
    ConvergenceError if more than ``cfg.max_panels`` panels are needed,
    which happens for u below roughly 1e-4 with the default config.
    """
    u = float(u)
    if not math.isfinite(u) or u < 0:
        raise DomainError(f"alpha needs finite u >= 0, got {u}")
    return _alpha_cached(u, cfg)


@lru_cache(maxsize=4096)
def _alpha_cached(u: float, cfg: QuadratureConfig) -> AlphaValue:
    if u == 0.0:
        return AlphaValue(0.0, 0.25, 0.0)
    x_max = _truncation_point(u, cfg.truncation_floor)
    tail = float(weight(x_max, u))
    width = min(0.5 * math.pi, 2.0 / u)
    n_panels = max(1, math.ceil(x_max / width))
    if n_panels > cfg.max_panels:
        raise ConvergenceError(
            f"alpha({u}): {n_panels} panels needed, cap is {cfg.max_panels}",
            achieved=float("nan"),
        )
    edges = np.linspace(0.0, x_max, n_panels + 1)

    def f(x):
        return special.j0(x) ** 2 * weight_derivative(x, u)

    budget = max(cfg.abs_tol - tail, 0.5 * cfg.abs_tol)
    integral, err, _ = _adaptive_panels(f, edges, 0.5 * budget, cfg.max_panels)
    total_err = err + tail
    if total_err > cfg.abs_tol:
        raise ConvergenceError(
            f"alpha({u}) reached only {total_err:.3g}", achieved=total_err
        )
    return AlphaValue(u, 0.25 + integral, total_err)


def _product_zeros(x_max: float) -> np.ndarray:
    """Sorted zeros of J0(x) J1(x) on (0, x_max]."""
    k = int(x_max / math.pi) + 2
    z = np.concatenate([special.jn_zeros(0, k), special.jn_zeros(1, k)])
    z.sort()
    return z[z < x_max]


def alpha_direct(
    u: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE, max_halvings: int = 12
) -> float:
    """alpha(u) from the original J0 J1 form, for cross-checking.

    Panels run between consecutive zeros of J0 J1; every panel is split
    in halves repeatedly until the sum stops changing by more than
    ``cfg.abs_tol / 4``.  Only meant for u > 0 (at u = 0 the integrand
    decays like 1/x and the sum converges too slowly to be useful).
    """
    u = float(u)
    if not math.isfinite(u) or u <= 0:
        raise DomainError(f"alpha_direct needs finite u > 0, got {u}")
    x_max = _truncation_point(u, cfg.truncation_floor)
    edges = np.concatenate([[0.0], _product_zeros(x_max), [x_max]])

    def f(x):
        return 2.0 * special.j0(x) * special.j1(x) * weight(x, u)

    prev = None
    for level in range(max_halvings + 1):
        parts = 2**level
        fine = np.concatenate(
            [np.linspace(a, b, parts + 1)[:-1] for a, b in zip(edges[:-1], edges[1:])]
            + [[x_max]]
        )
        val = float(np.sum(_panel_sums(f, fine[:-1], fine[1:], _GL_HI)))
        if prev is not None and abs(val - prev) <= 0.25 * cfg.abs_tol:
            return val
        prev = val
    raise ConvergenceError(f"alpha_direct({u}) did not stabilise", achieved=float("nan"))


class AlphaTable:
    """alpha tabulated on a u-grid and interpolated monotonically (PCHIP).

    Built once, then read-only; lookups are safe from several threads.
    Values outside the grid fall back to direct evaluation.
    """

    def __init__(self, grid, cfg: QuadratureConfig = DEFAULT_QUADRATURE):
        grid = np.asarray(sorted(set(float(g) for g in grid)))
        if len(grid) < 2:
            raise DomainError("AlphaTable needs at least two grid points")
        self.cfg = cfg
        self.grid = grid
        self.values = np.array([alpha(g, cfg).value for g in grid])
        self._interp = PchipInterpolator(grid, self.values, extrapolate=False)

    @classmethod
    def default(cls, u_max: float = 50.0, cfg: QuadratureConfig = DEFAULT_QUADRATURE):
        # denser near small u where alpha bends fastest
        grid = np.unique(
            np.concatenate(
                [
                    np.linspace(0.0, 0.1, 41),
                    np.geomspace(0.1, u_max, 1200),
                ]
            )
        )
        return cls(grid, cfg)

    def __call__(self, u: float) -> float:
        u = abs(float(u))
        if self.grid[0] <= u <= self.grid[-1]:
            return float(self._interp(u))
        return alpha(u, self.cfg).value

    def midpoint_error(self) -> float:
        """Largest |interpolated - direct| over all grid-interval midpoints."""
        mids = 0.5 * (self.grid[:-1] + self.grid[1:])
        direct = np.array([alpha(m, self.cfg).value for m in mids])
        return float(np.max(np.abs(self._interp(mids) - direct)))
