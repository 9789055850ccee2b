"""Single-site linear entropy of the homogeneous 1D Hubbard model as an
explicit function of the density.

For a non-magnetic state the reduced density matrix of one site is
diag(w_up, w_down, w2, w0) with

    w_up = w_down = n/2 - w2,    w0 = 1 - n + w2,

so everything hinges on the double occupancy w2(n, u).  The repulsive
functional uses w2 = 0 or w2 = alpha(u), whichever gives the larger
entropy, and particle-hole symmetry for n > 1.  The attractive functional
uses w2 = n/2 - alpha(|u|) sin(pi n / 2).  u = 0 is evaluated exactly with
the uncorrelated w2 = n^2/4.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .specfun import DEFAULT_QUADRATURE, AlphaValue, QuadratureConfig, alpha

__all__ = [
    "InteractionPoint",
    "OccupationProbabilities",
    "Regime",
    "PROB_TOL",
    "DENSITY_CLAMP",
    "clamp_density",
    "linear_entropy",
    "linear_entropy_from_probs",
    "probs_from_double_occupancy",
    "probs_attractive",
    "probs_exact_limits",
    "l_hom_repulsive",
    "l_hom_attractive",
    "l_hom_exact_u0",
    "l_hom",
    "l_hom_scan",
]

PROB_TOL = 1e-12
# densities read from measurements may overshoot [0, 2] by this much
DENSITY_CLAMP = 1e-9
L_MAX = 0.75


def clamp_density(n: float, what: str = "n") -> float:
    n = float(n)
    if not math.isfinite(n):
        raise DomainError(f"{what} must be finite, got {n}")
    if -DENSITY_CLAMP <= n < 0.0:
        return 0.0
    if 2.0 < n <= 2.0 + DENSITY_CLAMP:
        return 2.0
    if not 0.0 <= n <= 2.0:
        raise DomainError(f"{what} = {n} outside [0, 2]")
    return n


@dataclass(frozen=True)
class InteractionPoint:
    n: float
    u: float

    def __post_init__(self):
        object.__setattr__(self, "n", clamp_density(self.n))
        if not math.isfinite(self.u):
            raise DomainError(f"u must be finite, got {self.u}")


@dataclass(frozen=True)
class OccupationProbabilities:
    """Probabilities of an empty, up-only, down-only and doubly occupied site."""

    w0: float
    w_up: float
    w_down: float
    w2: float

    def __post_init__(self):
        for name in ("w0", "w_up", "w_down", "w2"):
            w = getattr(self, name)
            if not (-PROB_TOL <= w <= 1.0 + PROB_TOL):
                raise ValidationError(f"{name} = {w!r} outside [0, 1]")
        total = self.w0 + self.w_up + self.w_down + self.w2
        if abs(total - 1.0) > PROB_TOL:
            raise ValidationError(f"probabilities sum to {total!r}, not 1")
        if abs(self.w_up - self.w_down) > PROB_TOL:
            raise ValidationError(
                f"magnetized state (w_up={self.w_up!r}, w_down={self.w_down!r})"
            )

    @property
    def density(self) -> float:
        return self.w_up + self.w_down + 2.0 * self.w2

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.w0, self.w_up, self.w_down, self.w2)


class Regime(enum.Enum):
    U_ZERO = "u_zero"
    U_PLUS_INF = "u_plus_inf"
    U_MINUS_INF = "u_minus_inf"


def linear_entropy(w0, w_up, w_down, w2):
    """1 - sum of squared probabilities (no validation, array friendly)."""
    return 1.0 - w0 * w0 - w_up * w_up - w_down * w_down - w2 * w2


def linear_entropy_from_probs(p: OccupationProbabilities) -> float:
    value = linear_entropy(*p.as_tuple())
    if -PROB_TOL <= value < 0.0:
        return 0.0
    if L_MAX < value <= L_MAX + PROB_TOL:
        return L_MAX
    if not 0.0 <= value <= L_MAX:
        raise ValidationError(f"linear entropy {value!r} outside [0, 0.75]")
    return value


def probs_from_double_occupancy(n: float, w2: float) -> OccupationProbabilities:
    """Non-magnetic probabilities for density ``n`` and double occupancy ``w2``."""
    w_sigma = 0.5 * n - w2
    return OccupationProbabilities(1.0 - n + w2, w_sigma, w_sigma, w2)


def _alpha_value(a) -> float:
    return a.value if isinstance(a, AlphaValue) else float(a)


def _half_sine(n: float) -> float:
    # sin(pi n / 2) via the mirror density: exact zero at n = 2, exact n <-> 2 - n symmetry
    return math.sin(0.5 * math.pi * min(n, 2.0 - n))


def probs_attractive(pt: InteractionPoint, alpha_abs_u) -> OccupationProbabilities:
    """Probabilities for u < 0 with w2 = n/2 - alpha(|u|) sin(pi n/2)."""
    if not pt.u < 0:
        raise DomainError(f"probs_attractive needs u < 0, got {pt.u}")
    a = _alpha_value(alpha_abs_u)
    w2 = 0.5 * pt.n - a * _half_sine(pt.n)
    return probs_from_double_occupancy(pt.n, w2)


def probs_exact_limits(n: float, regime: Regime | str) -> OccupationProbabilities:
    n = clamp_density(n)
    regime = Regime(regime)
    if regime is Regime.U_ZERO:
        w2 = 0.25 * n * n
    elif regime is Regime.U_PLUS_INF:
        w2 = max(0.0, n - 1.0)
    else:
        w2 = 0.5 * n
    return probs_from_double_occupancy(n, w2)


def _repulsive_below_half(n, a):
    # Theta(0) = 1; the bracket vanishes at n = a + 1/2 so the choice is harmless
    base = 2.0 * n - 1.5 * n * n
    bracket = (4.0 * n - 2.0) * a - 4.0 * a * a
    return np.where(n - a - 0.5 >= 0.0, base + bracket, base)


def l_hom_repulsive(pt: InteractionPoint, alpha_u) -> float:
    if not pt.u > 0:
        raise DomainError(f"l_hom_repulsive needs u > 0, got {pt.u}")
    a = _alpha_value(alpha_u)
    n = pt.n if pt.n <= 1.0 else 2.0 - pt.n
    return float(_repulsive_below_half(n, a))


def l_hom_attractive(pt: InteractionPoint, alpha_abs_u) -> float:
    if not pt.u < 0:
        raise DomainError(f"l_hom_attractive needs u < 0, got {pt.u}")
    a = _alpha_value(alpha_abs_u)
    s = _half_sine(pt.n)
    return pt.n - 0.5 * pt.n * pt.n + 2.0 * a * s - 4.0 * a * a * s * s


def l_hom_exact_u0(n: float) -> float:
    """Exact u = 0 value from w2 = n^2/4."""
    return linear_entropy_from_probs(probs_exact_limits(n, Regime.U_ZERO))


def l_hom(pt: InteractionPoint, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Dispatch on the sign of u."""
    if pt.u > 0:
        return l_hom_repulsive(pt, alpha(pt.u, cfg))
    if pt.u < 0:
        return l_hom_attractive(pt, alpha(-pt.u, cfg))
    return l_hom_exact_u0(pt.n)


def l_hom_scan(u: float, densities, cfg: QuadratureConfig = DEFAULT_QUADRATURE):
    """[(n, L)] pairs over ``densities`` at fixed u."""
    out = []
    a = alpha(abs(u), cfg) if u != 0 else None
    for n in densities:
        pt = InteractionPoint(n, u)
        if u > 0:
            value = l_hom_repulsive(pt, a)
        elif u < 0:
            value = l_hom_attractive(pt, a)
        else:
            value = l_hom_exact_u0(pt.n)
        out.append((pt.n, value))
    return out
