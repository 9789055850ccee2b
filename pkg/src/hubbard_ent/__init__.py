"""Density functional for the single-site entanglement of the 1D Hubbard
model, its LDA extension to inhomogeneous chains, disorder ensembles and
an exact-diagonalization oracle."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    ConfigurationError,
    ConvergenceError,
    DensitySourceError,
    DomainError,
    HubbardEntError,
    ResourceError,
    ValidationError,
)
from .functional import (  # noqa: F401
    InteractionPoint,
    OccupationProbabilities,
    l_hom,
    linear_entropy_from_probs,
)
from .lattice import DensityProfile, LatticeSpec, l_lda  # noqa: F401
from .specfun import QuadratureConfig, alpha  # noqa: F401
