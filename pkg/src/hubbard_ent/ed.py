"""Exact diagonalization of the inhomogeneous Hubbard chain

    H = -sum_{<ij>,s} (c+_is c_js + h.c.) + u sum_i n_iu n_id + sum_{i,s} V_i n_is

in a sector of fixed (N_up, N_down).

Basis states are pairs of bitmasks (bit i = site i, 0-based).  The
fermionic order is all up operators before all down operators, sites
ascending within each spin.  With that order a down-spin hop passes an
even number of up operators, so the Hamiltonian splits as

    H = T_up (x) 1 + 1 (x) T_down + D

and is applied matrix-free on the (D_up, D_down) reshaped vector.  Index
of the pair (up[a], down[b]) is a * D_down + b, each spin sector sorted
ascending by bitmask.

For an eigenstate of fixed N_up, N_down the single-site reduced density
matrix is diagonal in (empty, up, down, double), so site probabilities
are plain sums of |amplitude|^2.
"""

from __future__ import annotations

import itertools
import logging
import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .errors import ConvergenceError, DomainError, ResourceError
from .functional import OccupationProbabilities, linear_entropy
from .lattice import DensityProfile, LatticeSpec

log = logging.getLogger(__name__)

DEFAULT_DIMENSION_CAP = 5_000_000
DENSE_LIMIT = 400
DEGENERACY_GAP = 1e-8


def _sector_states(n_sites: int, n_particles: int) -> np.ndarray:
    states = [sum(1 << i for i in occ) for occ in itertools.combinations(range(n_sites), n_particles)]
    return np.array(sorted(states), dtype=np.int64)


def _bits(states: np.ndarray, n_sites: int) -> np.ndarray:
    return ((states[:, None] >> np.arange(n_sites)[None, :]) & 1).astype(float)


@dataclass(frozen=True)
class FockBasis:
    n_sites: int
    n_up: int
    n_down: int
    up_states: np.ndarray
    down_states: np.ndarray

    @property
    def dim_up(self) -> int:
        return len(self.up_states)

    @property
    def dim_down(self) -> int:
        return len(self.down_states)

    @property
    def dimension(self) -> int:
        return self.dim_up * self.dim_down

    @cached_property
    def _lookup(self):
        return (
            {int(s): i for i, s in enumerate(self.up_states)},
            {int(s): i for i, s in enumerate(self.down_states)},
        )

    def state(self, index: int) -> tuple[int, int]:
        a, b = divmod(int(index), self.dim_down)
        return int(self.up_states[a]), int(self.down_states[b])

    def index(self, up: int, down: int) -> int:
        up_idx, dn_idx = self._lookup
        try:
            return up_idx[up] * self.dim_down + dn_idx[down]
        except KeyError:
            raise DomainError(f"state ({up:b}, {down:b}) not in basis") from None

    @cached_property
    def up_bits(self) -> np.ndarray:
        return _bits(self.up_states, self.n_sites)

    @cached_property
    def down_bits(self) -> np.ndarray:
        return _bits(self.down_states, self.n_sites)


def build_basis(spec: LatticeSpec, cap: int = DEFAULT_DIMENSION_CAP) -> FockBasis:
    dim = math.comb(spec.n_sites, spec.n_up) * math.comb(spec.n_sites, spec.n_down)
    if dim > cap:
        raise ResourceError(f"basis dimension {dim} exceeds cap {cap}")
    return FockBasis(
        spec.n_sites,
        spec.n_up,
        spec.n_down,
        _sector_states(spec.n_sites, spec.n_up),
        _sector_states(spec.n_sites, spec.n_down),
    )


def hopping_matrix(states: np.ndarray, spec: LatticeSpec) -> sparse.csr_matrix:
    """Single-spin kinetic term on one sector, with fermionic signs."""
    index = {int(s): k for k, s in enumerate(states)}
    rows, cols, vals = [], [], []
    for k, s in enumerate(states):
        s = int(s)
        for i, j in spec.bonds():
            occ_i = (s >> i) & 1
            occ_j = (s >> j) & 1
            if occ_i == occ_j:
                continue
            t = s ^ (1 << i) ^ (1 << j)
            between = bin(s & (((1 << j) - 1) ^ ((1 << (i + 1)) - 1))).count("1")
            rows.append(index[t])
            cols.append(k)
            vals.append(-1.0 if between % 2 == 0 else 1.0)
    n = len(states)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


class HubbardOperator:
    """Matrix-free H for one (basis, spec, u)."""

    def __init__(self, basis: FockBasis, spec: LatticeSpec, u: float):
        if (basis.n_sites, basis.n_up, basis.n_down) != (spec.n_sites, spec.n_up, spec.n_down):
            raise DomainError("basis and lattice spec describe different sectors")
        self.basis = basis
        self.spec = spec
        self.u = float(u)
        self.t_up = hopping_matrix(basis.up_states, spec)
        self.t_down = hopping_matrix(basis.down_states, spec)
        v = np.asarray(spec.potential)
        self.double = basis.up_bits @ basis.down_bits.T
        self.diag = (
            self.u * self.double
            + (basis.up_bits @ v)[:, None]
            + (basis.down_bits @ v)[None, :]
        )

    @property
    def shape(self):
        d = self.basis.dimension
        return (d, d)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[0] != self.basis.dimension:
            raise DomainError(f"vector of length {x.shape[0]} for basis of {self.basis.dimension}")
        X = x.reshape(self.basis.dim_up, self.basis.dim_down)
        Y = self.t_up @ X + (self.t_down @ X.T).T + self.diag * X
        return Y.reshape(-1)

    def dense(self) -> np.ndarray:
        return (
            sparse.kron(self.t_up, sparse.identity(self.basis.dim_down))
            + sparse.kron(sparse.identity(self.basis.dim_up), self.t_down)
            + sparse.diags(self.diag.reshape(-1))
        ).toarray()

    def as_linear_operator(self) -> LinearOperator:
        return LinearOperator(self.shape, matvec=self.matvec, dtype=float)


def apply_hamiltonian(basis: FockBasis, spec: LatticeSpec, u: float, x) -> np.ndarray:
    return HubbardOperator(basis, spec, u).matvec(x)


@dataclass(frozen=True)
class GroundStateResult:
    energy: float
    vector: np.ndarray
    gap_estimate: float
    converged: bool
    residual: float
    degenerate: bool


def _start_vector(dim: int) -> np.ndarray:
    # fixed, generic start vector: determinism without an RNG
    k = np.arange(dim, dtype=float)
    v = 1.0 + 0.5 * np.sin(0.7 * k + 0.3) + 0.25 * np.cos(1.9 * k)
    return v / np.linalg.norm(v)


def ground_state(basis: FockBasis, spec: LatticeSpec, u: float,
                 tol: float = 1e-9, maxiter: int | None = None) -> GroundStateResult:
    """Lowest eigenpair (and the next eigenvalue for a gap estimate).

    Small problems use dense diagonalization; larger ones implicitly
    restarted Lanczos (ARPACK) on the matrix-free operator.
    """
    op = HubbardOperator(basis, spec, u)
    dim = basis.dimension
    if dim <= DENSE_LIMIT:
        w, v = np.linalg.eigh(op.dense())
        energies, vec = w[:2], v[:, 0]
    else:
        try:
            w, v = eigsh(op.as_linear_operator(), k=2, which="SA", tol=1e-13,
                         v0=_start_vector(dim), maxiter=maxiter or 20 * dim)
        except ArpackNoConvergence as exc:
            raise ConvergenceError(f"Lanczos did not converge (dim={dim})") from exc
        order = np.argsort(w)
        energies, vec = w[order], v[:, order[0]]
    vec = vec / np.linalg.norm(vec)
    # fix the overall sign so results are reproducible
    pivot = np.argmax(np.abs(vec) > 1e-8 * np.max(np.abs(vec)))
    if vec[pivot] < 0:
        vec = -vec
    energy = float(energies[0])
    residual = float(np.linalg.norm(op.matvec(vec) - energy * vec))
    gap = float(energies[1] - energies[0]) if len(energies) > 1 else math.inf
    degenerate = gap < DEGENERACY_GAP
    if degenerate:
        warnings.warn(
            f"ground state degenerate within {gap:.2e} for {spec.n_sites} sites, "
            f"{spec.n_up}u/{spec.n_down}d, u={u}: site quantities are basis dependent",
            RuntimeWarning,
            stacklevel=2,
        )
    if residual > tol:
        raise ConvergenceError(f"ground-state residual {residual:.3g} above {tol:.3g}",
                               achieved=residual)
    return GroundStateResult(energy, vec, gap, True, residual, degenerate)


@dataclass(frozen=True)
class SiteProbabilities:
    """Per-site occupation probabilities of a many-body state (arrays over sites)."""

    w0: np.ndarray
    w_up: np.ndarray
    w_down: np.ndarray
    w2: np.ndarray

    @property
    def n_sites(self) -> int:
        return len(self.w0)

    @property
    def densities(self) -> np.ndarray:
        return self.w_up + self.w_down + 2.0 * self.w2

    @property
    def entropies(self) -> np.ndarray:
        return linear_entropy(self.w0, self.w_up, self.w_down, self.w2)

    @property
    def average_entropy(self) -> float:
        return float(np.mean(self.entropies))

    def site(self, i: int) -> OccupationProbabilities:
        return OccupationProbabilities(
            float(self.w0[i]), float(self.w_up[i]), float(self.w_down[i]), float(self.w2[i])
        )

    def profile(self) -> DensityProfile:
        return DensityProfile(tuple(float(n) for n in self.densities))


def site_probabilities(result: GroundStateResult, basis: FockBasis) -> SiteProbabilities:
    prob = (result.vector**2).reshape(basis.dim_up, basis.dim_down)
    bu, bd = basis.up_bits, basis.down_bits
    w2 = np.einsum("ai,ab,bi->i", bu, prob, bd)
    n_up = bu.T @ prob.sum(axis=1)
    n_down = bd.T @ prob.sum(axis=0)
    w_up = n_up - w2
    w_down = n_down - w2
    w0 = 1.0 - w_up - w_down - w2
    return SiteProbabilities(w0, w_up, w_down, w2)


@dataclass(frozen=True)
class EDResult:
    """Everything the CLI reports for one exact diagonalization."""

    spec: LatticeSpec
    u: float
    ground: GroundStateResult
    probabilities: SiteProbabilities


def solve(spec: LatticeSpec, u: float, tol: float = 1e-9,
          cap: int = DEFAULT_DIMENSION_CAP) -> EDResult:
    basis = build_basis(spec, cap)
    gs = ground_state(basis, spec, u, tol)
    return EDResult(spec, float(u), gs, site_probabilities(gs, basis))


@dataclass(frozen=True)
class HellmannFeynmanCheck:
    residual: float
    derivative: float
    double_occupancy: float
    skipped: bool = False
    reason: str = ""


def hellmann_feynman_check(spec: LatticeSpec, u: float, du: float,
                           tol: float = 1e-11) -> HellmannFeynmanCheck:
    """Compare dE0/du (central difference) with sum_i w2_i at u."""
    if not du > 0:
        raise DomainError(f"du must be positive, got {du}")
    basis = build_basis(spec)
    results = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for x in (u - du, u, u + du):
            results[x] = ground_state(basis, spec, x, tol)
    if any(r.degenerate for r in results.values()):
        return HellmannFeynmanCheck(math.nan, math.nan, math.nan, True,
                                    "degenerate ground state on the stencil")
    slope = (results[u + du].energy - results[u - du].energy) / (2 * du)
    w2 = float(np.sum(site_probabilities(results[u], basis).w2))
    return HellmannFeynmanCheck(abs(slope - w2), slope, w2)
