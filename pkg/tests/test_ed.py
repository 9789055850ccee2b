import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hubbard_ent.ed import (
    HubbardOperator,
    apply_hamiltonian,
    build_basis,
    ground_state,
    hellmann_feynman_check,
    hopping_matrix,
    site_probabilities,
    solve,
)
from hubbard_ent.errors import DomainError, ResourceError
from hubbard_ent.functional import InteractionPoint, l_hom
from hubbard_ent.lattice import LatticeSpec


def chain(n, up, down, boundary="open", potential=None):
    return LatticeSpec(n, boundary, potential or (0.0,) * n, up, down)


def two_site_energy(u):
    # 2-site Hubbard dimer with one electron of each spin
    return 0.5 * (u - math.sqrt(u * u + 16.0))


@pytest.mark.parametrize("spec, dim", [
    (chain(2, 1, 1), 4),
    (chain(8, 3, 3), 3136),
    (chain(5, 0, 0), 1),
])
def test_basis_dimension(spec, dim):
    assert build_basis(spec).dimension == dim


def test_basis_roundtrip_and_order():
    basis = build_basis(chain(6, 2, 3))
    for k in range(basis.dimension):
        up, dn = basis.state(k)
        assert bin(up).count("1") == 2 and bin(dn).count("1") == 3
        assert basis.index(up, dn) == k
    assert list(basis.up_states) == sorted(basis.up_states)
    with pytest.raises(DomainError):
        basis.index(0b1, 0b111)


def test_basis_cap():
    with pytest.raises(ResourceError):
        build_basis(chain(12, 6, 6), cap=1000)


def test_hopping_signs_periodic_wrap():
    # two spinless fermions on a 3-site ring: wrap hop passes one fermion
    spec = chain(3, 2, 0, "periodic")
    basis = build_basis(spec)
    t = hopping_matrix(basis.up_states, spec).toarray()
    assert np.allclose(t, t.T)
    # free-fermion ring energies -2cos(2 pi m/3): two lowest = -2 + 1
    w = np.linalg.eigvalsh(t)
    assert w[0] == pytest.approx(-1.0, abs=1e-12)


@pytest.mark.parametrize("spec, u", [
    (chain(6, 2, 3, "open", (0.3, -1.0, 0.0, 2.0, 0.1, 0.0)), 3.0),
    (chain(6, 3, 3, "periodic"), -2.0),
])
def test_hermiticity(spec, u):
    rng = np.random.default_rng(0)
    basis = build_basis(spec)
    op = HubbardOperator(basis, spec, u)
    for _ in range(20):
        x, y = rng.standard_normal((2, basis.dimension))
        assert abs(x @ op.matvec(y) - y @ op.matvec(x)) <= 1e-10


def test_operator_matches_dense():
    spec = chain(4, 2, 1, "periodic", (0.1, 0.2, -0.3, 0.0))
    op = HubbardOperator(build_basis(spec), spec, 2.5)
    x = np.arange(op.shape[0], dtype=float)
    assert np.allclose(op.dense() @ x, op.matvec(x))
    with pytest.raises(DomainError):
        apply_hamiltonian(op.basis, spec, 2.5, np.ones(3))


@pytest.mark.parametrize("u", [0.0, 8.0, 2.0])
def test_two_site_energies(u):
    res = solve(chain(2, 1, 1), u)
    assert res.ground.energy == pytest.approx(two_site_energy(u), abs=1e-9)


def test_single_site_full():
    res = solve(LatticeSpec(1, "open", (0.7,), 1, 1), 5.0)
    assert res.ground.energy == pytest.approx(5.0 + 2 * 0.7, abs=1e-12)
    assert res.probabilities.site(0).as_tuple() == pytest.approx((0, 0, 0, 1), abs=1e-12)
    assert res.probabilities.entropies[0] == pytest.approx(0.0, abs=1e-12)


def test_four_site_ring_free():
    with pytest.warns(RuntimeWarning, match="degenerate"):
        res = solve(chain(4, 2, 2, "periodic"), 0.0)
    assert res.ground.energy == pytest.approx(-4.0, abs=1e-9)
    assert res.ground.degenerate


def test_empty_lattice():
    res = solve(chain(4, 0, 0), 3.0)
    assert res.ground.energy == 0.0
    assert res.ground.vector.tolist() == [1.0]
    assert np.all(res.probabilities.w0 == 1.0)


def test_lanczos_path_matches_dense():
    spec = chain(8, 3, 3, "open", tuple(0.1 * i for i in range(8)))
    basis = build_basis(spec)
    assert basis.dimension > 400
    gs = ground_state(basis, spec, 4.0)
    dense = np.linalg.eigvalsh(HubbardOperator(basis, spec, 4.0).dense())
    assert gs.energy == pytest.approx(dense[0], abs=1e-9)
    assert gs.gap_estimate == pytest.approx(dense[1] - dense[0], abs=1e-8)
    assert gs.residual <= 1e-9
    assert np.linalg.norm(gs.vector) == pytest.approx(1.0, abs=1e-10)


def test_two_site_probabilities_u0():
    res = solve(chain(2, 1, 1), 0.0)
    for i in range(2):
        assert res.probabilities.site(i).as_tuple() == pytest.approx((0.25,) * 4, abs=1e-12)
    assert res.probabilities.entropies == pytest.approx([0.75, 0.75], abs=1e-12)


def test_strong_coupling_suppresses_double_occupancy():
    w2 = [solve(chain(2, 1, 1), u).probabilities.w2[0] for u in (10.0, 100.0, 1000.0)]
    assert w2[0] > w2[1] > w2[2]
    assert w2[2] < 1e-5


def test_site_probability_sums():
    spec = chain(7, 3, 2, "open", (0.5, 0.0, -1.0, 0.2, 0.0, 0.3, 0.0))
    probs = solve(spec, 3.0).probabilities
    total = probs.w0 + probs.w_up + probs.w_down + probs.w2
    assert np.allclose(total, 1.0, atol=1e-10)
    assert np.sum(probs.w_up + probs.w2) == pytest.approx(3, abs=1e-8)
    assert np.sum(probs.w_down + probs.w2) == pytest.approx(2, abs=1e-8)
    assert probs.profile().total == pytest.approx(5, abs=1e-8)


def test_variational_bound_against_trial():
    spec = chain(6, 2, 2, "open", (0.0, 0.4, 0.0, -0.2, 0.0, 0.0))
    basis = build_basis(spec)
    op = HubbardOperator(basis, spec, 3.0)
    gs = ground_state(basis, spec, 3.0)
    rng = np.random.default_rng(1)
    for _ in range(5):
        x = rng.standard_normal(basis.dimension)
        x /= np.linalg.norm(x)
        assert gs.energy <= x @ op.matvec(x)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(min_value=0.0, max_value=5.0), min_size=6, max_size=6))
def test_positive_potential_never_lowers_energy(pot):
    clean = solve(chain(6, 2, 2), 4.0).ground.energy
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        dirty = solve(chain(6, 2, 2, "open", tuple(pot)), 4.0).ground.energy
    assert dirty >= clean - 1e-10


@pytest.mark.parametrize("boundary", ["periodic", "open"])
def test_particle_hole_mapping(boundary):
    n, u = 6, 3.0
    pot = (0.4, -0.2, 0.0, 1.1, -0.5, 0.3)
    a = solve(LatticeSpec(n, boundary, pot, 1, 2), u)
    b = solve(LatticeSpec(n, boundary, tuple(-v for v in pot), n - 1, n - 2), u)
    n_b = (n - 1) + (n - 2)
    const = n * u + 2 * sum(pot) - u * n_b
    assert a.ground.energy == pytest.approx(b.ground.energy + const, abs=1e-8)
    pa, pb = a.probabilities, b.probabilities
    assert pa.w0 == pytest.approx(pb.w2, abs=1e-8)
    assert pa.w2 == pytest.approx(pb.w0, abs=1e-8)
    assert pa.w_up == pytest.approx(pb.w_down, abs=1e-8)
    assert pa.w_down == pytest.approx(pb.w_up, abs=1e-8)


def test_hellmann_feynman_two_site():
    check = hellmann_feynman_check(chain(2, 1, 1), 0.0, 1e-3)
    assert not check.skipped
    assert check.residual < 1e-8


def test_hellmann_feynman_six_site():
    small = hellmann_feynman_check(chain(6, 2, 2), 4.0, 1e-3)
    assert small.residual < 1e-6
    # O(du^2): doubling du roughly quadruples the residual
    big = hellmann_feynman_check(chain(6, 2, 2), 4.0, 2e-2)
    assert 3.0 < big.residual / hellmann_feynman_check(chain(6, 2, 2), 4.0, 1e-2).residual < 5.0


def test_hellmann_feynman_empty_and_degenerate():
    assert hellmann_feynman_check(chain(4, 0, 0), 2.0, 1e-3).residual == 0.0
    skipped = hellmann_feynman_check(chain(4, 2, 2, "periodic"), 0.0, 1e-3)
    assert skipped.skipped
    with pytest.raises(DomainError):
        hellmann_feynman_check(chain(2, 1, 1), 1.0, 0.0)


def test_homogeneous_ring_agreement():
    res = solve(chain(10, 3, 3, "periodic"), 8.0)
    exact = res.probabilities.average_entropy
    assert abs(l_hom(InteractionPoint(0.6, 8.0)) - exact) / exact <= 0.05
    assert np.allclose(res.probabilities.densities, 0.6, atol=1e-10)
