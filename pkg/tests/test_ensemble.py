import math
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hubbard_ent.csvio import write_density_csv
from hubbard_ent.ed import solve
from hubbard_ent.ensemble import (
    EnsembleSpec,
    complement_spec,
    ensemble_curve,
    mean_and_stderr,
    plateau_windows,
    realize_impurities,
    sample_seed,
)
from hubbard_ent.errors import ConfigurationError, DensitySourceError
from hubbard_ent.lattice import LatticeSpec, impurity_set_potential, l_lda
from hubbard_ent.sources import EnsembleDirectorySource


def spec(**kw):
    base = dict(n_sites=8, n_up=3, n_down=3, u=4.0, concentration=50.0,
                strength_grid=(-2.0, 0.0, 2.0), samples=4, master_seed=2024)
    base.update(kw)
    return EnsembleSpec(**base)


def test_realize_extremes():
    assert realize_impurities(spec(concentration=0.0), 0) == ()
    assert realize_impurities(spec(concentration=100.0), 0) == tuple(range(8))


def test_realize_fixed_count_and_reproducible():
    s = spec(samples=50)
    sets = [realize_impurities(s, k) for k in range(50)]
    assert all(len(x) == 4 for x in sets)
    assert sets == [realize_impurities(s, k) for k in range(50)]
    assert len(set(sets)) > 10


def test_realize_same_in_fresh_process():
    code = ("from hubbard_ent.ensemble import EnsembleSpec, realize_impurities;"
            "s = EnsembleSpec(8, 3, 3, 4.0, 50.0, (0.0,), 10, 2024);"
            "print([realize_impurities(s, k) for k in range(10)])")
    outs = {subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                           check=True).stdout for _ in range(2)}
    assert len(outs) == 1
    assert outs.pop().strip() == str([realize_impurities(spec(samples=10), k) for k in range(10)])


def test_realize_index_bounds():
    with pytest.raises(ConfigurationError):
        realize_impurities(spec(), 4)


def test_seed_is_64_bit_and_distinct():
    seeds = {sample_seed(7, k) for k in range(100)}
    assert len(seeds) == 100
    assert all(0 <= s < 2**64 for s in seeds)
    assert sample_seed(-1, 0) == sample_seed(2**64 - 1, 0)


def test_spec_validation():
    for kw in ({"concentration": 101.0}, {"samples": 0}, {"strength_grid": ()}):
        with pytest.raises(ConfigurationError):
            spec(**kw)


@pytest.mark.parametrize("c, expected", [(50.0, 50.0), (20.0, 80.0), (0.0, 100.0)])
def test_complement_spec(c, expected):
    s = spec(concentration=c)
    comp = complement_spec(s)
    assert comp.concentration == expected
    assert comp.strength_grid == (2.0, -0.0, -2.0)
    assert comp.complemented
    assert complement_spec(comp) == s


def test_complement_realizations_are_set_complements():
    s = spec(concentration=25.0, samples=6)
    comp = complement_spec(s)
    for k in range(6):
        a, b = set(realize_impurities(s, k)), set(realize_impurities(comp, k))
        assert a.isdisjoint(b) and a | b == set(range(8))
    assert complement_spec(spec(concentration=0.0)).impurity_count == 8


def test_zero_strength_is_clean_value():
    s = spec(strength_grid=(0.0,), samples=5)
    res = ensemble_curve(s)
    clean = solve(LatticeSpec.uniform(8, 3, 3, "periodic"), 4.0).probabilities.profile()
    assert res.points[0].mean_l == l_lda(clean, 4.0)
    assert res.points[0].stderr == 0.0


def test_complement_identity_per_realization():
    s = spec(concentration=75.0, strength_grid=(-3.0, 1.5), samples=3)
    a = ensemble_curve(s)
    b = ensemble_curve(complement_spec(s))
    for ra, rb in zip(a.records, b.records):
        assert abs(ra.l_lda - rb.l_lda) <= 1e-10
        assert abs(ra.l_exact - rb.l_exact) <= 1e-10
    assert np.allclose(a.mean_l, b.mean_l, atol=1e-10, rtol=0)


def test_standard_error_definition():
    vals = [0.1, 0.4, 0.35, 0.2]
    mean, err = mean_and_stderr(vals)
    assert mean == pytest.approx(np.mean(vals), abs=1e-15)
    assert err == pytest.approx(np.std(vals, ddof=1) / 2.0, abs=1e-15)
    assert math.isnan(mean_and_stderr([0.3])[1])


@given(st.lists(st.floats(min_value=0, max_value=0.75), min_size=2, max_size=30))
def test_mean_order_independent(vals):
    assert mean_and_stderr(vals)[0] == pytest.approx(mean_and_stderr(vals[::-1])[0], abs=1e-15)


def test_threads_give_identical_results():
    s = spec(samples=3)
    assert ensemble_curve(s, threads=1) == ensemble_curve(s, threads=2)


def _write_ensemble_dir(path, s, bad=()):
    for k in range(s.samples):
        sites = realize_impurities(s, k)
        for v in s.strength_grid:
            if (k, v) in bad:
                continue
            pot = impurity_set_potential(s.n_sites, sites, v)
            prof = solve(LatticeSpec(s.n_sites, s.boundary, pot, s.n_up, s.n_down), s.u)
            write_density_csv(path / f"sample_{k}_V_{v:g}.csv", prof.probabilities.profile())


def test_directory_source_matches_ed(tmp_path):
    s = spec(n_sites=6, n_up=2, n_down=2, samples=3)
    _write_ensemble_dir(tmp_path, s)
    from_dir = ensemble_curve(s, EnsembleDirectorySource(tmp_path))
    from_ed = ensemble_curve(s)
    assert np.allclose(from_dir.mean_l, from_ed.mean_l, atol=1e-14, rtol=0)
    assert from_dir.records[0].l_exact is None


def test_failures_are_excluded_or_fatal(tmp_path):
    s = spec(n_sites=6, n_up=2, n_down=2, samples=20, strength_grid=(1.0,))
    _write_ensemble_dir(tmp_path, s, bad={(3, 1.0)})
    res = ensemble_curve(s, EnsembleDirectorySource(tmp_path))
    assert res.points[0].n_samples == 19 and res.points[0].n_failed == 1
    failed = [r for r in res.records if r.error]
    assert failed[0].sample_index == 3 and "no density file" in failed[0].error
    (tmp_path / "sample_4_V_1.csv").unlink()
    with pytest.raises(DensitySourceError):
        ensemble_curve(s, EnsembleDirectorySource(tmp_path))


def test_plateau_windows():
    v = np.arange(-5.0, 1.0)
    y = np.array([0.3, 0.5, 0.60, 0.61, 0.605, 0.7])
    widest = plateau_windows(v, y)[0]
    assert widest == (2.0, -3.0, -1.0)
