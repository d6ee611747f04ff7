import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from doublon_bic.basis import AtomDouble
from doublon_bic.hamiltonian import build_sector_hamiltonian
from doublon_bic.model import doublon_band_edges
from doublon_bic.spectral import BICNotFound, eigensolve, find_bic, ipr

from conftest import SP, TP, make_system


def test_ipr_examples():
    e = np.zeros(10)
    e[3] = 1.0
    assert ipr(e) == 1.0
    assert ipr(np.full(16, 0.25)) == pytest.approx(1 / 16)
    v = np.zeros(5)
    v[:2] = math.sqrt(0.8), math.sqrt(0.2)
    assert ipr(v) == pytest.approx(0.68)


def test_ipr_rejects_unnormalized():
    with pytest.raises(ValueError):
        ipr(np.ones(4))


@settings(max_examples=50)
@given(arrays(float, st.integers(1, 40), elements=st.floats(-1, 1)))
def test_ipr_bounds(v):
    n = np.linalg.norm(v)
    if n < 1e-6:
        return
    p = ipr(v / n)
    assert 1.0 / len(v) - 1e-12 <= p <= 1.0 + 1e-12


def test_full_mode_residuals_and_threshold():
    b, H = build_sector_hamiltonian(make_system(10, [(4, 6)], SP))
    res = eigensolve(H, "full")
    assert len(res.eigenvalues) == b.dim
    assert res.residuals.max() < 1e-8
    with pytest.raises(ValueError):
        eigensolve(H, "full", dense_threshold=10)


def test_window_matches_full():
    cfg = make_system(20, [(9, 11)], TP, g=0.04, delta1=10.392304845, delta2=0.0)
    b, H = build_sector_hamiltonian(cfg)
    full = eigensolve(H, "full")
    win = eigensolve(H, "window", target=10.3923, count=20)
    near = np.argsort(np.abs(full.eigenvalues - 10.3923))[:20]
    assert np.allclose(np.sort(full.eigenvalues[near]), win.eigenvalues, atol=1e-8)
    assert win.residuals.max() < 1e-8


def test_window_is_deterministic():
    b, H = build_sector_hamiltonian(make_system(15, [(7, 9)], SP))
    a = eigensolve(H, "window", target=10.3, count=8)
    c = eigensolve(H, "window", target=10.3, count=8)
    assert np.array_equal(a.eigenvalues, c.eigenvalues)
    assert np.array_equal(a.eigenvectors, c.eigenvectors)


def test_decoupled_atom_eigenvalue():
    cfg = make_system(8, [(3, 5)], SP, g=0.0, delta1=5.2, delta2=5.1)
    b, H = build_sector_hamiltonian(cfg)
    res = eigensolve(H, "full")
    assert np.any(np.abs(res.eigenvalues - 10.3) < 1e-12)
    i, prof = find_bic(res, b, 10.3)
    assert res.eigenvalues[i] == pytest.approx(10.3)
    assert prof.ipr == pytest.approx(1.0)
    assert abs(res.eigenvectors[b.index_of(AtomDouble(0)), i]) == pytest.approx(1.0)


def test_doublon_band_edges_scaled_lattice():
    # g = 0: the doublon band sits within [U, sqrt(U^2 + 16)] up to O(1/N)
    cfg = make_system(59, [(29, 31)], TP, g=0.0, delta1=-30.0, delta2=0.0)
    b, H = build_sector_hamiltonian(cfg)
    evals = eigensolve(H, "full", vectors=False).eigenvalues
    band = evals[evals > 5.0]
    lo, hi = doublon_band_edges(10.0, 1.0)
    assert len(band) == 59
    assert lo - 0.05 < band.min() and band.max() < hi + 1e-9
    assert band.max() > hi - 0.05


def test_window_finds_bic_of_scaled_config():
    cfg = make_system(59, [(29, 31)], TP, g=0.04, delta1=10.392304845, delta2=0.0)
    b, H = build_sector_hamiltonian(cfg)
    win = eigensolve(H, "window", target=10.392, count=20)
    i, prof = find_bic(win, b, 10.392)
    full = eigensolve(H, "full")
    j, _ = find_bic(full, b, 10.392)
    assert win.eigenvalues[i] == pytest.approx(full.eigenvalues[j], abs=1e-10)


def test_bic_profile_mirror_symmetric():
    cfg = make_system(31, [(15, 17)], TP, g=0.04, delta1=10.392304845, delta2=0.0)
    b, H = build_sector_hamiltonian(cfg)
    res = eigensolve(H, "full")
    _, prof = find_bic(res, b, 10.392)
    assert np.max(np.abs(prof.P - prof.P[::-1, ::-1])) < 1e-8
    assert np.allclose(prof.P, prof.P.T)


def test_find_bic_floor():
    b, H = build_sector_hamiltonian(make_system(8, [(3, 5)], SP))
    res = eigensolve(H, "full")
    with pytest.raises(BICNotFound):
        find_bic(res, b, 10.0, floor_factor=b.dim)


def test_degenerate_selection_warns():
    # two identical decoupled atoms: |2> on either atom is degenerate
    cfg = make_system(6, [(1, 3), (4, 6)], SP, g=0.0, delta1=5.0, delta2=7.0)
    b, H = build_sector_hamiltonian(cfg)
    res = eigensolve(H, "full")
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        _, prof = find_bic(res, b, 12.0)
    assert prof.degenerate
    assert any("degenerate" in str(x.message) for x in w)
