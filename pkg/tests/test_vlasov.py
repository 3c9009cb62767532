import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qsvt_hs import vlasov as vl
from qsvt_hs.baseline import exact_run


@pytest.fixture(scope="module")
def landau():
    grid = vl.build_grid(1, 32, 4.5)
    ham = vl.build_hamiltonian(1, grid, 0.4)
    st0, sv = vl.initial_state(grid, 0.4)
    return grid, ham, st0, sv


grids = st.builds(
    lambda dim, logs, vmax, k: (dim, vl.build_grid(dim, [2 ** n for n in logs[:dim]], vmax[:dim]), k[:dim]),
    st.integers(1, 3),
    st.lists(st.integers(1, 3), min_size=3, max_size=3),
    st.lists(st.floats(1.0, 8.0), min_size=3, max_size=3),
    st.lists(st.floats(-2.0, 2.0).filter(lambda x: abs(x) > 1e-3), min_size=3, max_size=3),
)


def test_grid_spacing():
    g = vl.build_grid(1, 32, 4.5)
    assert g.dv == pytest.approx(9 / 31)
    assert g.points[0, 0] == -4.5 and g.points[-1, 0] == pytest.approx(4.5)
    assert g.dv * 32 == pytest.approx(2 * 4.5 + g.dv)
    with pytest.raises(ValueError):
        vl.build_grid(1, 12, 4.5)
    with pytest.raises(ValueError):
        vl.build_grid(4, 2, 1.0)


def test_grid_ordering_x_fastest():
    g = vl.build_grid(2, (2, 4), (1.0, 2.0))
    pts = g.points
    assert pts[1, 0] > pts[0, 0] and pts[1, 1] == pts[0, 1]
    assert pts[2, 0] == pts[0, 0]


def test_landau_normalisation(landau):
    grid, ham, _, _ = landau
    assert 1 / ham.alpha == pytest.approx(0.238, abs=5e-4)
    assert ham.n_sys == 6
    assert np.max(np.abs(np.linalg.eigvalsh(ham.H))) <= ham.alpha


def test_initial_state_field(landau):
    grid, _, st0, sv = landau
    fm = np.exp(-grid.points[:, 0] ** 2 / 2) / math.sqrt(2 * math.pi)
    expect = 1j / 0.4 * np.sum(0.1 * fm) * grid.dv
    assert st0.E[0] == pytest.approx(expect, rel=1e-14)
    assert abs(st0.E[0].imag - 0.25) < 1e-5
    assert np.linalg.norm(sv.amplitudes) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        vl.initial_state(grid, 0.0)


def test_decode_round_trip(landau):
    grid, _, st0, sv = landau
    ob = vl.decode_observables(sv, grid, st0.eta)
    assert np.allclose(ob.E, st0.E, atol=1e-15)
    assert np.allclose(ob.f1, 0.1 * grid.f_m, atol=1e-15)
    with pytest.raises(RuntimeError):
        vl.decode_observables(np.zeros(64), grid, 1.0)


def test_decode_keeps_ancilla_zero_branch(landau):
    grid, _, st0, sv = landau
    padded = np.concatenate([0.6 * sv.amplitudes, 0.8 * np.roll(sv.amplitudes, 3)])
    ob = vl.decode_observables(padded, grid, st0.eta)
    assert ob.branch_norm == pytest.approx(0.6)
    assert np.allclose(ob.E, st0.E)


@given(grids)
def test_alpha_bounds_and_spectrum(case):
    dim, grid, k = case
    h = vl.build_hamiltonian(dim, grid, k)
    assert 0.8 * h.Lambda - 1e-12 <= h.alpha <= h.Lambda + 1e-12
    assert np.max(np.abs(np.linalg.eigvalsh(h.H))) <= h.alpha * (1 + 1e-12)
    assert np.allclose(h.H, h.H.conj().T)


@given(grids.filter(lambda c: c[0] > 1))
def test_multi_d_structure(case):
    dim, grid, k = case
    h = vl.build_hamiltonian(dim, grid, k)
    N = grid.n_points
    w = vl.mu(grid)[:, None] * grid.points
    assert np.max(np.abs(h.coupling_from_angles() - w / h.alpha)) <= 1e-10
    assert np.max(np.abs(h.diagonal_from_angles() - grid.points @ np.array(k) / h.alpha)) <= 1e-10
    mask = np.zeros_like(h.H, dtype=bool)
    idx = np.arange(N)
    mask[idx, idx] = True
    for p in range(dim):
        mask[idx, (p + 1) * N] = True
        mask[(p + 1) * N, idx] = True
    assert np.all(h.H[~mask] == 0)


def test_c_squared_matches_high_precision():
    for g in (1e-6, 0.3, 1.0, 7.0, 1e12):
        with mpmath.workdps(50):
            G = mpmath.mpf(g)
            oracle = float(G / 2 * (mpmath.sqrt(1 + 4 / G) - 1))
        assert vl.c_squared(g) == pytest.approx(oracle, rel=1e-14)
    assert vl.c_squared(0.0) == 0.0


def test_qae_iterations():
    assert vl.qae_iterations(0.0, 1.0, 0.5) == 7
    assert vl.qae_iterations(None, 0.5, 0.1) == math.ceil(2.0 * math.pi * 0.5 / 0.1)
    with pytest.raises(ValueError):
        vl.qae_iterations(0.0, 1.0, 1.5)


@given(st.floats(0.0, 1.0), st.floats(0.1, 2.0), st.integers(1, 10_000))
def test_qae_bound_shrinks_with_m(frac, eta, M):
    a = frac * eta * eta
    assert vl.qae_error_bound(a, eta, 2 * M) <= vl.qae_error_bound(a, eta, M)


def test_variable_rotation_examples():
    for x, col in ((1.0, (1, 0)), (0.0, (0, 1)), (0.6, (0.6, 0.8))):
        u = vl.variable_rotation(x)
        assert np.allclose(u[:, 0], col)
        assert np.allclose(u.conj().T @ u, np.eye(2))
    with pytest.raises(ValueError):
        vl.variable_rotation(1.2)


@given(st.floats(-1, 1), st.floats(-1, 1))
def test_variable_rotation_complex_is_unitary(re, im):
    x = complex(re, im) / max(1.0, abs(complex(re, im)))
    u = vl.variable_rotation(x)
    assert np.allclose(u.conj().T @ u, np.eye(2))


def test_evolve_hs_short_run(landau):
    grid, ham, st0, _ = landau
    tr = vl.evolve_hs(ham, st0, 5, 1e-3)
    assert np.allclose(tr.E[0], st0.E) and np.allclose(tr.f1[0], 0.1 * grid.f_m)
    assert np.linalg.norm(tr.extra["psi_final"]) == pytest.approx(1.0, abs=1e-10)
    assert np.all(tr.extra["branch_norms"] > 1 - 1e-3)
    ex = exact_run(ham, st0, tr.times)
    assert np.max(np.abs(tr.E - ex.E)) <= 5 * 1e-3 * st0.eta


def test_exact_run_preserves_eta(landau):
    _, ham, st0, _ = landau
    ex = exact_run(ham, st0, [0.0, 3.0, 20.0])
    norms = np.linalg.norm(ex.extra["states"], axis=1)
    assert np.allclose(norms, 1.0, atol=1e-12)
