import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from anyonlab import (
    AssumptionViolationError,
    DomainError,
    PerturbationPath,
    ResolutionError,
    build_filter,
    flow_generator,
    flow_unitary,
    stability_experiment,
    track_gap,
)
from anyonlab.flow import bump, generator_quadrature_oracle


@pytest.fixture(scope="module")
def filt():
    return build_filter(1.0)


@pytest.fixture(scope="module")
def zpath(tc22):
    return PerturbationPath(tc22, "z-field")


# -- filter ----------------------------------------------------------------
def test_bump_shape():
    k = np.linspace(-2, 2, 401)
    b = bump(k, 1.5)
    assert bump(0.0, 1.5) == 1.0
    assert np.allclose(b, b[::-1])
    assert np.all(b[np.abs(k) >= 1.5] == 0)
    assert np.all(b[np.abs(k) < 1.5] > 0)


def test_filter_normalized_even_real(filt):
    assert filt.integral() == pytest.approx(1.0, abs=1e-9)
    assert filt.what(0.0)[0] == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(filt.w, filt.w[::-1])
    assert np.isrealobj(filt.w)
    assert abs(filt.first_moment()) < 1e-12
    assert np.allclose(filt.t, -filt.t[::-1])


def test_filter_transform_matches_bump(filt):
    k = np.linspace(-0.95, 0.95, 39)
    assert np.allclose(filt.what(k), bump(k, 1.0), atol=1e-8)


def test_filter_W_beyond_gamma(filt):
    E = np.array([1.0, 1.5, -2.0, 7.3, -11.0])
    assert np.allclose(filt.W(E), 1j / E, atol=1e-9)
    assert filt.W(np.array([0.0]))[0] == 0


@pytest.mark.parametrize("gamma", [0.5, 2.0])
def test_filter_integral_any_gamma(gamma):
    f = build_filter(gamma)
    assert f.integral() == pytest.approx(1.0, abs=1e-8)
    assert f.T == pytest.approx(600 / gamma)


def test_filter_resolution_error():
    with pytest.raises(ResolutionError) as info:
        build_filter(1.0, dt=0.25, k_max=30.0)
    assert info.value.required < 0.25
    build_filter(1.0, dt=info.value.required * 0.99, T=20, k_max=30.0)
    with pytest.raises(DomainError):
        build_filter(0.0)


# -- generator -------------------------------------------------------------
def test_generator_zero_perturbation(tc22, filt):
    H = tc22.hamiltonian()
    D = flow_generator(H, sp.csr_matrix(H.shape), filt)
    assert np.abs(D).max() == 0


def test_generator_commuting_perturbation(tc22, filt):
    H = tc22.hamiltonian()
    # stars commute with H and only connect degenerate levels
    Hp = tc22.star_projector((0, 0))
    D = flow_generator(H, Hp, filt)
    assert np.abs(D).max() < 1e-12


def test_generator_hermitian_and_cross_gap(tc22, zpath, filt):
    H = tc22.hamiltonian().toarray()
    Hp = zpath.V().toarray()
    D = flow_generator(H, Hp, filt)
    assert np.abs(D - D.conj().T).max() < 1e-10
    E, V = np.linalg.eigh(H)
    De, He = V.T @ D @ V, V.T @ Hp @ V
    om = E[:, None] - E[None, :]
    far = np.abs(om) >= 1.0
    assert np.allclose(De[far], 1j * He[far] / om[far], atol=1e-9)
    assert np.abs(De[~far]).max() < 1e-9


def test_generator_vs_quadrature_oracle(tc22, zpath):
    f = build_filter(1.0, T=40.0)
    H, Hp = zpath.H(0.0), zpath.V()
    D = flow_generator(H, Hp, f)
    ref = generator_quadrature_oracle(H, Hp, f)
    assert np.abs(D - ref).max() < 1e-6
    assert np.linalg.norm(D, 2) == pytest.approx(np.linalg.norm(ref, 2), abs=1e-6)


# -- gap tracking ----------------------------------------------------------
def test_gap_at_zero(zpath):
    gt = track_gap(zpath, [0.0])
    assert gt.gaps[0] == pytest.approx(2.0)
    assert gt.band_dim == 4


def test_gap_constant_without_perturbation(tc22):
    path = PerturbationPath(tc22, "custom", terms=[])
    gt = track_gap(path, np.linspace(0, 1, 5))
    assert np.allclose(gt.gaps, 2.0)


def test_gap_positive_continuous_on_z_path(zpath):
    gt = track_gap(zpath, np.linspace(0, 0.1, 21))
    assert gt.min_gap > 1.4
    assert np.max(np.abs(np.diff(gt.gaps))) < 0.05


def test_band_crossing_detected(tc22):
    from anyonlab import AnyonLabel, Site, build_ribbon, ribbon_operator

    r = build_ribbon(tc22.lattice, [Site((0, 0), (-1, 0)), Site((1, 0), (0, 0))])
    e = AnyonLabel.of(tc22.group, (1,), (0,))
    phi = ribbon_operator(tc22, r, e).apply(tc22.ground_state())
    P = sp.csr_matrix(np.outer(phi, phi.conj()))
    path = PerturbationPath(tc22, "custom", terms=[(set(r.support), -10.0 * P)])
    with pytest.raises(AssumptionViolationError) as info:
        track_gap(path, np.linspace(0, 0.5, 11))
    assert 0 < info.value.payload["s"] <= 0.5


# -- flow ------------------------------------------------------------------
def test_flow_single_point(zpath):
    res = flow_unitary(zpath, 0.5, [0.0])
    assert len(res.unitaries) == 1
    assert np.array_equal(res.unitaries[0], np.eye(zpath.model.dim))
    assert res.max_transport_error == 0.0


def test_flow_zero_path_is_identity(tc22):
    path = PerturbationPath(tc22, "custom", terms=[])
    res = flow_unitary(path, 1.0, np.linspace(0, 0.5, 4), T=50.0)
    for U in res.unitaries:
        assert np.allclose(U, np.eye(tc22.dim), atol=1e-14)


def test_flow_gap_violation(zpath):
    with pytest.raises(AssumptionViolationError) as info:
        flow_unitary(zpath, 3.0, np.linspace(0, 0.1, 3))
    assert "gap" in info.value.payload


def test_flow_transports_band(zpath):
    gamma = 0.5 * track_gap(zpath, np.linspace(0, 0.1, 11)).min_gap
    res = flow_unitary(zpath, gamma, np.linspace(0, 0.1, 6), dt=0.5, T=150 / gamma)
    assert res.max_transport_error < 1e-3
    assert np.max(res.unitarity_defect) < 1e-10
    assert res.to_json()["band_dim"] == 4


def test_flow_cocycle(zpath):
    a = flow_unitary(zpath, 0.8, [0.0, 0.05, 0.1], T=100.0)
    b = flow_unitary(zpath, 0.8, [0.05, 0.1], T=100.0, band_dim=4)
    assert np.allclose(a.unitaries[2], b.unitaries[1] @ a.unitaries[1], atol=1e-12)


# -- stability -------------------------------------------------------------
def test_stability_at_zero_matches_baseline(zpath):
    rep = stability_experiment(zpath, 0.0, gamma=1.0, intervals=2, n_grid=[0, 1])
    assert rep["monodromy_deviation"] < 1e-14
    assert rep["transport_error"] == 0.0
    assert rep["energy_deviation"] < 1e-12
    assert np.allclose(rep["monodromy_s0"][1, 2], -1)
