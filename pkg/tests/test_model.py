import itertools

import numpy as np
import pytest
import scipy.sparse as sp

from anyonlab import (
    AbelianGroup,
    DomainError,
    EdgeLattice,
    FFunctionSpec,
    PerturbationPath,
    QuantumDoubleModel,
    ResourceError,
    ShapeError,
    eigenspace,
    perturbed_hamiltonian,
)
from anyonlab.linalg import embed
from anyonlab.model import Interaction, interaction_f_norm

X = np.array([[0, 1], [1, 0]])
Z = np.diag([1, -1])


def _string(op, k):
    out = np.ones((1, 1))
    for _ in range(k):
        out = np.kron(out, op)
    return out


def test_z2_star_and_plaquette_forms(tc22):
    lat, space = tc22.lattice, tc22.space
    v = (1, 1)
    edges = [e for e, _ in lat.star_edges(v)]
    ref = embed((np.eye(16) + _string(X, 4)) / 2, edges, space)
    assert abs(tc22.star_projector(v) - ref).max() < 1e-14
    f = (0, 1)
    edges = [e for e, _ in lat.face_boundary(f)]
    ref = embed((np.eye(16) + _string(Z, 4)) / 2, edges, space)
    assert abs(tc22.plaquette_projector(f) - ref).max() < 1e-14


@pytest.mark.parametrize("factors", [(2,), (3,), (2, 2)])
def test_terms_are_commuting_projectors(factors):
    m = QuantumDoubleModel(EdgeLattice.torus(2), AbelianGroup(factors))
    A = [m.star_projector(v) for v, _ in m.lattice.stars[:2]]
    B = [m.plaquette_projector(f) for f, _ in m.lattice.plaquettes[:2]]
    for P in A + B:
        assert abs(P @ P - P).max() < 1e-14
        assert abs(P - P.conj().T).max() < 1e-14
    for P, Q in itertools.product(A + B, repeat=2):
        assert abs(P @ Q - Q @ P).max() < 1e-14


def test_out_of_lattice_terms_rejected():
    m = QuantumDoubleModel(EdgeLattice(3, 3, "open"), AbelianGroup((2,)))
    with pytest.raises(ShapeError):
        m.star_projector((0, 0))
    with pytest.raises(ShapeError):
        m.plaquette_projector((2, 2))


def test_ground_state_frustration_free(tc22):
    psi = tc22.ground_state()
    H = tc22.hamiltonian()
    assert abs(np.vdot(psi, H @ psi)) < 1e-12
    assert np.allclose(tc22.star_expectations(psi), 1)
    assert np.allclose(tc22.plaquette_expectations(psi), 1)


def test_z2_torus_spectrum_even_integers(tc22):
    w = np.linalg.eigvalsh(tc22.hamiltonian().toarray())
    assert np.allclose(w, np.round(w / 2) * 2, atol=1e-10)
    assert w.min() > -1e-10
    assert int(np.sum(np.abs(w) < 1e-8)) == 4


def test_z3_kernel_nine():
    m = QuantumDoubleModel(EdgeLattice.torus(2), AbelianGroup((3,)))
    w, _ = eigenspace(m.hamiltonian(), (-0.5, 0.5))
    assert len(w) == 9


def test_resource_cap():
    with pytest.raises(ResourceError):
        QuantumDoubleModel(EdgeLattice.torus(3), AbelianGroup((2,)), cap=1000)


def test_open_patch_hamiltonian_is_hermitian():
    m = QuantumDoubleModel(EdgeLattice(3, 3, "open"), AbelianGroup((2,)))
    H = m.hamiltonian()
    assert abs(H - H.T).max() == 0
    assert len(m.lattice.stars) == 1 and len(m.lattice.plaquettes) == 4


# -- F-norm of interactions ----------------------------------------------
def test_f_norm_zero_interaction(tc22):
    phi = Interaction(tc22.lattice, {})
    assert interaction_f_norm(phi, FFunctionSpec()) == 0.0


def test_f_norm_single_onsite_term(tc22):
    Zop = tc22.edge_phase(0, tc22.group.character((1,))).to_sparse()
    phi = Interaction(tc22.lattice, {"z": (frozenset({0}), Zop)})
    assert interaction_f_norm(phi, FFunctionSpec()) == pytest.approx(1.0)


def test_f_norm_zero_F_rejected(tc22):
    Zop = tc22.edge_phase(0, tc22.group.character((1,))).to_sparse()
    phi = Interaction(tc22.lattice, {"z": (frozenset({0}), Zop)})
    with pytest.raises(DomainError):
        interaction_f_norm(phi, lambda r: np.zeros_like(r))


def test_f_norm_toric_3x3_double_loop_oracle():
    lat = EdgeLattice.torus(3)
    m = QuantumDoubleModel(lat, AbelianGroup((2,)))
    F = FFunctionSpec()
    supports = [{e for e, _ in edges} for _, edges in lat.stars + lat.plaquettes]
    # every term is I minus a projector, so it has norm exactly 1
    best = 0.0
    mids = lat.midpoints
    for x in range(lat.num_edges):
        for y in range(lat.num_edges):
            s = sum(1.0 for S in supports if x in S and y in S)
            d = mids[y] - mids[x]
            d = d - np.array([3, 3]) * np.round(d / 3)
            best = max(best, s / float(F(np.hypot(*d))))
    phi = m.interaction()
    phi.norms = {k: 1.0 for k in phi.terms}
    assert interaction_f_norm(phi, F) == pytest.approx(best, rel=1e-14)
    assert best == pytest.approx(2.0 * (1 + np.sqrt(2) / 2) ** 3)


def test_interaction_term_norms(tc22):
    phi = tc22.interaction()
    assert np.allclose(list(phi.term_norms().values()), 1.0)
    assert phi.radius == pytest.approx(1.0)
    assert abs(phi.total() - tc22.hamiltonian()).max() < 1e-12


# -- perturbation paths ---------------------------------------------------
def test_path_endpoints_and_linearity(tc22):
    path = PerturbationPath(tc22, "z-field")
    H0, V = perturbed_hamiltonian(path, 0.0)
    assert abs(H0 - tc22.hamiltonian()).max() == 0
    s1, s2 = 0.1, 0.7
    D = path.H(s1) + path.H(s2) - 2 * path.H((s1 + s2) / 2)
    assert abs(D).max() < 1e-14
    with pytest.raises(DomainError):
        perturbed_hamiltonian(path, 1.5)
    with pytest.raises(ShapeError):
        PerturbationPath(tc22, "y-field").V()


def test_path_gap_open_along_small_field(tc22):
    path = PerturbationPath(tc22, "z-field")
    for s in np.linspace(0, 0.05, 6):
        w = np.linalg.eigvalsh(path.H(s).toarray())
        assert w[4] - w[3] > 1.5


def test_translation_covariance(tc23):
    lat = tc23.lattice
    perm = lat.translation(1, 1)
    H = tc23.hamiltonian()
    space = tc23.space
    d = space.digits
    # basis relabelling induced by moving edge e to perm[e]
    idx = np.zeros(space.dim, dtype=np.int64)
    for e in range(lat.num_edges):
        idx += d[e].astype(np.int64) * space.weights[perm[e]]
    P = sp.csr_matrix((np.ones(space.dim), (idx, np.arange(space.dim))), shape=(space.dim,) * 2)
    assert abs(P @ H @ P.T - H).max() < 1e-14
