import numpy as np
import pytest
import scipy.sparse as sp

from anyonlab import (
    AbelianGroup,
    AnyonLabel,
    EdgeLattice,
    MeasurementAmbiguityError,
    ModelConsistencyError,
    QuantumDoubleModel,
    ShapeError,
    Site,
    build_ribbon,
    excite,
    measure_charge,
    ribbon_compose,
    ribbon_operator,
)
from anyonlab.lattice import loop_around_site
from anyonlab.ribbons import half_infinite_surrogate, predicted_energy

Z2 = AbelianGroup((2,))
VAC = AnyonLabel.vacuum(Z2)
E = AnyonLabel.of(Z2, (1,), (0,))
M = AnyonLabel.of(Z2, (0,), (1,))
EM = AnyonLabel.of(Z2, (1,), (1,))

VERTICAL = [Site((0, 0), (-1, 0)), Site((0, 1), (-1, 1)), Site((0, 2), (-1, 2))]


@pytest.fixture(scope="module")
def tc23_ground(tc23):
    return tc23.ground_state()


def _dense(op):
    return op.to_sparse().toarray() if hasattr(op, "to_sparse") else op.toarray()


def test_vacuum_label_is_identity(tc23):
    r = build_ribbon(tc23.lattice, VERTICAL)
    F = ribbon_operator(tc23, r, VAC)
    assert np.array_equal(F.op.perm, np.arange(tc23.dim))
    assert F.op.phase is None or np.allclose(F.op.phase, 1)


def test_charge_label_is_z_string(tc23):
    r = build_ribbon(tc23.lattice, VERTICAL)
    F = ribbon_operator(tc23, r, E).to_sparse()
    Zs = sp.identity(tc23.dim, format="csr")
    for e, _ in r.direct:
        Zs = Zs @ tc23.edge_phase(e, Z2.character((1,))).to_sparse()
    assert abs(F - Zs).max() < 1e-14
    assert set(F.diagonal().real.round().astype(int)) <= {-1, 1}


def test_flux_label_is_x_string(tc23):
    r = build_ribbon(tc23.lattice, VERTICAL)
    F = ribbon_operator(tc23, r, M).to_sparse()
    Xs = sp.identity(tc23.dim, format="csr")
    for e, _ in r.dual:
        Xs = Xs @ tc23.edge_shift(e, (1,)).to_sparse()
    assert abs(F - Xs).max() < 1e-14


def test_ribbon_operator_is_unitary_and_supported(z3_23):
    r = build_ribbon(z3_23.lattice, VERTICAL)
    F = ribbon_operator(z3_23, r, AnyonLabel.of(z3_23.group, (1,), (2,)))
    U = F.to_sparse()
    assert abs(U @ U.conj().T - sp.identity(z3_23.dim)).max() < 1e-12
    assert F.support == {e for e, _ in r.direct} | {e for e, _ in r.dual}
    # an operator on an edge off the ribbon commutes
    off = sorted(set(range(z3_23.lattice.num_edges)) - F.support)[0]
    X = z3_23.edge_shift(off, (1,)).to_sparse()
    assert abs(U @ X - X @ U).max() < 1e-12


def test_label_mismatch_rejected(tc23):
    r = build_ribbon(tc23.lattice, VERTICAL)
    with pytest.raises(ShapeError):
        ribbon_operator(tc23, r, AnyonLabel.vacuum(AbelianGroup((3,))))
    other = build_ribbon(EdgeLattice(2, 3), VERTICAL)
    with pytest.raises(ShapeError):
        ribbon_operator(tc23, other, E)


def test_stars_commute_in_interior_not_at_ends(tc23):
    r = build_ribbon(tc23.lattice, VERTICAL)
    F = ribbon_operator(tc23, r, E).to_sparse()
    comm = lambda A: abs(F @ A - A @ F).max()  # noqa: E731
    assert comm(tc23.star_projector((0, 1))) < 1e-14
    assert comm(tc23.star_projector((0, 0))) > 0.1
    assert comm(tc23.star_projector((0, 2))) > 0.1
    Fm = ribbon_operator(tc23, r, M).to_sparse()
    comm_m = lambda A: abs(Fm @ A - A @ Fm).max()  # noqa: E731
    assert comm_m(tc23.plaquette_projector((-1 % 2, 1))) < 1e-14
    assert comm_m(tc23.plaquette_projector((1, 0))) > 0.1


@pytest.mark.parametrize("label, energy", [(VAC, 0.0), (E, 2.0), (M, 2.0), (EM, 4.0)], ids=str)
def test_excitation_energies(tc23, tc23_ground, label, energy):
    r = build_ribbon(tc23.lattice, VERTICAL)
    psi, got, res = excite(tc23, tc23_ground, ribbon_operator(tc23, r, label))
    assert got == pytest.approx(energy, abs=1e-10)
    assert predicted_energy(tc23, r, label) == energy
    assert res < 1e-9


def test_excite_rejects_non_eigenvector(tc23, tc23_ground):
    r = build_ribbon(tc23.lattice, VERTICAL)
    F = ribbon_operator(tc23, r, E)
    mixed = (tc23_ground + F.apply(tc23_ground)) / np.sqrt(2)
    with pytest.raises(ModelConsistencyError):
        excite(tc23, mixed, F)


def test_measure_charge_ground(tc23, tc23_ground):
    for site in (Site((0, 0), (0, 0)), Site((1, 2), (0, 1))):
        assert measure_charge(tc23, tc23_ground, site).is_vacuum


def test_measure_charge_at_ribbon_ends(z3_23):
    G = z3_23.group
    omega = z3_23.ground_state()
    r = build_ribbon(z3_23.lattice, VERTICAL)
    for label in (AnyonLabel.of(G, (1,), (0,)), AnyonLabel.of(G, (0,), (1,)), AnyonLabel.of(G, (2,), (1,))):
        psi = ribbon_operator(z3_23, r, label).apply(omega)
        assert measure_charge(z3_23, psi, r.end) == label
        assert measure_charge(z3_23, psi, r.start) == label.conjugate()


def test_measure_charge_ambiguous(tc23, tc23_ground):
    r = build_ribbon(tc23.lattice, VERTICAL)
    psi = tc23_ground + ribbon_operator(tc23, r, E).apply(tc23_ground)
    with pytest.raises(MeasurementAmbiguityError) as info:
        measure_charge(tc23, psi, r.end)
    assert info.value.weights["charge"] == pytest.approx([0.5, 0.5])


def test_compose_with_vacuum(tc23):
    r = build_ribbon(tc23.lattice, VERTICAL)
    phase, F = ribbon_compose(ribbon_operator(tc23, r, EM), ribbon_operator(tc23, r, VAC))
    assert phase == pytest.approx(1)
    assert F.label == EM


def test_compose_e_m_gives_dyon(tc23):
    r = build_ribbon(tc23.lattice, VERTICAL)
    Fe, Fm = ribbon_operator(tc23, r, E), ribbon_operator(tc23, r, M)
    phase, F = ribbon_compose(Fe, Fm)
    assert F.label == EM
    assert phase == pytest.approx(1) or phase == pytest.approx(-1)
    prod = Fe.to_sparse() @ Fm.to_sparse()
    assert abs(prod - phase * F.to_sparse()).max() < 1e-14


def test_compose_with_conjugate_is_scalar(z3_23):
    G = z3_23.group
    r = build_ribbon(z3_23.lattice, VERTICAL)
    a = AnyonLabel.of(G, (1,), (2,))
    phase, F = ribbon_compose(ribbon_operator(z3_23, r, a), ribbon_operator(z3_23, r, a.conjugate()))
    assert F.label.is_vacuum
    assert abs(abs(phase) - 1) < 1e-12


def test_compose_ribbon_mismatch(tc23):
    r1 = build_ribbon(tc23.lattice, VERTICAL)
    r2 = build_ribbon(tc23.lattice, VERTICAL[:2])
    with pytest.raises(ShapeError):
        ribbon_compose(ribbon_operator(tc23, r1, E), ribbon_operator(tc23, r2, E))


def test_path_independence_on_ground_state(z3_23):
    G = z3_23.group
    lat = z3_23.lattice
    omega = z3_23.ground_state()
    chi = AnyonLabel.of(G, (1,), (0,))
    r1 = build_ribbon(lat, [Site((0, 0), (0, 0)), Site((1, 0), (0, 0)), Site((1, 1), (0, 0))])
    r2 = build_ribbon(lat, [Site((0, 0), (0, 0)), Site((0, 1), (0, 0)), Site((1, 1), (0, 0))])
    assert np.allclose(ribbon_operator(z3_23, r1, chi).apply(omega), ribbon_operator(z3_23, r2, chi).apply(omega))
    flux = AnyonLabel.of(G, (0,), (1,))
    r3 = build_ribbon(lat, [Site((1, 1), (0, 0)), Site((1, 1), (1, 0)), Site((1, 1), (1, 1))])
    r4 = build_ribbon(lat, [Site((1, 1), (0, 0)), Site((1, 1), (0, 1)), Site((1, 1), (1, 1))])
    assert np.allclose(ribbon_operator(z3_23, r3, flux).apply(omega), ribbon_operator(z3_23, r4, flux).apply(omega))


def test_closed_loop_acts_trivially_on_ground(z3_23):
    omega = z3_23.ground_state()
    loop = loop_around_site(z3_23.lattice, Site((1, 1), (0, 1)))
    for a in (AnyonLabel.of(z3_23.group, (1,), (0,)), AnyonLabel.of(z3_23.group, (2,), (1,))):
        assert np.allclose(ribbon_operator(z3_23, loop, a).apply(omega), omega)
        assert predicted_energy(z3_23, loop, a) == 0.0


@pytest.fixture(scope="module")
def tc24():
    return QuantumDoubleModel(EdgeLattice(2, 4), Z2)


def test_half_infinite_surrogate(tc24):
    lat = tc24.lattice
    sites = [Site((0, k), (-1, k)) for k in range(4)]
    ribbons = [build_ribbon(lat, sites[: k + 1]) for k in range(1, 4)]
    chi = Z2.character((1,))
    # edge far from every ribbon: a_L = A
    off = lat.edge_index("v", 1, 3)
    rec = half_infinite_surrogate(tc24, ribbons, M, tc24.edge_phase(off, chi))
    assert rec["increments"] == [0.0, 0.0]
    assert rec["deviation_from_A"] == [0.0, 0.0, 0.0]
    # Z on the first crossed dual edge: fixed from the first ribbon on, limit -A
    e0 = ribbons[0].dual[0][0]
    A = tc24.edge_phase(e0, chi)
    rec = half_infinite_surrogate(tc24, ribbons, M, A)
    assert rec["increments"] == [0.0, 0.0]
    assert abs(rec["limit"] + A.to_sparse()).max() < 1e-14
    # Z on the second crossed edge only changes once the ribbon reaches it
    e1 = ribbons[1].dual[1][0]
    rec = half_infinite_surrogate(tc24, ribbons, M, tc24.edge_phase(e1, chi))
    assert rec["increments"][0] == pytest.approx(2.0)
    assert rec["increments"][1] == 0.0
