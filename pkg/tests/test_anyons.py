import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anyonlab import (
    AbelianGroup,
    AnyonLabel,
    EdgeLattice,
    GeometryError,
    QuantumDoubleModel,
    ShapeError,
    Site,
    anyon_labels,
    braid_equation_check,
    build_ribbon,
    fuse,
    lattice_monodromy,
    modular_data,
    monodromy,
    twist,
)
from anyonlab.anyons import half_braiding, lattice_monodromy_table, max_table_error

Z2 = AbelianGroup((2,))
E = AnyonLabel.of(Z2, (1,), (0,))
M = AnyonLabel.of(Z2, (0,), (1,))
EM = AnyonLabel.of(Z2, (1,), (1,))

GROUPS = [(2,), (3,), (4,), (2, 2), (6,)]


def test_z2_s_matrix_explicit():
    S = modular_data(Z2).S
    ref = 0.5 * np.array([[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]])
    assert np.allclose(S, ref, atol=1e-15)


def test_z2_twists():
    tab = modular_data(Z2)
    assert np.allclose(tab.theta, [1, 1, 1, -1])
    assert twist(EM) == pytest.approx(-1)
    assert tab.T[0, 0] == 1


def test_z2_e_m_monodromy():
    assert monodromy(E, M) == pytest.approx(-1)
    assert monodromy(E, E) == pytest.approx(1)
    assert monodromy(EM, EM) == pytest.approx(1)


def test_z3_charge_flux_monodromy():
    G = AbelianGroup((3,))
    a, b = AnyonLabel.of(G, (1,), (0,)), AnyonLabel.of(G, (0,), (1,))
    assert monodromy(a, b) == pytest.approx(cmath.exp(2j * math.pi / 3))


def test_group_mismatch():
    with pytest.raises(ShapeError):
        monodromy(E, AnyonLabel.vacuum(AbelianGroup((3,))))


@pytest.mark.parametrize("factors", GROUPS, ids=str)
def test_vacuum_row_and_symmetry(factors):
    G = AbelianGroup(factors)
    tab = modular_data(G)
    assert np.allclose(tab.M[0], 1) and np.allclose(tab.M[:, 0], 1)
    assert np.allclose(tab.M, tab.M.T)
    assert np.allclose(np.abs(tab.M), 1)
    assert np.allclose(np.abs(tab.theta), 1)


@pytest.mark.parametrize("factors", GROUPS, ids=str)
def test_modular_checks(factors):
    G = AbelianGroup(factors)
    chk = modular_data(G).checks()
    assert chk["unitarity"] < 1e-12
    assert chk["S_squared_vs_conjugation"] < 1e-12
    assert chk["ST_cubed_residual"] < 1e-12
    assert abs(abs(chk["ST_cubed_ratio"]) - 1) < 1e-12
    assert chk["verlinde_residual"] < 1e-12
    assert chk["M_rows_distinct"] and chk["S_rank"] == G.order**2


def test_quantum_double_has_trivial_central_charge():
    # D(G) is a Drinfeld centre, so (ST)^3 = S^2 exactly
    for factors in GROUPS:
        assert modular_data(AbelianGroup(factors)).checks()["ST_cubed_ratio"] == pytest.approx(1)


@pytest.mark.parametrize("factors", [(2,), (3,), (2, 2)], ids=str)
def test_braid_equation_check(factors):
    rep = braid_equation_check(AbelianGroup(factors))
    assert rep["passed"]
    assert rep["triples"] == AbelianGroup(factors).order ** 6


def test_braid_check_z2_counts():
    assert braid_equation_check(Z2)["triples"] == 64


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(GROUPS).map(AbelianGroup), st.data())
def test_monodromy_multiplicative(G, data):
    labels = anyon_labels(G)
    a, a2, b = (data.draw(st.sampled_from(labels)) for _ in range(3))
    assert monodromy(fuse(a, a2), b) == pytest.approx(monodromy(a, b) * monodromy(a2, b))
    assert monodromy(a, b) == pytest.approx(half_braiding(a, b) * half_braiding(b, a))
    # ribbon identity for the twist
    assert twist(fuse(a, b)) == pytest.approx(twist(a) * twist(b) * monodromy(a, b))


# -- lattice cross-checks --------------------------------------------------
def test_lattice_monodromy_vacuum_and_e_m(tc23):
    assert lattice_monodromy(E, AnyonLabel.vacuum(Z2), tc23) == pytest.approx(1)
    assert lattice_monodromy(E, M, tc23) == pytest.approx(-1)
    assert lattice_monodromy(M, E, tc23) == pytest.approx(-1)


@pytest.mark.parametrize("factors", [(2,), (3,), (4,), (2, 2)], ids=str)
def test_lattice_table_matches_formula(factors):
    G = AbelianGroup(factors)
    model = QuantumDoubleModel(EdgeLattice.torus(2), G)
    table = lattice_monodromy_table(model)
    assert max_table_error(table, G) < 1e-10


def test_lattice_monodromy_geometry_errors(tc23):
    lat = tc23.lattice
    closed = build_ribbon(lat, [Site((0, 0), (0, 0))])
    with pytest.raises(GeometryError):
        lattice_monodromy(E, M, tc23, ribbon=closed)
    # ribbon ending at a site sharing its vertex with the start: the loop would see both ends
    r = build_ribbon(lat, [Site((0, 0), (0, 0)), Site((0, 0), (-1, 0))])
    with pytest.raises(GeometryError):
        lattice_monodromy(E, M, tc23, ribbon=r)
