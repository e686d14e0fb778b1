import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anyonlab import AbelianGroup, AnyonLabel, ShapeError, anyon_labels, character_eval, fuse


def test_character_examples():
    G2 = AbelianGroup((2,))
    assert character_eval(G2.character((1,)), (1,)) == pytest.approx(-1)
    G3 = AbelianGroup((3,))
    assert character_eval(G3.character((1,)), (2,)) == pytest.approx(cmath.exp(4j * math.pi / 3))
    G = AbelianGroup((2, 2))
    assert character_eval(G.character((1, 1)), (1, 0)) == pytest.approx(-1)
    assert character_eval(G.character((1, 1)), (1, 1)) == pytest.approx(1)


def test_trivial_character_and_identity():
    G = AbelianGroup((4, 2))
    for g in G.elements():
        assert character_eval(G.trivial_character, g) == 1
    for chi in G.characters():
        assert character_eval(chi, G.identity) == 1


GROUPS = [(2,), (3,), (4,), (2, 2), (5,), (6,), (2, 3), (2, 2, 2), (3, 3), (4, 2), (12,), (2, 6)]


@pytest.mark.parametrize("factors", GROUPS, ids=str)
def test_character_orthogonality_exhaustive(factors):
    G = AbelianGroup(factors)
    X = np.array([chi.values() for chi in G.characters()])
    assert np.allclose(X @ X.conj().T, G.order * np.eye(G.order), atol=1e-12)
    assert np.allclose(X.conj().T @ X, G.order * np.eye(G.order), atol=1e-12)


@pytest.mark.parametrize("factors", GROUPS, ids=str)
def test_characters_are_homomorphisms(factors):
    G = AbelianGroup(factors)
    for chi in G.characters():
        for g, h in itertools.product(G.elements(), repeat=2):
            assert chi.phase_int(G.add(g, h)) == (chi.phase_int(g) + chi.phase_int(h)) % G.exponent


def test_group_tables_consistent():
    G = AbelianGroup((2, 3))
    for i, g in enumerate(G.elements()):
        assert G.index(g) == i and G.element(i) == g
        assert G.add_table[i, G.neg_table[i]] == 0
    assert G.exponent == 6 and G.order == 6 and G.rank == 2
    assert G.element_order((1, 1)) == 6


@pytest.mark.parametrize("bad", [(), (1,), (0, 2), (-3,)])
def test_bad_group_rejected(bad):
    with pytest.raises(ShapeError):
        AbelianGroup(bad)


def test_arity_mismatch_rejected():
    G = AbelianGroup((2, 2))
    with pytest.raises(ShapeError):
        G.character((1,))
    with pytest.raises(ShapeError):
        character_eval(G.character((1, 0)), (1, 0, 0))


def test_label_enumeration_z2():
    labels = anyon_labels(AbelianGroup((2,)))
    assert [str(a) for a in labels] == ["(iota, 0)", "(chi1, 0)", "(iota, 1)", "(chi1, 1)"]
    assert labels[0].is_vacuum


def test_fuse_examples():
    G = AbelianGroup((3,))
    a = AnyonLabel.of(G, (1,), (2,))
    b = AnyonLabel.of(G, (2,), (2,))
    assert fuse(a, b) == AnyonLabel.of(G, (0,), (1,))
    assert fuse(a, a.conjugate()).is_vacuum
    with pytest.raises(ShapeError):
        fuse(a, AnyonLabel.vacuum(AbelianGroup((2,))))


small_groups = st.sampled_from([(2,), (3,), (4,), (2, 2), (6,), (2, 3)]).map(AbelianGroup)


@settings(max_examples=60, deadline=None)
@given(small_groups, st.data())
def test_fusion_is_abelian_group_law(G, data):
    labels = anyon_labels(G)
    a, b, c = (data.draw(st.sampled_from(labels)) for _ in range(3))
    vac = AnyonLabel.vacuum(G)
    assert fuse(a, b) == fuse(b, a)
    assert fuse(fuse(a, b), c) == fuse(a, fuse(b, c))
    assert fuse(a, vac) == a
    assert fuse(a, a.conjugate()) == vac


@settings(max_examples=60, deadline=None)
@given(small_groups, st.data())
def test_character_multiplication_pointwise(G, data):
    chars = G.characters()
    x, y = data.draw(st.sampled_from(chars)), data.draw(st.sampled_from(chars))
    g = data.draw(st.sampled_from(G.elements()))
    assert (x * y)(g) == pytest.approx(x(g) * y(g))
    assert x.conj()(g) == pytest.approx(np.conj(x(g)))
