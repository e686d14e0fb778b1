"""Quantum double Hamiltonians for abelian groups, interactions and perturbation paths."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, ShapeError
from .groups import AbelianGroup, Character
from .lattice import EdgeLattice
from .linalg import DEFAULT_CAP, HilbertSpace, Monomial, op_norm, phase_op, shift_op

__all__ = [
    "QuantumDoubleModel",
    "Interaction",
    "PerturbationPath",
    "perturbed_hamiltonian",
    "interaction_f_norm",
    "build_hamiltonian",
]


class QuantumDoubleModel:
    """Kitaev's quantum double model of an abelian group on an edge lattice."""

    def __init__(self, lattice: EdgeLattice, group: AbelianGroup, cap: int | None = DEFAULT_CAP):
        self.lattice = lattice
        self.group = group
        self.space = HilbertSpace(group.order, lattice.num_edges, cap)
        self._H = None
        self._flux = {}

    @property
    def dim(self) -> int:
        return self.space.dim

    def _star(self, v):
        if not self.lattice.has_star(v):
            raise ShapeError(f"star at {v} is not contained in the lattice")
        return self.lattice.star_edges(v)

    def _face(self, f):
        if not self.lattice.has_face(f):
            raise ShapeError(f"plaquette {f} is not contained in the lattice")
        return self.lattice.face_boundary(f)

    # -- local terms -------------------------------------------------------
    def edge_shift(self, e: int, g) -> Monomial:
        """``X_e^g``: left multiplication by ``g`` on edge ``e``."""
        return shift_op(self.space, {e: self.group.index(g)}, self.group.add_table)

    def edge_phase(self, e: int, chi: Character) -> Monomial:
        """``Z_e^chi``: phase ``chi(h)`` on ``|h>``."""
        return phase_op(self.space, {e: chi.values()})

    def star_term(self, v, g) -> Monomial:
        """``A_v^g``: ``g`` on edges leaving ``v``, ``g^{-1}`` on edges entering it."""
        gi = self.group.index(g)
        ng = int(self.group.neg_table[gi])
        shifts = {}
        for e, s in self._star(self.lattice.reduce(v)):
            h = gi if s > 0 else ng
            shifts[e] = int(self.group.add_table[shifts.get(e, 0), h])
        return shift_op(self.space, shifts, self.group.add_table)

    def flux_codes(self, f) -> np.ndarray:
        """Counterclockwise holonomy code of face ``f`` in every basis state."""
        key = self.lattice.reduce(f)
        if key not in self._flux:
            acc = np.zeros(self.dim, dtype=np.int64)
            for e, s in self._face(key):
                d = self.space.digits[e].astype(np.int64)
                if s < 0:
                    d = self.group.neg_table[d]
                acc = self.group.add_table[acc, d]
            self._flux[key] = acc
        return self._flux[key]

    def plaquette_projector(self, f, h=None) -> sp.csr_matrix:
        """``B_f^h``: projector onto holonomy ``h`` (identity by default)."""
        code = 0 if h is None else self.group.index(h)
        return sp.diags((self.flux_codes(f) == code).astype(float), format="csr")

    def star_projector(self, v) -> sp.csr_matrix:
        n = self.group.order
        out = sp.csr_matrix((self.dim, self.dim))
        for g in self.group.elements():
            out = out + self.star_term(v, g).to_sparse().real
        return out / n

    # -- Hamiltonian -------------------------------------------------------
    def hamiltonian(self) -> sp.csr_matrix:
        """``H = sum_v (I - A_v) + sum_f (I - B_f)`` as a real CSR matrix."""
        if self._H is None:
            self._H = self._assemble()
        return self._H

    def _assemble(self) -> sp.csr_matrix:
        N, n = self.dim, self.group.order
        diag = np.full(N, float(len(self.lattice.stars)) * (1.0 - 1.0 / n))
        for f, _ in self.lattice.plaquettes:
            diag += self.flux_codes(f) != 0
        rows, cols, vals = [np.arange(N)], [np.arange(N)], [diag]
        cols_all = np.arange(N)
        for v, _ in self.lattice.stars:
            for g in self.group.elements()[1:]:
                rows.append(self.star_term(v, g).perm)
                cols.append(cols_all)
                vals.append(np.full(N, -1.0 / n))
        H = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N)
        )
        H.sum_duplicates()
        H.eliminate_zeros()
        return H

    def ground_state(self) -> np.ndarray:
        """Normalized ``prod_v A_v |e...e>``: flat everywhere, gauge invariant."""
        psi = np.zeros(self.dim)
        psi[0] = 1.0
        n = self.group.order
        for v, _ in self.lattice.stars:
            acc = np.zeros_like(psi)
            for g in self.group.elements():
                acc += self.star_term(v, g).apply(psi).real
            psi = acc / n
        return (psi / np.linalg.norm(psi)).astype(complex)

    def interaction(self) -> "Interaction":
        terms = {}
        for v, edges in self.lattice.stars:
            terms[("star", v)] = (frozenset(e for e, _ in edges), sp.identity(self.dim, format="csr") - self.star_projector(v))
        for f, edges in self.lattice.plaquettes:
            terms[("plaq", f)] = (frozenset(e for e, _ in edges), sp.identity(self.dim, format="csr") - self.plaquette_projector(f))
        return Interaction(self.lattice, terms)

    def star_expectations(self, psi) -> np.ndarray:
        n = self.group.order
        out = []
        for v, _ in self.lattice.stars:
            acc = sum(np.vdot(psi, self.star_term(v, g).apply(psi)) for g in self.group.elements())
            out.append((acc / n).real)
        return np.array(out)

    def plaquette_expectations(self, psi) -> np.ndarray:
        p = np.abs(psi) ** 2
        return np.array([p[self.flux_codes(f) == 0].sum() for f, _ in self.lattice.plaquettes])


def build_hamiltonian(lattice: EdgeLattice, group: AbelianGroup, cap: int | None = DEFAULT_CAP) -> sp.csr_matrix:
    return QuantumDoubleModel(lattice, group, cap).hamiltonian()


@dataclass
class Interaction:
    """Finite interaction: ``terms[key] = (support edges, Hermitian operator)``."""

    lattice: EdgeLattice
    terms: dict = field(default_factory=dict)
    norms: dict | None = None

    def term_norms(self) -> dict:
        if self.norms is None:
            self.norms = {k: op_norm(op) if op.nnz else 0.0 for k, (_, op) in self.terms.items()}
        return self.norms

    @property
    def radius(self) -> float:
        D = self.lattice.edge_distances
        r = 0.0
        for X, _ in self.terms.values():
            X = list(X)
            r = max(r, float(D[np.ix_(X, X)].max()) if X else 0.0)
        return r

    def total(self) -> sp.csr_matrix:
        ops = [op for _, op in self.terms.values()]
        return sum(ops[1:], ops[0]) if ops else None


def interaction_f_norm(phi: Interaction, F) -> float:
    """``sup_{x,y} F(d(x,y))^{-1} sum_{X containing x, y} ||Phi(X)||`` over edge sites."""
    lat = phi.lattice
    E = lat.num_edges
    D = lat.edge_distances
    acc = np.zeros((E, E))
    norms = phi.term_norms()
    for k, (X, _) in phi.terms.items():
        X = np.fromiter(X, dtype=np.int64)
        acc[np.ix_(X, X)] += norms[k]
    occ = acc > 0
    if not occ.any():
        return 0.0
    Fv = np.asarray(F(D[occ]), dtype=float)
    if np.any(Fv <= 0):
        raise DomainError("F vanishes at an occupied distance")
    return float(np.max(acc[occ] / Fv))


@dataclass
class PerturbationPath:
    """``Phi_s = Phi_0 + s V`` with a translation-invariant field ``V``.

    ``kind`` is ``'z-field'`` (``sum_e (Z^chi + Z^chi^dag)/2``), ``'x-field'``
    (``sum_e (X^g + X^g^dag)/2``) or ``'custom'`` with ``terms`` a list of
    ``(edges, operator)`` pairs.
    """

    model: QuantumDoubleModel
    kind: str = "z-field"
    chi: tuple | None = None
    g: tuple | None = None
    terms: list | None = None
    _V: sp.csr_matrix | None = field(default=None, repr=False)

    def field_terms(self) -> list:
        m = self.model
        G = m.group
        out = []
        if self.kind == "z-field":
            chi = G.character(self.chi if self.chi is not None else (1,) + (0,) * (G.rank - 1))
            for e in range(m.lattice.num_edges):
                Z = m.edge_phase(e, chi).to_sparse()
                out.append(({e}, (Z + Z.conj().T) / 2))
        elif self.kind == "x-field":
            g = self.g if self.g is not None else (1,) + (0,) * (G.rank - 1)
            for e in range(m.lattice.num_edges):
                X = m.edge_shift(e, g).to_sparse()
                out.append(({e}, (X + X.conj().T) / 2))
        elif self.kind == "custom":
            out = list(self.terms or [])
        else:
            raise ShapeError(f"unknown perturbation type {self.kind!r}")
        return out

    def V(self) -> sp.csr_matrix:
        if self._V is None:
            terms = [op for _, op in self.field_terms()]
            V = sum(terms[1:], terms[0]) if terms else sp.csr_matrix((self.model.dim, self.model.dim))
            V = sp.csr_matrix(V)
            if V.nnz and np.abs(V.data.imag).max() < 1e-15:
                V = V.real.tocsr()
            self._V = V
        return self._V

    def H(self, s: float) -> sp.csr_matrix:
        return self.model.hamiltonian() + s * self.V()


def perturbed_hamiltonian(path: PerturbationPath, s: float):
    """``(H(s), H'(s))`` for the linear path."""
    if not 0.0 <= s <= 1.0:
        raise DomainError("coupling must lie in [0, 1]")
    return path.H(s), path.V()
