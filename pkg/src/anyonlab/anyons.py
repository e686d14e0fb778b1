"""Sector data of abelian quantum doubles and its lattice cross-check."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, ShapeError
from .groups import AbelianGroup, AnyonLabel, anyon_labels, fuse
from .lattice import RibbonPath, Site, build_ribbon, loop_around_site
from .model import QuantumDoubleModel
from .ribbons import ribbon_operator

__all__ = [
    "half_braiding",
    "monodromy",
    "twist",
    "SectorTable",
    "modular_data",
    "braid_equation_check",
    "lattice_monodromy",
    "lattice_monodromy_table",
    "default_ribbon",
    "max_table_error",
]


def _check(a: AnyonLabel, b: AnyonLabel):
    if a.group != b.group:
        raise ShapeError("labels belong to different groups")


def half_braiding_int(a: AnyonLabel, b: AnyonLabel) -> int:
    """``R(a, b) = chi_b(c_a)`` as an integer phase modulo the group exponent."""
    _check(a, b)
    return b.chi.phase_int(a.c)


def monodromy_int(a: AnyonLabel, b: AnyonLabel) -> int:
    L = a.group.exponent
    return (half_braiding_int(a, b) + half_braiding_int(b, a)) % L


def _phase(p: int, L: int) -> complex:
    return complex(np.exp(2j * np.pi * p / L))


def half_braiding(a: AnyonLabel, b: AnyonLabel) -> complex:
    return _phase(half_braiding_int(a, b), a.group.exponent)


def monodromy(a: AnyonLabel, b: AnyonLabel) -> complex:
    """``M(a, b) = chi_a(c_b) chi_b(c_a)``."""
    return _phase(monodromy_int(a, b), a.group.exponent)


def twist(a: AnyonLabel) -> complex:
    return _phase(a.chi.phase_int(a.c), a.group.exponent)


@dataclass
class SectorTable:
    group: AbelianGroup
    labels: list
    M: np.ndarray
    theta: np.ndarray
    S: np.ndarray
    T: np.ndarray

    def index(self, label: AnyonLabel) -> int:
        return self.labels.index(label)

    def conjugation(self) -> np.ndarray:
        C = np.zeros((len(self.labels),) * 2)
        for i, a in enumerate(self.labels):
            C[i, self.index(a.conjugate())] = 1.0
        return C

    def verlinde(self) -> np.ndarray:
        """``N[a, b, c] = sum_x S_ax S_bx conj(S_cx) / S_0x``."""
        S = self.S
        return np.einsum("ax,bx,cx->abc", S, S, S.conj() / S[0][None, :]) if S.size else S

    def checks(self) -> dict:
        S, T = self.S, self.T
        k = len(self.labels)
        C = self.conjugation()
        ST3 = np.linalg.matrix_power(S @ T, 3)
        S2 = S @ S
        i, j = np.unravel_index(np.argmax(np.abs(S2)), S2.shape)
        lam = ST3[i, j] / S2[i, j]
        fus = np.zeros((k, k, k))
        for x, a in enumerate(self.labels):
            for y, b in enumerate(self.labels):
                fus[x, y, self.index(fuse(a, b))] = 1.0
        return {
            "unitarity": float(np.max(np.abs(S @ S.conj().T - np.eye(k)))),
            "S_squared_vs_conjugation": float(np.max(np.abs(S2 - C))),
            "ST_cubed_ratio": complex(lam),
            "ST_cubed_residual": float(np.max(np.abs(ST3 - lam * S2))),
            "T_modulus": float(np.max(np.abs(np.abs(np.diag(T)) - 1))),
            "T_offdiag": float(np.max(np.abs(T - np.diag(np.diag(T))))),
            "M_symmetric": bool(np.allclose(self.M, self.M.T, atol=1e-14)),
            "M_rows_distinct": len({tuple(np.round(r, 9)) for r in self.M}) == k,
            "S_rank": int(np.linalg.matrix_rank(S)),
            "verlinde_residual": float(np.max(np.abs(self.verlinde() - fus))),
        }

    def to_json(self) -> dict:
        keys = [a.key() for a in self.labels]
        c = lambda z: [float(z.real), float(z.imag)]  # noqa: E731
        return {
            "group": list(self.group.factors),
            "labels": keys,
            "M": [[c(z) for z in row] for row in self.M],
            "theta": [c(z) for z in self.theta],
            "S": [[c(z) for z in row] for row in self.S],
            "T": [c(z) for z in np.diag(self.T)],
        }


def modular_data(group: AbelianGroup) -> SectorTable:
    labels = anyon_labels(group)
    M = np.array([[monodromy(a, b) for b in labels] for a in labels])
    theta = np.array([twist(a) for a in labels])
    S = M.conj() / group.order
    return SectorTable(group, labels, M, theta, S, np.diag(theta))


def braid_equation_check(group: AbelianGroup) -> dict:
    """Exhaustive scalar hexagon/consistency identities with exact integer phases."""
    labels = anyon_labels(group)
    L = group.exponent
    R = {(a, b): half_braiding_int(a, b) for a in labels for b in labels}
    fails = {"left": 0, "right": 0, "double": 0, "vacuum": 0}
    vac = AnyonLabel.vacuum(group)
    for a, b, c in itertools.product(labels, repeat=3):
        ab, bc = fuse(a, b), fuse(b, c)
        if R[ab, c] != (R[a, c] + R[b, c]) % L:
            fails["left"] += 1
        if R[a, bc] != (R[a, b] + R[a, c]) % L:
            fails["right"] += 1
    for a, b in itertools.product(labels, repeat=2):
        if monodromy_int(a, b) != (R[a, b] + R[b, a]) % L:
            fails["double"] += 1
        if R[a, vac] or R[vac, a]:
            fails["vacuum"] += 1
    return {
        "group": list(group.factors),
        "triples": len(labels) ** 3,
        "failures": fails,
        "passed": not any(fails.values()),
    }


def default_ribbon(lattice) -> RibbonPath:
    """Two-site ribbon ``((0,0),(-1,0)) -> ((1,0),(0,0))``; valid on every torus."""
    return build_ribbon(lattice, [Site((0, 0), (-1, 0)), Site((1, 0), (0, 0))])


def _encloses(lat, loop_site: Site, x: Site) -> tuple[bool, bool]:
    return (lat.reduce(x.v) == lat.reduce(loop_site.v), lat.reduce(x.f) == lat.reduce(loop_site.f))


def lattice_monodromy(a: AnyonLabel, b: AnyonLabel, model: QuantumDoubleModel,
                      ribbon: RibbonPath | None = None, ground: np.ndarray | None = None) -> complex:
    """Monodromy of ``a`` around ``b`` from a closed ``a``-ribbon loop.

    ``|psi> = F_b |Omega>`` puts ``b`` at the end site of ``ribbon``; the loop
    circles that site once counterclockwise. The result is
    ``<psi|loop|psi> / <Omega|loop|Omega>``.
    """
    _check(a, b)
    if a.group != model.group:
        raise ShapeError("labels and model use different groups")
    lat = model.lattice
    ribbon = default_ribbon(lat) if ribbon is None else ribbon
    if ribbon.closed:
        raise GeometryError("the b-ribbon must be open")
    site = ribbon.end
    end_in = _encloses(lat, site, ribbon.end)
    start_in = _encloses(lat, site, ribbon.start)
    if not all(end_in) or any(start_in):
        raise GeometryError("loop must enclose exactly one ribbon endpoint")
    loop = loop_around_site(lat, site)
    omega = model.ground_state() if ground is None else ground
    Fb = ribbon_operator(model, ribbon, b)
    La = ribbon_operator(model, loop, a)
    psi = Fb.apply(omega)
    num = np.vdot(psi, La.apply(psi)) / np.vdot(psi, psi)
    den = np.vdot(omega, La.apply(omega)) / np.vdot(omega, omega)
    return complex(num / den)


def lattice_monodromy_table(model: QuantumDoubleModel, ribbon: RibbonPath | None = None,
                            ground: np.ndarray | None = None) -> np.ndarray:
    labels = anyon_labels(model.group)
    omega = model.ground_state() if ground is None else ground
    return np.array([[lattice_monodromy(a, b, model, ribbon, omega) for b in labels] for a in labels])


def max_table_error(table: np.ndarray, group: AbelianGroup) -> float:
    return float(np.max(np.abs(table - modular_data(group).M)))
