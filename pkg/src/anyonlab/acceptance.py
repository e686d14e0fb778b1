"""The ten acceptance criteria as plain functions.

Each ``criterion_k()`` returns a :class:`CriterionResult`; :func:`run_all`
runs a selection and is shared by ``anyonlab verify`` and the test suite.
"""

from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .anyons import (braid_equation_check, lattice_monodromy, lattice_monodromy_table,
                     max_table_error, modular_data)
from .flow import build_filter, refinement_ladder, stability_experiment, track_gap
from .groups import AbelianGroup, AnyonLabel, anyon_labels
from .lattice import ConeRegion, EdgeLattice, Site, build_ribbon
from .linalg import Evolution, eigenspace
from .locality import FFunctionSpec, cone_double_sum, lattice_convolution_constant, lr_bound
from .model import PerturbationPath, QuantumDoubleModel, interaction_f_norm
from .ribbons import excite, predicted_energy, ribbon_operator

__all__ = ["CriterionResult", "CRITERIA", "run_all", "format_line"]


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    summary: str
    details: dict = field(default_factory=dict)
    seconds: float = 0.0


def format_line(r: CriterionResult) -> str:
    return f"[{'PASS' if r.passed else 'FAIL'}] criterion {r.number:2d} {r.title}: {r.summary} ({r.seconds:.1f} s)"


def _z(n):
    return AbelianGroup((n,))


def kernel_dim_by_counting(model: QuantumDoubleModel) -> int:
    """Ground-space dimension from flat connections modulo gauge transformations.

    On a closed surface the ground space is spanned by gauge-orbit sums of flat
    configurations; the gauge group ``G^V`` acts with stabilizer the constant
    transformations, so ``dim = #flat * |G| / |G|^V``.
    """
    lat = model.lattice
    flat = np.ones(model.dim, dtype=bool)
    for f, _ in lat.plaquettes:
        flat &= model.flux_codes(f) == 0
    n = model.group.order
    num = int(flat.sum()) * n
    den = n ** len(lat.stars)
    if num % den:
        raise ArithmeticError("flat configurations do not split into full gauge orbits")
    return num // den


# -- 1 -------------------------------------------------------------------------
def criterion_1() -> CriterionResult:
    details, ok = {}, True
    for name, G, L in (("Z2 3x3", _z(2), (3, 3)), ("Z3 2x2", _z(3), (2, 2))):
        t0 = time.perf_counter()
        model = QuantumDoubleModel(EdgeLattice.torus(*L), G)
        H = model.hamiltonian()
        w, V = eigenspace(H, (-0.5, 0.5))
        stars = np.concatenate([model.star_expectations(V[:, i]) for i in range(V.shape[1])])
        plaqs = np.concatenate([model.plaquette_expectations(V[:, i]) for i in range(V.shape[1])])
        dt = time.perf_counter() - t0
        dev = float(max(np.max(np.abs(stars - 1)), np.max(np.abs(plaqs - 1))))
        good = len(w) > 0 and float(np.max(np.abs(w))) < 1e-10 and dev < 1e-10 and dt < 10.0
        details[name] = {"dim": model.dim, "ground_energy": float(w.min()), "max_term_deviation": dev,
                         "seconds": dt}
        ok &= good
    s = "; ".join(f"{k}: E0={v['ground_energy']:.1e}, dev={v['max_term_deviation']:.1e}, {v['seconds']:.1f}s"
                  for k, v in details.items())
    return CriterionResult(1, "frustration-freeness", bool(ok), s, details)


# -- 2 -------------------------------------------------------------------------
def criterion_2() -> CriterionResult:
    details, ok = {}, True
    for name, G, L in (("Z2 2x2", _z(2), (2, 2)), ("Z2 3x3", _z(2), (3, 3)), ("Z3 2x2", _z(3), (2, 2))):
        model = QuantumDoubleModel(EdgeLattice.torus(*L), G)
        H = model.hamiltonian()
        w, _ = eigenspace(H, (-0.5, 0.5))
        oracle = {"counting": kernel_dim_by_counting(model)}
        if model.dim <= 3**8:
            E = np.linalg.eigvalsh(H.toarray())
            oracle["dense"] = int(np.sum(np.abs(E) < 1e-8))
        expected = G.order**2
        good = len(w) == expected and all(v == expected for v in oracle.values())
        details[name] = {"kernel_dim": len(w), "expected": expected, "oracles": oracle}
        ok &= good
    s = ", ".join(f"{k}: {v['kernel_dim']} (oracles {v['oracles']})" for k, v in details.items())
    return CriterionResult(2, "ground-state degeneracy", bool(ok), s, details)


# -- 3 -------------------------------------------------------------------------
def _ribbon_energies(model, ribbon, labels):
    ground = model.ground_state()
    out = []
    for lab in labels:
        F = ribbon_operator(model, ribbon, lab)
        _, E, res = excite(model, ground, F)
        out.append({"label": str(lab), "energy": E, "predicted": predicted_energy(model, ribbon, lab),
                    "residual": res})
    return out


def criterion_3() -> CriterionResult:
    details = {}
    # torus: both endpoints interior
    tz = QuantumDoubleModel(EdgeLattice.torus(2, 3), _z(3))
    rt = build_ribbon(tz.lattice, [Site((0, 0), (-1, 0)), Site((1, 0), (0, 0))])
    details["Z3 2x3 torus"] = _ribbon_energies(tz, rt, anyon_labels(tz.group))
    # open patch of 4 x 3 vertices: two stars, six plaquettes
    patch = EdgeLattice(4, 3, "open")
    pm = QuantumDoubleModel(patch, _z(2))
    inner = build_ribbon(patch, [Site((1, 1), (0, 1)), Site((2, 1), (1, 1))])
    outer = build_ribbon(patch, [Site((1, 1), (1, 1)), Site((2, 1), (2, 1)), Site((3, 1), (3, 1))])
    labs = anyon_labels(pm.group)
    details["Z2 patch, interior endpoints"] = _ribbon_energies(pm, inner, labs)
    details["Z2 patch, one endpoint outside"] = _ribbon_energies(pm, outer, labs)
    ok = True
    for rows in details.values():
        for r in rows:
            ok &= abs(r["energy"] - r["predicted"]) < 1e-9 and r["residual"] < 1e-9
    sets = {k: sorted({round(r["energy"], 9) for r in rows}) for k, rows in details.items()}
    ok &= sets["Z3 2x3 torus"] == [0, 2, 4] and sets["Z2 patch, interior endpoints"] == [0, 2, 4]
    ok &= sets["Z2 patch, one endpoint outside"] == [0, 1, 2]
    res = max(r["residual"] for rows in details.values() for r in rows)
    s = ", ".join(f"{k}: {v}" for k, v in sets.items()) + f"; max residual {res:.1e}"
    return CriterionResult(3, "ribbon energies", bool(ok), s, {"runs": details, "energy_sets": sets})


# -- 4 -------------------------------------------------------------------------
def criterion_4() -> CriterionResult:
    details, ok = {}, True
    G2 = _z(2)
    t0 = time.perf_counter()
    m2 = QuantumDoubleModel(EdgeLattice.torus(3, 3), G2)
    e = AnyonLabel(G2.character((1,)), (0,))
    m = AnyonLabel(G2.trivial_character, (1,))
    M_em = lattice_monodromy(e, m, m2)
    dt = time.perf_counter() - t0
    details["Z2 3x3 e-m"] = {"dim": m2.dim, "value": [M_em.real, M_em.imag], "seconds": dt}
    ok &= abs(M_em + 1) < 1e-10 and dt < 60.0
    G3 = _z(3)
    m3 = QuantumDoubleModel(EdgeLattice.torus(2, 3), G3)
    q = AnyonLabel(G3.character((1,)), (0,))
    f = AnyonLabel(G3.trivial_character, (1,))
    M_qf = lattice_monodromy(q, f, m3)
    details["Z3 2x3 charge-flux"] = {"value": [M_qf.real, M_qf.imag]}
    ok &= abs(M_qf - cmath.exp(2j * math.pi / 3)) < 1e-10
    tables = {}
    for G in (_z(2), _z(3), _z(4), AbelianGroup((2, 2))):
        model = QuantumDoubleModel(EdgeLattice.torus(2, 2), G)
        err = max_table_error(lattice_monodromy_table(model), G)
        tables[str(list(G.factors))] = err
        ok &= err < 1e-10
    details["table_errors"] = tables
    braid = {}
    for G in (_z(2), _z(3), _z(4), AbelianGroup((2, 2))):
        r = braid_equation_check(G)
        braid[str(list(G.factors))] = r["passed"]
        ok &= r["passed"]
    details["braid_equations"] = braid
    s = (f"M(e,m)={M_em.real:+.12f} in {dt:.1f}s, M(q,f)={M_qf.real:+.6f}{M_qf.imag:+.6f}i, "
         f"max table error {max(tables.values()):.1e}, braid identities {'ok' if all(braid.values()) else 'FAIL'}")
    return CriterionResult(4, "braiding", bool(ok), s, details)


# -- 5 -------------------------------------------------------------------------
def criterion_5() -> CriterionResult:
    details, ok = {}, True
    for G in (_z(2), _z(3), _z(4), AbelianGroup((2, 2))):
        c = modular_data(G).checks()
        k = G.order**2
        good = (c["unitarity"] < 1e-12 and c["S_squared_vs_conjugation"] < 1e-12 and c["T_modulus"] < 1e-12
                and c["T_offdiag"] == 0.0 and c["M_rows_distinct"] and c["S_rank"] == k)
        details[str(list(G.factors))] = {k_: (v if not isinstance(v, complex) else [v.real, v.imag])
                                         for k_, v in c.items()}
        ok &= good
    worst = max(v["unitarity"] for v in details.values())
    return CriterionResult(5, "modular data", bool(ok), f"4 groups, max unitarity defect {worst:.1e}", details)


# -- 6 -------------------------------------------------------------------------
LR_TIMES = (0.25, 0.5, 1.0, 2.0)


def lr_pairs(model):
    """Five disjoint-support generalized-Pauli pairs on the 2 x 3 torus."""
    G = model.group
    chi = G.character((1,))
    X = lambda e: model.edge_shift(e, (1,))  # noqa: E731
    Z = lambda e: model.edge_phase(e, chi)  # noqa: E731
    return [
        ("X0", X(0), (0,), "X2", X(2), (2,)),
        ("Z6", Z(6), (6,), "Z0", Z(0), (0,)),
        ("X0Z0", X(0) @ Z(0), (0,), "X7Z7", X(7) @ Z(7), (7,)),
        ("X1", X(1), (1,), "X3", X(3), (3,)),
        ("X0", X(0), (0,), "Z8", Z(8), (8,)),
    ]


def criterion_6() -> CriterionResult:
    model = QuantumDoubleModel(EdgeLattice.torus(2, 3), _z(2))
    lat = model.lattice
    F = FFunctionSpec(nu=2.0, eps_hat=1.0)
    phi_F = interaction_f_norm(model.interaction(), F)
    C_F = lattice_convolution_constant(F, lat)
    v = 2 * phi_F * C_F
    ev = Evolution(model.hamiltonian())
    cache = {}

    def eb(name, op):
        if name not in cache:
            cache[name] = ev.to_eigenbasis(op)
        return cache[name]

    rows, viol = [], 0
    for na, A, sa, nb, B, sb in lr_pairs(model):
        Ae, Be = eb(na, A), eb(nb, B)
        for t in LR_TIMES:
            exact = ev.commutator_norm(A, B, t, Ae=Ae, Be=Be)
            bound = lr_bound(sa, sb, t, F, v, C_F, lat)
            viol += exact > bound
            rows.append({"A": na, "B": nb, "t": t, "distance": float(lat.edge_distances[sa[0], sb[0]]),
                         "exact": exact, "bound": bound})
    ok = viol == 0 and len(rows) == 20
    s = (f"{len(rows)} triples, {viol} violations, ||Phi||_F={phi_F:.3g}, C_F={C_F:.4g}, v={v:.4g}, "
         f"max exact {max(r['exact'] for r in rows):.3f}")
    return CriterionResult(6, "Lieb-Robinson domination", bool(ok), s,
                           {"rows": rows, "phi_F": phi_F, "C_F": C_F, "v": v})


# -- 7 -------------------------------------------------------------------------
CONE_NS = (8, 16, 32, 64)


def criterion_7() -> CriterionResult:
    spec = FFunctionSpec(nu=2.0, eps_hat=1.0, g="power", alpha=1.0, b=1.0)
    details, ok = {}, True
    for alpha, eps in ((math.pi / 4, math.pi / 8), (math.pi / 6, math.pi / 6)):
        X = ConeRegion((0, 0), (1, 0), alpha)
        rows = []
        for n in CONE_NS:
            r = cone_double_sum(X, eps, n, spec)
            lo = n * math.sin(alpha + eps)
            rows.append({"n": n, "S": r.value, "tail_bound": r.tail_bound, "n4S": n**4 * r.value,
                         "distance": r.distance, "bracket": [lo, lo + 2]})
        dec = all(b["n4S"] < a["n4S"] for a, b in zip(rows, rows[1:]))
        br = all(r["bracket"][0] <= r["distance"] <= r["bracket"][1] for r in rows)
        details[f"alpha={alpha:.4f},eps={eps:.4f}"] = {"rows": rows, "decreasing": dec, "bracket": br}
        ok &= dec and br
    s = "; ".join(f"{k}: n^4 S = " + ", ".join(f"{r['n4S']:.2e}" for r in v["rows"]) for k, v in details.items())
    return CriterionResult(7, "cone-sum decay", bool(ok), s, details)


# -- 8 -------------------------------------------------------------------------
def criterion_8(gamma: float = 1.0) -> CriterionResult:
    filt = build_filter(gamma)
    integral_err = abs(filt.integral() - 1.0)
    k = np.linspace(1.05 * gamma, 2 * math.pi / filt.dt - gamma, 4001)
    tail = float(np.max(np.abs(filt.what(k))))
    E = np.concatenate([-k[::-1], k])
    cross = float(np.max(np.abs(filt.W(E) - 1j / E)))
    ok = integral_err < 1e-10 and tail <= 1e-8 and cross < 1e-6
    s = f"|int w - 1|={integral_err:.1e}, max |w^| beyond 1.05 gamma={tail:.1e}, max |W - i/E|={cross:.1e}"
    return CriterionResult(8, "filter invariants", bool(ok), s,
                           {"integral_error": integral_err, "tail": tail, "cross_gap": cross,
                            "filter": filt.metadata()})


# -- 9 -------------------------------------------------------------------------
FLOW_S_MAX = 0.1


def flow_path():
    model = QuantumDoubleModel(EdgeLattice.torus(2, 2), _z(2))
    return PerturbationPath(model, "z-field")


def criterion_9() -> CriterionResult:
    t0 = time.perf_counter()
    path = flow_path()
    gt = track_gap(path, np.linspace(0.0, FLOW_S_MAX, 41))
    gamma = 0.5 * gt.min_gap
    ladder = refinement_ladder(path, gamma, FLOW_S_MAX, band_dim=gt.band_dim)
    dt = time.perf_counter() - t0
    errs = [lv["max_transport_error"] for lv in ladder]
    ok = errs[-1] <= 1e-4 and all(b < a for a, b in zip(errs, errs[1:])) and dt < 300.0
    levels = [{k: v for k, v in lv.items() if k != "result"} for lv in ladder]
    s = f"gamma={gamma:.4f}, transport errors " + " > ".join(f"{e:.2e}" for e in errs) + f", {dt:.0f}s"
    return CriterionResult(9, "spectral-flow transport", bool(ok), s,
                           {"gamma": gamma, "min_gap": gt.min_gap, "band_dim": gt.band_dim, "levels": levels})


# -- 10 ------------------------------------------------------------------------
def criterion_10(s: float = 0.05) -> CriterionResult:
    res = stability_experiment(flow_path(), s)
    dev = res["monodromy_deviation"]
    prof = {k: {"ns": p.ns, "values": p.values, "nonincreasing": p.nonincreasing()}
            for k, p in res["profiles"].items()}
    ok = dev < 1e-10 and all(p["nonincreasing"] for p in prof.values())
    summary = (f"monodromy deviation {dev:.1e}, {len(prof)} profiles nonincreasing: "
               f"{all(p['nonincreasing'] for p in prof.values())}")
    return CriterionResult(10, "stability shadow", bool(ok), summary,
                           {"monodromy_deviation": dev, "profiles": prof,
                            "transport_error": res["transport_error"], "energy_deviation": res["energy_deviation"]})


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
}


def run_one(k: int) -> CriterionResult:
    t0 = time.perf_counter()
    r = CRITERIA[k]()
    r.seconds = time.perf_counter() - t0
    return r


def run_all(which=None, echo=None) -> list[CriterionResult]:
    out = []
    for k in sorted(CRITERIA if which is None else which):
        r = run_one(k)
        if echo is not None:
            echo(format_line(r))
        out.append(r)
    return out
