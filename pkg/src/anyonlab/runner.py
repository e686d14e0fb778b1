"""Experiment runner: ``anyonlab run --config cfg.json --out dir`` and ``anyonlab verify``.

A config is a JSON document::

    {"kind": "spectrum", "group": [2], "lattice": {"Lx": 2, "Ly": 2},
     "params": {...}, "seed": 0, "caps": {"dim": 1048576}}

Exit codes: 0 success, 1 other failure, 2 schema violation, 3 resource cap,
4 model-consistency or assumption violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import platform
import sys
from pathlib import Path

import jsonschema
import numpy as np
import scipy

from . import __version__
from .errors import (AnyonLabError, AssumptionViolationError, DomainError, GeometryError,
                     MeasurementAmbiguityError, ModelConsistencyError, ResourceError, SchemaError,
                     ShapeError)

DENSE_EVOLUTION_CAP = 2**13
EXIT_OK, EXIT_FAIL, EXIT_SCHEMA, EXIT_RESOURCE, EXIT_MODEL = 0, 1, 2, 3, 4

KINDS = ("spectrum", "ribbon", "braid", "smatrix", "lrbound", "conesum", "flow", "profile", "stability")

_num = {"type": "number"}
_int2 = {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}
_site = {"type": "array", "items": _int2, "minItems": 2, "maxItems": 2}
_label = {
    "type": "object",
    "properties": {"chi": {"type": "array", "items": {"type": "integer"}},
                   "c": {"type": "array", "items": {"type": "integer"}}},
    "required": ["chi", "c"],
    "additionalProperties": False,
}
_cone = {
    "type": "object",
    "properties": {"apex": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
                   "axis": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
                   "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": math.pi}},
    "required": ["apex", "axis", "alpha"],
    "additionalProperties": False,
}
_local_op = {
    "type": "object",
    "properties": {"edge": {"type": "integer", "minimum": 0}, "op": {"enum": ["X", "Z", "XZ"]}},
    "required": ["edge", "op"],
    "additionalProperties": False,
}
_fspec = {
    "type": "object",
    "properties": {"nu": _num, "eps_hat": _num, "g": {"enum": ["none", "power", "r_ln2"]},
                   "alpha": _num, "b": {"type": "number", "minimum": 0}, "scale": {"type": "number", "minimum": 0}},
    "additionalProperties": False,
}
_path = {
    "type": "object",
    "properties": {
        "type": {"enum": ["z-field", "x-field", "custom"]},
        "chi": {"type": "array", "items": {"type": "integer"}},
        "g": {"type": "array", "items": {"type": "integer"}},
        "terms": {"type": "array", "items": {
            "type": "object",
            "properties": {"edge": {"type": "integer", "minimum": 0}, "op": {"enum": ["X", "Z"]},
                           "coeff": _num},
            "required": ["edge", "op"], "additionalProperties": False}},
        "s_max": {"type": "number", "minimum": 0, "maximum": 1},
        "intervals": {"type": "integer", "minimum": 1},
    },
    "required": ["type"],
    "additionalProperties": False,
}

PARAM_SCHEMAS = {
    "spectrum": {"window": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}},
    "ribbon": {"sites": {"type": "array", "items": _site, "minItems": 1},
               "labels": {"type": "array", "items": _label}},
    "braid": {"sites": {"type": "array", "items": _site, "minItems": 2}},
    "smatrix": {},
    "lrbound": {"times": {"type": "array", "items": _num, "minItems": 1},
                "pairs": {"type": "array", "items": {
                    "type": "object", "properties": {"A": _local_op, "B": _local_op},
                    "required": ["A", "B"], "additionalProperties": False}},
                "random_pairs": {"type": "integer", "minimum": 0},
                "F": _fspec},
    "conesum": {"cone": _cone, "eps": {"type": "number", "exclusiveMinimum": 0},
                "ns": {"type": "array", "items": _num, "minItems": 1}, "F": _fspec},
    "flow": {"path": _path, "gamma": {"type": ["number", "null"], "exclusiveMinimum": 0},
             "dt": {"type": "number", "exclusiveMinimum": 0}, "gamma_T": {"type": "number", "exclusiveMinimum": 0},
             "ladder": {"type": "boolean"}, "dressed_table": {"type": "boolean"}},
    "profile": {"source": {"enum": ["evolution", "ribbon"]}, "A": _local_op, "t": _num,
                "sites": {"type": "array", "items": _site, "minItems": 2}, "label": _label,
                "cone": _cone, "eps": {"type": "number", "exclusiveMinimum": 0},
                "ns": {"type": "array", "items": _num, "minItems": 1}},
    "stability": {"path": _path, "s": {"type": "number", "minimum": 0, "maximum": 1},
                  "cone": _cone, "eps": {"type": "number", "exclusiveMinimum": 0},
                  "ns": {"type": "array", "items": _num, "minItems": 1}},
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": list(KINDS)},
        "group": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
        "lattice": {
            "type": "object",
            "properties": {"Lx": {"type": "integer", "minimum": 1}, "Ly": {"type": "integer", "minimum": 1},
                           "boundary": {"enum": ["periodic", "open"]}, "origin": _int2},
            "required": ["Lx", "Ly"],
            "additionalProperties": False,
        },
        "params": {"type": "object"},
        "seed": {"type": "integer", "minimum": 0},
        "caps": {"type": "object", "properties": {"dim": {"type": "integer", "minimum": 1}},
                 "additionalProperties": False},
        "output": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
    },
    "required": ["kind", "group"],
    "additionalProperties": False,
}

TOLERANCES = {
    "spectrum": {"eigen_residual": 1e-10, "zero_energy": 1e-10},
    "ribbon": {"eigen_residual": 1e-9, "measurement": 1e-9},
    "braid": {"table": 1e-10},
    "smatrix": {"identities": 1e-12},
    "lrbound": {"norm_iteration": 1e-10},
    "conesum": {"quadrature_rel": 1e-8},
    "flow": {"filter_integral": 1e-10, "gap_overlap_min": 0.5},
    "profile": {"zero_cutoff": 1e-14, "norm_iteration": 1e-10},
    "stability": {"table": 1e-10, "zero_cutoff": 1e-14},
}


# -- serialization -----------------------------------------------------------
def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    s = format(x, ".17g")
    return s if any(c in s for c in ".en") else s + ".0"


def to_jsonable(obj):
    """Numpy scalars/arrays to Python; complex numbers to ``[re, im]``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_json"):
        return to_jsonable(obj.to_json())
    return str(obj)


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    obj = to_jsonable(obj) if _level == 0 else obj
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent, _level + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, float):
        return _fmt_float(obj)
    return json.dumps(obj)


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _versions() -> dict:
    return {"anyonlab": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


# -- config handling -----------------------------------------------------------
def _path_str(parts) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def validate_config(cfg) -> dict:
    """Check ``cfg`` against the schema; raise :class:`SchemaError` naming the offending field."""
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
        params = cfg.get("params", {})
        schema = {"type": "object", "properties": PARAM_SCHEMAS[cfg["kind"]], "additionalProperties": False}
        try:
            jsonschema.validate(params, schema)
        except jsonschema.ValidationError as exc:
            raise SchemaError(_path_str(["params", *exc.absolute_path]), exc.message) from None
    except jsonschema.ValidationError as exc:
        raise SchemaError(_path_str(exc.absolute_path), exc.message) from None
    needs_lattice = cfg["kind"] not in ("smatrix", "conesum")
    if needs_lattice and "lattice" not in cfg:
        raise SchemaError("$.lattice", f"required for kind {cfg['kind']!r}")
    return cfg


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError("$", f"cannot read config: {exc}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"not valid JSON: {exc}") from None
    return validate_config(cfg)


class _Context:
    """Objects built from the shared part of a config."""

    def __init__(self, cfg: dict, cap: int | None):
        from .groups import AbelianGroup
        from .lattice import EdgeLattice

        self.cfg = cfg
        self.params = cfg.get("params", {})
        self.seed = int(cfg.get("seed", 0))
        self.cap = cap if cap is not None else cfg.get("caps", {}).get("dim")
        with _field("$.group"):
            self.group = AbelianGroup(tuple(cfg["group"]))
        self.lattice = None
        if "lattice" in cfg:
            L = cfg["lattice"]
            with _field("$.lattice"):
                self.lattice = EdgeLattice(L["Lx"], L["Ly"], L.get("boundary", "periodic"),
                                           origin=tuple(L.get("origin", (0, 0))))
        self._model = None

    @property
    def model(self):
        from .linalg import DEFAULT_CAP
        from .model import QuantumDoubleModel

        if self._model is None:
            self._model = QuantumDoubleModel(self.lattice, self.group,
                                             DEFAULT_CAP if self.cap is None else self.cap)
        return self._model

    def label(self, spec, where):
        from .groups import AnyonLabel

        with _field(where):
            return AnyonLabel.of(self.group, tuple(spec["chi"]), tuple(spec["c"]))

    def cone(self, spec, where):
        from .lattice import ConeRegion

        with _field(where):
            return ConeRegion(tuple(spec["apex"]), tuple(spec["axis"]), float(spec["alpha"]))

    def ribbon(self, sites, where):
        from .lattice import Site, build_ribbon

        with _field(where):
            return build_ribbon(self.lattice, [Site(tuple(v), tuple(f)) for v, f in sites])

    def local_op(self, spec, where):
        m = self.model
        e = int(spec["edge"])
        with _field(where):
            if e >= self.lattice.num_edges:
                raise ShapeError(f"edge {e} outside lattice with {self.lattice.num_edges} edges")
            g = (1,) + (0,) * (self.group.rank - 1)
            X = m.edge_shift(e, g)
            Z = m.edge_phase(e, self.group.character(g))
            return {"X": X, "Z": Z, "XZ": X @ Z}[spec["op"]]

    def path(self, spec, where):
        import scipy.sparse as sp

        from .model import PerturbationPath

        with _field(where):
            kind = spec["type"]
            if kind == "custom":
                terms = []
                for i, t in enumerate(spec.get("terms", [])):
                    P = self.local_op({"edge": t["edge"], "op": t["op"]}, f"{where}.terms[{i}]").to_sparse()
                    terms.append(({t["edge"]}, float(t.get("coeff", 1.0)) * (P + P.conj().T) / 2))
                if not terms:
                    raise DomainError("custom path needs at least one term")
                return PerturbationPath(self.model, "custom", terms=[(e, sp.csr_matrix(op)) for e, op in terms])
            chi = tuple(spec["chi"]) if "chi" in spec else None
            g = tuple(spec["g"]) if "g" in spec else None
            return PerturbationPath(self.model, kind, chi=chi, g=g)


class _field:
    """Turn shape/domain/geometry errors raised while interpreting a config into schema errors."""

    def __init__(self, where: str):
        self.where = where

    def __enter__(self):
        return self

    def __exit__(self, tp, exc, tb):
        if isinstance(exc, (ShapeError, DomainError, GeometryError)):
            raise SchemaError(self.where, str(exc)) from exc
        return False


def _fspec(spec: dict | None, **defaults):
    from .locality import FFunctionSpec

    args = dict(defaults)
    args.update(spec or {})
    with _field("$.params.F"):
        return FFunctionSpec(**args)


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(_fmt_float(float(v)) if isinstance(v, (float, np.floating)) else str(v) for v in r))
    return "\n".join(lines) + "\n"


# -- experiment kinds ------------------------------------------------------------
def _run_spectrum(ctx: _Context):
    from .linalg import eigenspace

    m = ctx.model
    window = ctx.params.get("window", [-0.5, 0.5])
    w, V = eigenspace(m.hamiltonian(), window, cap=m.space.cap)
    stars = [m.star_expectations(V[:, i]) for i in range(V.shape[1])]
    plaqs = [m.plaquette_expectations(V[:, i]) for i in range(V.shape[1])]
    res = {
        "dim": m.dim,
        "window": window,
        "energies": w,
        "kernel_dim": int(np.sum(np.abs(w) < 1e-8)),
        "ground_energy": float(w.min()) if len(w) else None,
        "max_star_deviation": float(max((np.max(np.abs(s - 1)) for s in stars), default=0.0)),
        "max_plaquette_deviation": float(max((np.max(np.abs(p - 1)) for p in plaqs), default=0.0)),
    }
    if ctx.lattice.periodic:
        res["expected_torus_degeneracy"] = ctx.group.order**2
    return res, {}


def _run_ribbon(ctx: _Context):
    from .groups import anyon_labels
    from .ribbons import excite, measure_charge, predicted_energy, ribbon_operator

    m = ctx.model
    rib = ctx.ribbon(ctx.params["sites"], "$.params.sites")
    labels = ([ctx.label(s, f"$.params.labels[{i}]") for i, s in enumerate(ctx.params["labels"])]
              if "labels" in ctx.params else anyon_labels(ctx.group))
    ground = m.ground_state()
    lat = ctx.lattice
    reports = []
    for lab in labels:
        F = ribbon_operator(m, rib, lab)
        psi, E, res = excite(m, ground, F)
        charges = {}
        for name, site in (("start", rib.start), ("end", rib.end)):
            inside = lat.site_in_bulk(site) and lat.has_star(lat.reduce(site.v))
            charges[name] = measure_charge(m, psi, site).key() if inside and not rib.closed else None
        reports.append({"label": lab.key(), "energy": E, "predicted_energy": predicted_energy(m, rib, lab),
                        "residual": res, "endpoint_charges": charges})
    return {"ribbon": {"sites": ctx.params["sites"], "support": sorted(rib.support)}, "excitations": reports}, {}


def _run_braid(ctx: _Context):
    from .anyons import braid_equation_check, lattice_monodromy_table, modular_data

    rib = ctx.ribbon(ctx.params["sites"], "$.params.sites") if "sites" in ctx.params else None
    table = lattice_monodromy_table(ctx.model, rib)
    data = modular_data(ctx.group)
    return {
        "labels": [a.key() for a in data.labels],
        "lattice_monodromy": table,
        "formula_monodromy": data.M,
        "max_error": float(np.max(np.abs(table - data.M))),
        "braid_equations": braid_equation_check(ctx.group),
    }, {}


def _run_smatrix(ctx: _Context):
    from .anyons import modular_data

    data = modular_data(ctx.group)
    return {"sector_table": data.to_json(), "checks": data.checks()}, {}


def _run_lrbound(ctx: _Context):
    from .linalg import Evolution
    from .locality import lattice_convolution_constant, lr_bound
    from .model import interaction_f_norm

    m = ctx.model
    lat = ctx.lattice
    F = _fspec(ctx.params.get("F"))
    pairs = [(p["A"], p["B"]) for p in ctx.params.get("pairs", [])]
    k = int(ctx.params.get("random_pairs", 0 if pairs else 5))
    rng = np.random.default_rng(ctx.seed)
    ops = ("X", "Z", "XZ")
    for _ in range(k):
        a, b = rng.choice(lat.num_edges, size=2, replace=False)
        pairs.append(({"edge": int(a), "op": ops[rng.integers(3)]}, {"edge": int(b), "op": ops[rng.integers(3)]}))
    for i, (A, B) in enumerate(pairs):
        if A["edge"] == B["edge"]:
            raise SchemaError(f"$.params.pairs[{i}]", "supports overlap")
    phi_F = interaction_f_norm(m.interaction(), F)
    C_F = lattice_convolution_constant(F, lat)
    v = 2 * phi_F * C_F
    ev = Evolution(m.hamiltonian(), cap=_dense_cap(m))
    rows = []
    for i, (A, B) in enumerate(pairs):
        Aop = ctx.local_op(A, f"$.params.pairs[{i}].A")
        Bop = ctx.local_op(B, f"$.params.pairs[{i}].B")
        Ae, Be = ev.to_eigenbasis(Aop), ev.to_eigenbasis(Bop)
        for t in ctx.params.get("times", [0.25, 0.5, 1.0]):
            exact = ev.commutator_norm(Aop, Bop, t, Ae=Ae, Be=Be)
            bound = lr_bound([A["edge"]], [B["edge"]], t, F, v, C_F, lat)
            rows.append({"A": A, "B": B, "t": t, "distance": float(lat.edge_distances[A["edge"], B["edge"]]),
                         "exact": exact, "bound": bound, "dominated": bool(exact <= bound)})
    return {"F": F.to_json(), "phi_F": phi_F, "C_F": C_F, "v": v, "rows": rows,
            "violations": sum(not r["dominated"] for r in rows)}, {}


def _run_conesum(ctx: _Context):
    from .locality import cone_double_sum

    p = ctx.params
    X = ctx.cone(p.get("cone", {"apex": [0, 0], "axis": [1, 0], "alpha": math.pi / 4}), "$.params.cone")
    eps = float(p.get("eps", math.pi / 8))
    F = _fspec(p.get("F"), g="power", alpha=1.0, b=1.0)
    rows = []
    for n in p.get("ns", [8, 16, 32, 64]):
        with _field("$.params"):
            r = cone_double_sum(X, eps, float(n), F)
        lo = n * math.sin(min(X.alpha + eps, math.pi / 2))
        rows.append({"n": float(n), "value": r.value, "tail_bound": r.tail_bound, "distance": r.distance,
                     "bracket": [lo, lo + 2], "box_radius": r.radius})
    csv = _csv(["n", "value", "tail_bound", "distance"],
               [(r["n"], r["value"], r["tail_bound"], r["distance"]) for r in rows])
    return {"cone": X.spec(), "eps": eps, "F": F.to_json(), "rows": rows}, {"conesum.csv": csv}


def _dense_cap(model) -> int:
    # dense diagonalization is limited separately from the sparse state-space cap
    return min(model.space.cap or DENSE_EVOLUTION_CAP, DENSE_EVOLUTION_CAP)


def _grid(spec):
    return np.linspace(0.0, float(spec.get("s_max", 0.1)), int(spec.get("intervals", 20)) + 1)


def _run_flow(ctx: _Context):
    from .flow import dressed_monodromy_table, flow_unitary, refinement_ladder, track_gap

    p = ctx.params
    pspec = p.get("path", {"type": "z-field"})
    path = ctx.path(pspec, "$.params.path")
    grid = _grid(pspec)
    gt = track_gap(path, grid)
    gamma = p.get("gamma") or 0.5 * gt.min_gap
    out = {"gamma": gamma, "min_gap": gt.min_gap, "band_dim": gt.band_dim}
    if p.get("ladder", False):
        ladder = refinement_ladder(path, gamma, float(grid[-1]), band_dim=gt.band_dim)
        out["ladder"] = [{k: v for k, v in lv.items() if k != "result"} for lv in ladder]
        res = ladder[-1]["result"]
    else:
        gT = float(p.get("gamma_T", 600.0))
        res = flow_unitary(path, gamma, grid, dt=float(p.get("dt", 0.25)), T=gT / gamma, band_dim=gt.band_dim)
    out.update(res.to_json())
    if p.get("dressed_table", True):
        out["dressed_monodromy_table"] = dressed_monodromy_table(path.model, res.unitaries[-1])
    csv = _csv(["s", "gap", "transport_error", "unitarity_defect"],
               zip(res.s, res.gaps, res.transport_error, res.unitarity_defect))
    return out, {"flow.csv": csv}


def _run_profile(ctx: _Context):
    from .linalg import Evolution
    from .locality import DecayProfile, locality_profile, quasi_locality_profile

    p = ctx.params
    m = ctx.model
    cone = ctx.cone(p.get("cone", {"apex": [0, 0], "axis": [1, 0], "alpha": math.pi / 12}), "$.params.cone")
    eps = float(p.get("eps", math.pi / 24))
    ns = [float(n) for n in p.get("ns", [0, 1, 2, 3])]
    if p.get("source", "evolution") == "evolution":
        if "A" not in p:
            raise SchemaError("$.params.A", "required for source 'evolution'")
        A = ctx.local_op(p["A"], "$.params.A")
        ev = Evolution(m.hamiltonian(), cap=_dense_cap(m))
        vals = quasi_locality_profile(ev, A, float(p.get("t", 0.5)), cone, eps, ns, ctx.lattice, m.space)
        prof = DecayProfile(ns, vals, meta={"mode": "quasi-locality", "cone": cone.spec(), "eps": eps,
                                            "t": float(p.get("t", 0.5))})
    else:
        from .ribbons import ribbon_operator

        if "sites" not in p or "label" not in p:
            raise SchemaError("$.params", "source 'ribbon' needs 'sites' and 'label'")
        rib = ctx.ribbon(p["sites"], "$.params.sites")
        F = ribbon_operator(m, rib, ctx.label(p["label"], "$.params.label")).to_sparse()
        with _field("$.params.cone"):
            prof = locality_profile(F, cone, eps, ns, ctx.lattice, ctx.group, m.space, mode="channel")
    res = {"ns": prof.ns, "values": prof.values, "nonincreasing": prof.nonincreasing(), "meta": prof.meta,
           "tail_fits": prof.tail_fits()}
    return res, {"profile.csv": prof.to_csv()}


def _run_stability(ctx: _Context):
    from .flow import stability_experiment

    p = ctx.params
    pspec = p.get("path", {"type": "z-field"})
    path = ctx.path(pspec, "$.params.path")
    kw = {}
    if "cone" in p:
        kw["cone"] = ctx.cone(p["cone"], "$.params.cone")
    if "eps" in p:
        kw["eps"] = float(p["eps"])
    if "ns" in p:
        kw["n_grid"] = p["ns"]
    res = stability_experiment(path, float(p.get("s", 0.05)), **kw)
    files = {}
    profs = {}
    for name, prof in res.pop("profiles").items():
        safe = "".join(c if c.isalnum() else "_" for c in name).strip("_")
        files[f"profile_{safe}.csv"] = prof.to_csv()
        profs[name] = {"ns": prof.ns, "values": prof.values, "nonincreasing": prof.nonincreasing()}
    res["profiles"] = profs
    return res, files


RUNNERS = {
    "spectrum": _run_spectrum, "ribbon": _run_ribbon, "braid": _run_braid, "smatrix": _run_smatrix,
    "lrbound": _run_lrbound, "conesum": _run_conesum, "flow": _run_flow, "profile": _run_profile,
    "stability": _run_stability,
}


def run(cfg: dict, out_dir=None, cap: int | None = None) -> dict:
    """Validate and execute one experiment; write ``report.json`` (and CSV curves) to ``out_dir``."""
    validate_config(cfg)
    ctx = _Context(cfg, cap)
    result, files = RUNNERS[cfg["kind"]](ctx)
    report = {
        "kind": cfg["kind"],
        "config_hash": config_hash(cfg),
        "versions": _versions(),
        "tolerances": TOLERANCES[cfg["kind"]],
        "seed": ctx.seed,
        "group": list(ctx.group.factors),
        "lattice": ctx.lattice.spec() if ctx.lattice is not None else None,
        "result": result,
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = cfg.get("output", "report")
        (out / f"{stem}.json").write_text(dumps(report) + "\n")
        for name, text in files.items():
            (out / name).write_text(text)
    return report


# -- command line ------------------------------------------------------------------
def _limit_threads(n: int | None):
    if n is None:
        return None
    if n < 1:
        raise SchemaError("--threads", "must be positive")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(n)
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover - env vars still cover child processes
        return None
    return threadpool_limits(limits=n)


def _error_payload(exc) -> dict:
    out = {"error": type(exc).__name__, "message": str(exc)}
    for attr in ("payload", "weights", "path"):
        if getattr(exc, attr, None) is not None:
            out[attr] = getattr(exc, attr)
    return out


def _fail(code: int, exc) -> int:
    sys.stderr.write(dumps(_error_payload(exc)) + "\n")
    return code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="anyonlab", description="Abelian quantum double experiments.")
    sub = ap.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=None, help="BLAS thread limit")
        p.add_argument("--cap", type=int, default=None, help="largest Hilbert-space dimension allowed")

    r = sub.add_parser("run", help="run one experiment config")
    r.add_argument("--config", required=True, help="JSON experiment config")
    common(r)
    v = sub.add_parser("verify", help="run the acceptance suite and print a pass/fail table")
    v.add_argument("--only", default=None, help="comma-separated criterion numbers")
    common(v)
    # bare `anyonlab --config ...` is shorthand for `run`
    ap.add_argument("--config", default=None, help=argparse.SUPPRESS)
    common(ap)
    return ap


def _verify(args) -> int:
    from .acceptance import run_all

    which = None
    if args.only:
        try:
            which = [int(x) for x in args.only.split(",") if x.strip()]
        except ValueError:
            return _fail(EXIT_SCHEMA, SchemaError("--only", "expected comma-separated integers"))
    results = run_all(which, echo=print)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        rows = [{"number": r.number, "title": r.title, "passed": r.passed, "summary": r.summary,
                 "details": r.details} for r in results]
        (out / "verify.json").write_text(dumps({"versions": _versions(), "criteria": rows}) + "\n")
    return EXIT_OK if passed == len(results) else EXIT_FAIL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        limiter = _limit_threads(args.threads)
    except SchemaError as exc:
        return _fail(EXIT_SCHEMA, exc)
    try:
        if args.command == "verify":
            return _verify(args)
        if args.config is None:
            return _fail(EXIT_SCHEMA, SchemaError("--config", "a config file is required"))
        if args.cap is not None and args.cap < 1:
            return _fail(EXIT_SCHEMA, SchemaError("--cap", "must be positive"))
        cfg = load_config(args.config)
        report = run(cfg, args.out, args.cap)
        if args.out is None:
            print(dumps(report))
        return EXIT_OK
    except SchemaError as exc:
        return _fail(EXIT_SCHEMA, exc)
    except (ResourceError, MemoryError) as exc:
        return _fail(EXIT_RESOURCE, exc)
    except (ModelConsistencyError, AssumptionViolationError, MeasurementAmbiguityError) as exc:
        return _fail(EXIT_MODEL, exc)
    except AnyonLabError as exc:
        return _fail(EXIT_FAIL, exc)
    finally:
        if limiter is not None:
            limiter.restore_original_limits()
