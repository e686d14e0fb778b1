"""Quasi-adiabatic spectral flow for finite gapped Hamiltonian paths.

The filter ``w_gamma`` is the inverse Fourier transform of a smooth bump
``w^(k) = exp(1 + 1/((k/gamma)^2 - 1))`` supported in ``|k| < gamma`` and
normalized by ``w^(0) = 1``. With ``W(E) = int w(t) (e^{itE} - 1)/(iE) dt``
the flow generator is ``D_ij = H'_ij W(E_i - E_j)`` in the eigenbasis of
``H(s)``, and ``U' = i D U`` transports the low-energy projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy import special

from .errors import AssumptionViolationError, DomainError, NumericError, ResolutionError

__all__ = [
    "bump",
    "FilterFunction",
    "build_filter",
    "flow_generator",
    "generator_quadrature_oracle",
    "GapTrack",
    "track_gap",
    "FlowResult",
    "flow_unitary",
    "refinement_ladder",
    "dressed_monodromy_table",
    "stability_experiment",
]


def bump(k, gamma: float) -> np.ndarray:
    """``w^(k)``: smooth, even, ``w^(0) = 1``, zero for ``|k| >= gamma``."""
    x = np.asarray(k, dtype=float) / gamma
    out = np.zeros_like(x)
    m = np.abs(x) < 1
    out[m] = np.exp(1.0 + 1.0 / (x[m] ** 2 - 1.0))
    return out


@dataclass
class FilterFunction:
    gamma: float
    T: float
    dt: float
    t: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)
    m2: float = 0.0

    def integral(self) -> float:
        return float(self.dt * np.sum(self.w))

    def first_moment(self) -> float:
        return float(self.dt * np.sum(self.t * self.w))

    def what(self, k) -> np.ndarray:
        """Fourier transform of the sampled filter, ``dt sum_j w_j e^{i k t_j}`` (real, even)."""
        k = np.atleast_1d(np.asarray(k, dtype=float))
        pos = self.t >= 0
        wp = self.w[pos]  # t_j = j dt, j = 0..J
        c = np.full(wp.shape, 2.0)
        c[0] = 1.0
        coef = self.dt * c * wp
        # Clenshaw recurrence for sum_j coef_j cos(j theta)
        x = np.cos(k * self.dt)
        b1 = np.zeros_like(x)
        b2 = np.zeros_like(x)
        for a in coef[:0:-1]:
            b1, b2 = a + 2 * x * b1 - b2, b1
        return coef[0] + x * b1 - b2

    def W(self, E) -> np.ndarray:
        """``W(E) = i (1 - w^(E)) / E``; small ``|E|`` uses ``i E m_2 / 2``."""
        E = np.asarray(E, dtype=float)
        out = np.empty(E.shape, dtype=complex)
        small = np.abs(E) < 1e-3 * self.gamma
        out[small] = 0.5j * self.m2 * E[small]
        Eb = E[~small]
        out[~small] = 1j * (1.0 - self.what(Eb)) / Eb
        return out

    def metadata(self) -> dict:
        return {
            "construction": "inverse Fourier transform of exp(1 + 1/((k/gamma)^2 - 1)) on |k| < gamma",
            "gamma": self.gamma,
            "T": self.T,
            "dt": self.dt,
        }


def build_filter(gamma: float, T: float | None = None, dt: float = 0.25, k_max: float | None = None,
                 nodes: int = 6000) -> FilterFunction:
    """Sample ``w_gamma`` on ``t = j dt``, ``|t| <= T`` (default ``T = 600 / gamma``).

    Sampling is alias-free for frequencies below ``2 pi / dt - gamma``;
    ``k_max`` (the largest energy difference the filter will see) must fit
    under that bound.
    """
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    T = 600.0 / gamma if T is None else float(T)
    if k_max is not None and 2 * math.pi / dt - gamma <= k_max:
        required = 2 * math.pi / (k_max + gamma)
        raise ResolutionError(f"dt={dt} aliases frequencies below {k_max}; need dt < {required:.4g}",
                              required=required)
    J = int(math.floor(T / dt))
    tp = dt * np.arange(J + 1)
    x, wq = special.roots_legendre(nodes)
    k = 0.5 * gamma * (x + 1.0)
    wk = 0.5 * gamma * wq * bump(k, gamma)
    wt = np.empty(J + 1)
    for s in range(0, J + 1, 512):
        wt[s:s + 512] = np.cos(np.outer(tp[s:s + 512], k)) @ wk / math.pi
    t = np.concatenate([-tp[:0:-1], tp])
    w = np.concatenate([wt[:0:-1], wt])
    # truncation at T leaves a small tail; restore the unit integral of the samples
    w /= dt * np.sum(w)
    m2 = float(dt * np.sum(t**2 * w))
    return FilterFunction(gamma, T, dt, t, w, m2)


def flow_generator(H, Hp, filt: FilterFunction, eig=None) -> np.ndarray:
    """Dense ``D`` with ``D_ij = H'_ij W(E_i - E_j)`` in the eigenbasis of ``H``."""
    if eig is None:
        M = H.toarray() if sp.issparse(H) else np.asarray(H)
        try:
            E, V = np.linalg.eigh(M)
        except np.linalg.LinAlgError as exc:  # pragma: no cover
            raise NumericError("eigendecomposition failed") from exc
    else:
        E, V = eig
    Hp = Hp.toarray() if sp.issparse(Hp) else np.asarray(Hp)
    He = V.conj().T @ Hp @ V
    De = He * filt.W(E[:, None] - E[None, :])
    D = V @ De @ V.conj().T
    return (D + D.conj().T) / 2


def generator_quadrature_oracle(H, Hp, filt: FilterFunction, inner_nodes: int = 64) -> np.ndarray:
    """``int dt w(t) int_0^t du e^{iuH} H' e^{-iuH}`` by direct quadrature.

    The outer integral is the trapezoid sum over the sampled filter; the inner
    ``u`` integral uses Gauss-Legendre nodes on ``[0, t]`` for every frequency.
    """
    M = H.toarray() if sp.issparse(H) else np.asarray(H)
    E, V = np.linalg.eigh(M)
    Hp = Hp.toarray() if sp.issparse(Hp) else np.asarray(Hp)
    He = V.conj().T @ Hp @ V
    omega = E[:, None] - E[None, :]
    freqs, inv = np.unique(np.round(omega, 12), return_inverse=True)
    x, wq = np.polynomial.legendre.leggauss(inner_nodes)
    vals = np.empty(len(freqs), dtype=complex)
    for i, om in enumerate(freqs):
        total = 0.0 + 0.0j
        for tj, wj in zip(filt.t, filt.w):
            if tj == 0.0:
                continue
            # split [0, t] into panels of length <= 2 so the integrand is resolved
            npan = max(1, int(math.ceil(abs(tj) * max(abs(om), 1.0) / 2.0)))
            edges = np.linspace(0.0, tj, npan + 1)
            acc = 0.0 + 0.0j
            for a, b in zip(edges[:-1], edges[1:]):
                u = 0.5 * (b - a) * x + 0.5 * (a + b)
                acc += 0.5 * (b - a) * np.sum(wq * np.exp(1j * om * u))
            total += wj * acc
        vals[i] = filt.dt * total
    De = He * vals[inv].reshape(omega.shape)
    return V @ De @ V.conj().T


@dataclass
class GapTrack:
    s: np.ndarray
    gaps: np.ndarray
    band_dim: int
    band_energies: list

    @property
    def min_gap(self) -> float:
        return float(np.min(self.gaps))


def _eigh(H):
    M = H.toarray() if sp.issparse(H) else np.asarray(H)
    return np.linalg.eigh(M)


def _band_dim(E, tol=1e-8) -> int:
    return int(np.sum(E < E[0] + tol))


def track_gap(path, s_grid, band_dim: int | None = None, overlap_min: float = 0.5) -> GapTrack:
    """Gap above the low band along ``s_grid``, following the band by eigenvector continuity."""
    s_grid = np.asarray(list(s_grid), dtype=float)
    gaps, energies = [], []
    prev = None
    d = band_dim
    for s in s_grid:
        E, V = _eigh(path.H(float(s)))
        if d is None:
            d = _band_dim(E)
        if d >= len(E):
            raise AssumptionViolationError("band fills the whole space", payload={"s": float(s)})
        Vb = V[:, :d]
        if prev is not None:
            sv = np.linalg.svd(prev.conj().T @ Vb, compute_uv=False)
            if sv.min() < overlap_min:
                raise AssumptionViolationError(
                    f"low band changes character at s={s:.6g}",
                    payload={"s": float(s), "overlap": float(sv.min())},
                )
        gap = float(E[d] - E[d - 1])
        if gap <= 1e-9:
            raise AssumptionViolationError(f"gap closes at s={s:.6g}", payload={"s": float(s), "gap": gap})
        gaps.append(gap)
        energies.append(E[:d].copy())
        prev = Vb
    return GapTrack(s_grid, np.array(gaps), d, energies)


@dataclass
class FlowResult:
    s: np.ndarray
    unitaries: list = field(repr=False)
    gaps: np.ndarray = None
    transport_error: np.ndarray = None
    unitarity_defect: np.ndarray = None
    band_dim: int = 0
    filter_meta: dict = field(default_factory=dict)

    @property
    def max_transport_error(self) -> float:
        return float(np.max(self.transport_error))

    def to_json(self) -> dict:
        return {
            "s": self.s.tolist(),
            "gap": self.gaps.tolist(),
            "transport_error": self.transport_error.tolist(),
            "max_transport_error": self.max_transport_error,
            "unitarity_defect": self.unitarity_defect.tolist(),
            "band_dim": self.band_dim,
            "filter": self.filter_meta,
        }


def _expi(D: np.ndarray, h: float) -> np.ndarray:
    lam, Q = np.linalg.eigh(D)
    return (Q * np.exp(1j * h * lam)) @ Q.conj().T


def flow_unitary(path, gamma: float, s_grid, steps_per_interval: int = 1, dt: float = 0.25,
                 T: float | None = None, band_dim: int | None = None) -> FlowResult:
    """Integrate ``-i dU/ds = D(s) U`` with exponential midpoint steps.

    Each grid interval is split into ``steps_per_interval`` substeps. The gap
    above the low band must exceed ``gamma`` at every grid point and midpoint.
    """
    s_grid = np.asarray(list(s_grid), dtype=float)
    N = path.model.dim
    mids = []
    for a, b in zip(s_grid[:-1], s_grid[1:]):
        h = (b - a) / steps_per_interval
        mids.extend(a + (j + 0.5) * h for j in range(steps_per_interval))
    E0, V0 = _eigh(path.H(float(s_grid[0])))
    d = _band_dim(E0) if band_dim is None else band_dim
    span = float(E0[-1] - E0[0])
    Vn = path.V()
    vnorm = float(sp.linalg.norm(Vn, 1)) if sp.issparse(Vn) else float(np.abs(Vn).sum(0).max())
    k_max = span + 2 * vnorm * float(np.max(np.abs(s_grid)) + 1e-300)
    filt = build_filter(gamma, T=T, dt=dt, k_max=k_max)
    P0 = V0[:, :d] @ V0[:, :d].conj().T
    U = np.eye(N, dtype=complex)
    Us, errs, defects, gaps = [U.copy()], [0.0], [0.0], [float(E0[d] - E0[d - 1])]
    if gaps[0] <= gamma:
        raise AssumptionViolationError("gap below gamma", payload={"s": float(s_grid[0]), "gap": gaps[0]})
    Hp = path.V()
    k = 0
    for a, b in zip(s_grid[:-1], s_grid[1:]):
        h = (b - a) / steps_per_interval
        for _ in range(steps_per_interval):
            sm = mids[k]
            k += 1
            E, V = _eigh(path.H(float(sm)))
            if E[d] - E[d - 1] <= gamma:
                raise AssumptionViolationError("gap dips below gamma",
                                               payload={"s": float(sm), "gap": float(E[d] - E[d - 1])})
            D = flow_generator(None, Hp, filt, eig=(E, V))
            U = _expi(D, h) @ U
        E, V = _eigh(path.H(float(b)))
        g = float(E[d] - E[d - 1])
        if g <= gamma:
            raise AssumptionViolationError("gap dips below gamma", payload={"s": float(b), "gap": g})
        P = V[:, :d] @ V[:, :d].conj().T
        errs.append(float(np.linalg.norm(P - U @ P0 @ U.conj().T, 2)))
        defects.append(float(np.linalg.norm(U.conj().T @ U - np.eye(N), 2)))
        gaps.append(g)
        Us.append(U.copy())
    return FlowResult(s_grid, Us, np.array(gaps), np.array(errs), np.array(defects), d, filt.metadata())


def refinement_ladder(path, gamma: float, s_max: float, levels=((5, 0.5, 150.0), (10, 0.25, 300.0), (20, 0.25, 600.0)),
                      band_dim: int | None = None) -> list[dict]:
    """Run the flow for successively finer ``(intervals, dt, gamma T)`` settings."""
    out = []
    for n_int, dt, gT in levels:
        s_grid = np.linspace(0.0, s_max, n_int + 1)
        res = flow_unitary(path, gamma, s_grid, dt=dt, T=gT / gamma, band_dim=band_dim)
        out.append({"intervals": n_int, "dt": dt, "T": gT / gamma,
                    "max_transport_error": res.max_transport_error,
                    "max_unitarity_defect": float(np.max(res.unitarity_defect)), "result": res})
    return out


def dressed_monodromy_table(model, U: np.ndarray, ribbon=None) -> np.ndarray:
    """Monodromy table from dressed operators ``U F U^dag`` acting on the dressed vacuum ``U Omega``."""
    from .anyons import default_ribbon
    from .groups import anyon_labels
    from .lattice import loop_around_site
    from .ribbons import ribbon_operator

    lat = model.lattice
    ribbon = default_ribbon(lat) if ribbon is None else ribbon
    loop = loop_around_site(lat, ribbon.end)
    Ud = U.conj().T
    omega = U @ model.ground_state()

    def dress(F):
        return U @ (F.to_sparse() @ Ud)

    labels = anyon_labels(model.group)
    Fs = {b: dress(ribbon_operator(model, ribbon, b)) for b in labels}
    Ls = {a: dress(ribbon_operator(model, loop, a)) for a in labels}
    table = np.empty((len(labels), len(labels)), dtype=complex)
    for i, a in enumerate(labels):
        den = np.vdot(omega, Ls[a] @ omega)
        for j, b in enumerate(labels):
            psi = Fs[b] @ omega
            table[i, j] = np.vdot(psi, Ls[a] @ psi) / np.vdot(psi, psi) / den
    return table


def stability_experiment(path, s: float, gamma: float | None = None, intervals: int = 20,
                         dt: float = 0.25, gamma_T: float = 600.0, n_grid=range(0, 7),
                         cone=None, eps: float = np.pi / 24) -> dict:
    """Dressed anyon data, locality profiles and transported energies at coupling ``s``."""
    from .anyons import default_ribbon, lattice_monodromy_table
    from .groups import anyon_labels
    from .lattice import ConeRegion
    from .locality import locality_profile
    from .ribbons import ribbon_operator

    model = path.model
    lat = model.lattice
    grid = np.linspace(0.0, s, intervals + 1)
    gt = track_gap(path, grid)
    gamma = 0.5 * gt.min_gap if gamma is None else gamma
    if s > 0:
        flow = flow_unitary(path, gamma, grid, dt=dt, T=gamma_T / gamma)
        U = flow.unitaries[-1]
        transport = flow.max_transport_error
    else:
        U = np.eye(model.dim, dtype=complex)
        transport = 0.0
    base = lattice_monodromy_table(model)
    dressed = dressed_monodromy_table(model, U)
    labels = anyon_labels(model.group)
    cone = ConeRegion((-1, 0), (1, 0), np.pi / 12) if cone is None else cone
    ribbon = default_ribbon(lat)
    Ud = U.conj().T
    profiles = {}
    for b in labels:
        if b.is_vacuum:
            continue
        Fs = U @ (ribbon_operator(model, ribbon, b).to_sparse() @ Ud)
        prof = locality_profile(Fs, cone, eps, n_grid, lat, model.group, model.space, mode="channel")
        profiles[f"ribbon {b}"] = prof
    e0 = ribbon.direct[0][0]
    X = model.edge_shift(e0, (1,) + (0,) * (model.group.rank - 1)).to_sparse()
    dressed_edge = U @ (X @ Ud)
    profiles[f"edge {e0}"] = locality_profile(dressed_edge, cone, eps, n_grid, lat, model.group,
                                              model.space, mode="operator")
    E, V = _eigh(path.H(float(s)))
    E0, V0 = _eigh(path.H(0.0))
    d = gt.band_dim
    W = U @ V0[:, :d]
    transported = np.linalg.eigvalsh(W.conj().T @ (path.H(float(s)) @ W))
    return {
        "s": float(s),
        "gamma": float(gamma),
        "gaps": gt.gaps.tolist(),
        "transport_error": float(transport),
        "monodromy_s0": base,
        "monodromy_dressed": dressed,
        "monodromy_deviation": float(np.max(np.abs(dressed - base))),
        "profiles": profiles,
        "transported_energies": transported,
        "exact_energies": E[:d],
        "energy_deviation": float(np.max(np.abs(transported - E[:d]))),
    }
