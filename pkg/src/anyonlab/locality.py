"""F-functions, cone double sums, Lieb-Robinson bounds and locality profiles.

Lattice sums over ``Z^2`` are truncated to a box and completed with integral
estimates. A radial, decreasing ``F`` obeys ``F(|z|) <= int_cell F(|x| - c) dx``
over the unit cell of ``z`` with ``c = sqrt(2)/2``; every tail bound below is
built from this cell comparison.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy import integrate, special
from scipy.signal import fftconvolve

from .errors import DivergenceError, DomainError, GeometryError
from .lattice import ConeRegion, EdgeLattice, box_points
from .linalg import HilbertSpace, Monomial, conditional_expectation, op_norm

__all__ = [
    "FFunctionSpec",
    "FNormResult",
    "f_norm",
    "tail_integral",
    "ConeSumResult",
    "cone_double_sum",
    "lr_bound",
    "convolution_constant",
    "lattice_convolution_constant",
    "DecayProfile",
    "pauli_basis",
    "locality_profile",
    "quasi_locality_check",
    "quasi_locality_profile",
]

CELL = math.sqrt(2.0) / 2.0
_E2 = math.e**2


@dataclass(frozen=True)
class FFunctionSpec:
    """``F_bg(r) = scale * exp(-b g(r)) (1 + r)^{-(nu + eps_hat)}``.

    ``g`` is ``'none'``, ``'power'`` (``r^alpha``) or ``'r_ln2'``
    (``r / ln^2 r``, held at its minimum ``e^2/4`` for ``r <= e^2`` so that it
    stays nondecreasing).
    """

    nu: float = 2.0
    eps_hat: float = 1.0
    g: str = "none"
    alpha: float = 1.0
    b: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if self.g not in ("none", "power", "r_ln2"):
            raise DomainError(f"unknown decay profile {self.g!r}")
        if self.b < 0:
            raise DomainError("decay rate must be nonnegative")
        if self.scale < 0:
            raise DomainError("scale must be nonnegative")
        if self.g == "power" and not 0 < self.alpha <= 1:
            raise DomainError("power profile needs 0 < alpha <= 1")

    @property
    def exponent(self) -> float:
        return self.nu + self.eps_hat

    def check_summable(self):
        if self.exponent <= self.nu and (self.b == 0 or self.g == "none") and self.scale > 0:
            raise DivergenceError(f"(1+r)^-{self.exponent} is not summable in {self.nu:g} dimensions")

    def gfun(self, r):
        r = np.asarray(r, dtype=float)
        if self.g == "none":
            return np.zeros_like(r)
        if self.g == "power":
            return r**self.alpha
        safe = np.maximum(r, _E2)
        return safe / np.log(safe) ** 2

    def base(self, r):
        return self.scale * (1.0 + np.asarray(r, dtype=float)) ** (-self.exponent)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return np.exp(-self.b * self.gfun(r)) * self.base(r)

    def without_decay(self) -> "FFunctionSpec":
        return FFunctionSpec(self.nu, self.eps_hat, "none", self.alpha, 0.0, self.scale)

    def to_json(self) -> dict:
        return {"nu": self.nu, "eps_hat": self.eps_hat, "g": self.g, "alpha": self.alpha, "b": self.b, "scale": self.scale}


def tail_integral(spec: FFunctionSpec, t: float, k: int) -> float:
    """Upper bound on ``int_t^inf r^k exp(-b g(r)) dr``.

    Closed forms: ``((k+1)/b) t^k e^{-bt}`` for ``g = r`` (valid for ``bt >= k``),
    the upper incomplete gamma function for ``g = r^alpha``, and
    ``((2k+3)/b) t^{2k+2} e^{-b g(t)}`` for ``g = r/ln^2 r`` (``t > e^4``).
    Outside those ranges the integral is evaluated by adaptive quadrature.
    """
    b = spec.b
    if b <= 0 or spec.g == "none":
        return math.inf
    if spec.g == "power":
        if spec.alpha == 1.0 and b * t >= k and t > 0:
            return (k + 1) / b * t**k * math.exp(-b * t)
        a = (k + 1) / spec.alpha
        return float(special.gammaincc(a, b * t**spec.alpha) * special.gamma(a) / spec.alpha / b**a)
    if t > math.e**4:
        return (2 * k + 3) / b * t ** (2 * k + 2) * math.exp(-b * float(spec.gfun(t)))
    val, _ = integrate.quad(lambda r: r**k * math.exp(-b * float(spec.gfun(r))), t, np.inf, limit=400)
    return float(val)


def _radial_tail(F, s: float) -> float:
    """Bound on ``sum_{z in Z^2, |z| >= s} F(|z|)`` via the cell comparison."""
    lo = max(s - CELL, 0.0)

    def f(r):
        return 2 * math.pi * r * float(F(max(r - CELL, 0.0)))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, lo, np.inf, limit=400, epsabs=0.0, epsrel=1e-10)
    return float(val)


@dataclass
class FNormResult:
    value: float
    truncated_sum: float
    tail_bound: float
    radius: int


def f_norm(spec: FFunctionSpec, box: int = 200) -> FNormResult:
    """``||F||_0 = sup_x sum_y F(|x - y|)`` on ``Z^2``.

    ``value`` = exact box sum + continuum estimate of the complement;
    ``truncated_sum`` + ``tail_bound`` is a certified upper bound.
    """
    spec.check_summable()
    if spec.scale == 0:
        return FNormResult(0.0, 0.0, 0.0, box)
    R = int(box)
    ax = np.arange(-R, R + 1, dtype=float)
    r = np.hypot(ax[:, None], ax[None, :])
    S = float(np.sum(spec(r)))
    a = R + 0.5

    def theta(rr):
        if rr <= a:
            return 0.0
        if rr >= a * math.sqrt(2):
            return 2 * math.pi
        return 8 * math.acos(a / rr)

    def f(rr):
        return theta(rr) * rr * float(spec(rr))

    est = integrate.quad(f, a, a * math.sqrt(2), limit=200, epsabs=0.0, epsrel=1e-12)[0]
    est += integrate.quad(f, a * math.sqrt(2), np.inf, limit=200, epsabs=0.0, epsrel=1e-12)[0]
    # complement cells lie in |x|_inf >= R + 1/2
    tail = _radial_tail(spec, a)
    return FNormResult(S + est, S, tail, R)


@dataclass
class ConeSumResult:
    value: float
    tail_bound: float
    distance: float
    radius: int
    n: float
    eps: float


def _disc_kernel(spec, R):
    ax = np.arange(-2 * R, 2 * R + 1, dtype=float)
    return spec(np.hypot(ax[:, None], ax[None, :]))


def cone_double_sum(X: ConeRegion, eps: float, n: float, spec: FFunctionSpec,
                    margin: float = 40.0, radius: int | None = None) -> ConeSumResult:
    """``sum_{x in X} sum_{y in Y} F_bg(|x - y|)`` with ``Y = (Lambda_{alpha+eps} - n)^c``.

    Pair counts per displacement come from an FFT correlation of the two
    indicator functions on a box around the apex (rounded to exact integers).
    The box radius is chosen so that every point outside it is at least
    ``n sin(alpha+eps) + margin`` away from the other region.
    """
    if spec.b <= 0 or spec.g == "none":
        raise DivergenceError("cone double sums diverge without exponential decay")
    if not 0 < eps < math.pi - X.alpha:
        raise DomainError("need 0 < eps < pi - alpha")
    Y = X.outer_complement(eps, n)
    se = math.sin(min(eps, math.pi / 2))
    d0 = n * math.sin(min(X.alpha + eps, math.pi / 2)) if X.alpha + eps <= math.pi / 2 else n
    if radius is None:
        radius = int(math.ceil((d0 + margin) / se + abs(n))) + 5
    R = radius
    pts = box_points(R) + np.rint(X.apex).astype(int)
    mx = X.contains(pts).reshape(2 * R + 1, 2 * R + 1).astype(float)
    my = Y.contains(pts).reshape(2 * R + 1, 2 * R + 1).astype(float)
    counts = np.rint(fftconvolve(mx, my[::-1, ::-1], mode="full"))
    K = _disc_kernel(spec, R)
    value = float(np.sum(counts * K))
    # tails: x outside the box (d(x,Y) >= |x - a| sin eps) and y outside it
    # (d(y,X) >= (|y - a| - n) sin eps), each summed against the radial tail
    a = R + 0.5

    def integrand(r, shift):
        s = max((r - CELL - shift) * se, 0.0)
        return 2 * math.pi * r * _radial_tail(spec, s)

    tail = 0.0
    for shift in (0.0, abs(n)):
        tail += integrate.quad(integrand, a, np.inf, args=(shift,), limit=200, epsabs=0.0, epsrel=1e-8)[0]
    # an empty near field (n beyond the box) leaves only the tail
    dist = _cone_distance(mx, my) if mx.any() and my.any() else math.inf
    return ConeSumResult(value, float(tail), dist, R, n, eps)


def _cone_distance(mx, my) -> float:
    from scipy.spatial import cKDTree

    px, py = np.argwhere(mx > 0), np.argwhere(my > 0)
    if len(px) == 0 or len(py) == 0:
        raise DomainError("empty region in the working box")
    return float(np.min(cKDTree(py).query(px, k=1)[0]))


def lr_bound(X, Y, t: float, F, v: float, C_F: float, lattice: EdgeLattice,
             norm_a: float = 1.0, norm_b: float = 1.0) -> float:
    """``(2 ||A|| ||B|| / C_F)(e^{v|t|} - 1) sum_{x in X} sum_{y in Y} F(d(x, y))``."""
    X, Y = sorted(set(X)), sorted(set(Y))
    if set(X) & set(Y):
        raise DomainError("supports overlap")
    D = lattice.edge_distances[np.ix_(X, Y)]
    return float(2 * norm_a * norm_b / C_F * math.expm1(v * abs(t)) * np.sum(F(D)))


def convolution_constant(spec: FFunctionSpec, box: int = 64) -> float:
    """``sup_delta (F * F)(delta) / F(delta)`` on ``Z^2``, truncated to a box."""
    spec.check_summable()
    R = int(box)
    ax = np.arange(-R, R + 1, dtype=float)
    Fg = spec(np.hypot(ax[:, None], ax[None, :]))
    if np.any(np.diff(spec(np.arange(0, 3 * R, dtype=float))) > 0):
        raise DomainError("F must be nonincreasing")
    if Fg[R, R] <= 0 or np.any(Fg <= 0):
        raise DomainError("F must be strictly positive")
    # FFT where F(delta) is not tiny; direct sums elsewhere so exponentially small
    # F(delta) keep full relative accuracy (only 0 <= dy <= dx by square symmetry)
    conv_fft = fftconvolve(Fg, Fg, mode="same")
    h = R // 2
    zx, zy = np.meshgrid(ax, ax, indexing="ij")
    Fz = Fg
    best = 0.0
    for dx in range(h + 1):
        for dy in range(dx + 1):
            Fd = float(Fg[R + dx, R + dy])
            if Fd > 1e-10 * Fg[R, R]:
                conv = float(conv_fft[R + dx, R + dy])
            else:
                conv = float(np.sum(Fz * spec(np.hypot(dx - zx, dy - zy))))
            best = max(best, conv / Fd)
    return best


def lattice_convolution_constant(F, lattice: EdgeLattice) -> float:
    """Exact ``C_F`` over the edge sites of a finite lattice."""
    Fm = np.asarray(F(lattice.edge_distances), dtype=float)
    if np.any(Fm <= 0):
        raise DomainError("F must be strictly positive")
    return float(np.max((Fm @ Fm) / Fm))


@dataclass
class DecayProfile:
    ns: list
    values: list
    k_max: int = 4
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(v < 0 for v in self.values):
            raise DomainError("profile values must be nonnegative")

    def nonincreasing(self, tol: float = 1e-12) -> bool:
        return all(b <= a + tol for a, b in zip(self.values, self.values[1:]))

    def tail_fits(self) -> dict:
        """For each ``k``, the sequence ``n^k f(n)`` and whether it is nonincreasing."""
        out = {}
        for k in range(1, self.k_max + 1):
            seq = [n**k * v for n, v in zip(self.ns, self.values)]
            out[k] = {"weighted": seq, "nonincreasing": all(b <= a + 1e-12 for a, b in zip(seq, seq[1:]))}
        return out

    def to_csv(self) -> str:
        lines = ["n,value"] + [f"{n:.17g},{v:.17g}" for n, v in zip(self.ns, self.values)]
        return "\n".join(lines) + "\n"


def pauli_basis(group, space: HilbertSpace, edges, adjacency=None):
    """Generalized Paulis ``X^g Z^chi`` on single edges and adjacent edge pairs.

    Yields ``(support, Monomial)``. ``adjacency`` is a list of edge pairs.
    """
    elements = group.elements()
    chars = group.characters()
    singles = []
    for e in edges:
        for g in elements:
            for chi in chars:
                if group.index(g) == 0 and chi.is_trivial:
                    continue
                singles.append((e, group.index(g), chi.values()))
    from .linalg import phase_op, shift_op

    def mono(items):
        shifts = {e: g for e, g, _ in items if g}
        phases = {e: vals for e, _, vals in items}
        L = shift_op(space, shifts, group.add_table)
        Z = phase_op(space, phases)
        return Z @ L

    for it in singles:
        yield (it[0],), mono([it])
    if adjacency:
        eset = set(edges)
        by_edge = {}
        for it in singles:
            by_edge.setdefault(it[0], []).append(it)
        for e1, e2 in adjacency:
            if e1 in eset and e2 in eset:
                for a in by_edge[e1]:
                    for b in by_edge[e2]:
                        yield (e1, e2), mono([a, b])


def _adjacent_pairs(lattice: EdgeLattice):
    pairs = set()
    for v in lattice.vertices:
        inc = [e for e, _ in lattice.star_edges(v) if e is not None]
        for i in range(len(inc)):
            for j in range(i + 1, len(inc)):
                if inc[i] != inc[j]:
                    pairs.add(tuple(sorted((inc[i], inc[j]))))
    return sorted(pairs)


def _to_op(W):
    if isinstance(W, Monomial):
        return W.to_sparse()
    return W


def locality_profile(W, cone: ConeRegion, eps: float, n_grid, lattice: EdgeLattice, group,
                     space: HilbertSpace, mode: str = "channel", pairs: bool = True) -> DecayProfile:
    """Decay profile of a channel or operator away from a cone.

    ``mode='channel'``: ``sup_A ||W^dag A W - A||`` for the conjugation channel
    of a unitary ``W``. ``mode='operator'``: ``sup_A ||[W, A]|| / ||W||``.
    ``A`` runs over unit-norm generalized Paulis supported in
    ``(Lambda_{alpha+eps} - n)^c``; the result is a lower bound on the sup
    over the full region algebra.
    """
    ns = sorted(float(n) for n in n_grid)
    in_cone = set(lattice.edges_in(cone))
    if not in_cone and mode == "channel":
        raise GeometryError("cone contains no lattice edge")
    regions = []
    for n in ns:
        outside = set(range(lattice.num_edges)) - set(lattice.edges_in(cone.widened(eps).translated(-n)))
        regions.append(outside)
    biggest = set().union(*regions) if regions else set()
    Wop = _to_op(W)
    Wd = Wop.conj().T if sp.issparse(Wop) else np.conj(np.asarray(Wop)).T
    normW = 1.0 if mode == "channel" else op_norm(Wop)
    adj = _adjacent_pairs(lattice) if pairs else None
    scores = []
    for supp, A in pauli_basis(group, space, sorted(biggest), adj):
        As = A.to_sparse()
        if mode == "channel":
            D = Wd @ (As @ Wop) - As
        else:
            D = Wop @ As - As @ Wop
        if sp.issparse(D):
            D = D.tocsr()
            D.eliminate_zeros()
            val = 0.0 if D.nnz == 0 or np.max(np.abs(D.data)) < 1e-14 else op_norm(D)
        else:
            D = np.asarray(D)
            val = 0.0 if np.max(np.abs(D), initial=0.0) < 1e-14 else op_norm(D)
        scores.append((set(supp), val / normW))
    values = []
    for reg in regions:
        vals = [v for s, v in scores if s <= reg]
        values.append(float(max(vals)) if vals else 0.0)
    return DecayProfile(ns, values, meta={"mode": mode, "cone": cone.spec(), "eps": eps,
                                          "basis": "single-edge and adjacent-pair X^g Z^chi"})


def quasi_locality_check(evolution, A, t: float, cone: ConeRegion, eps: float, n: float,
                         lattice: EdgeLattice, space: HilbertSpace, velocity: float = 0.0,
                         tA: np.ndarray | None = None) -> float:
    """``||<tau_t(A)>_{Y(t)} - tau_t(A)||`` with the Haar average over the complement of the kept region.

    The kept region is ``Lambda_{alpha+eps} - (ceil(velocity |t|) + n)``. ``tA`` may
    carry a precomputed evolute so that several ``n`` share one evolution.
    """
    shift = math.ceil(velocity * abs(t)) + n
    keep = lattice.edges_in(cone.widened(eps).translated(-shift))
    if len(keep) == lattice.num_edges:
        return 0.0
    if tA is None:
        if t != 0:
            tA = evolution.heisenberg(A, t)
        else:
            op = _to_op(A)
            tA = op.toarray() if sp.issparse(op) else np.asarray(op)
    P = conditional_expectation(tA, keep, space)
    return op_norm(np.asarray(P) - tA)


def quasi_locality_profile(evolution, A, t: float, cone: ConeRegion, eps: float, ns,
                           lattice: EdgeLattice, space: HilbertSpace, velocity: float = 0.0) -> list:
    """:func:`quasi_locality_check` over a grid of ``n`` with a single evolution."""
    tA = evolution.heisenberg(A, t) if t != 0 else None
    return [quasi_locality_check(evolution, A, t, cone, eps, n, lattice, space, velocity, tA=tA)
            for n in ns]
