"""State vectors and operators on the edge Hilbert space ``C[G]^{(x) E}``.

Basis states are edge configurations. The configuration index is mixed radix,
little endian in the canonical edge enumeration: edge ``e`` carries weight
``n**e`` with ``n = |G|`` and group elements stored by their integer code.

Operators are ``scipy.sparse`` CSR matrices, dense arrays, or
:class:`Monomial` objects (a permutation times a diagonal phase), which is the
natural form of every generalized Pauli string.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DomainError, NumericError, ResourceError, ShapeError

__all__ = [
    "DEFAULT_CAP",
    "HilbertSpace",
    "Monomial",
    "shift_op",
    "phase_op",
    "embed",
    "apply",
    "is_hermitian",
    "eigenspace",
    "Evolution",
    "evolve",
    "conditional_expectation",
    "op_norm",
    "commutator_norm",
]

DEFAULT_CAP = 2**20
DENSE_MAX = 2048


class HilbertSpace:
    def __init__(self, n: int, num_edges: int, cap: int | None = DEFAULT_CAP):
        self.n = int(n)
        self.num_edges = int(num_edges)
        self.dim = self.n**self.num_edges
        self.cap = cap
        if cap is not None and self.dim > cap:
            raise ResourceError(f"Hilbert dimension {self.dim} exceeds cap {cap}")
        self.weights = self.n ** np.arange(self.num_edges, dtype=np.int64)
        self._digits = None

    def __repr__(self):
        return f"HilbertSpace(n={self.n}, edges={self.num_edges}, dim={self.dim})"

    @property
    def digits(self) -> np.ndarray:
        """``digits[e, i]``: group code on edge ``e`` in basis state ``i``."""
        if self._digits is None:
            idx = np.arange(self.dim, dtype=np.int64)
            d = np.empty((self.num_edges, self.dim), dtype=np.uint8)
            for e in range(self.num_edges):
                d[e] = idx % self.n
                idx //= self.n
            self._digits = d
        return self._digits

    def index_of(self, config) -> int:
        config = np.asarray(config, dtype=np.int64)
        if config.shape != (self.num_edges,):
            raise ShapeError("configuration length does not match the edge count")
        return int(config @ self.weights)

    def config_of(self, index: int) -> np.ndarray:
        return (index // self.weights) % self.n

    def basis_state(self, config=None) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0 if config is None else self.index_of(config)] = 1.0
        return v


class Monomial:
    """Operator ``M|j> = phase[j] |perm[j]>``; ``phase=None`` means all ones."""

    __slots__ = ("perm", "phase")

    def __init__(self, perm: np.ndarray, phase: np.ndarray | None = None):
        self.perm = perm
        self.phase = phase

    @classmethod
    def identity(cls, dim: int) -> "Monomial":
        return cls(np.arange(dim, dtype=np.int64))

    @property
    def dim(self) -> int:
        return len(self.perm)

    @property
    def shape(self):
        return (self.dim, self.dim)

    def apply(self, v: np.ndarray) -> np.ndarray:
        if v.shape[0] != self.dim:
            raise ShapeError(f"vector of length {v.shape[0]} for operator of dim {self.dim}")
        vals = v if self.phase is None else (self.phase * v.T).T
        out = np.empty(v.shape, dtype=np.result_type(vals, np.complex128 if self.phase is not None else v.dtype))
        out[self.perm] = vals
        return out

    __call__ = apply

    def __matmul__(self, other):
        if isinstance(other, Monomial):
            # (self o other)|j> = other.phase[j] self.phase[other.perm[j]] |self.perm[other.perm[j]]>
            perm = self.perm[other.perm]
            if self.phase is None and other.phase is None:
                return Monomial(perm)
            p1 = np.ones(self.dim) if self.phase is None else self.phase[other.perm]
            p2 = 1.0 if other.phase is None else other.phase
            return Monomial(perm, p1 * p2)
        return self.apply(np.asarray(other))

    def adjoint(self) -> "Monomial":
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.dim, dtype=self.perm.dtype)
        if self.phase is None:
            return Monomial(inv)
        return Monomial(inv, np.conj(self.phase[inv]))

    def to_sparse(self) -> sp.csr_matrix:
        data = np.ones(self.dim) if self.phase is None else self.phase
        cols = np.arange(self.dim)
        return sp.csr_matrix((data, (self.perm, cols)), shape=self.shape)

    def to_linear_operator(self) -> spla.LinearOperator:
        adj = self.adjoint()
        return spla.LinearOperator(self.shape, matvec=self.apply, rmatvec=adj.apply, dtype=complex)


def shift_op(space: HilbertSpace, shifts, add_table: np.ndarray) -> Monomial:
    """Product of left multiplications ``X_e^{g_e}``; ``shifts`` maps edge -> group code."""
    idx = np.arange(space.dim, dtype=np.int64)
    perm = idx.copy()
    for e, g in dict(shifts).items():
        d = space.digits[e].astype(np.int64)
        perm += (add_table[int(g)][d] - d) * space.weights[e]
    return Monomial(perm)


def phase_op(space: HilbertSpace, phases) -> Monomial:
    """Product of diagonal ``Z_e^{chi_e}``; ``phases`` maps edge -> array of ``chi`` values per code."""
    ph = np.ones(space.dim, dtype=complex)
    for e, vals in dict(phases).items():
        ph *= np.asarray(vals, dtype=complex)[space.digits[e]]
    return Monomial(np.arange(space.dim, dtype=np.int64), ph)


def embed(local, edges, space: HilbertSpace) -> sp.csr_matrix:
    """Lift a ``n^k x n^k`` matrix on ``edges`` (first edge least significant) to the full space."""
    edges = list(edges)
    k = len(edges)
    local = sp.coo_matrix(local)
    if local.shape != (space.n**k, space.n**k):
        raise ShapeError(f"local matrix shape {local.shape} does not fit {k} edges")
    lw = space.n ** np.arange(k, dtype=np.int64)
    loc = np.zeros(space.dim, dtype=np.int64)
    base = np.arange(space.dim, dtype=np.int64)
    for i, e in enumerate(edges):
        d = space.digits[e].astype(np.int64)
        loc += d * lw[i]
        base -= d * space.weights[e]
    gw = np.array([space.weights[e] for e in edges], dtype=np.int64)

    def offset(code):
        return int(((code // lw) % space.n) @ gw)

    order = np.argsort(loc, kind="stable")
    starts = np.searchsorted(loc[order], np.arange(space.n**k + 1))
    rows, cols, vals = [], [], []
    for r, c, a in zip(local.row, local.col, local.data):
        src = order[starts[c]:starts[c + 1]]
        cols.append(src)
        rows.append(base[src] + offset(r))
        vals.append(np.full(len(src), a))
    if not rows:
        return sp.csr_matrix((space.dim, space.dim))
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(space.dim, space.dim),
    )


def _dim(op) -> int:
    return op.shape[0]


def apply(op, v: np.ndarray) -> np.ndarray:
    if op.shape[1] != v.shape[0]:
        raise ShapeError(f"operator of shape {op.shape} applied to vector of length {v.shape[0]}")
    if isinstance(op, Monomial):
        return op.apply(v)
    return op @ v


def is_hermitian(op, tol: float = 1e-12) -> bool:
    if sp.issparse(op):
        d = (op - op.conj().T).tocoo()
        return d.nnz == 0 or float(np.max(np.abs(d.data))) < tol
    op = np.asarray(op)
    return float(np.max(np.abs(op - op.conj().T), initial=0.0)) < tol


def _as_linop(op) -> spla.LinearOperator:
    if isinstance(op, Monomial):
        return op.to_linear_operator()
    return spla.aslinearoperator(op)


def eigenspace(op, window, cap: int | None = DEFAULT_CAP, dense_max: int = DENSE_MAX,
               tol: float = 1e-10, k0: int = 6, check_hermitian: bool = True):
    """All eigenpairs of a Hermitian operator with eigenvalue in ``window``.

    Small operators are diagonalized densely. Larger ones use Lanczos on the
    low end of the spectrum with deflation: found vectors are pushed above the
    window and the solver is rerun until no further eigenvalue below the
    window top appears, so degenerate copies are not missed.
    """
    lo, hi = map(float, window)
    N = _dim(op)
    if cap is not None and N > cap:
        raise ResourceError(f"dimension {N} exceeds cap {cap}")
    if check_hermitian and not isinstance(op, spla.LinearOperator) and not is_hermitian(op):
        raise DomainError("operator is not Hermitian")
    if N <= dense_max:
        M = op.toarray() if sp.issparse(op) else np.asarray(op)
        w, V = np.linalg.eigh(M)
        sel = (w >= lo) & (w <= hi)
        w, V = w[sel], V[:, sel]
    else:
        w, V = _lanczos_window(op, lo, hi, k0)
    if len(w):
        H = _as_linop(op)
        R = H.matmat(V) - V * w
        res = float(np.max(np.linalg.norm(R, axis=0)))
        if res >= tol:
            raise NumericError(f"eigen-residual {res:.3e} above {tol:.1e}")
    return w, V


def _lanczos_window(op, lo, hi, k0):
    H = _as_linop(op)
    N = H.shape[0]
    if sp.issparse(op):
        bound = float(abs(op).sum(axis=1).max())
    else:
        bound = 2.0 * op_norm(op)
    sigma = 2.0 * bound + abs(hi) + abs(lo) + 1.0
    dtype = np.result_type(H.dtype, np.float64)
    found = np.zeros((N, 0), dtype=dtype)
    rng = np.random.default_rng(12345)
    k = min(k0, N - 2)
    while True:
        Q = found

        def mv(x, Q=Q):
            y = H.matvec(x)
            if Q.shape[1]:
                y = y + sigma * (Q @ (Q.conj().T @ x))
            return y

        D = spla.LinearOperator((N, N), matvec=mv, dtype=dtype)
        v0 = rng.standard_normal(N).astype(dtype)
        w, V = spla.eigsh(D, k=k, which="SA", v0=v0, tol=1e-12, ncv=min(N - 1, max(2 * k + 1, 20)))
        new = w <= hi + 1e-9
        if not new.any():
            break
        B = V[:, new]
        if Q.shape[1]:
            B = B - Q @ (Q.conj().T @ B)
        B, _ = np.linalg.qr(B)
        found = np.hstack([found, B])
        if new.all():
            k = min(2 * k, N - 2 - found.shape[1])
    if found.shape[1] == 0:
        return np.zeros(0), found
    # Rayleigh-Ritz on everything found below the window top
    Hq = found.conj().T @ H.matmat(found)
    w, C = np.linalg.eigh((Hq + Hq.conj().T) / 2)
    V = found @ C
    sel = (w >= lo - 1e-12) & (w <= hi + 1e-12)
    return w[sel], V[:, sel]


def _mv(M: np.ndarray, x: np.ndarray) -> np.ndarray:
    # a real matrix times a complex vector would be cast to complex on every call
    if not np.iscomplexobj(M) and np.iscomplexobj(x):
        return M @ x.real + 1j * (M @ x.imag)
    return M @ x


class Evolution:
    """Heisenberg dynamics ``tau_t(A) = e^{itH} A e^{-itH}`` through the eigenbasis of ``H``."""

    def __init__(self, H, cap: int | None = 2**13):
        N = _dim(H)
        if cap is not None and N > cap:
            raise ResourceError(f"dense diagonalization of dim {N} exceeds cap {cap}")
        M = H.toarray() if sp.issparse(H) else np.asarray(H)
        if not is_hermitian(M, 1e-10):
            raise DomainError("Hamiltonian is not Hermitian")
        self.energies, self.V = np.linalg.eigh(M)
        self.dim = N

    def to_eigenbasis(self, A) -> np.ndarray:
        V = self.V
        if isinstance(A, Monomial):
            AV = A.apply(V)
        else:
            AV = np.asarray(A @ V)
        if np.iscomplexobj(AV) and not np.iscomplexobj(V) and not np.any(AV.imag):
            AV = np.ascontiguousarray(AV.real)
        return V.conj().T @ AV

    def phases(self, t: float) -> np.ndarray:
        return np.exp(1j * t * self.energies)

    def heisenberg_eigen(self, Ae: np.ndarray, t: float) -> np.ndarray:
        p = self.phases(t)
        return (p[:, None] * Ae) * p.conj()[None, :]

    def heisenberg(self, A, t: float, Ae: np.ndarray | None = None) -> np.ndarray:
        Ae = self.to_eigenbasis(A) if Ae is None else Ae
        X = self.heisenberg_eigen(Ae, t)
        V = self.V
        if np.iscomplexobj(V):
            return V @ X @ V.conj().T
        # real eigenbasis: two real products per part are cheaper than complex ones
        # strided views fall off the BLAS path, so copy the parts first
        re = (V @ np.ascontiguousarray(X.real)) @ V.T
        im = (V @ np.ascontiguousarray(X.imag)) @ V.T
        return re + 1j * im

    def unitary(self, t: float) -> np.ndarray:
        return (self.V * self.phases(-t)) @ self.V.conj().T

    def commutator_norm(self, A, B, t: float, tol: float = 1e-10, Ae=None, Be=None) -> float:
        """``||[tau_t(A), B]||`` from matrix-free products in the eigenbasis.

        ``Ae``/``Be`` may carry precomputed eigenbasis matrices of ``A`` and ``B``.
        """
        Ae = self.to_eigenbasis(A) if Ae is None else Ae
        Be = self.to_eigenbasis(B) if Be is None else Be
        Ah, Bh = Ae.conj().T, Be.conj().T
        p = self.phases(t)

        def tA(x):
            return p * _mv(Ae, p.conj() * x)

        def tAh(x):
            return p * _mv(Ah, p.conj() * x)

        def C(x):
            return tA(_mv(Be, x)) - _mv(Be, tA(x))

        def Ch(x):
            return _mv(Bh, tAh(x)) - tAh(_mv(Bh, x))

        L = spla.LinearOperator((self.dim, self.dim), matvec=C, rmatvec=Ch, dtype=complex)
        return op_norm(L, tol=tol)


def evolve(H, A, t: float, evolution: Evolution | None = None) -> np.ndarray:
    """Dense ``e^{itH} A e^{-itH}``."""
    ev = evolution if evolution is not None else Evolution(H)
    if t == 0:
        return A.toarray() if sp.issparse(A) else np.asarray(A.to_sparse().toarray() if isinstance(A, Monomial) else A)
    return ev.heisenberg(A, t)


def conditional_expectation(A, keep, space: HilbertSpace):
    """Normalized partial trace over edges outside ``keep``, tensored with the identity there.

    Returns the same kind (sparse or dense) as the input.
    """
    keep = sorted(set(int(e) for e in keep))
    if any(e < 0 or e >= space.num_edges for e in keep):
        raise ShapeError("keep set contains edges outside the lattice")
    drop = [e for e in range(space.num_edges) if e not in keep]
    if not drop:
        return A
    n, E = space.n, space.num_edges
    norm = float(n ** len(drop))
    if isinstance(A, Monomial):
        A = A.to_sparse()
    if sp.issparse(A):
        C = A.tocoo()
        dg = space.digits
        dw = space.weights[drop]
        rd = dg[drop][:, C.row].astype(np.int64).T @ dw
        cd = dg[drop][:, C.col].astype(np.int64).T @ dw
        m = rd == cd
        rk = C.row[m] - rd[m]
        ck = C.col[m] - cd[m]
        data = C.data[m] / norm
        # sum duplicate keep-part entries, then spread over every drop configuration
        R = sp.coo_matrix((data, (rk, ck)), shape=(space.dim, space.dim)).tocsr()
        R.sum_duplicates()
        R = R.tocoo()
        if R.nnz:
            offs = np.arange(n ** len(drop), dtype=np.int64)
            dd = ((offs[:, None] // (n ** np.arange(len(drop)))) % n) @ dw
            rows = (R.row[None, :] + dd[:, None]).ravel()
            cols = (R.col[None, :] + dd[:, None]).ravel()
            vals = np.broadcast_to(R.data, (len(dd), R.nnz)).ravel()
            out = sp.csr_matrix((vals, (rows, cols)), shape=(space.dim, space.dim))
        else:
            out = R.tocsr()
        return out
    A = np.asarray(A)
    # row index i = sum d_e n^e, so a C-order reshape puts edge E-1 on the first axis
    ax = lambda e: E - 1 - e  # noqa: E731
    order = [ax(e) for e in keep] + [ax(e) for e in drop]
    perm = order + [E + o for o in order]
    K, D = n ** len(keep), n ** len(drop)
    T = A.reshape((n,) * (2 * E)).transpose(perm).reshape(K, D, K, D)
    R = np.einsum("adbd->ab", T) / norm
    out = (R[:, None, :, None] * np.eye(D)[None, :, None, :]).reshape((n,) * (2 * E))
    return out.transpose(np.argsort(perm)).reshape(A.shape)


def op_norm(op, tol: float = 1e-10, dense_max: int = 512) -> float:
    """Operator 2-norm: dense SVD for small operators, else Lanczos on ``A^dag A``."""
    if isinstance(op, Monomial):
        return 0.0 if op.phase is None and op.dim == 0 else float(
            1.0 if op.phase is None else np.max(np.abs(op.phase))
        )
    N = op.shape[0]
    if not isinstance(op, spla.LinearOperator) and N <= dense_max:
        M = op.toarray() if sp.issparse(op) else np.asarray(op)
        return float(np.linalg.norm(M, 2)) if M.size else 0.0
    if isinstance(op, np.ndarray) and not op.any():
        return 0.0
    if sp.issparse(op) and not op.count_nonzero():
        return 0.0
    L = spla.aslinearoperator(op)
    if N <= 2:
        M = L.matmat(np.eye(N))
        return float(np.linalg.norm(M, 2))
    G = spla.LinearOperator((N, N), matvec=lambda x: L.rmatvec(L.matvec(x)), dtype=complex)
    v0 = np.random.default_rng(7).standard_normal(N) + 0j
    try:
        w = spla.eigsh(G, k=1, which="LA", tol=tol, v0=v0, return_eigenvectors=False,
                       ncv=min(N - 1, 20))
    except spla.ArpackNoConvergence as exc:  # pragma: no cover - defensive
        raise NumericError("norm iteration did not converge") from exc
    except spla.ArpackError as exc:
        # ARPACK stops on an exactly vanishing Krylov vector; that only happens for A v0 = 0
        if np.linalg.norm(L.matvec(v0)) == 0.0:
            return 0.0
        raise NumericError(str(exc)) from exc
    return float(math.sqrt(max(w[0].real, 0.0)))


def commutator_norm(A, B, tol: float = 1e-10) -> float:
    if isinstance(A, Monomial):
        A = A.to_sparse()
    if isinstance(B, Monomial):
        B = B.to_sparse()
    C = A @ B - B @ A
    if sp.issparse(C):
        C.eliminate_zeros()
        if C.nnz == 0:
            return 0.0
    return op_norm(C, tol=tol)


def dense_expm_evolve(H, A, t: float) -> np.ndarray:
    """Oracle: ``expm(itH) A expm(-itH)`` by Pade, independent of the eigenbasis path."""
    M = H.toarray() if sp.issparse(H) else np.asarray(H)
    A = A.toarray() if sp.issparse(A) else np.asarray(A)
    U = sla.expm(1j * t * M)
    return U @ A @ U.conj().T
