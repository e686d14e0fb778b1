"""Square edge lattices, sites, ribbons and cone regions.

Conventions
-----------
* Vertex ``(x, y)``; horizontal edge ``h(x, y)`` runs ``(x, y) -> (x+1, y)`` and
  vertical edge ``v(x, y)`` runs ``(x, y) -> (x, y+1)``.
* Face ``(x, y)`` is the unit square with lower-left corner ``(x, y)``. Its
  boundary is traversed counterclockwise: bottom and right edges are aligned
  (+1), top and left edges anti-aligned (-1).
* A star lists its edges with +1 for edges leaving the vertex and -1 for edges
  entering it.
* Canonical edge enumeration: all horizontal edges ordered by ``(y, x)``,
  then all vertical edges ordered by ``(y, x)``.

Coordinates handed to :func:`build_ribbon` are *unwrapped* integers; they are
reduced modulo the torus size only when looking up edges, so that a step on a
torus of width 2 is never ambiguous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConnectivityError, DomainError, GeometryError, ShapeError

__all__ = [
    "EdgeLattice",
    "Site",
    "RibbonPath",
    "build_ribbon",
    "loop_around_site",
    "ConeRegion",
    "Complement",
    "PointSet",
    "box_points",
    "cone_sites",
    "region_distance",
    "cone_ll",
]

_UNIT = {(1, 0), (-1, 0), (0, 1), (0, -1)}


@dataclass(frozen=True)
class Site:
    """A vertex together with one of the four faces it touches."""

    v: tuple[int, int]
    f: tuple[int, int]

    def __post_init__(self):
        v = (int(self.v[0]), int(self.v[1]))
        f = (int(self.f[0]), int(self.f[1]))
        if (v[0] - f[0], v[1] - f[1]) not in {(0, 0), (1, 0), (0, 1), (1, 1)}:
            raise GeometryError(f"vertex {v} is not a corner of face {f}")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "f", f)


class EdgeLattice:
    """Finite square lattice with spins on edges.

    ``boundary='periodic'`` gives an ``Lx x Ly`` torus. ``boundary='open'``
    gives the patch of all edges whose endpoints lie in the vertex box
    ``[x0, x0+Lx-1] x [y0, y0+Ly-1]``; only stars and plaquettes fully
    contained in the patch are kept.
    """

    def __init__(self, Lx: int, Ly: int, boundary: str = "periodic", origin=(0, 0)):
        if boundary not in ("periodic", "open"):
            raise ShapeError(f"unknown boundary mode {boundary!r}")
        if boundary == "periodic" and (Lx < 2 or Ly < 2):
            raise ShapeError("torus needs Lx, Ly >= 2")
        if boundary == "open" and (Lx < 1 or Ly < 1):
            raise ShapeError("patch needs at least one vertex per side")
        self.Lx, self.Ly = int(Lx), int(Ly)
        self.boundary = boundary
        self.origin = (0, 0) if boundary == "periodic" else (int(origin[0]), int(origin[1]))

        keys = []
        x0, y0 = self.origin
        for kind, (nx, ny) in (("h", self._hshape()), ("v", self._vshape())):
            for y in range(y0, y0 + ny):
                for x in range(x0, x0 + nx):
                    keys.append((kind, x, y))
        self.edge_keys: list[tuple[str, int, int]] = keys
        self._index = {k: i for i, k in enumerate(keys)}

    @classmethod
    def torus(cls, Lx: int, Ly: int | None = None) -> "EdgeLattice":
        return cls(Lx, Lx if Ly is None else Ly, "periodic")

    @classmethod
    def square_patch(cls, L: int) -> "EdgeLattice":
        """All edges in ``[-L, L]^2``."""
        return cls(2 * L + 1, 2 * L + 1, "open", origin=(-L, -L))

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"

    def _hshape(self):
        return (self.Lx, self.Ly) if self.periodic else (self.Lx - 1, self.Ly)

    def _vshape(self):
        return (self.Lx, self.Ly) if self.periodic else (self.Lx, self.Ly - 1)

    def __repr__(self):
        return f"EdgeLattice({self.Lx}, {self.Ly}, {self.boundary!r})"

    def spec(self) -> dict:
        return {"Lx": self.Lx, "Ly": self.Ly, "boundary": self.boundary, "origin": list(self.origin)}

    @property
    def num_edges(self) -> int:
        return len(self.edge_keys)

    # -- lookups -----------------------------------------------------------
    def reduce(self, p) -> tuple[int, int]:
        if self.periodic:
            return (p[0] % self.Lx, p[1] % self.Ly)
        return (int(p[0]), int(p[1]))

    def has_vertex(self, v) -> bool:
        if self.periodic:
            return True
        x0, y0 = self.origin
        return x0 <= v[0] < x0 + self.Lx and y0 <= v[1] < y0 + self.Ly

    def edge_index(self, kind: str, x: int, y: int) -> int | None:
        x, y = self.reduce((x, y))
        return self._index.get((kind, x, y))

    def edge_between(self, a, b) -> tuple[int | None, int]:
        """Edge joining neighbouring vertices ``a``, ``b`` and +1 if it points a -> b."""
        d = (b[0] - a[0], b[1] - a[1])
        if d not in _UNIT:
            raise ConnectivityError(f"vertices {a} and {b} are not neighbours")
        if d == (1, 0):
            return self.edge_index("h", *a), 1
        if d == (-1, 0):
            return self.edge_index("h", *b), -1
        if d == (0, 1):
            return self.edge_index("v", *a), 1
        return self.edge_index("v", *b), -1

    def endpoints(self, e: int) -> tuple[tuple[int, int], tuple[int, int]]:
        kind, x, y = self.edge_keys[e]
        return ((x, y), (x + 1, y)) if kind == "h" else ((x, y), (x, y + 1))

    @cached_property
    def midpoints(self) -> np.ndarray:
        return np.array([np.add(*self.endpoints(e)) / 2.0 for e in range(self.num_edges)])

    def face_boundary(self, f) -> list[tuple[int | None, int]]:
        """Edges of face ``f`` with counterclockwise orientation signs."""
        x, y = f
        return [
            (self.edge_index("h", x, y), 1),
            (self.edge_index("v", x + 1, y), 1),
            (self.edge_index("h", x, y + 1), -1),
            (self.edge_index("v", x, y), -1),
        ]

    def star_edges(self, v) -> list[tuple[int | None, int]]:
        x, y = v
        return [
            (self.edge_index("h", x, y), 1),
            (self.edge_index("v", x, y), 1),
            (self.edge_index("h", x - 1, y), -1),
            (self.edge_index("v", x, y - 1), -1),
        ]

    def has_face(self, f) -> bool:
        return all(e is not None for e, _ in self.face_boundary(f))

    def has_star(self, v) -> bool:
        return self.has_vertex(v) and all(e is not None for e, _ in self.star_edges(v))

    # -- stars and plaquettes ---------------------------------------------
    @cached_property
    def vertices(self) -> list[tuple[int, int]]:
        x0, y0 = self.origin
        return [(x, y) for y in range(y0, y0 + self.Ly) for x in range(x0, x0 + self.Lx)]

    @cached_property
    def faces(self) -> list[tuple[int, int]]:
        x0, y0 = self.origin
        nx, ny = (self.Lx, self.Ly) if self.periodic else (self.Lx - 1, self.Ly - 1)
        return [(x, y) for y in range(y0, y0 + ny) for x in range(x0, x0 + nx)]

    @cached_property
    def stars(self) -> list[tuple[tuple[int, int], list[tuple[int, int]]]]:
        """Fully contained stars as ``(vertex, [(edge, sign), ...])``."""
        return [(v, self.star_edges(v)) for v in self.vertices if self.has_star(v)]

    @cached_property
    def plaquettes(self) -> list[tuple[tuple[int, int], list[tuple[int, int]]]]:
        return [(f, self.face_boundary(f)) for f in self.faces if self.has_face(f)]

    def enumerate_stars_plaquettes(self):
        return self.stars, self.plaquettes

    # -- sites -------------------------------------------------------------
    def site_in_bulk(self, site: Site) -> bool:
        """Membership in S_L: vertex in the lattice and face one of its faces."""
        return self.has_vertex(self.reduce(site.v)) and self.has_face(site.f)

    def same_site(self, a: Site, b: Site) -> bool:
        return self.reduce(a.v) == self.reduce(b.v) and self.reduce(a.f) == self.reduce(b.f)

    # -- metric ------------------------------------------------------------
    def displacement(self, p, q) -> np.ndarray:
        d = np.asarray(q, dtype=float) - np.asarray(p, dtype=float)
        if self.periodic:
            L = np.array([self.Lx, self.Ly], dtype=float)
            d = d - L * np.round(d / L)
        return d

    @cached_property
    def edge_distances(self) -> np.ndarray:
        """Distances between edge midpoints (minimum image on a torus)."""
        m = self.midpoints
        d = m[None, :, :] - m[:, None, :]
        if self.periodic:
            L = np.array([self.Lx, self.Ly], dtype=float)
            d = d - L * np.round(d / L)
        return np.sqrt((d**2).sum(-1))

    def translation(self, dx: int, dy: int) -> np.ndarray:
        """Edge permutation ``perm[e]`` = image of edge ``e`` under a torus translation."""
        if not self.periodic:
            raise GeometryError("translations are only defined on a torus")
        perm = np.empty(self.num_edges, dtype=np.int64)
        for e, (kind, x, y) in enumerate(self.edge_keys):
            perm[e] = self.edge_index(kind, x + dx, y + dy)
        return perm

    def edges_in(self, region) -> list[int]:
        """Edges with both endpoints inside ``region`` (unwrapped coordinates)."""
        ends = np.array([self.endpoints(e) for e in range(self.num_edges)], dtype=float)
        a = region.contains(ends[:, 0, :])
        b = region.contains(ends[:, 1, :])
        return [int(e) for e in np.flatnonzero(a & b)]


@dataclass(frozen=True)
class RibbonPath:
    """Ordered sequence of adjacent sites.

    ``direct`` holds ``(edge, sign)`` for every edge walked by the vertex path
    (sign +1 when walked along its orientation); ``dual`` holds ``(edge, sign)``
    for every edge crossed by the face path (sign +1 when the edge is
    counterclockwise-aligned for the face being entered).
    """

    lattice: EdgeLattice = field(repr=False, compare=False)
    sites: tuple[Site, ...]
    direct: tuple[tuple[int, int], ...]
    dual: tuple[tuple[int, int], ...]

    @property
    def start(self) -> Site:
        return self.sites[0]

    @property
    def end(self) -> Site:
        return self.sites[-1]

    @property
    def closed(self) -> bool:
        return self.lattice.same_site(self.start, self.end)

    @property
    def support(self) -> set[int]:
        return {e for e, _ in self.direct} | {e for e, _ in self.dual}

    def reversed(self) -> "RibbonPath":
        return build_ribbon(self.lattice, list(reversed(self.sites)))

    def __len__(self):
        return len(self.sites)


def _dual_crossing(lat: EdgeLattice, f, g) -> tuple[int | None, int]:
    d = (g[0] - f[0], g[1] - f[1])
    if d not in _UNIT:
        raise ConnectivityError(f"faces {f} and {g} are not neighbours")
    x, y = f
    if d == (1, 0):
        return lat.edge_index("v", x + 1, y), -1
    if d == (-1, 0):
        return lat.edge_index("v", x, y), 1
    if d == (0, 1):
        return lat.edge_index("h", x, y + 1), 1
    return lat.edge_index("h", x, y), -1


def _corner(v, f) -> bool:
    return (v[0] - f[0], v[1] - f[1]) in {(0, 0), (1, 0), (0, 1), (1, 1)}


def build_ribbon(lattice: EdgeLattice, sites) -> RibbonPath:
    """Classify the steps of a site sequence into direct and dual edges.

    A step may move the vertex, the face, or both by one lattice unit; a
    combined step must factor through a valid intermediate site.
    """
    sites = tuple(s if isinstance(s, Site) else Site(*s) for s in sites)
    if not sites:
        raise ConnectivityError("a ribbon needs at least one site")
    direct, dual = [], []
    for a, b in zip(sites, sites[1:]):
        dv = (b.v[0] - a.v[0], b.v[1] - a.v[1])
        df = (b.f[0] - a.f[0], b.f[1] - a.f[1])
        if dv == (0, 0) and df == (0, 0):
            raise ConnectivityError(f"repeated site {a}")
        if (dv != (0, 0) and dv not in _UNIT) or (df != (0, 0) and df not in _UNIT):
            raise ConnectivityError(f"sites {a} and {b} are not adjacent")
        if dv != (0, 0) and df != (0, 0):
            if not (_corner(b.v, a.f) or _corner(a.v, b.f)):
                raise ConnectivityError(f"no intermediate site between {a} and {b}")
        if dv != (0, 0):
            e, s = lattice.edge_between(a.v, b.v)
            if e is None:
                raise ConnectivityError(f"edge {a.v}->{b.v} is not in the lattice")
            direct.append((e, s))
        if df != (0, 0):
            e, s = _dual_crossing(lattice, a.f, b.f)
            if e is None:
                raise ConnectivityError(f"edge between faces {a.f}, {b.f} is not in the lattice")
            dual.append((e, s))
    return RibbonPath(lattice, sites, tuple(direct), tuple(dual))


def loop_around_site(lattice: EdgeLattice, site: Site) -> RibbonPath:
    """Closed ribbon whose vertex path circles ``site.f`` and whose face path circles ``site.v``.

    Both loops run counterclockwise, so the ribbon operator of label
    ``(chi, c)`` measures ``chi`` of the flux in ``site.f`` and applies the
    gauge transformation by ``c`` at ``site.v``.
    """
    v, f = site.v, site.f
    corners = [(f[0], f[1]), (f[0] + 1, f[1]), (f[0] + 1, f[1] + 1), (f[0], f[1] + 1)]
    around = [(v[0], v[1]), (v[0] - 1, v[1]), (v[0] - 1, v[1] - 1), (v[0], v[1] - 1)]
    for shift in range(4):
        for lag in range(4):
            seq = [
                (corners[(shift + k) % 4], around[(lag + k) % 4]) for k in range(4)
            ]
            if not all(_corner(p, q) for p, q in seq):
                continue
            try:
                return build_ribbon(lattice, seq + seq[:1])
            except ConnectivityError:
                continue
    raise GeometryError(f"cannot build a loop around {site}")


# -- cone regions ----------------------------------------------------------
_LATTICE_AXES = [
    (1, 0), (0, 1), (-1, 0), (0, -1),
    (1, 1), (-1, 1), (-1, -1), (1, -1),
]


class ConeRegion:
    """Open cone ``{x : (x - apex) . a > |x - apex| cos(alpha)}``."""

    def __init__(self, apex=(0.0, 0.0), axis=(1.0, 0.0), alpha: float = math.pi / 4,
                 lattice_axis: bool = True):
        axis = np.asarray(axis, dtype=float)
        norm = float(np.linalg.norm(axis))
        if axis.shape != (2,) or norm == 0.0:
            raise ShapeError("cone axis must be a nonzero 2-vector")
        if not 0.0 < alpha < math.pi:
            raise DomainError("opening half-angle must lie in (0, pi)")
        if lattice_axis:
            ok = any(np.allclose(axis / norm, np.array(d) / np.hypot(*d)) for d in _LATTICE_AXES)
            if not ok:
                raise ShapeError("axis must be one of the 8 lattice-symmetric directions")
        self.apex = np.asarray(apex, dtype=float)
        self.axis = axis / norm
        self.alpha = float(alpha)
        self.lattice_axis = lattice_axis

    def __repr__(self):
        return f"ConeRegion(apex={self.apex.tolist()}, axis={self.axis.tolist()}, alpha={self.alpha:.6g})"

    def spec(self) -> dict:
        return {"apex": self.apex.tolist(), "axis": self.axis.tolist(), "alpha": self.alpha}

    def contains(self, points) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float)) - self.apex
        return p @ self.axis > np.hypot(p[:, 0], p[:, 1]) * math.cos(self.alpha)

    def shift_vector(self, n: float) -> np.ndarray:
        s = n * self.axis
        return s if np.allclose(s, np.rint(s)) else np.rint(s)

    def translated(self, n: float) -> "ConeRegion":
        """``Lambda + n``: apex moved by ``n`` along the axis (``Lambda + n`` is inside ``Lambda`` for n > 0)."""
        return ConeRegion(self.apex + self.shift_vector(n), self.axis, self.alpha, self.lattice_axis)

    def widened(self, eps: float) -> "ConeRegion":
        return ConeRegion(self.apex, self.axis, self.alpha + eps, self.lattice_axis)

    def outer_complement(self, eps: float, n: float) -> "Complement":
        """``Y_{eps,n} = (Lambda_{alpha+eps} - n)^c``."""
        return Complement(self.widened(eps).translated(-n))


class Complement:
    def __init__(self, region):
        self.region = region

    def contains(self, points) -> np.ndarray:
        return ~self.region.contains(points)

    def __repr__(self):
        return f"Complement({self.region!r})"


class PointSet:
    def __init__(self, points):
        self.points = np.atleast_2d(np.asarray(points, dtype=float))

    def contains(self, points) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return (p[:, None, :] == self.points[None, :, :]).all(-1).any(-1)


def box_points(box) -> np.ndarray:
    """Integer points of ``[-R, R]^2`` (``box=R``) or ``(xmin, xmax, ymin, ymax)`` inclusive."""
    if np.isscalar(box):
        R = int(box)
        box = (-R, R, -R, R)
    xmin, xmax, ymin, ymax = (int(b) for b in box)
    xs, ys = np.meshgrid(np.arange(xmin, xmax + 1), np.arange(ymin, ymax + 1), indexing="ij")
    return np.column_stack([xs.ravel(), ys.ravel()])


def cone_sites(region, box) -> np.ndarray:
    """Lattice points of the box that satisfy the (strict) membership test."""
    pts = box_points(box)
    return pts[region.contains(pts)]


def _region_points(region, box):
    if isinstance(region, PointSet):
        return region.points
    if box is None:
        raise DomainError("a bounding box is needed for unbounded regions")
    return cone_sites(region, box)


def region_distance(X, Y, box=None) -> float:
    """Minimal Euclidean distance between the lattice points of two regions."""
    px, py = _region_points(X, box), _region_points(Y, box)
    if len(px) == 0 or len(py) == 0:
        raise DomainError("empty region")
    d, _ = cKDTree(py).query(px, k=1)
    return float(np.min(d))


def cone_ll(small: ConeRegion, big: ConeRegion, n0: int, box) -> bool:
    """Finite-volume test of ``small << big``: ``small`` inside ``big + n0`` on the box."""
    pts = box_points(box)
    inside = small.contains(pts)
    return bool(np.all(big.translated(n0).contains(pts[inside])))
