"""Finite abelian groups, their characters, and anyon labels of D(G).

A group is a product of cyclic factors ``Z_{n_1} x ... x Z_{n_k}``. Elements are
residue tuples; internally they are also enumerated by an integer code (mixed
radix, first factor most significant) so that group tables can be used as
numpy lookup arrays.

>>> G = AbelianGroup((2,))
>>> chi = G.character((1,))
>>> character_eval(chi, (1,))
(-1+0j)
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ShapeError

__all__ = [
    "AbelianGroup",
    "Character",
    "AnyonLabel",
    "character_eval",
    "fuse",
    "anyon_labels",
]


@dataclass(frozen=True)
class AbelianGroup:
    factors: tuple[int, ...]

    def __post_init__(self):
        factors = tuple(int(n) for n in self.factors)
        if not factors:
            raise ShapeError("need at least one cyclic factor")
        if any(n < 2 for n in factors):
            raise ShapeError(f"cyclic orders must be >= 2, got {factors}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def cyclic(cls, n: int) -> "AbelianGroup":
        return cls((n,))

    @property
    def order(self) -> int:
        return math.prod(self.factors)

    @property
    def rank(self) -> int:
        return len(self.factors)

    @property
    def exponent(self) -> int:
        """Least common multiple of the factor orders."""
        return math.lcm(*self.factors)

    @property
    def identity(self) -> tuple[int, ...]:
        return (0,) * self.rank

    def __str__(self):
        return " x ".join(f"Z{n}" for n in self.factors)

    def check(self, g) -> tuple[int, ...]:
        g = tuple(int(x) for x in g)
        if len(g) != self.rank:
            raise ShapeError(f"element {g} has arity {len(g)}, group {self} needs {self.rank}")
        return tuple(x % n for x, n in zip(g, self.factors))

    def elements(self) -> list[tuple[int, ...]]:
        return list(itertools.product(*(range(n) for n in self.factors)))

    def index(self, g) -> int:
        code = 0
        for x, n in zip(self.check(g), self.factors):
            code = code * n + x
        return code

    def element(self, code: int) -> tuple[int, ...]:
        out = []
        for n in reversed(self.factors):
            out.append(code % n)
            code //= n
        return tuple(reversed(out))

    def add(self, g, h) -> tuple[int, ...]:
        g, h = self.check(g), self.check(h)
        return tuple((a + b) % n for a, b, n in zip(g, h, self.factors))

    def neg(self, g) -> tuple[int, ...]:
        return tuple((-a) % n for a, n in zip(self.check(g), self.factors))

    def element_order(self, g) -> int:
        g = self.check(g)
        return math.lcm(*(n // math.gcd(a, n) for a, n in zip(g, self.factors)))

    @cached_property
    def add_table(self) -> np.ndarray:
        """``add_table[i, j]`` is the code of ``element(i) + element(j)``."""
        els = self.elements()
        return np.array([[self.index(self.add(g, h)) for h in els] for g in els], dtype=np.int64)

    @cached_property
    def neg_table(self) -> np.ndarray:
        return np.array([self.index(self.neg(g)) for g in self.elements()], dtype=np.int64)

    def character(self, exponents) -> "Character":
        return Character(self, self.check(exponents))

    def characters(self) -> list["Character"]:
        return [Character(self, m) for m in self.elements()]

    @property
    def trivial_character(self) -> "Character":
        return Character(self, self.identity)


def _root_of_unity(p: int, L: int) -> complex:
    # quarter turns are returned exactly so that real characters stay real
    q, r = divmod(4 * p, L)
    if r == 0:
        return (1 + 0j, 1j, -1 + 0j, -1j)[q % 4]
    return cmath.exp(2j * math.pi * p / L)


@dataclass(frozen=True)
class Character:
    """Character ``g -> prod_i exp(2 pi i m_i g_i / n_i)`` given by exponents ``m``."""

    group: AbelianGroup
    exponents: tuple[int, ...]

    def phase_int(self, g) -> int:
        """Exact phase as an integer ``p`` with ``chi(g) = exp(2 pi i p / L)``, L the exponent."""
        g = self.group.check(g)
        L = self.group.exponent
        return sum(m * x * (L // n) for m, x, n in zip(self.exponents, g, self.group.factors)) % L

    def __call__(self, g) -> complex:
        return _root_of_unity(self.phase_int(g), self.group.exponent)

    @property
    def is_trivial(self) -> bool:
        return all(m == 0 for m in self.exponents)

    def conj(self) -> "Character":
        return Character(self.group, self.group.neg(self.exponents))

    def __mul__(self, other: "Character") -> "Character":
        if other.group != self.group:
            raise ShapeError("characters of different groups")
        return Character(self.group, self.group.add(self.exponents, other.exponents))

    def values(self) -> np.ndarray:
        """Character values on all elements, in code order."""
        return np.array([self(g) for g in self.group.elements()])

    def __str__(self):
        if self.is_trivial:
            return "iota"
        return "chi" + "".join(str(m) for m in self.exponents)


def character_eval(chi: Character, g) -> complex:
    return chi(g)


@dataclass(frozen=True)
class AnyonLabel:
    """Sector ``(chi, c)`` of Rep(D(G)): electric charge ``chi``, magnetic flux ``c``."""

    chi: Character
    c: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "c", self.chi.group.check(self.c))

    @property
    def group(self) -> AbelianGroup:
        return self.chi.group

    @classmethod
    def vacuum(cls, group: AbelianGroup) -> "AnyonLabel":
        return cls(group.trivial_character, group.identity)

    @classmethod
    def of(cls, group: AbelianGroup, chi, c) -> "AnyonLabel":
        return cls(group.character(chi), c)

    @property
    def is_vacuum(self) -> bool:
        return self.chi.is_trivial and self.c == self.group.identity

    def conjugate(self) -> "AnyonLabel":
        return AnyonLabel(self.chi.conj(), self.group.neg(self.c))

    def __str__(self):
        return f"({self.chi}, {''.join(map(str, self.c))})"

    def key(self) -> str:
        """Compact string key used in serialized tables."""
        m = ",".join(map(str, self.chi.exponents))
        c = ",".join(map(str, self.c))
        return f"chi=[{m}];c=[{c}]"


def fuse(a: AnyonLabel, b: AnyonLabel) -> AnyonLabel:
    if a.group != b.group:
        raise ShapeError("cannot fuse labels over different groups")
    return AnyonLabel(a.chi * b.chi, a.group.add(a.c, b.c))


def anyon_labels(group: AbelianGroup) -> list[AnyonLabel]:
    """All |G|^2 labels, flux-major then charge (Z2: 1, e, m, em)."""
    return [AnyonLabel(chi, c) for c in group.elements() for chi in group.characters()]
