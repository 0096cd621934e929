"""
Concrete group elements.

Four closed variants carry the payloads the package works with:

- Perm: a bijection of {0..d-1}; the product a*b applies a first, then b
- Mat2: an invertible 2x2 matrix over a small Galois field, optionally taken
  up to sign (projective) for PSL2 with odd q
- Pair: an element of a direct product of two payload groups
- TableIdx: an index into a Cayley table; these multiply only through the
  table of the group that owns them

Every variant is a frozen dataclass, so equality and hashing are structural
and elements can live in sets and dict keys. sort_key() gives the
deterministic ordering used for canonical element lists.
"""

from dataclasses import dataclass, field as dc_field
from typing import Sequence, Tuple, Union

from .errors import UsageError, ValidationError
from .galois import GaloisField


@dataclass(frozen=True)
class Perm:
    """Permutation of {0..d-1} given by its image list."""

    images: Tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(i) for i in self.images)
        if sorted(images) != list(range(len(images))):
            raise ValidationError("permutation images are not a bijection", tuple(images))
        object.__setattr__(self, "images", images)

    @classmethod
    def _trusted(cls, images: Tuple[int, ...]) -> "Perm":
        obj = object.__new__(cls)
        object.__setattr__(obj, "images", images)
        return obj

    @classmethod
    def identity(cls, degree: int) -> "Perm":
        return cls._trusted(tuple(range(degree)))

    @classmethod
    def from_cycles(cls, degree: int, *cycles: Sequence[int]) -> "Perm":
        """
        Build a permutation from disjoint cycles.

        Example:
            Perm.from_cycles(5, (0, 1, 2, 3, 4)) is the 5-cycle 0->1->...->4->0
        """
        images = list(range(degree))
        seen = set()
        for cycle in cycles:
            for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]]):
                if a in seen or not 0 <= a < degree:
                    raise ValidationError("cycles must be disjoint and within the degree", tuple(cycle))
                seen.add(a)
                images[a] = b
        return cls(tuple(images))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __mul__(self, other: "Perm") -> "Perm":
        b = other.images
        return Perm._trusted(tuple(b[i] for i in self.images))

    def inverse(self) -> "Perm":
        inv = [0] * len(self.images)
        for i, j in enumerate(self.images):
            inv[j] = i
        return Perm._trusted(tuple(inv))

    def ambient(self) -> tuple:
        return ("perm", len(self.images))

    def sort_key(self) -> tuple:
        return self.images

    def __str__(self) -> str:
        cycles, seen = [], set()
        for start in range(len(self.images)):
            if start in seen or self.images[start] == start:
                continue
            cycle, i = [], start
            while i not in seen:
                seen.add(i)
                cycle.append(i)
                i = self.images[i]
            cycles.append("(" + " ".join(map(str, cycle)) + ")")
        return "".join(cycles) or "()"


@dataclass(frozen=True)
class Mat2:
    """
    2x2 matrix [[a, b], [c, d]] over a GaloisField, entries as field codes.

    With projective=True the matrix stands for the pair {M, -M}; the stored
    representative is the lexicographically smaller entry tuple.
    """

    entries: Tuple[int, int, int, int]
    field: GaloisField = dc_field(compare=False, repr=False)
    projective: bool = False

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if len(entries) != 4 or not all(0 <= e < self.field.q for e in entries):
            raise ValidationError(f"matrix entries must be four codes of {self.field!r}", entries)
        if self._det(entries) == 0:
            raise ValidationError("matrix is singular", entries)
        object.__setattr__(self, "entries", self._normalise(entries))

    @classmethod
    def of(cls, gf: GaloisField, a: int, b: int, c: int, d: int, projective: bool = False) -> "Mat2":
        return cls((a, b, c, d), gf, projective)

    @classmethod
    def identity(cls, gf: GaloisField, projective: bool = False) -> "Mat2":
        return cls((1, 0, 0, 1), gf, projective)

    def _det(self, e: Tuple[int, ...]) -> int:
        gf = self.field
        return gf.sub(gf.mul(e[0], e[3]), gf.mul(e[1], e[2]))

    def _normalise(self, e: Tuple[int, ...]) -> Tuple[int, ...]:
        if not self.projective:
            return e
        neg = tuple(self.field.neg(x) for x in e)
        return min(e, neg)

    def _build(self, entries: Tuple[int, ...]) -> "Mat2":
        obj = object.__new__(Mat2)
        object.__setattr__(obj, "field", self.field)
        object.__setattr__(obj, "projective", self.projective)
        object.__setattr__(obj, "entries", self._normalise(entries))
        return obj

    @property
    def det(self) -> int:
        return self._det(self.entries)

    def __mul__(self, other: "Mat2") -> "Mat2":
        gf = self.field
        a, b, c, d = self.entries
        e, f, g, h = other.entries
        mul, add = gf.mul, gf.add
        return self._build((
            add(mul(a, e), mul(b, g)), add(mul(a, f), mul(b, h)),
            add(mul(c, e), mul(d, g)), add(mul(c, f), mul(d, h)),
        ))

    def inverse(self) -> "Mat2":
        gf = self.field
        a, b, c, d = self.entries
        inv_det = gf.inv(self.det)
        return self._build((
            gf.mul(d, inv_det), gf.mul(gf.neg(b), inv_det),
            gf.mul(gf.neg(c), inv_det), gf.mul(a, inv_det),
        ))

    def ambient(self) -> tuple:
        return ("mat2", self.field, self.projective)

    def sort_key(self) -> tuple:
        return self.entries

    def __str__(self) -> str:
        a, b, c, d = self.entries
        prefix = "±" if self.projective and self.field.p != 2 else ""
        return f"{prefix}[[{a},{b}],[{c},{d}]]"


@dataclass(frozen=True)
class TableIdx:
    """Index into the Cayley table of the group that owns the element."""

    i: int

    def __post_init__(self):
        if self.i < 0:
            raise ValidationError("table index must be non-negative", (self.i,))

    def __mul__(self, other):
        raise UsageError("table elements multiply through their group's Cayley table")

    def inverse(self):
        raise UsageError("table elements invert through their group's Cayley table")

    def ambient(self) -> tuple:
        return ("table",)

    def sort_key(self) -> tuple:
        return (self.i,)

    def __str__(self) -> str:
        return f"#{self.i}"


@dataclass(frozen=True)
class Pair:
    """Element (left, right) of a product; componentwise for payload factors."""

    left: "Element"
    right: "Element"

    def __mul__(self, other: "Pair") -> "Pair":
        return Pair(self.left * other.left, self.right * other.right)

    def inverse(self) -> "Pair":
        return Pair(self.left.inverse(), self.right.inverse())

    def ambient(self) -> tuple:
        return ("pair", self.left.ambient(), self.right.ambient())

    def sort_key(self) -> tuple:
        return (self.left.sort_key(), self.right.sort_key())

    def __str__(self) -> str:
        return f"({self.left}, {self.right})"


Element = Union[Perm, Mat2, Pair, TableIdx]


def is_payload(element: Element) -> bool:
    """True when the element can be multiplied without a Cayley table."""
    if isinstance(element, TableIdx):
        return False
    if isinstance(element, Pair):
        return is_payload(element.left) and is_payload(element.right)
    return True


def element_key(element: Element) -> tuple:
    """Deterministic sort key used for canonical element order."""
    return element.sort_key()
