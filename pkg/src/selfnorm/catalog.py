"""
Named groups and input files.

Catalog grammar (one spec per group):

    C:n          cyclic group of order n (n-cycle)
    D:n          dihedral group of order 2n
    Q:8          quaternion group (= Dic:2)
    Dic:n        dicyclic group of order 4n
    S:n / A:n    symmetric / alternating group on n points
    SL:2:q       special linear group over GF(q), q a prime power <= 64
    PSL:2:q      SL2(q) modulo its center
    Ab:n1xn2...  Z_n1 x Z_n2 x ...
    table:PATH   Cayley-table file
    sd:PATH      semidirect spec file

Generator choices per family:
- D:n       rotation (0 1 ... n-1) and reflection i -> -i mod n
- S:n       (0 1) and (0 1 ... n-1)
- A:n       the 3-cycles (0 1 i), i = 2..n-1
- SL:2:q    [[1,1],[0,1]], [[1,0],[1,1]] and diag(w, w^-1) for the primitive element w
- PSL:2:q   coset-table quotient of SL:2:q while |PSL2(q)| <= 4096; above
            that, projective matrices (odd q) or SL2(q) itself (even q, trivial center)

File formats:

    # Cayley table: first line n, then n rows of n indices
    # Semidirect spec:
    H <catalog spec or table path>
    order <m>
    action <image of each canonical element of H>
"""

import logging
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from sympy import factorint

from .config import CLOSURE_CAP, TABLE_LIMIT
from .elements import Mat2, Perm
from .errors import AutomorphismError, ParseError, ResourceError
from .galois import gf_make
from .group import (
    FiniteGroup,
    abelian_group,
    close_group,
    group_from_table,
    quotient_group,
    semidirect_product,
    verify_automorphism,
)

logger = logging.getLogger(__name__)

FAMILIES = ("C", "D", "Q", "Dic", "S", "A", "SL", "PSL", "Ab", "table", "sd")
MAX_FIELD = 64

_INT = re.compile(r"^[0-9]+$")


@dataclass(frozen=True)
class CatalogSpec:
    """Parsed catalog spec: family, integer parameters, or a file path."""

    family: str
    params: Tuple[int, ...] = ()
    path: Optional[str] = None
    text: str = ""

    def __str__(self) -> str:
        return self.text or f"{self.family}:{':'.join(map(str, self.params))}"


# ============================================================================
# Parsing
# ============================================================================

def _int_at(token: str, text: str, column: int) -> int:
    if not _INT.match(token):
        raise ParseError(f"expected a positive integer, got {token!r}", column, text)
    value = int(token)
    if value < 1:
        raise ParseError("parameter must be at least 1", column, text)
    return value


def _prime_power(q: int) -> Optional[Tuple[int, int]]:
    f = factorint(q)
    if len(f) != 1:
        return None
    (p, k), = f.items()
    return p, k


def parse_spec(text: str) -> CatalogSpec:
    """
    Parse a catalog spec.

    Raises:
        ParseError: with the 1-based column of the offending token
    """
    raw = text.strip()
    if not raw:
        raise ParseError("empty group spec", 1, text)
    family, sep, rest = raw.partition(":")
    if family not in FAMILIES:
        raise ParseError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}", 1, text)
    if not sep or not rest:
        raise ParseError(f"{family} needs a parameter", len(family) + 1, text)
    column = len(family) + 2

    if family in ("table", "sd"):
        return CatalogSpec(family, (), rest, raw)

    if family == "Ab":
        params = []
        for token in rest.split("x"):
            params.append(_int_at(token, text, column))
            column += len(token) + 1
        return CatalogSpec(family, tuple(params), None, raw)

    tokens = rest.split(":")
    if family in ("SL", "PSL"):
        if len(tokens) != 2:
            raise ParseError(f"{family} expects {family}:2:q", column, text)
        degree = _int_at(tokens[0], text, column)
        if degree != 2:
            raise ParseError("only 2x2 matrix groups are supported", column, text)
        column += len(tokens[0]) + 1
        q = _int_at(tokens[1], text, column)
        if _prime_power(q) is None:
            raise ParseError(f"q = {q} is not a prime power", column, text)
        return CatalogSpec(family, (2, q), None, raw)

    if len(tokens) != 1:
        raise ParseError(f"{family} takes one parameter", column + len(tokens[0]), text)
    n = _int_at(tokens[0], text, column)
    if family == "Q" and n != 8:
        raise ParseError("only Q:8 is defined; use Dic:n for larger dicyclic groups", column, text)
    return CatalogSpec(family, (n,), None, raw)


def closed_form_order(spec: CatalogSpec) -> Optional[int]:
    """Order predicted by the family formula (None for file specs)."""
    f, params = spec.family, spec.params
    if f == "C":
        return params[0]
    if f == "D":
        return 2 * params[0]
    if f == "Q":
        return 8
    if f == "Dic":
        return 4 * params[0]
    if f == "S":
        return math.factorial(params[0])
    if f == "A":
        n = params[0]
        return 1 if n < 2 else math.factorial(n) // 2
    if f in ("SL", "PSL"):
        q = params[1]
        order = q * (q * q - 1)
        return order // 2 if f == "PSL" and q % 2 else order
    if f == "Ab":
        return int(np.prod(params))
    return None


def _check_caps(spec: CatalogSpec) -> None:
    order = closed_form_order(spec)
    if order is None:
        return
    if spec.family in ("SL", "PSL") and spec.params[1] > MAX_FIELD:
        raise ResourceError(f"{spec}: q = {spec.params[1]} exceeds the field bound {MAX_FIELD}")
    limit = TABLE_LIMIT if spec.family in ("Dic", "Q", "Ab") else CLOSURE_CAP
    if order > limit:
        raise ResourceError(f"{spec}: order {order} exceeds the cap {limit}")


# ============================================================================
# Family constructors
# ============================================================================

def cyclic(n: int, name: Optional[str] = None) -> FiniteGroup:
    return close_group([Perm.from_cycles(n, tuple(range(n))) if n > 1 else Perm.identity(1)],
                       name=name or f"C:{n}")


def dihedral(n: int, name: Optional[str] = None) -> FiniteGroup:
    """Dih(n) of order 2n."""
    name = name or f"D:{n}"
    if n == 1:
        return close_group([Perm((1, 0))], name=name)
    if n == 2:
        return close_group([Perm((1, 0, 3, 2)), Perm((2, 3, 0, 1))], name=name)
    rotation = Perm(tuple((i + 1) % n for i in range(n)))
    reflection = Perm(tuple((-i) % n for i in range(n)))
    return close_group([rotation, reflection], name=name)


def dicyclic(n: int, name: Optional[str] = None) -> FiniteGroup:
    """
    Dic(n) = <a, b | a^2n = 1, b^2 = a^n, a^b = a^-1>, order 4n.

    Element a^k b^e sits at index k + 2n e.
    """
    m = 2 * n
    size = 2 * m
    idx = np.arange(size)
    k, e = idx % m, idx // m
    k1, e1 = k[:, None], e[:, None]
    k2, e2 = k[None, :], e[None, :]
    plain = ((k1 + k2) % m) + m * e2
    twisted_plain = ((k1 - k2) % m) + m
    twisted_twisted = (k1 - k2 + n) % m
    table = np.where(e1 == 0, plain, np.where(e2 == 0, twisted_plain, twisted_twisted))
    return group_from_table(table, name=name or f"Dic:{n}")


def symmetric(n: int, name: Optional[str] = None) -> FiniteGroup:
    name = name or f"S:{n}"
    if n == 1:
        return close_group([Perm.identity(1)], name=name)
    if n == 2:
        return close_group([Perm((1, 0))], name=name)
    return close_group([Perm.from_cycles(n, (0, 1)), Perm.from_cycles(n, tuple(range(n)))], name=name)


def alternating(n: int, name: Optional[str] = None) -> FiniteGroup:
    name = name or f"A:{n}"
    if n < 3:
        return close_group([Perm.identity(max(n, 1))], name=name)
    return close_group([Perm.from_cycles(n, (0, 1, i)) for i in range(2, n)], name=name)


def _sl2_generators(q: int, projective: bool = False) -> List[Mat2]:
    p, k = _prime_power(q)
    gf = gf_make(p, k)
    w = gf.generator
    return [
        Mat2.of(gf, 1, 1, 0, 1, projective),
        Mat2.of(gf, 1, 0, 1, 1, projective),
        Mat2.of(gf, w, 0, 0, gf.inv(w), projective),
    ]


def special_linear(q: int, name: Optional[str] = None) -> FiniteGroup:
    return close_group(_sl2_generators(q), name=name or f"SL:2:{q}")


def projective_special_linear(q: int, name: Optional[str] = None) -> FiniteGroup:
    name = name or f"PSL:2:{q}"
    order = closed_form_order(CatalogSpec("PSL", (2, q)))
    if order > TABLE_LIMIT:
        if q % 2 == 0:
            # SL2(2^n) has trivial center
            return close_group(_sl2_generators(q), name=name)
        return close_group(_sl2_generators(q, projective=True), name=name)
    SL = build_named(f"SL:2:{q}")
    from .structure import center

    return quotient_group(SL, center(SL), name=name)


# ============================================================================
# Files
# ============================================================================

def _content_lines(text: str) -> List[Tuple[int, str]]:
    out = []
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if stripped:
            out.append((number, stripped))
    return out


def read_table_file(path: Union[str, Path]) -> FiniteGroup:
    """
    Load a Cayley-table file.

    Raises:
        ParseError: malformed file (position = line number)
        ValidationError: the table is not a group
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read table file: {exc.strerror}", None, str(path))
    lines = _content_lines(text)
    if not lines:
        raise ParseError("table file is empty", 1, str(path))
    number, first = lines[0]
    if not _INT.match(first):
        raise ParseError(f"first line must be the order n, got {first!r}", number, str(path))
    n = int(first)
    rows = lines[1:]
    if len(rows) != n:
        line = rows[-1][0] if rows else number
        raise ParseError(f"expected {n} table rows, found {len(rows)}", line, str(path))
    table = []
    for number, row in rows:
        tokens = row.split()
        if len(tokens) != n or not all(_INT.match(t) for t in tokens):
            raise ParseError(f"row must hold {n} non-negative integers", number, str(path))
        table.append([int(t) for t in tokens])
    return group_from_table(np.array(table, dtype=np.int64), name=f"table:{path.name}")


@dataclass
class SemidirectSpec:
    """Contents of a semidirect spec file, verified."""

    h_spec: str
    H: FiniteGroup
    x_order: int
    action: Tuple[int, ...]

    def build(self, name: Optional[str] = None) -> FiniteGroup:
        return semidirect_product(self.H, self.x_order, self.action, name=name)


def _resolve_h(value: str, base: Path, number: int, source: str) -> FiniteGroup:
    family = value.split(":", 1)[0]
    if family in FAMILIES:
        spec = parse_spec(value)
        if spec.family in ("table", "sd") and not Path(spec.path).is_absolute():
            spec = CatalogSpec(spec.family, (), str(base / spec.path), spec.text)
        return build_named(spec)
    candidate = Path(value) if Path(value).is_absolute() else base / value
    if candidate.exists():
        return read_table_file(candidate)
    raise ParseError(f"H must be a catalog spec or a table path, got {value!r}", number, source)


def parse_semidirect_text(text: str, base: Union[str, Path] = ".", source: str = "<string>") -> SemidirectSpec:
    """
    Parse semidirect spec text; relative paths resolve against `base`.

    Raises:
        ParseError: missing or malformed line (position = line number)
        AutomorphismError: the action is not an automorphism of order dividing m
    """
    base = Path(base)
    fields = {}
    for number, line in _content_lines(text):
        keyword, _, value = line.partition(" ")
        if keyword not in ("H", "order", "action"):
            raise ParseError(f"unknown keyword {keyword!r}", number, source)
        if keyword in fields:
            raise ParseError(f"duplicate {keyword!r} line", number, source)
        fields[keyword] = (number, value.strip())
    for keyword in ("H", "order", "action"):
        if keyword not in fields:
            raise ParseError(f"missing {keyword!r} line", None, source)

    number, h_value = fields["H"]
    H = _resolve_h(h_value, base, number, source)
    number, order_value = fields["order"]
    if not _INT.match(order_value) or int(order_value) < 1:
        raise ParseError(f"order must be a positive integer, got {order_value!r}", number, source)
    x_order = int(order_value)
    number, action_value = fields["action"]
    tokens = action_value.split()
    if not all(_INT.match(t) for t in tokens):
        raise ParseError("action must list non-negative integers", number, source)
    action = tuple(int(t) for t in tokens)

    phi = verify_automorphism(H, action)
    current = np.arange(H.order)
    for _ in range(x_order):
        current = phi[current]
    moved = np.flatnonzero(current != np.arange(H.order))
    if moved.size:
        h = int(moved[0])
        raise AutomorphismError(f"action composed {x_order} times is not the identity", (h, int(current[h])))
    return SemidirectSpec(h_value, H, x_order, action)


def parse_semidirect_file(path: Union[str, Path]) -> SemidirectSpec:
    """Read and verify a semidirect spec file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read semidirect file: {exc.strerror}", None, str(path))
    return parse_semidirect_text(text, path.parent, str(path))


def format_semidirect_file(h_spec: str, x_order: int, action: Sequence[int],
                           comment: Optional[str] = None) -> str:
    """Serialise a semidirect spec; parse_semidirect_text reads it back unchanged."""
    lines = []
    if comment:
        lines.extend(f"# {line}" for line in comment.splitlines())
    lines.append(f"H {h_spec}")
    lines.append(f"order {int(x_order)}")
    lines.append("action " + " ".join(str(int(a)) for a in action))
    return "\n".join(lines) + "\n"


# ============================================================================
# Entry point
# ============================================================================

_BUILDERS = {
    "C": lambda s: cyclic(s.params[0], str(s)),
    "D": lambda s: dihedral(s.params[0], str(s)),
    "Q": lambda s: dicyclic(2, str(s)),
    "Dic": lambda s: dicyclic(s.params[0], str(s)),
    "S": lambda s: symmetric(s.params[0], str(s)),
    "A": lambda s: alternating(s.params[0], str(s)),
    "SL": lambda s: special_linear(s.params[1], str(s)),
    "PSL": lambda s: projective_special_linear(s.params[1], str(s)),
    "Ab": lambda s: abelian_group(s.params, str(s)),
    "table": lambda s: read_table_file(s.path),
    "sd": lambda s: parse_semidirect_file(s.path).build(name=str(s)),
}


@lru_cache(maxsize=128)
def _build_cached(spec: CatalogSpec) -> FiniteGroup:
    _check_caps(spec)
    G = _BUILDERS[spec.family](spec)
    expected = closed_form_order(spec)
    if expected is not None and G.order != expected:
        raise ResourceError(f"{spec}: built order {G.order} differs from the formula {expected}")
    logger.debug("built %s (order %d)", spec, G.order)
    return G


def build_named(spec: Union[str, CatalogSpec]) -> FiniteGroup:
    """
    Build a catalog group deterministically (cached per spec).

    Raises:
        ParseError: malformed spec
        ResourceError: parameter beyond the caps
    """
    if isinstance(spec, str):
        spec = parse_spec(spec)
    return _build_cached(spec)


DEFAULT_CATALOG = (
    "C:1", "C:2", "C:6", "C:12", "D:3", "D:4", "D:5", "D:6", "D:7", "D:8", "D:9", "D:12",
    "Q:8", "Dic:3", "S:3", "S:4", "A:4", "A:5", "SL:2:3", "SL:2:5", "PSL:2:7", "Ab:2x2x3",
)
