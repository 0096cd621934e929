"""
Finite groups: construction, canonical element order, and index arithmetic.

A FiniteGroup is a fully enumerated group whose elements are kept in a
canonical list (identity at index 0, the rest sorted by element key). Every
algorithm in the package works on element indices; the payloads are only
touched to build a group or to multiply in groups too large for a table.

Construction paths:
- close_group: Dimino closure over payload generators (Perm, Mat2, Pair)
- group_from_table: validated Cayley-table ingestion (TableIdx elements)
- direct_product / semidirect_product / abelian_group: table products
- quotient_group / SubgroupHandle.as_group: derived groups

Cayley tables (n <= 4096) are filled column by column along a spanning tree
of generator words: if e_j = e_parent * s then column j is column parent
pushed through right multiplication by s. Only the generator permutations
ever touch the payloads.
"""

import logging
import random
from collections import deque
from math import gcd
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .config import ASSOCIATIVITY_EXHAUSTIVE_LIMIT, ASSOCIATIVITY_SAMPLES, CLOSURE_CAP, TABLE_LIMIT
from .elements import Element, Pair, TableIdx, element_key, is_payload
from .errors import AutomorphismError, ResourceError, UsageError, ValidationError

logger = logging.getLogger(__name__)

INDEX_DTYPE = np.int32
_MISSING = object()


# ============================================================================
# Table helpers
# ============================================================================

def _word_tree(n: int, gen_perms: Sequence[np.ndarray]) -> Tuple[List[int], np.ndarray, np.ndarray]:
    """Breadth-first spanning tree of right multiplication by the generators."""
    parent = np.full(n, -1, dtype=np.int64)
    via = np.full(n, -1, dtype=np.int64)
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    order = [0]
    queue = deque([0])
    perms = [np.asarray(p) for p in gen_perms]
    while queue:
        i = queue.popleft()
        for s, perm in enumerate(perms):
            j = int(perm[i])
            if not seen[j]:
                seen[j] = True
                parent[j] = i
                via[j] = s
                order.append(j)
                queue.append(j)
    return order, parent, via


def _table_from_generator_perms(n: int, gen_perms: Sequence[np.ndarray]) -> np.ndarray:
    order, parent, via = _word_tree(n, gen_perms)
    if len(order) != n:
        raise ValidationError(f"generators reach only {len(order)} of {n} elements")
    columns = np.empty((n, n), dtype=INDEX_DTYPE)
    columns[0] = np.arange(n, dtype=INDEX_DTYPE)
    perms = [np.asarray(p, dtype=INDEX_DTYPE) for p in gen_perms]
    for j in order[1:]:
        columns[j] = perms[via[j]][columns[parent[j]]]
    return np.ascontiguousarray(columns.T)


def _spot_check_associativity(G: "FiniteGroup", samples: int = ASSOCIATIVITY_SAMPLES, seed: int = 0) -> None:
    n = G.order
    if n == 1:
        return
    if G.table is not None:
        rng = np.random.default_rng(seed)
        a, b, c = rng.integers(0, n, size=(3, samples))
        T = G.table
        bad = np.flatnonzero(T[T[a, b], c] != T[a, T[b, c]])
        if bad.size:
            k = bad[0]
            raise ValidationError("associativity fails", (int(a[k]), int(b[k]), int(c[k])))
        return
    rng = random.Random(seed)
    for _ in range(min(samples, 64)):
        a, b, c = rng.randrange(n), rng.randrange(n), rng.randrange(n)
        if G.mul(G.mul(a, b), c) != G.mul(a, G.mul(b, c)):
            raise ValidationError("associativity fails", (a, b, c))


# ============================================================================
# FiniteGroup
# ============================================================================

class FiniteGroup:
    """
    A fully enumerated finite group.

    Build instances with close_group, group_from_table and the product
    constructors rather than directly.

    Attributes:
        table: dense n x n index table, or None above the table limit
        name: human-readable descriptor (set by the catalog and constructors)
        caches: fill-once structural results keyed by name
        embeddings: canonical subgroup handles of product factors
        labels: named element indices (for example "x" in a semidirect product)
        projection: for quotient groups, the coset label of each parent index
    """

    def __init__(
        self,
        elements: Sequence[Element],
        table: Optional[np.ndarray] = None,
        generators: Optional[Sequence[int]] = None,
        name: Optional[str] = None,
    ):
        self._elements: List[Element] = list(elements)
        self._index: Dict[Element, int] = {e: i for i, e in enumerate(self._elements)}
        if len(self._index) != len(self._elements):
            raise ValidationError("element list contains duplicates")
        self.table = table
        self.name = name or f"group of order {len(self._elements)}"
        self.caches: Dict[str, object] = {}
        self.embeddings: Dict[str, "SubgroupHandle"] = {}
        self.labels: Dict[str, int] = {}
        self.projection: Optional[np.ndarray] = None
        self._generators = [int(g) for g in generators] if generators is not None else None
        self._right_perms: Dict[int, np.ndarray] = {}
        self._inverses: Optional[np.ndarray] = None

    # --- basic access -------------------------------------------------------

    @property
    def order(self) -> int:
        return len(self._elements)

    def __len__(self) -> int:
        return len(self._elements)

    @property
    def elements(self) -> Tuple[Element, ...]:
        return tuple(self._elements)

    @property
    def is_tabled(self) -> bool:
        return self.table is not None

    def element(self, i: int) -> Element:
        return self._elements[i]

    def index(self, element: Element) -> int:
        """Index of an element; UsageError when it is not in the group."""
        try:
            return self._index[element]
        except (KeyError, TypeError):
            raise UsageError(f"{element} is not an element of {self.name}")

    def __contains__(self, element: Element) -> bool:
        return element in self._index

    def cached(self, key: str, compute: Callable[[], object]):
        """Fill-once cache; concurrent fills compute equal values."""
        value = self.caches.get(key, _MISSING)
        if value is _MISSING:
            value = compute()
            value = self.caches.setdefault(key, value)
        return value

    # --- arithmetic on indices ----------------------------------------------

    def mul(self, a: int, b: int) -> int:
        if self.table is not None:
            return int(self.table[a, b])
        return self._index[self._elements[a] * self._elements[b]]

    def multiply(self, a: Element, b: Element) -> Element:
        return self._elements[self.mul(self.index(a), self.index(b))]

    @property
    def inverses(self) -> np.ndarray:
        if self._inverses is None:
            if self.table is not None:
                inv = np.argmax(self.table == 0, axis=1).astype(INDEX_DTYPE)
            else:
                inv = np.array([self._index[e.inverse()] for e in self._elements], dtype=INDEX_DTYPE)
            self._inverses = inv
        return self._inverses

    def inv(self, a: int) -> int:
        return int(self.inverses[a])

    def power(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        result = 0
        while e:
            if e & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            e >>= 1
        return result

    def conjugate(self, h: int, g: int) -> int:
        """h^g = g^-1 h g."""
        return self.mul(self.mul(self.inv(g), h), g)

    def commutator(self, a: int, b: int) -> int:
        """[a, b] = a^-1 b^-1 a b."""
        return self.mul(self.mul(self.inv(a), self.inv(b)), self.mul(a, b))

    def right_perm(self, s: int) -> np.ndarray:
        """Array R with R[i] = index(e_i * e_s)."""
        if self.table is not None:
            return self.table[:, s]
        perm = self._right_perms.get(s)
        if perm is None:
            g = self._elements[s]
            perm = np.array([self._index[e * g] for e in self._elements], dtype=INDEX_DTYPE)
            self._right_perms[s] = perm
        return perm

    def conj_perm(self, g: int) -> np.ndarray:
        """Array C with C[i] = index(g^-1 e_i g)."""
        if self.table is not None:
            return self.table[self.table[self.inv(g)], g]
        key = -1 - g
        perm = self._right_perms.get(key)
        if perm is None:
            x = self._elements[g]
            x_inv = x.inverse()
            perm = np.array([self._index[x_inv * e * x] for e in self._elements], dtype=INDEX_DTYPE)
            self._right_perms[key] = perm
        return perm

    def element_orders(self) -> np.ndarray:
        """Order of every element, by index."""
        return self.cached("element_orders", self._compute_element_orders)

    def _compute_element_orders(self) -> np.ndarray:
        n = self.order
        orders = np.zeros(n, dtype=np.int64)
        if self.table is not None:
            idx = np.arange(n)
            cur = idx.copy()
            k = 1
            while True:
                hit = (cur == 0) & (orders == 0)
                orders[hit] = k
                if orders.all():
                    return orders
                cur = self.table[cur, idx]
                k += 1
        for i in range(n):
            if orders[i]:
                continue
            powers = [i]
            while powers[-1] != 0:
                powers.append(self.mul(powers[-1], i))
            o = len(powers)
            for k, p in enumerate(powers, start=1):
                if not orders[p]:
                    orders[p] = o // gcd(k, o)
        return orders

    def order_of(self, a: int) -> int:
        if "element_orders" in self.caches:
            return int(self.caches["element_orders"][a])
        k, cur = 1, a
        while cur != 0:
            cur = self.mul(cur, a)
            k += 1
        return k

    # --- subgroup generation ------------------------------------------------

    def closure_of(self, indices: Iterable[int]) -> np.ndarray:
        """Sorted member indices of the subgroup generated by the given indices."""
        gens = sorted({int(g) for g in indices} - {0})
        n = self.order
        if self.table is not None:
            mask = np.zeros(n, dtype=bool)
            mask[0] = True
            columns = [self.table[:, g] for g in gens]
            frontier = np.array([0], dtype=np.int64)
            while frontier.size and columns:
                cand = np.unique(np.concatenate([c[frontier] for c in columns]))
                cand = cand[~mask[cand]]
                mask[cand] = True
                frontier = cand
            return np.flatnonzero(mask)
        seen = {0}
        queue = deque([0])
        payloads = [self._elements[g] for g in gens]
        half = n // 2
        while queue:
            e = self._elements[queue.popleft()]
            for s in payloads:
                j = self._index[e * s]
                if j not in seen:
                    seen.add(j)
                    queue.append(j)
            # a subgroup with more than half the elements is the whole group
            if len(seen) > half:
                return np.arange(n, dtype=np.int64)
        return np.array(sorted(seen), dtype=np.int64)

    def greedy_generators(self, candidates: Iterable[int]) -> List[int]:
        """First-fit generators of the subgroup generated by the candidates."""
        gens: List[int] = []
        mask = np.zeros(self.order, dtype=bool)
        mask[0] = True
        for c in candidates:
            c = int(c)
            if not mask[c]:
                gens.append(c)
                mask[:] = False
                mask[self.closure_of(gens)] = True
        return gens

    @property
    def generators(self) -> List[int]:
        if self._generators is None:
            self._generators = self.greedy_generators(range(self.order))
        return list(self._generators)

    @property
    def whole(self) -> "SubgroupHandle":
        def build():
            handle = SubgroupHandle(self, range(self.order), verify=False)
            handle._gens = self.generators
            return handle
        return self.cached("whole", build)

    @property
    def trivial(self) -> "SubgroupHandle":
        return self.cached("trivial", lambda: SubgroupHandle(self, [0], verify=False))

    def subgroup(self, members: Iterable[int], verify: bool = True) -> "SubgroupHandle":
        return SubgroupHandle(self, members, verify=verify)

    # --- dunder -------------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteGroup):
            return NotImplemented
        if self is other:
            return True
        if self._elements != other._elements:
            return False
        if self.table is not None and other.table is not None:
            return bool(np.array_equal(self.table, other.table))
        return True

    def __hash__(self) -> int:
        return hash((self.order, self._elements[-1]))

    def __repr__(self) -> str:
        tabled = "tabled" if self.table is not None else "untabled"
        return f"<FiniteGroup {self.name} order={self.order} {tabled}>"


# ============================================================================
# SubgroupHandle
# ============================================================================

class SubgroupHandle:
    """
    A subgroup of a FiniteGroup, identified by its sorted member indices.

    Handles built from untrusted member sets are verified (identity present,
    closed under multiplication, Lagrange); handles produced by closures are
    trusted.
    """

    __slots__ = ("parent", "_array", "_mask", "_key", "_bits", "_gens")

    def __init__(self, parent: FiniteGroup, members: Iterable[int], verify: bool = True):
        self.parent = parent
        arr = np.unique(np.fromiter((int(m) for m in members), dtype=np.int64))
        self._array = arr
        self._mask = None
        self._key = None
        self._bits = None
        self._gens = None
        if verify:
            self._verify()

    def _verify(self) -> None:
        G, arr = self.parent, self._array
        if arr.size == 0 or arr[0] != 0:
            raise ValidationError("subgroup must contain the identity (index 0)")
        if arr[-1] >= G.order:
            raise ValidationError("subgroup member out of range", (int(arr[-1]),))
        if G.order % arr.size:
            raise ValidationError(f"subset of size {arr.size} violates Lagrange in order {G.order}")
        if G.table is not None:
            products = G.table[np.ix_(arr, arr)]
            bad = np.argwhere(~self.mask[products])
            if bad.size:
                a, b = bad[0]
                raise ValidationError("subset is not closed", (int(arr[a]), int(arr[b])))
            return
        closed = G.closure_of(self.gens)
        if closed.size != arr.size:
            raise ValidationError("subset is not closed under multiplication")

    # --- views --------------------------------------------------------------

    @property
    def array(self) -> np.ndarray:
        return self._array

    @property
    def members(self) -> Tuple[int, ...]:
        return tuple(int(i) for i in self._array)

    @property
    def order(self) -> int:
        return int(self._array.size)

    def __len__(self) -> int:
        return int(self._array.size)

    def __iter__(self) -> Iterator[int]:
        return (int(i) for i in self._array)

    def __contains__(self, index: int) -> bool:
        return 0 <= index < self.parent.order and bool(self.mask[index])

    @property
    def mask(self) -> np.ndarray:
        if self._mask is None:
            mask = np.zeros(self.parent.order, dtype=bool)
            mask[self._array] = True
            self._mask = mask
        return self._mask

    @property
    def key(self) -> bytes:
        """Canonical element-set key (packed membership bits)."""
        if self._key is None:
            self._key = np.packbits(self.mask).tobytes()
        return self._key

    @property
    def bits(self) -> int:
        if self._bits is None:
            self._bits = int.from_bytes(self.key, "big")
        return self._bits

    @property
    def gens(self) -> List[int]:
        if self._gens is None:
            self._gens = self.parent.greedy_generators(self._array)
        return list(self._gens)

    @property
    def is_trivial(self) -> bool:
        return self._array.size == 1

    @property
    def is_whole(self) -> bool:
        return self._array.size == self.parent.order

    def sort_key(self) -> Tuple[int, Tuple[int, ...]]:
        return (self.order, self.members)

    # --- relations ----------------------------------------------------------

    def issubset(self, other: "SubgroupHandle") -> bool:
        return self.bits & ~other.bits == 0

    def intersection(self, other: "SubgroupHandle") -> "SubgroupHandle":
        return SubgroupHandle(self.parent, self._array[other.mask[self._array]], verify=False)

    def as_group(self, name: Optional[str] = None) -> FiniteGroup:
        """
        Materialise the subgroup as a standalone FiniteGroup.

        Canonical order is preserved (member i of the result is the i-th
        smallest parent index), so closing the same payloads reproduces it.
        The result's `inclusion` attribute maps local indices to parent indices.

        Raises:
            ResourceError: when the subgroup is larger than the table limit
        """
        G, arr = self.parent, self._array
        m = arr.size
        if m > TABLE_LIMIT:
            raise ResourceError(f"subgroup of order {m} exceeds the table limit {TABLE_LIMIT}")
        pos = np.full(G.order, -1, dtype=np.int64)
        pos[arr] = np.arange(m)
        local_gens = [int(pos[g]) for g in self.gens]
        if G.table is not None:
            table = pos[G.table[np.ix_(arr, arr)]].astype(INDEX_DTYPE)
        else:
            perms = [pos[[G.mul(int(a), g) for a in arr]] for g in self.gens]
            table = _table_from_generator_perms(m, perms)
        elements = [G.element(int(i)) for i in arr]
        if elements and isinstance(elements[0], TableIdx):
            elements = [TableIdx(i) for i in range(m)]
        sub = FiniteGroup(elements, table=table, generators=local_gens,
                          name=name or f"subgroup of order {m} in {G.name}")
        sub.inclusion = arr
        return sub

    # --- dunder -------------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, SubgroupHandle):
            return NotImplemented
        return self.parent is other.parent and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        preview = ", ".join(map(str, self.members[:8]))
        more = ", ..." if self.order > 8 else ""
        return f"<SubgroupHandle order={self.order} of {self.parent.name}: {{{preview}{more}}}>"


# ============================================================================
# Constructors
# ============================================================================

def _dimino(identity: Element, generators: Sequence[Element]) -> List[Element]:
    """Dimino closure: extend by one generator at a time, completing right cosets."""
    elements = [identity]
    seen = {identity}
    used: List[Element] = []
    for s in generators:
        if s in seen:
            continue
        used.append(s)
        block = list(elements)
        size = len(block)

        def add_coset(g: Element) -> None:
            coset = [h * g for h in block]
            elements.extend(coset)
            seen.update(coset)
            if len(elements) > CLOSURE_CAP:
                raise ResourceError(f"closure exceeds the cap of {CLOSURE_CAP} elements")

        add_coset(s)
        rep_pos = size
        while rep_pos < len(elements):
            rep = elements[rep_pos]
            for t in used:
                e = rep * t
                if e not in seen:
                    add_coset(e)
            rep_pos += size
    return elements


def close_group(generators: Sequence[Element], name: Optional[str] = None) -> FiniteGroup:
    """
    Close a list of payload generators into a FiniteGroup.

    Args:
        generators: Perm, Mat2 or Pair elements sharing one ambient structure
        name: optional descriptor

    Returns:
        The generated group in canonical order, tabled when n <= 4096

    Raises:
        UsageError: empty list, mixed variants or table elements
        ResourceError: closure beyond 100000 elements
    """
    gens = list(generators)
    if not gens:
        raise UsageError("close_group needs at least one generator")
    ambients = {g.ambient() for g in gens}
    if len(ambients) > 1:
        raise UsageError(f"generators mix representations: {sorted(map(str, ambients))}")
    if not is_payload(gens[0]):
        raise UsageError("table elements cannot be closed; use group_from_table")

    identity = gens[0] * gens[0].inverse()
    elements = _dimino(identity, gens)
    ordered = [identity] + sorted((e for e in elements if e != identity), key=element_key)
    G = FiniteGroup(ordered, name=name)
    G._generators = sorted({G.index(g) for g in gens} - {0})

    n = G.order
    if n <= TABLE_LIMIT:
        perms = [G.right_perm(s) for s in G._generators]
        G.table = _table_from_generator_perms(n, perms)
        G._right_perms.clear()
    _spot_check_associativity(G)
    logger.debug("closed %s: order %d", G.name, n)
    return G


def group_from_table(table, name: Optional[str] = None) -> FiniteGroup:
    """
    Build a group from a Cayley table after validating the axioms.

    Args:
        table: n x n matrix of 0-based indices; row i, column j holds e_i * e_j
        name: optional descriptor

    Returns:
        FiniteGroup over TableIdx elements

    Raises:
        ValidationError: naming the failing row, pair or triple
    """
    T = np.asarray(table)
    if T.ndim != 2 or T.shape[0] != T.shape[1] or T.shape[0] == 0:
        raise ValidationError(f"table must be a non-empty square matrix, got shape {T.shape}")
    n = T.shape[0]
    if not np.issubdtype(T.dtype, np.integer):
        raise ValidationError("table entries must be integers")
    if T.min() < 0 or T.max() >= n:
        bad = np.argwhere((T < 0) | (T >= n))[0]
        raise ValidationError("table entry out of range", (int(bad[0]), int(bad[1])))
    T = T.astype(INDEX_DTYPE)
    idx = np.arange(n)
    if not np.array_equal(T[0], idx):
        raise ValidationError("index 0 is not a left identity", (int(np.flatnonzero(T[0] != idx)[0]),))
    if not np.array_equal(T[:, 0], idx):
        raise ValidationError("index 0 is not a right identity", (int(np.flatnonzero(T[:, 0] != idx)[0]),))
    has_inverse = (T == 0).any(axis=1)
    if not has_inverse.all():
        raise ValidationError("element has no inverse", (int(np.flatnonzero(~has_inverse)[0]),))

    if n <= ASSOCIATIVITY_EXHAUSTIVE_LIMIT:
        for a in range(n):
            lhs = T[T[a]]          # (a*b)*c at [b, c]
            rhs = T[a][T]          # a*(b*c) at [b, c]
            bad = np.argwhere(lhs != rhs)
            if bad.size:
                b, c = bad[0]
                raise ValidationError("associativity fails", (a, int(b), int(c)))
    G = FiniteGroup([TableIdx(i) for i in range(n)], table=T, name=name)
    if n > ASSOCIATIVITY_EXHAUSTIVE_LIMIT:
        _spot_check_associativity(G)
    return G


def direct_product(A: FiniteGroup, B: FiniteGroup, name: Optional[str] = None) -> FiniteGroup:
    """
    A x B on Pair(TableIdx(a), TableIdx(b)) elements, index a*|B| + b.

    Embeddings "left" and "right" are exposed on the result.
    """
    nA, nB = A.order, B.order
    N = nA * nB
    if N > TABLE_LIMIT or A.table is None or B.table is None:
        raise ResourceError(f"direct product of order {N} exceeds the table limit {TABLE_LIMIT}")
    a = np.arange(N) // nB
    b = np.arange(N) % nB
    table = (A.table[a[:, None], a[None, :]].astype(np.int64) * nB
             + B.table[b[:, None], b[None, :]]).astype(INDEX_DTYPE)
    elements = [Pair(TableIdx(int(i)), TableIdx(int(j))) for i, j in zip(a, b)]
    G = FiniteGroup(elements, table=table, name=name or f"{A.name} x {B.name}")
    G.embeddings = {
        "left": SubgroupHandle(G, np.arange(nA) * nB, verify=False),
        "right": SubgroupHandle(G, np.arange(nB), verify=False),
    }
    return G


def verify_automorphism(H: FiniteGroup, action: Sequence[int]) -> np.ndarray:
    """
    Check that an index map is an automorphism of a tabled group.

    Raises:
        AutomorphismError: naming the first pair (a, b) with phi(ab) != phi(a)phi(b)
    """
    n = H.order
    phi = np.asarray(list(action), dtype=np.int64)
    if phi.shape != (n,):
        raise AutomorphismError(f"action must list {n} images, got {phi.size}")
    if phi.min() < 0 or phi.max() >= n or np.unique(phi).size != n:
        raise AutomorphismError("action is not a bijection of the element indices")
    if H.table is None:
        raise ResourceError("automorphisms are verified on tabled groups only")
    T = H.table
    bad = np.argwhere(phi[T] != T[phi[:, None], phi[None, :]])
    if bad.size:
        a, b = bad[0]
        raise AutomorphismError("action is not multiplicative", (int(a), int(b)))
    return phi


def semidirect_product(H: FiniteGroup, x_order: int, action: Sequence[int],
                       name: Optional[str] = None) -> FiniteGroup:
    """
    Form <x> x| H where x has order x_order and acts by h^x = action(h).

    Elements are Pair(TableIdx(i), TableIdx(h)) standing for x^i h, at index
    i*|H| + h, multiplied by (i, h)(j, k) = (i + j mod m, action^j(h) k).
    H keeps its canonical indices inside the product. The result carries
    embeddings "x" and "H" and the label "x" for the acting element.

    Raises:
        AutomorphismError: action not an automorphism, or action^m not the identity
        ResourceError: product beyond the table limit
        UsageError: non-positive x_order
    """
    if x_order < 1:
        raise UsageError(f"x_order must be positive, got {x_order}")
    n, m = H.order, int(x_order)
    N = n * m
    if N > TABLE_LIMIT:
        raise ResourceError(f"semidirect product of order {N} exceeds the table limit {TABLE_LIMIT}")
    phi = verify_automorphism(H, action)

    powers = [np.arange(n, dtype=np.int64)]
    for _ in range(1, m):
        powers.append(phi[powers[-1]])
    full_turn = phi[powers[-1]]
    moved = np.flatnonzero(full_turn != np.arange(n))
    if moved.size:
        h = int(moved[0])
        raise AutomorphismError(f"action composed {m} times is not the identity", (h, int(full_turn[h])))

    T = H.table.astype(np.int64)
    rows = np.arange(N)
    shift, hs = rows // n, rows % n
    table = np.empty((N, N), dtype=INDEX_DTYPE)
    for j in range(m):
        block = ((shift + j) % m)[:, None] * n + T[powers[j][hs]]
        table[:, j * n:(j + 1) * n] = block
    elements = [Pair(TableIdx(int(i)), TableIdx(int(h))) for i, h in zip(shift, hs)]
    G = FiniteGroup(elements, table=table, name=name or f"C{m} x| {H.name}")
    G.embeddings = {
        "x": SubgroupHandle(G, np.arange(m) * n, verify=False),
        "H": SubgroupHandle(G, np.arange(n), verify=False),
    }
    G.labels = {"x": n if m > 1 else 0}
    _spot_check_associativity(G)
    return G


def extend_to_homomorphism(G: FiniteGroup, images: Mapping[int, int],
                           target: Optional[FiniteGroup] = None) -> np.ndarray:
    """
    Extend generator images to an index map G -> target and verify it.

    Args:
        G: source group
        images: generator index -> image index in target
        target: codomain (default G, for endomorphisms)

    Returns:
        Array phi with phi[i] the image of element i

    Raises:
        UsageError: the given generators do not generate G
        AutomorphismError: the images do not respect the relations of G
    """
    target = target if target is not None else G
    gens = [int(g) for g in images]
    imgs = [int(images[g]) for g in gens]
    perms = [G.right_perm(s) for s in gens]
    order, parent, via = _word_tree(G.order, perms)
    if len(order) != G.order:
        raise UsageError(f"images cover generators of a subgroup of order {len(order)}, not {G.order}")
    phi = np.zeros(G.order, dtype=np.int64)
    for j in order[1:]:
        phi[j] = target.mul(int(phi[parent[j]]), imgs[via[j]])
    # consistency with right multiplication by every generator implies phi(ab) = phi(a)phi(b)
    for s, perm, img in zip(gens, perms, imgs):
        if target.table is not None:
            bad = np.flatnonzero(phi[np.asarray(perm)] != target.table[phi, img])
        else:
            bad = np.array([a for a in range(G.order)
                            if phi[perm[a]] != target.mul(int(phi[a]), img)], dtype=np.int64)
        if bad.size:
            raise AutomorphismError("generator images do not extend to a homomorphism", (int(bad[0]), s))
    return phi


def quotient_group(G: FiniteGroup, N: SubgroupHandle, name: Optional[str] = None) -> FiniteGroup:
    """
    The quotient G/N as a coset Cayley table over TableIdx elements.

    Cosets are labelled in order of their smallest member, so the identity
    coset is label 0. The result's `projection` maps each index of G to its
    coset label.

    Raises:
        UsageError: N is not a normal subgroup of G
        ResourceError: |G/N| exceeds the table limit
    """
    if N.parent is not G:
        raise UsageError("N must be a subgroup handle of G")
    for g in G.generators:
        conj = G.conj_perm(g)
        if not N.mask[conj[N.array]].all():
            raise UsageError(f"subgroup of order {N.order} is not normal in {G.name}")
    index = G.order // N.order
    if index > TABLE_LIMIT:
        raise ResourceError(f"quotient of order {index} exceeds the table limit {TABLE_LIMIT}")

    labels = np.full(G.order, -1, dtype=np.int64)
    reps: List[int] = []
    for g in range(G.order):
        if labels[g] != -1:
            continue
        if G.table is not None:
            coset = G.table[g, N.array]
        else:
            coset = [G.mul(g, int(x)) for x in N.array]
        labels[coset] = len(reps)
        reps.append(g)

    q_gens = sorted({int(labels[s]) for s in G.generators} - {0})
    perms = [np.array([labels[G.mul(r, s)] for r in reps], dtype=np.int64)
             for s in G.generators if labels[s] != 0]
    table = _table_from_generator_perms(index, perms) if perms else np.zeros((1, 1), dtype=INDEX_DTYPE)
    Q = FiniteGroup([TableIdx(c) for c in range(index)], table=table, generators=q_gens,
                    name=name or f"{G.name} / N{N.order}")
    Q.projection = labels
    return Q


def abelian_group(invariants: Sequence[int], name: Optional[str] = None) -> FiniteGroup:
    """
    Z_n1 x ... x Z_nk as a Cayley-table group.

    Element index is the mixed-radix number of its coordinate vector, first
    factor most significant.
    """
    invs = [int(n) for n in invariants]
    if any(n < 1 for n in invs):
        raise UsageError(f"cyclic factor orders must be positive, got {invs}")
    N = int(np.prod(invs)) if invs else 1
    if N > TABLE_LIMIT:
        raise ResourceError(f"abelian group of order {N} exceeds the table limit {TABLE_LIMIT}")
    strides = []
    acc = 1
    for n in reversed(invs):
        strides.append(acc)
        acc *= n
    strides.reverse()
    idx = np.arange(N)
    table = np.zeros((N, N), dtype=np.int64)
    for n, stride in zip(invs, strides):
        digit = (idx // stride) % n
        table += ((digit[:, None] + digit[None, :]) % n) * stride
    label = "x".join(map(str, invs)) or "1"
    return FiniteGroup([TableIdx(i) for i in range(N)], table=table.astype(INDEX_DTYPE),
                       generators=[s for n, s in zip(invs, strides) if n > 1],
                       name=name or f"Ab:{label}")


def element_order(g: Element, G: FiniteGroup) -> int:
    """
    Least m >= 1 with g^m = identity.

    Raises:
        UsageError: g is not an element of G
    """
    return G.order_of(G.index(g))
