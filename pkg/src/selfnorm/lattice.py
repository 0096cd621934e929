"""
Subgroup enumeration.

all_subgroups builds the full subgroup lattice bottom-up:

1. every cyclic subgroup of prime-power order (all conjugates included);
2. class representatives are joined with each of those cyclic subgroups,
   layer by layer, until no new subgroup appears.

Every subgroup is generated by elements of prime-power order, and a join of
a conjugate is a conjugate of the join, so representatives suffice. Each new
subgroup is expanded to its full conjugacy class on discovery (one vectorised
conjugation of its members by every element), which also yields its
normalizer order. Subgroups are deduplicated by their packed element-set key.

invariant_subgroups lists the subgroups of a normal subgroup that a given
element normalises, by joining the subgroups generated by x-orbits.
MaskedLattice keeps one group's lattice as a boolean matrix so sweeps over
many actions on that group filter it instead of rebuilding it.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from sympy import factorint

from .config import Settings
from .elements import Element
from .errors import BudgetRefusal, UsageError
from .group import FiniteGroup, SubgroupHandle
from .parallel import ordered_map
from .structure import join, subgroup_generated

logger = logging.getLogger(__name__)

EXACT = "exact"
TRUNCATED = "truncated"


@dataclass
class SubgroupLattice:
    """
    Subgroups of a group in canonical (order, members) order.

    Attributes:
        parent: the group
        all: every subgroup found (all of them when exact)
        class_reps: (representative, class size) per conjugacy class
        maximal: maximal subgroups (every conjugate)
        budget_state: "exact" or "truncated"
        joins: candidate joins performed
    """

    parent: FiniteGroup
    all: List[SubgroupHandle]
    class_reps: List[Tuple[SubgroupHandle, int]]
    maximal: List[SubgroupHandle]
    budget_state: str = EXACT
    joins: int = 0
    class_index: Dict[bytes, int] = field(default_factory=dict, repr=False)

    @property
    def truncated(self) -> bool:
        return self.budget_state == TRUNCATED

    def census(self) -> Dict[int, int]:
        """Number of subgroups of each order."""
        counts: Dict[int, int] = {}
        for H in self.all:
            counts[H.order] = counts.get(H.order, 0) + 1
        return dict(sorted(counts.items()))

    def class_of(self, H: SubgroupHandle) -> Tuple[SubgroupHandle, int]:
        """Representative and class size of the class containing H."""
        return self.class_reps[self.class_index[H.key]]

    def normalizer_order(self, H: SubgroupHandle) -> int:
        return self.parent.order // self.class_of(H)[1]


# ============================================================================
# Conjugacy classes of subgroups
# ============================================================================

def _conjugate_rows(G: FiniteGroup, H: SubgroupHandle) -> np.ndarray:
    """Sorted member arrays of the distinct conjugates of H, lexicographic."""
    members = H.array
    if G.table is not None:
        T = G.table
        left = T[G.inverses[:, None], members[None, :]]
        rows = T[left, np.arange(G.order)[:, None]]
    else:
        rows = np.array([[G.conjugate(int(h), g) for h in members] for g in range(G.order)])
    rows = np.sort(rows, axis=1)
    return np.unique(rows, axis=0)


def subgroup_class(G: FiniteGroup, H: SubgroupHandle) -> Tuple[List[SubgroupHandle], int]:
    """
    The conjugacy class of H and the order of N_G(H).

    Returns:
        (conjugates in canonical order, |N_G(H)| = |G| / class size)
    """
    if H.parent is not G:
        raise UsageError("subgroup belongs to a different group")
    rows = _conjugate_rows(G, H)
    conjugates = [SubgroupHandle(G, row, verify=False) for row in rows]
    return conjugates, G.order // len(conjugates)


def _prime_power_cyclics(G: FiniteGroup) -> List[SubgroupHandle]:
    orders = G.element_orders()
    seen: Dict[bytes, SubgroupHandle] = {}
    covered = np.zeros(G.order, dtype=bool)
    for g in range(1, G.order):
        if covered[g] or len(factorint(int(orders[g]))) != 1:
            continue
        C = subgroup_generated(G, [g])
        seen.setdefault(C.key, C)
        # generators of C are exactly its elements of full order
        covered[C.array[orders[C.array] == orders[g]]] = True
    return sorted(seen.values(), key=SubgroupHandle.sort_key)


# ============================================================================
# Full lattice
# ============================================================================

class _LatticeBuilder:
    def __init__(self, G: FiniteGroup, settings: Settings):
        self.G = G
        self.settings = settings
        self.found: Dict[bytes, SubgroupHandle] = {}
        self.class_index: Dict[bytes, int] = {}
        self.classes: List[Tuple[SubgroupHandle, int]] = []
        self.joins = 0
        self.truncated = False

    def register(self, H: SubgroupHandle) -> Optional[SubgroupHandle]:
        """Record H with its whole class; return the class representative if new."""
        if H.key in self.found:
            return None
        conjugates, _ = subgroup_class(self.G, H)
        rep = conjugates[0]
        k = len(self.classes)
        self.classes.append((rep, len(conjugates)))
        for C in conjugates:
            self.found[C.key] = C
            self.class_index[C.key] = k
        return rep

    def build(self) -> SubgroupLattice:
        G = self.G
        self.register(G.trivial)
        atoms = _prime_power_cyclics(G)
        frontier = [rep for rep in (self.register(C) for C in atoms) if rep is not None]
        logger.debug("%s: %d prime-power cyclic subgroups", G.name, len(atoms))

        while frontier and not self.truncated:
            fresh: List[SubgroupHandle] = []
            for R in frontier:
                candidates = [C for C in atoms if not C.issubset(R)]
                if self.joins + len(candidates) > self.settings.max_joins:
                    self.truncated = True
                    break
                self.joins += len(candidates)
                joined = ordered_map(lambda C: join(R, C), candidates, self.settings.parallel)
                for J in joined:
                    rep = self.register(J)
                    if rep is not None:
                        fresh.append(rep)
            frontier = fresh

        ordered = sorted(self.classes, key=lambda rc: rc[0].sort_key())
        renumber = {id(rc[0]): i for i, rc in enumerate(ordered)}
        old_to_new = {k: renumber[id(rc[0])] for k, rc in enumerate(self.classes)}
        class_index = {key: old_to_new[k] for key, k in self.class_index.items()}
        subgroups = sorted(self.found.values(), key=SubgroupHandle.sort_key)
        maximal = [] if self.truncated else _maximal_from_classes(G, subgroups, ordered, class_index)
        state = TRUNCATED if self.truncated else EXACT
        return SubgroupLattice(G, subgroups, ordered, maximal, state, self.joins, class_index)


def _maximal_from_classes(G: FiniteGroup, subgroups: Sequence[SubgroupHandle],
                          classes: Sequence[Tuple[SubgroupHandle, int]],
                          class_index: Dict[bytes, int]) -> List[SubgroupHandle]:
    proper = [H for H in subgroups if not H.is_whole]
    maximal_classes = set()
    for k, (rep, _) in enumerate(classes):
        if rep.is_whole:
            continue
        m = rep.order
        above = (K for K in proper if K.order > m and K.order % m == 0)
        if not any(rep.issubset(K) for K in above):
            maximal_classes.add(k)
    return [H for H in proper if class_index[H.key] in maximal_classes]


def all_subgroups(G: FiniteGroup, settings: Optional[Settings] = None) -> SubgroupLattice:
    """
    The subgroup lattice of G.

    Exact when |G| <= settings.budget and the candidate joins stay within
    settings.max_joins; otherwise a truncated lattice is returned and the
    deciders refuse to certify from it.
    """
    settings = settings or Settings()
    key = f"lattice:{settings.budget}:{settings.max_joins}"

    def compute() -> SubgroupLattice:
        if G.order > settings.budget:
            logger.info("lattice: %s has order %d > budget %d, truncated", G.name, G.order, settings.budget)
            return SubgroupLattice(G, [G.trivial, G.whole] if G.order > 1 else [G.whole],
                                   [], [], TRUNCATED, 0)
        lattice = _LatticeBuilder(G, settings).build()
        if lattice.truncated:
            logger.info("lattice: %s truncated after %d joins", G.name, lattice.joins)
        else:
            logger.info("lattice: %d subgroups in %d classes (%s)",
                        len(lattice.all), len(lattice.class_reps), G.name)
        return lattice

    return G.cached(key, compute)


def maximal_subgroups(G: FiniteGroup, settings: Optional[Settings] = None) -> List[SubgroupHandle]:
    """
    Proper subgroups maximal under inclusion.

    Raises:
        BudgetRefusal: the lattice is truncated
    """
    lattice = all_subgroups(G, settings)
    if lattice.truncated:
        raise BudgetRefusal(f"lattice of {G.name} is truncated; maximal subgroups unavailable")
    return list(lattice.maximal)


# ============================================================================
# x-invariant subgroups
# ============================================================================

def _resolve_element(G: FiniteGroup, x: Union[int, Element]) -> int:
    if isinstance(x, (int, np.integer)):
        if not 0 <= int(x) < G.order:
            raise UsageError(f"element index {x} out of range for {G.name}")
        return int(x)
    return G.index(x)


def invariant_subgroups(H: Union[FiniteGroup, SubgroupHandle], x: Union[int, Element]) -> List[SubgroupHandle]:
    """
    All subgroups K of H with K^x = K, in canonical order.

    Args:
        H: a subgroup handle (or a whole group) normalised by x
        x: element of the ambient group, as index or ConcreteElement

    Raises:
        UsageError: x does not normalise H
    """
    if isinstance(H, FiniteGroup):
        H = H.whole
    G = H.parent
    xi = _resolve_element(G, x)
    sigma = G.conj_perm(xi)
    if not H.mask[sigma[H.array]].all():
        raise UsageError("x does not normalise H")

    orders = G.element_orders()
    atoms: Dict[bytes, SubgroupHandle] = {}
    covered = np.zeros(G.order, dtype=bool)
    for h in H.array:
        if h == 0 or covered[h] or len(factorint(int(orders[h]))) != 1:
            continue
        orbit = [int(h)]
        nxt = int(sigma[h])
        while nxt != orbit[0]:
            orbit.append(nxt)
            nxt = int(sigma[nxt])
        covered[orbit] = True
        A = subgroup_generated(G, orbit)
        atoms.setdefault(A.key, A)

    atom_list = sorted(atoms.values(), key=SubgroupHandle.sort_key)
    found: Dict[bytes, SubgroupHandle] = {G.trivial.key: G.trivial}
    found.update(atoms)
    frontier = list(atom_list)
    while frontier:
        fresh = []
        for A in frontier:
            for B in atom_list:
                if B.issubset(A):
                    continue
                J = join(A, B)
                if J.key not in found:
                    found[J.key] = J
                    fresh.append(J)
        frontier = fresh
    return sorted(found.values(), key=SubgroupHandle.sort_key)


# ============================================================================
# A lattice reused across many products
# ============================================================================

def positions(H: SubgroupHandle, indices: np.ndarray) -> np.ndarray:
    """Positions in H.array of parent indices that lie in H (any shape)."""
    return np.searchsorted(H.array, indices)


@dataclass
class MaskedLattice:
    """
    Every subgroup of a group A as a row of a boolean matrix.

    Columns are the positions 0..|A|-1, rows are in canonical order. A
    product that keeps A's indices for its copy H of A (semidirect_product
    does) reads the rows as subgroups of H, so one lattice serves every
    action in a sweep.
    """

    masks: np.ndarray
    orders: np.ndarray

    @classmethod
    def of(cls, A: FiniteGroup, settings: Optional[Settings] = None) -> "MaskedLattice":
        """
        Raises:
            BudgetRefusal: the lattice of A is truncated
        """
        lattice = all_subgroups(A, settings)
        if lattice.truncated:
            raise BudgetRefusal(f"lattice of {A.name} is truncated")
        masks = np.stack([K.mask for K in lattice.all])
        return cls(masks, masks.sum(axis=1))

    def __len__(self) -> int:
        return self.masks.shape[0]

    @property
    def width(self) -> int:
        return self.masks.shape[1]

    def invariant_rows(self, sigma: np.ndarray) -> np.ndarray:
        """Rows K with sigma(K) = K, for a permutation sigma of the positions."""
        return np.flatnonzero((self.masks[:, sigma] == self.masks).all(axis=1))

    def handle(self, H: SubgroupHandle, row: int) -> SubgroupHandle:
        """Row as a subgroup of H's parent."""
        if H.order != self.width:
            raise UsageError(f"lattice has width {self.width}, subgroup has order {H.order}")
        return SubgroupHandle(H.parent, H.array[self.masks[row]], verify=False)


# ============================================================================
# Independent recount
# ============================================================================

def naive_subgroup_count(G: FiniteGroup) -> Dict[int, int]:
    """
    Number of subgroups of each order, by joining cyclic subgroups until no
    new subgroup appears. Shares nothing with all_subgroups beyond closure.
    """
    cyclic: Dict[bytes, SubgroupHandle] = {}
    for g in range(G.order):
        C = subgroup_generated(G, [g])
        cyclic.setdefault(C.key, C)
    found = dict(cyclic)
    frontier = list(cyclic.values())
    while frontier:
        fresh = []
        for A in frontier:
            for B in cyclic.values():
                J = join(A, B)
                if J.key not in found:
                    found[J.key] = J
                    fresh.append(J)
        frontier = fresh
    counts: Dict[int, int] = {}
    for H in found.values():
        counts[H.order] = counts.get(H.order, 0) + 1
    return dict(sorted(counts.items()))
