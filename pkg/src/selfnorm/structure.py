"""
Structural invariants of finite groups.

Centralizers, normalizers, commutator subgroups, the derived / lower central /
upper central series, nilpotency, solubility, perfectness, simplicity,
conjugacy classes, normal subgroups, Sylow, Fitting and Frattini subgroups.

Everything works on element indices and vectorises over the whole group with
numpy where the group has a Cayley table. Whole-group results are cached on
the group (fill-once); results are returned in canonical order so callers get
the same answer regardless of how the work was scheduled.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
from sympy import factorint, isprime, primefactors

from .config import Settings
from .errors import BudgetRefusal, UsageError
from .group import FiniteGroup, SubgroupHandle, quotient_group

logger = logging.getLogger(__name__)

GroupOrSubgroup = Union[FiniteGroup, SubgroupHandle]


# ============================================================================
# Vectorised element maps
# ============================================================================

def _powers(G: FiniteGroup, e: int) -> np.ndarray:
    """Array with g^e at index g."""
    def compute():
        n = G.order
        if G.table is None:
            return np.array([G.power(g, e) for g in range(n)], dtype=np.int64)
        T = G.table
        result = np.zeros(n, dtype=np.int64)
        base = np.arange(n)
        k = e
        while k:
            if k & 1:
                result = T[result, base]
            base = T[base, base]
            k >>= 1
        return result
    return G.cached(f"powers:{e}", compute)


def _commutators_with(G: FiniteGroup, s: int) -> np.ndarray:
    """Array with [g, s] at index g."""
    if G.table is None:
        return np.array([G.commutator(g, s) for g in range(G.order)], dtype=np.int64)
    T, inv = G.table, G.inverses
    return T[T[inv, G.inv(s)], T[:, s]]


def _conjugates_of(G: FiniteGroup, h: int) -> np.ndarray:
    """Array with h^g = g^-1 h g at index g."""
    if G.table is None:
        return np.array([G.conjugate(h, g) for g in range(G.order)], dtype=np.int64)
    T = G.table
    return T[T[G.inverses, h], np.arange(G.order)]


def _handle(G: FiniteGroup, members) -> SubgroupHandle:
    return SubgroupHandle(G, members, verify=False)


def _as_handle(X: GroupOrSubgroup) -> SubgroupHandle:
    return X.whole if isinstance(X, FiniteGroup) else X


# ============================================================================
# Generation, centralizers, normalizers
# ============================================================================

def subgroup_generated(G: FiniteGroup, S: Iterable[int]) -> SubgroupHandle:
    """The subgroup <S> of G."""
    return _handle(G, G.closure_of(S))


def join(A: SubgroupHandle, B: SubgroupHandle) -> SubgroupHandle:
    """<A, B>."""
    if A.issubset(B):
        return B
    if B.issubset(A):
        return A
    return subgroup_generated(A.parent, A.gens + B.gens)


def centralizer(G: FiniteGroup, S: Iterable[int]) -> SubgroupHandle:
    """{g : gs = sg for every s in S}."""
    if isinstance(S, SubgroupHandle):
        S = S.gens
    mask = np.ones(G.order, dtype=bool)
    idx = np.arange(G.order)
    for s in S:
        # g commutes with s exactly when s fixes g under conjugation
        mask &= G.conj_perm(int(s)) == idx
    return _handle(G, np.flatnonzero(mask))


def center(G: FiniteGroup) -> SubgroupHandle:
    return G.cached("center", lambda: centralizer(G, G.generators))


def normalizer(G: FiniteGroup, H: SubgroupHandle) -> SubgroupHandle:
    """
    N_G(H) = {g : H^g = H}.

    Conjugation is a bijection, so H^g = H as soon as the generators of H
    land in H.
    """
    if H.parent is not G:
        raise UsageError("subgroup belongs to a different group")
    if H.is_whole or H.is_trivial:
        return G.whole
    mask = np.ones(G.order, dtype=bool)
    for h in H.gens:
        mask &= H.mask[_conjugates_of(G, h)]
    return _handle(G, np.flatnonzero(mask))


def is_normal(G: FiniteGroup, H: SubgroupHandle) -> bool:
    for g in G.generators:
        if not H.mask[G.conj_perm(g)[H.array]].all():
            return False
    return True


def normal_closure(G: FiniteGroup, S: Iterable[int],
                   within: Optional[SubgroupHandle] = None) -> SubgroupHandle:
    """
    Smallest subgroup containing S that is normalised by `within` (default G).
    """
    conjugators = within.gens if within is not None else G.generators
    gens = G.greedy_generators(sorted({int(s) for s in S}))
    members = G.closure_of(gens)
    if members.size == G.order:
        return G.whole
    changed = True
    while changed:
        changed = False
        for c in conjugators:
            images = G.conj_perm(c)[members]
            mask = np.zeros(G.order, dtype=bool)
            mask[members] = True
            outside = images[~mask[images]]
            if outside.size:
                gens.append(int(outside[0]))
                members = G.closure_of(gens)
                changed = True
                if members.size == G.order:
                    return G.whole
    return _handle(G, members)


# ============================================================================
# Commutators and series
# ============================================================================

@dataclass(frozen=True)
class SeriesResult:
    """
    A subgroup series computed until two consecutive terms coincide.

    derived and lower_central terms descend from G; upper_central ascends
    from the trivial subgroup, its last term being the hypercenter.
    """

    kind: str
    terms: Tuple[SubgroupHandle, ...]
    stabilized: bool = True

    @property
    def last(self) -> SubgroupHandle:
        return self.terms[-1]

    def orders(self) -> List[int]:
        return [t.order for t in self.terms]


def commutator_subgroup(G: FiniteGroup, A: SubgroupHandle, B: SubgroupHandle) -> SubgroupHandle:
    """
    [A, B], generated by all [a, b] = a^-1 b^-1 a b.

    Computed as the normal closure in <A, B> of the commutators of
    generators, which equals [A, B].
    """
    comms = {G.commutator(a, b) for a in A.gens for b in B.gens} - {0}
    if not comms:
        return G.trivial
    return normal_closure(G, comms, within=join(A, B))


def derived_subgroup(G: FiniteGroup) -> SubgroupHandle:
    return G.cached("derived_subgroup", lambda: commutator_subgroup(G, G.whole, G.whole))


def _descending(G: FiniteGroup, kind: str, step) -> SeriesResult:
    terms = [G.whole]
    while True:
        nxt = step(terms[-1])
        if nxt == terms[-1]:
            break
        terms.append(nxt)
    return SeriesResult(kind, tuple(terms))


def derived_series(G: FiniteGroup) -> SeriesResult:
    def compute():
        return _descending(G, "derived", lambda t: derived_subgroup(G) if t.is_whole
                           else commutator_subgroup(G, t, t))
    return G.cached("derived_series", compute)


def lower_central_series(G: FiniteGroup) -> SeriesResult:
    return G.cached("lower_central_series",
                    lambda: _descending(G, "lower_central", lambda t: commutator_subgroup(G, t, G.whole)))


def upper_central_series(G: FiniteGroup) -> SeriesResult:
    """Z_0 = 1, Z_{i+1} = {g : [g, s] in Z_i for every generator s}."""
    def compute():
        comms = [_commutators_with(G, s) for s in G.generators]
        terms = [G.trivial]
        while True:
            mask = np.ones(G.order, dtype=bool)
            for c in comms:
                mask &= terms[-1].mask[c]
            nxt = _handle(G, np.flatnonzero(mask))
            if nxt == terms[-1]:
                break
            terms.append(nxt)
        return SeriesResult("upper_central", tuple(terms))
    return G.cached("upper_central_series", compute)


def hypercenter(G: FiniteGroup) -> SubgroupHandle:
    return upper_central_series(G).last


# ============================================================================
# Nilpotency, solubility, perfectness
# ============================================================================

def is_nilpotent(X: GroupOrSubgroup) -> bool:
    """Lower central series of the group (or subgroup) reaches 1."""
    if isinstance(X, FiniteGroup):
        return X.cached("is_nilpotent", lambda: lower_central_series(X).last.is_trivial)
    if X.is_whole:
        return is_nilpotent(X.parent)
    G, cur = X.parent, X
    while not cur.is_trivial:
        nxt = commutator_subgroup(G, cur, X)
        if nxt == cur:
            return False
        cur = nxt
    return True


def is_nilpotent_by_sylow(X: GroupOrSubgroup) -> bool:
    """
    Every Sylow subgroup is normal, decided by counting p-elements.

    A Sylow p-subgroup is normal exactly when the elements of p-power order
    number |P|.
    """
    H = _as_handle(X)
    orders = H.parent.element_orders()[H.array]
    return bool(nilpotent_rows_by_sylow(orders[None, :], H.order)[0])


def nilpotent_rows_by_sylow(orders: np.ndarray, size: int) -> np.ndarray:
    """
    The Sylow count for many subgroups of one size at once.

    Each row of orders holds the element orders of one subgroup; the result
    is True where every Sylow subgroup of that row is normal.
    """
    orders = np.atleast_2d(orders)
    ok = np.ones(orders.shape[0], dtype=bool)
    for p, e in factorint(size).items():
        ok &= np.count_nonzero(_is_power_of(orders, p), axis=1) == p ** e
    return ok


def _is_power_of(values: np.ndarray, p: int) -> np.ndarray:
    v = values.copy()
    while True:
        divisible = (v % p == 0) & (v > 1)
        if not divisible.any():
            return v == 1
        v[divisible] //= p


def nilpotency_class(G: FiniteGroup) -> Optional[int]:
    if not is_nilpotent(G):
        return None
    return len(lower_central_series(G).terms) - 1


def is_soluble(X: GroupOrSubgroup) -> bool:
    """Derived series reaches 1."""
    if isinstance(X, FiniteGroup):
        return X.cached("is_soluble", lambda: derived_series(X).last.is_trivial)
    G, cur = X.parent, X
    while not cur.is_trivial:
        nxt = commutator_subgroup(G, cur, cur)
        if nxt == cur:
            return False
        cur = nxt
    return True


def is_perfect(X: GroupOrSubgroup) -> bool:
    """G' = G."""
    if isinstance(X, FiniteGroup):
        return derived_subgroup(X).is_whole
    return commutator_subgroup(X.parent, X, X) == X


# ============================================================================
# Conjugacy and normal subgroups
# ============================================================================

def conjugacy_classes(G: FiniteGroup) -> Tuple[Tuple[int, ...], ...]:
    """
    Conjugacy classes as sorted index tuples, ordered by smallest member.

    Classes are the orbits of the conjugation maps of the generators.
    """
    def compute():
        n = G.order
        perms = [G.conj_perm(g).tolist() for g in G.generators]
        label = [-1] * n
        classes = []
        for start in range(n):
            if label[start] != -1:
                continue
            label[start] = len(classes)
            orbit = [start]
            for i in orbit:
                for perm in perms:
                    j = perm[i]
                    if label[j] == -1:
                        label[j] = len(classes)
                        orbit.append(j)
            classes.append(tuple(sorted(orbit)))
        logger.debug("%s: %d conjugacy classes", G.name, len(classes))
        return tuple(classes)
    return G.cached("conjugacy_classes", compute)


def class_labels(G: FiniteGroup) -> np.ndarray:
    """Class number of every element."""
    def compute():
        labels = np.empty(G.order, dtype=np.int64)
        for k, cls in enumerate(conjugacy_classes(G)):
            labels[list(cls)] = k
        return labels
    return G.cached("class_labels", compute)


def normal_subgroups(G: FiniteGroup) -> List[SubgroupHandle]:
    """
    All normal subgroups in canonical (order, members) order.

    Each normal subgroup is a union of classes and is generated by the normal
    closures of its classes, so the closures of single classes are joined
    until nothing new appears.
    """
    def compute():
        atoms: Dict[bytes, SubgroupHandle] = {}
        for cls in conjugacy_classes(G)[1:]:
            N = normal_closure(G, [cls[0]])
            atoms.setdefault(N.key, N)
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
        result = sorted(found.values(), key=SubgroupHandle.sort_key)
        logger.debug("%s: %d normal subgroups", G.name, len(result))
        return result
    return list(G.cached("normal_subgroups", compute))


def is_simple(G: FiniteGroup) -> bool:
    """Non-trivial, and every non-identity class has normal closure G."""
    def compute():
        if G.order == 1:
            return False
        for cls in conjugacy_classes(G)[1:]:
            if not normal_closure(G, [cls[0]]).is_whole:
                return False
        return True
    return G.cached("is_simple", compute)


# ============================================================================
# Sylow, Fitting, Frattini
# ============================================================================

def sylow_subgroup(G: FiniteGroup, p: int) -> SubgroupHandle:
    """
    A Sylow p-subgroup, grown through normalizers.

    While P is not Sylow, p divides [N_G(P) : P], so some g in N_G(P) \\ P has
    g^p in P and <P, g> is a p-group of order p|P|. The first such g in
    canonical order is taken.

    Raises:
        UsageError: p is not a prime dividing |G|
    """
    n = G.order
    if not isprime(p) or n % p:
        raise UsageError(f"{p} is not a prime divisor of |G| = {n}")

    def compute():
        target = p ** factorint(n)[p]
        pw = _powers(G, p)
        P = G.trivial
        while P.order < target:
            N = normalizer(G, P)
            cand = N.array[~P.mask[N.array]]
            good = cand[P.mask[pw[cand]]]
            P = subgroup_generated(G, P.gens + [int(good[0])])
        return P
    return G.cached(f"sylow:{p}", compute)


def _core(G: FiniteGroup, P: SubgroupHandle) -> SubgroupHandle:
    """Largest normal subgroup of G inside P (intersection of the conjugates)."""
    mask = P.mask.copy()
    perms = [G.conj_perm(g) for g in G.generators]
    while True:
        nxt = mask.copy()
        for perm in perms:
            nxt &= mask[perm]
        if np.array_equal(nxt, mask):
            return _handle(G, np.flatnonzero(mask))
        mask = nxt


def fitting_subgroup(G: FiniteGroup) -> SubgroupHandle:
    """
    The largest nilpotent normal subgroup.

    Computed as the product of the O_p(G), the cores of the Sylow subgroups;
    every nilpotent normal subgroup is the product of its Sylow subgroups,
    each of which lies in the matching O_p(G).
    """
    def compute():
        if is_nilpotent(G):
            return G.whole
        if is_simple(G):
            return G.trivial
        gens: List[int] = []
        for p in primefactors(G.order):
            gens.extend(_core(G, sylow_subgroup(G, p)).gens)
        return subgroup_generated(G, gens)
    return G.cached("fitting", compute)


def frattini_subgroup(G: FiniteGroup, lattice=None, settings: Optional[Settings] = None) -> Optional[SubgroupHandle]:
    """
    Intersection of the maximal subgroups, or None when the lattice is truncated.
    """
    from .lattice import all_subgroups

    lat = lattice if lattice is not None else all_subgroups(G, settings)
    if lat.truncated:
        return None
    if not lat.maximal:
        return G.whole
    mask = np.ones(G.order, dtype=bool)
    for M in lat.maximal:
        mask &= M.mask
    return _handle(G, np.flatnonzero(mask))


def is_minimal_non_nilpotent(G: FiniteGroup, lattice=None, settings: Optional[Settings] = None) -> bool:
    """
    Non-nilpotent with every maximal subgroup nilpotent.

    Raises:
        BudgetRefusal: the subgroup lattice is truncated
    """
    from .lattice import all_subgroups

    if is_nilpotent(G):
        return False
    lat = lattice if lattice is not None else all_subgroups(G, settings)
    if lat.truncated:
        raise BudgetRefusal(f"lattice of {G.name} is truncated; maximal subgroups unknown")
    return all(is_nilpotent(M) for M in lat.maximal)


# ============================================================================
# Abelianization and decompositions
# ============================================================================

def _p_valuation(x: int, p: int) -> int:
    k = 0
    while x > 1 and x % p == 0:
        x //= p
        k += 1
    return k


def abelianization_shape(G: FiniteGroup) -> Tuple[int, ...]:
    """
    Primary invariants of G/G', ascending.

    For an abelian p-group the elements of order dividing p^k number
    p^(sum of min(e_i, k)), so successive ratios count the factors of
    exponent at least k.
    """
    def compute():
        D = derived_subgroup(G)
        if D.is_whole:
            return ()
        Q = quotient_group(G, D)
        orders = Q.element_orders()
        shape: List[int] = []
        for p, e in sorted(factorint(Q.order).items()):
            counts = [np.count_nonzero((p ** k) % orders == 0) for k in range(e + 2)]
            at_least = [_p_valuation(counts[k] // counts[k - 1], p) for k in range(1, e + 2)]
            for k in range(1, e + 1):
                shape.extend([p ** k] * (at_least[k - 1] - at_least[k]))
        return tuple(sorted(shape))
    return G.cached("abelianization_shape", compute)


def is_cyclic_prime_power(shape: Tuple[int, ...]) -> bool:
    """A primary-invariant shape describes a non-trivial cyclic p-group."""
    return len(shape) == 1


def direct_decomposition(G: FiniteGroup) -> Optional[Tuple[SubgroupHandle, SubgroupHandle]]:
    """
    First pair (N1, N2) of non-trivial normal subgroups with N1 n N2 = 1 and N1 N2 = G.
    """
    n = G.order
    proper = [N for N in normal_subgroups(G) if not N.is_trivial and not N.is_whole]
    for i, A in enumerate(proper):
        for B in proper[i + 1:]:
            if A.order * B.order == n and A.intersection(B).is_trivial:
                return A, B
    return None


# ============================================================================
# Profile
# ============================================================================

@dataclass
class StructureProfile:
    """Summary of the structural invariants of one group."""

    order: int
    is_nilpotent: bool
    nilpotency_class: Optional[int]
    is_soluble: bool
    is_perfect: bool
    is_simple: bool
    fitting: SubgroupHandle
    frattini: Optional[SubgroupHandle]
    center: SubgroupHandle
    hypercenter: SubgroupHandle
    abelianization_shape: Tuple[int, ...] = field(default_factory=tuple)

    def summary(self) -> Dict[str, object]:
        """JSON-ready view (subgroups reported by order)."""
        return {
            "order": self.order,
            "is_nilpotent": self.is_nilpotent,
            "nilpotency_class": self.nilpotency_class,
            "is_soluble": self.is_soluble,
            "is_perfect": self.is_perfect,
            "is_simple": self.is_simple,
            "fitting_order": self.fitting.order,
            "frattini_order": self.frattini.order if self.frattini is not None else None,
            "center_order": self.center.order,
            "hypercenter_order": self.hypercenter.order,
            "abelianization_shape": list(self.abelianization_shape),
        }


def structure_profile(G: FiniteGroup, lattice=None, settings: Optional[Settings] = None) -> StructureProfile:
    """
    Fill a StructureProfile.

    The Frattini subgroup comes from the maximal subgroups of the lattice; it
    is None when the lattice is truncated or the group is over budget.
    """
    settings = settings or Settings()
    frattini = None
    if lattice is not None or G.order <= settings.budget:
        frattini = frattini_subgroup(G, lattice, settings)
    return StructureProfile(
        order=G.order,
        is_nilpotent=is_nilpotent(G),
        nilpotency_class=nilpotency_class(G),
        is_soluble=is_soluble(G),
        is_perfect=is_perfect(G),
        is_simple=is_simple(G),
        fitting=fitting_subgroup(G),
        frattini=frattini,
        center=center(G),
        hypercenter=hypercenter(G),
        abelianization_shape=abelianization_shape(G),
    )
