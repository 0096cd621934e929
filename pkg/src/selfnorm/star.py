"""
The commutator map ad_x and the splitting test for soluble groups.

For an element x normalising a subgroup H, ad_x(h) = [x, h] = x^-1 h^-1 x h.
The star property asks, for every x-invariant subgroup K of H, that either
some iterate of ad_x sends K to {1}, or the images ad_x(K) generate K again.
Iterates are taken on element sets, S_0 = K and S_{n+1} = ad_x(S_n). The
sequence is deterministic over a finite universe, so it either reaches {1}
or revisits a set, and a revisit without reaching {1} settles the first
alternative as false. For an x-invariant K the image sets shrink, so the
revisit is always the last set repeating.

A soluble non-nilpotent group is a member exactly when it splits as <x> H
with <x> a p-group, H the p'-part of the Fitting subgroup, x^p centralising
H, and ad_x having the star property on H. soluble_structural_verdict runs
four cheap necessary conditions first.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from sympy import factorint, isprime, primefactors

from .elements import Element
from .errors import UsageError, ValidationError
from .group import FiniteGroup, SubgroupHandle
from .lattice import MaskedLattice, invariant_subgroups, positions
from .parallel import ordered_map
from .results import REJECTED_FILTER, SOLUBLE_SPLIT, Verdict
from .structure import (
    abelianization_shape,
    derived_subgroup,
    fitting_subgroup,
    is_cyclic_prime_power,
    is_nilpotent,
    is_nilpotent_by_sylow,
    is_normal,
    is_soluble,
    lower_central_series,
    subgroup_generated,
)

logger = logging.getLogger(__name__)

VANISHES = "vanishes"
REGENERATES = "regenerates"
CYCLES = "cycles_without_vanishing"

ElementRef = Union[int, Element]


def _index(G: FiniteGroup, x: ElementRef) -> int:
    if isinstance(x, (int, np.integer)):
        if not 0 <= int(x) < G.order:
            raise UsageError(f"element index {x} out of range for {G.name}")
        return int(x)
    return G.index(x)


@dataclass(frozen=True)
class Vanishing:
    """Result of iterating ad_x on a subgroup: vanishes(n) or fails."""

    vanishes: bool
    n: Optional[int] = None

    def __str__(self) -> str:
        return f"vanishes({self.n})" if self.vanishes else "fails"


@dataclass
class AdTrace:
    """Image sets of ad_x on K until {1} or the first repeated set."""

    x: int
    K: SubgroupHandle
    image_sets: Tuple[Tuple[int, ...], ...]
    outcome: str
    generated_image: SubgroupHandle
    vanish_step: Optional[int] = None

    @property
    def label(self) -> str:
        if self.outcome == VANISHES:
            return f"vanishes({self.vanish_step})"
        if self.outcome == REGENERATES:
            return REGENERATES
        return "violates"

    @property
    def satisfies_star(self) -> bool:
        return self.outcome != CYCLES


@dataclass
class StarReport:
    """star_check outcome with one trace per x-invariant subgroup."""

    holds: bool
    violator: Optional[SubgroupHandle]
    traces: List[AdTrace] = field(default_factory=list)

    def __str__(self) -> str:
        if self.holds:
            return "holds"
        return f"violated_by K of order {self.violator.order}"


class AdAction:
    """
    The map ad_x on a subgroup H normalised by x.

    Args:
        G: ambient group
        x: acting element (index or ConcreteElement of G)
        H: subgroup normalised by x (default: G's "H" embedding, else G)

    Raises:
        UsageError: x does not normalise H
    """

    def __init__(self, G: FiniteGroup, x: ElementRef, H: Optional[SubgroupHandle] = None):
        self.G = G
        self.x = _index(G, x)
        if H is None:
            H = G.embeddings.get("H", G.whole)
        if H.parent is not G:
            raise UsageError("H must be a subgroup of G")
        self.H = H
        self.sigma = G.conj_perm(self.x)
        if not H.mask[self.sigma[H.array]].all():
            raise UsageError("x does not normalise H")
        self._ad = self._compute_ad()

    def _compute_ad(self) -> np.ndarray:
        G, x = self.G, self.x
        if G.table is None:
            return np.array([G.commutator(x, h) for h in range(G.order)], dtype=np.int64)
        T, inv = G.table, G.inverses
        # [x, h] = (x^-1 h^-1)(x h)
        return T[T[G.inv(x), inv], T[x]]

    # --- maps ---------------------------------------------------------------

    def apply(self, h: int) -> int:
        return int(self._ad[h])

    def image(self, S) -> Tuple[int, ...]:
        """ad_x applied to an element set, as a sorted tuple."""
        arr = S.array if isinstance(S, SubgroupHandle) else np.asarray(list(S), dtype=np.int64)
        return tuple(int(v) for v in np.unique(self._ad[arr]))

    def generated(self, K: SubgroupHandle) -> SubgroupHandle:
        """<ad_x(K)>."""
        return subgroup_generated(self.G, self.image(K))

    def _iterate(self, K: SubgroupHandle) -> Tuple[List[Tuple[int, ...]], Optional[int]]:
        sets = [K.members]
        seen = {sets[0]: 0}
        while True:
            nxt = self.image(sets[-1])
            sets.append(nxt)
            if nxt == (0,):
                return sets, len(sets) - 1
            if nxt in seen:
                return sets, None
            seen[nxt] = len(sets) - 1

    def vanishes(self, K: SubgroupHandle) -> Vanishing:
        _, n = self._iterate(K)
        return Vanishing(n is not None, n)

    def trace(self, K: SubgroupHandle) -> AdTrace:
        sets, n = self._iterate(K)
        generated = self.generated(K)
        if n is not None:
            outcome = VANISHES
        elif generated == K:
            outcome = REGENERATES
        else:
            outcome = CYCLES
        return AdTrace(self.x, K, tuple(sets), outcome, generated, n)

    # --- properties of the action -------------------------------------------

    def invariant_subgroups(self) -> List[SubgroupHandle]:
        return invariant_subgroups(self.H, self.x)

    def star_check(self, workers: int = 1) -> StarReport:
        """
        Check the star property over every x-invariant subgroup of H.

        Raises:
            UsageError: H is not nilpotent
        """
        if not is_nilpotent(self.H):
            raise UsageError(f"star_check needs a nilpotent H; order {self.H.order} subgroup is not")
        subgroups = self.invariant_subgroups()
        traces = ordered_map(self.trace, subgroups, workers)
        violators = [t.K for t in traces if not t.satisfies_star]
        violator = min(violators, key=SubgroupHandle.sort_key) if violators else None
        return StarReport(violator is None, violator, traces)

    def star_scan(self, lattice: MaskedLattice) -> StarReport:
        """
        The star_check decision without traces, from a precomputed lattice of H.

        Iterated images of K stay inside the same iterates of H, so when
        ad_x kills H nothing else is examined. Otherwise the x-invariant rows
        are iterated together, and <ad_x(K)>, itself x-invariant, is the
        smallest invariant row containing ad_x(K).

        Raises:
            UsageError: H is not nilpotent, or the lattice is not H's
        """
        H = self.H
        if lattice.width != H.order:
            raise UsageError(f"lattice has width {lattice.width}, H has order {H.order}")
        if not is_nilpotent_by_sylow(H):
            raise UsageError(f"star_scan needs a nilpotent H; order {H.order} subgroup is not")
        ad = positions(H, self._ad[H.array])
        vanished, _ = _settle(np.ones((1, H.order), dtype=bool), ad)
        if vanished[0]:
            return StarReport(True, None)

        rows = lattice.invariant_rows(positions(H, self.sigma[H.array]))
        masks = lattice.masks[rows]
        orders = lattice.orders[rows]
        vanished, first = _settle(masks, ad)
        open_rows = np.flatnonzero(~vanished)
        if open_rows.size:
            outside = (~masks).astype(np.int32)
            covers = first[open_rows].astype(np.int32) @ outside.T == 0
            generated = np.where(covers, orders[None, :], np.iinfo(np.int64).max).min(axis=1)
            violating = open_rows[generated < orders[open_rows]]
            if violating.size:
                return StarReport(False, lattice.handle(H, int(rows[violating[0]])))
        return StarReport(True, None)

    def fixed_points(self) -> SubgroupHandle:
        """C_H(x): the elements of H fixed by conjugation."""
        H = self.H
        fixed = H.array[self.sigma[H.array] == H.array]
        return SubgroupHandle(self.G, fixed, verify=False)

    def is_fixed_point_free(self) -> bool:
        return self.fixed_points().is_trivial

    def is_injective(self) -> bool:
        """ad_x is injective on H."""
        values = self._ad[self.H.array]
        return np.unique(values).size == values.size

    def is_bijective(self) -> bool:
        """ad_x maps H onto H injectively."""
        values = self._ad[self.H.array]
        return self.is_injective() and bool(self.H.mask[values].all())

    def induced_fixed_point_free(self, N: SubgroupHandle) -> bool:
        """
        x acts without non-trivial fixed points on HN/N.

        N must be normal in G; an element hN is fixed when [h, x] lies in N.
        """
        G = self.G
        HN = subgroup_generated(G, self.H.gens + N.gens)
        outside = HN.array[~N.mask[HN.array]]
        # h^x = h n for some n in N  <=>  h^-1 h^x in N
        moved = np.array([G.mul(G.inv(int(h)), int(self.sigma[h])) for h in outside], dtype=np.int64)
        return not bool(N.mask[moved].any()) if moved.size else True


# ============================================================================
# Module-level operations
# ============================================================================

def ad_apply(G: FiniteGroup, x: ElementRef, h: ElementRef) -> ElementRef:
    """[x, h]; returns an index for index input and an element otherwise."""
    xi, hi = _index(G, x), _index(G, h)
    value = G.commutator(xi, hi)
    return value if isinstance(h, (int, np.integer)) else G.element(value)


def ad_image(G: FiniteGroup, x: ElementRef, K: SubgroupHandle) -> Tuple[int, ...]:
    """{[x, k] : k in K}; x must normalise K."""
    return AdAction(G, x, K).image(K)


def ad_generated(G: FiniteGroup, x: ElementRef, K: SubgroupHandle) -> SubgroupHandle:
    """<ad_x(K)>; x must normalise K."""
    return AdAction(G, x, K).generated(K)


def ad_vanishes(G: FiniteGroup, x: ElementRef, K: SubgroupHandle) -> Vanishing:
    """vanishes(n) at the first n >= 1 with ad_x^n(K) = {1}, else fails."""
    return AdAction(G, x, K).vanishes(K)


def ad_trace(G: FiniteGroup, x: ElementRef, K: SubgroupHandle) -> AdTrace:
    return AdAction(G, x, K).trace(K)


def star_check(G: FiniteGroup, x: ElementRef, H: Optional[SubgroupHandle] = None,
               workers: int = 1) -> StarReport:
    """
    The star property of ad_x on H; first violator in canonical order.

    Raises:
        UsageError: H not nilpotent or not normalised by x
    """
    return AdAction(G, x, H).star_check(workers)


def star_scan(G: FiniteGroup, x: ElementRef, H: SubgroupHandle, lattice: MaskedLattice) -> StarReport:
    """star_check's verdict and violator, without traces, over a lattice of H."""
    return AdAction(G, x, H).star_scan(lattice)


def _image_rows(masks: np.ndarray, ad: np.ndarray) -> np.ndarray:
    out = np.zeros_like(masks)
    r, c = np.nonzero(masks)
    out[r, ad[c]] = True
    return out


def _settle(masks: np.ndarray, ad: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Iterate ad on every row (an x-invariant subset) until it is {1} or stops
    shrinking.

    Returns:
        (vanished per row, first images)
    """
    cur = masks.copy()
    first = _image_rows(cur, ad)
    vanished = np.zeros(len(cur), dtype=bool)
    active = np.arange(len(cur))
    nxt = first
    while active.size:
        # the identity is always in the image
        done = nxt.sum(axis=1) == 1
        stable = (nxt == cur[active]).all(axis=1)
        vanished[active[done]] = True
        cur[active] = nxt
        active = active[~(done | stable)]
        nxt = _image_rows(cur[active], ad)
    return vanished, first


def fixed_points(G: FiniteGroup, x: ElementRef, H: Optional[SubgroupHandle] = None) -> SubgroupHandle:
    return AdAction(G, x, H).fixed_points()


def is_fixed_point_free(G: FiniteGroup, x: ElementRef, H: Optional[SubgroupHandle] = None) -> bool:
    return AdAction(G, x, H).is_fixed_point_free()


def induced_action_fixed_point_free(G: FiniteGroup, x: ElementRef, H: SubgroupHandle,
                                    N: SubgroupHandle) -> bool:
    """x acts fixed point freely on HN/N for a normal subgroup N."""
    return AdAction(G, x, H).induced_fixed_point_free(N)


# ============================================================================
# Splittings
# ============================================================================

@dataclass
class Splitting:
    """
    G = <x> H with <x> a p-group and H a normal nilpotent p'-subgroup.

    All conditions are verified on construction.

    Raises:
        ValidationError: naming the failing condition
    """

    G: FiniteGroup
    p: int
    x: int
    H: SubgroupHandle
    checks: Dict[str, bool] = field(default_factory=dict)

    def __post_init__(self):
        G, p, x, H = self.G, self.p, self.x, self.H
        x_order = G.order_of(x)
        X = subgroup_generated(G, [x])
        xp = G.power(x, p)
        self.checks = {
            "x_order_is_p_power": len(factorint(x_order)) <= 1 and x_order % p == 0,
            "H_normal_nilpotent_p_prime": is_normal(G, H) and is_nilpotent(H) and H.order % p != 0,
            "trivial_intersection": X.intersection(H).is_trivial,
            "product_is_G": X.order * H.order == G.order,
            "x_p_centralizes_H": all(G.commutator(xp, h) == 0 for h in H.gens),
        }
        failed = [name for name, ok in self.checks.items() if not ok]
        if failed:
            raise ValidationError(f"splitting check failed: {', '.join(failed)}")

    @property
    def x_order(self) -> int:
        return self.G.order_of(self.x)


def p_prime_part(G: FiniteGroup, N: SubgroupHandle, p: int) -> SubgroupHandle:
    """Elements of a nilpotent subgroup N with order prime to p (its Hall p'-subgroup)."""
    orders = G.element_orders()[N.array]
    return SubgroupHandle(G, N.array[orders % p != 0], verify=False)


def find_splitting(G: FiniteGroup) -> Optional[Splitting]:
    """
    First splitting G = <x> H in canonical order, or None.

    H is forced to be the p'-part of the Fitting subgroup; for each prime p
    with [G : H] a power of p, the elements x of order [G : H] are scanned
    for one whose p-th power centralises H.
    """
    n = G.order
    F = fitting_subgroup(G)
    orders = G.element_orders()
    for p in primefactors(n):
        H = p_prime_part(G, F, p)
        index = n // H.order
        if index == 1 or len(factorint(index)) != 1 or index % p:
            continue
        for x in np.flatnonzero(orders == index):
            xp = G.power(int(x), p)
            if all(G.commutator(xp, h) == 0 for h in H.gens):
                splitting = Splitting(G, p, int(x), H)
                logger.debug("%s splits at p=%d, x=%d, |H|=%d", G.name, p, x, H.order)
                return splitting
    return None


def gamma(G: FiniteGroup, i: int) -> SubgroupHandle:
    """i-th lower central term, gamma_1 = G."""
    terms = lower_central_series(G).terms
    return terms[min(i, len(terms)) - 1]


def soluble_filters(G: FiniteGroup) -> List[Tuple[str, bool]]:
    """Necessary conditions for a soluble non-nilpotent member, in check order."""
    F = fitting_subgroup(G)
    D = derived_subgroup(G)
    index = G.order // F.order
    return [
        ("derived-in-fitting", D.issubset(F)),
        ("fitting-index-prime", isprime(index)),
        ("abelianization-cyclic-prime-power", is_cyclic_prime_power(abelianization_shape(G))),
        ("derived-equals-gamma3", D == gamma(G, 3)),
    ]


def soluble_structural_verdict(G: FiniteGroup, workers: int = 1) -> Verdict:
    """
    Decide a soluble non-nilpotent group by its splitting.

    Raises:
        UsageError: G is nilpotent or insoluble
    """
    if is_nilpotent(G) or not is_soluble(G):
        raise UsageError(f"{G.name} is not soluble and non-nilpotent")
    for name, ok in soluble_filters(G):
        if not ok:
            return Verdict(False, REJECTED_FILTER, filter=name)
    splitting = find_splitting(G)
    if splitting is None:
        return Verdict(False, REJECTED_FILTER, filter="no-splitting")
    report = star_check(G, splitting.x, splitting.H, workers)
    return Verdict(report.holds, SOLUBLE_SPLIT, evidence={"splitting": splitting, "star": report})
