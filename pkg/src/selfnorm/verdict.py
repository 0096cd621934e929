"""
The two membership deciders and the harness that cross-checks them.

bruteforce_verdict applies the definition: every non-nilpotent subgroup must
equal its normalizer. Normalizers are conjugation-equivariant, so one
representative per conjugacy class of subgroups is enough, and the class
size from the lattice gives the normalizer order directly. Nilpotency here
is decided by the Sylow-counting criterion, independently of the lower
central series used by the structural side.

structural_verdict follows the classification:
- nilpotent groups are members;
- a perfect group is a member when it is simple of the shape PSL2(2^n) with
  2^n - 1 prime, or when it is SL2(5);
- a non-perfect group with non-nilpotent derived subgroup is not;
- the remaining soluble groups are decided by their splitting.

Isomorphism with the reference groups is judged by fingerprints; the
optional certified search (orders <= 200) confirms a match with an explicit
isomorphism.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from sympy import isprime

from .config import CERTIFIED_ISO_LIMIT, MERSENNE_SCAN_MAX, Settings
from .errors import AutomorphismError, BudgetRefusal, DeciderDisagreement, ResourceError, UsageError
from .group import FiniteGroup, SubgroupHandle, extend_to_homomorphism, quotient_group
from .lattice import MaskedLattice, all_subgroups, positions
from .parallel import ordered_map
from .results import (
    BRUTEFORCE,
    NILPOTENT,
    PERFECT_PSL2,
    PERFECT_SL25,
    REJECTED_FILTER,
    Verdict,
)
from .star import soluble_structural_verdict
from .structure import (
    conjugacy_classes,
    derived_subgroup,
    is_nilpotent,
    is_nilpotent_by_sylow,
    is_perfect,
    is_simple,
    nilpotent_rows_by_sylow,
    normal_subgroups,
    normalizer,
)

logger = logging.getLogger(__name__)


# ============================================================================
# Fingerprints and isomorphism
# ============================================================================

@dataclass(frozen=True)
class GroupFingerprint:
    """Isomorphism invariants; equal for isomorphic groups."""

    order: int
    class_sizes: Tuple[int, ...]
    order_histogram: Tuple[Tuple[int, int], ...]
    is_simple: bool
    is_perfect: bool


def fingerprint(G: FiniteGroup) -> GroupFingerprint:
    def compute():
        orders, counts = np.unique(G.element_orders(), return_counts=True)
        return GroupFingerprint(
            order=G.order,
            class_sizes=tuple(sorted(len(c) for c in conjugacy_classes(G))),
            order_histogram=tuple((int(o), int(c)) for o, c in zip(orders, counts)),
            is_simple=is_simple(G),
            is_perfect=is_perfect(G),
        )
    return G.cached("fingerprint", compute)


def _small_generating_set(G: FiniteGroup) -> List[int]:
    orders = G.element_orders()
    by_order = sorted(range(1, G.order), key=lambda g: (-orders[g], g))
    if G.order == 1:
        return []
    if orders[by_order[0]] == G.order:
        return [by_order[0]]
    for cls in conjugacy_classes(G)[1:]:
        a = cls[0]
        for b in by_order:
            if G.closure_of([a, b]).size == G.order:
                return [a, b]
    return G.generators


def is_isomorphic(A: FiniteGroup, B: FiniteGroup) -> bool:
    """
    Certified isomorphism test by generator-image search.

    The image of the first generator is taken up to conjugacy in B; every
    candidate assignment is extended to a homomorphism and kept when bijective.

    Raises:
        UsageError: either group is larger than the certified limit
    """
    if max(A.order, B.order) > CERTIFIED_ISO_LIMIT:
        raise UsageError(f"certified isomorphism is limited to order {CERTIFIED_ISO_LIMIT}")
    if fingerprint(A) != fingerprint(B):
        return False
    if A.order == 1:
        return True
    gens = _small_generating_set(A)
    a_orders, b_orders = A.element_orders(), B.element_orders()
    first = [cls[0] for cls in conjugacy_classes(B) if b_orders[cls[0]] == a_orders[gens[0]]]
    pools = [first] + [list(np.flatnonzero(b_orders == a_orders[g])) for g in gens[1:]]

    def search(i: int, chosen: List[int]) -> bool:
        if i == len(gens):
            try:
                phi = extend_to_homomorphism(A, dict(zip(gens, chosen)), target=B)
            except AutomorphismError:
                return False
            return np.unique(phi).size == A.order
        return any(search(i + 1, chosen + [int(c)]) for c in pools[i])

    return search(0, [])


def _reference(spec: str) -> FiniteGroup:
    from .catalog import build_named

    return build_named(spec)


SHELF = (
    ("Sym(3)", "S:3", 6),
    ("Alt(4)", "A:4", 12),
    ("Sym(4)", "S:4", 24),
    ("Q8", "Q:8", 8),
    ("SL2(3)", "SL:2:3", 24),
    ("Alt(5)", "A:5", 60),
    ("SL2(5)", "SL:2:5", 120),
)


def identify(G: FiniteGroup) -> Optional[str]:
    """Name hint from fingerprints against a small reference shelf."""
    n = G.order
    if n == 1:
        return "1"
    if int(G.element_orders().max()) == n:
        return f"C{n}"
    fp = fingerprint(G)
    for label, spec, order in SHELF:
        if order == n and fingerprint(_reference(spec)) == fp:
            return label
    if n % 2 == 0 and n >= 4 and fingerprint(_reference(f"D:{n // 2}")) == fp:
        return f"Dih({n // 2})"
    return None


# ============================================================================
# Brute force
# ============================================================================

def bruteforce_verdict(G: FiniteGroup, settings: Optional[Settings] = None) -> Verdict:
    """
    Decide membership from the definition over the subgroup lattice.

    Raises:
        BudgetRefusal: the lattice is truncated
    """
    settings = settings or Settings()
    if is_nilpotent_by_sylow(G):
        # every subgroup of a nilpotent group is nilpotent
        return Verdict(True, BRUTEFORCE, evidence={"nilpotent": True, "classes_checked": 0})
    lattice = all_subgroups(G, settings)
    if lattice.truncated:
        raise BudgetRefusal(f"lattice of {G.name} (order {G.order}) is truncated; brute force refuses")

    def grows(item: Tuple[SubgroupHandle, int]) -> Optional[bool]:
        rep, size = item
        if is_nilpotent_by_sylow(rep):
            return None
        return G.order // size > rep.order

    outcomes = ordered_map(grows, lattice.class_reps, settings.parallel)
    non_nilpotent = sum(1 for o in outcomes if o is not None)
    for (rep, _), grown in zip(lattice.class_reps, outcomes):
        if grown:
            N = normalizer(G, rep)
            if is_nilpotent(rep) or N.order <= rep.order:
                raise UsageError(f"witness of order {rep.order} failed re-verification")
            return Verdict(False, BRUTEFORCE, witness=rep,
                           evidence={"normalizer_order": N.order,
                                     "classes_checked": len(lattice.class_reps)})
    return Verdict(True, BRUTEFORCE, evidence={"classes_checked": len(lattice.class_reps),
                                               "non_nilpotent_classes": non_nilpotent})


def bruteforce_extension_verdict(G: FiniteGroup, H: SubgroupHandle, lattice: MaskedLattice,
                                 settings: Optional[Settings] = None) -> Verdict:
    """
    The definition checked on every subgroup of G, for G with an abelian
    normal subgroup H of prime index p whose lattice is already known.

    Subgroups inside H are abelian. Any other subgroup S maps onto G/H, so
    it meets the coset xH and S = <y> B with y = xa, B = S n H invariant
    under x and y^p in B. The pair (B, aB) fixes S, and every such pair
    gives one. Since G = SH, N_G(S) = S N_H(S), and S is self-normalizing
    exactly when the c in H with y^c in S are the elements of B.

    Raises:
        BudgetRefusal: |G| is over the lattice budget
        UsageError: H is not an abelian normal subgroup of prime index
    """
    settings = settings or Settings()
    T, index = G.table, G.order // H.order
    if T is None or H.parent is not G or not isprime(index) or lattice.width != H.order:
        raise UsageError(f"{G.name}: need a tabled group, a subgroup of prime index and its lattice")
    Hg = H.array
    x = G.labels.get("x")
    if x is None or H.mask[x]:
        x = int(np.flatnonzero(~H.mask)[0])
    block = T[np.ix_(Hg, Hg)]
    sigma = G.conj_perm(x)
    # x together with H generates G, so x normalising H makes H normal
    if not (block == block.T).all() or not H.mask[sigma[Hg]].all():
        raise UsageError(f"{G.name}: H must be an abelian normal subgroup")
    if is_nilpotent_by_sylow(G):
        return Verdict(True, BRUTEFORCE, evidence={"nilpotent": True, "classes_checked": 0})
    if G.order > settings.budget:
        raise BudgetRefusal(f"{G.name} (order {G.order}) is over the lattice budget; brute force refuses")

    y = T[x, Hg].astype(np.int64)
    powers = [np.zeros(H.order, dtype=np.int64), y]
    for _ in range(2, index):
        powers.append(T[powers[-1], y].astype(np.int64))
    y_p = positions(H, T[powers[-1], y])
    Y = np.stack(powers, axis=1)
    orders = G.element_orders()
    inv_h = G.inverses[Hg]
    local = np.arange(H.order)
    checked = 0

    for r in lattice.invariant_rows(positions(H, sigma[Hg])):
        B_mask = lattice.masks[r]
        B = Hg[B_mask]
        # each coset aB is represented by its least position
        least = positions(H, T[np.ix_(Hg, B)]).min(axis=1)
        reps = np.flatnonzero(B_mask[y_p] & (least == local))
        if not reps.size:
            continue
        S = T[Y[reps][:, :, None], B[None, None, :]].reshape(reps.size, -1)
        checked += reps.size
        open_rows = np.flatnonzero(~nilpotent_rows_by_sylow(orders[S], S.shape[1]))
        if not open_rows.size:
            continue
        conj = T[T[inv_h[None, :], Y[reps[open_rows], 1][:, None]], Hg[None, :]]
        member = np.zeros((open_rows.size, G.order), dtype=bool)
        row_ix = np.arange(open_rows.size)[:, None]
        member[row_ix, S[open_rows]] = True
        grown = np.flatnonzero(member[row_ix, conj].sum(axis=1) > B.size)
        if grown.size:
            witness = SubgroupHandle(G, S[open_rows[grown[0]]])
            N = normalizer(G, witness)
            if is_nilpotent(witness) or N.order <= witness.order:
                raise UsageError(f"witness of order {witness.order} failed re-verification")
            return Verdict(False, BRUTEFORCE, witness=witness,
                           evidence={"normalizer_order": N.order, "subgroups_checked": checked})
    return Verdict(True, BRUTEFORCE, evidence={"subgroups_checked": checked})


# ============================================================================
# Structural
# ============================================================================

def _certify(G: FiniteGroup, ref: FiniteGroup, settings: Settings) -> Optional[bool]:
    if not settings.slow_iso or max(G.order, ref.order) > CERTIFIED_ISO_LIMIT:
        return None
    return is_isomorphic(G, ref)


def perfect_structural_verdict(G: FiniteGroup, settings: Optional[Settings] = None) -> Verdict:
    """
    Decide a non-trivial perfect group.

    Raises:
        UsageError: G is trivial or not perfect
    """
    settings = settings or Settings()
    if G.order == 1 or not is_perfect(G):
        raise UsageError(f"{G.name} is not a non-trivial perfect group")
    fp = fingerprint(G)

    if is_simple(G):
        for n in range(2, MERSENNE_SCAN_MAX + 1):
            q = 2 ** n
            if q * (q - 1) * (q + 1) != G.order:
                continue
            evidence = {"n": n, "q": q, "mersenne": isprime(q - 1)}
            if not evidence["mersenne"]:
                return Verdict(False, PERFECT_PSL2, evidence=evidence)
            try:
                ref = _reference(f"PSL:2:{q}")
            except ResourceError:
                evidence["fingerprint_match"] = None
                return Verdict(False, PERFECT_PSL2, evidence=evidence)
            match = fingerprint(ref) == fp
            certified = _certify(G, ref, settings) if match else None
            evidence.update({"reference": f"PSL:2:{q}", "fingerprint_match": match, "certified": certified})
            return Verdict(match and certified is not False, PERFECT_PSL2, evidence=evidence)
        return Verdict(False, PERFECT_PSL2, evidence={"n": None})

    ref = _reference("SL:2:5")
    match = fingerprint(ref) == fp
    certified = _certify(G, ref, settings) if match else None
    evidence = {"reference": "SL:2:5", "fingerprint_match": match, "certified": certified}
    return Verdict(match and certified is not False, PERFECT_SL25, evidence=evidence)


def structural_verdict(G: FiniteGroup, settings: Optional[Settings] = None) -> Verdict:
    """Classification decision tree."""
    settings = settings or Settings()
    if is_nilpotent(G):
        return Verdict(True, NILPOTENT)
    if is_perfect(G):
        return perfect_structural_verdict(G, settings)
    if not is_nilpotent(derived_subgroup(G)):
        return Verdict(False, REJECTED_FILTER, filter="perfect-or-soluble")
    return soluble_structural_verdict(G, settings.parallel)


# ============================================================================
# Harness
# ============================================================================

@dataclass
class CrossCheck:
    """Both verdicts for one group; bruteforce is None when it refused."""

    structural: Verdict
    bruteforce: Optional[Verdict]
    refusal: Optional[str] = None

    @property
    def agreement(self) -> Optional[bool]:
        if self.bruteforce is None:
            return None
        return self.structural.member == self.bruteforce.member


def cross_check(G: FiniteGroup, settings: Optional[Settings] = None, strict: bool = True) -> CrossCheck:
    """
    Run both deciders (concurrently with --parallel > 1) and compare.

    Raises:
        DeciderDisagreement: the verdicts differ and strict is set
    """
    settings = settings or Settings()

    def run(which: str):
        try:
            if which == "structural":
                return structural_verdict(G, settings)
            return bruteforce_verdict(G, settings)
        except BudgetRefusal as exc:
            return exc

    structural, brute = ordered_map(run, ["structural", "bruteforce"], min(settings.parallel, 2))
    if isinstance(structural, BudgetRefusal):
        raise structural
    if isinstance(brute, BudgetRefusal):
        logger.info("crosscheck %s: brute force refused (%s)", G.name, brute)
        return CrossCheck(structural, None, refusal=str(brute))
    result = CrossCheck(structural, brute)
    if not result.agreement:
        logger.error("crosscheck %s: structural says %s, brute force says %s", G.name, structural, brute)
        if strict:
            raise DeciderDisagreement(f"deciders disagree on {G.name}", structural, brute)
    return result


@dataclass
class AuditReport:
    """Outcome of re-deciding every subgroup class and quotient of a member."""

    subgroups_checked: int = 0
    quotients_checked: int = 0
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def closure_audit(G: FiniteGroup, settings: Optional[Settings] = None) -> AuditReport:
    """
    Check that every subgroup and every quotient of a member is a member.

    Raises:
        UsageError: G is not a member
        BudgetRefusal: a lattice is truncated
    """
    settings = settings or Settings()
    if not bruteforce_verdict(G, settings).member:
        raise UsageError(f"{G.name} is not a member; nothing to audit")
    report = AuditReport()
    lattice = all_subgroups(G, settings)
    if lattice.truncated:
        raise BudgetRefusal(f"lattice of {G.name} is truncated")
    for rep, _ in lattice.class_reps:
        if rep.is_whole:
            continue
        report.subgroups_checked += 1
        if not bruteforce_verdict(rep.as_group(), settings).member:
            report.failures.append(f"subgroup of order {rep.order}")
    for N in normal_subgroups(G):
        if N.is_trivial:
            continue
        report.quotients_checked += 1
        if not bruteforce_verdict(quotient_group(G, N), settings).member:
            report.failures.append(f"quotient by normal subgroup of order {N.order}")
    logger.info("closure audit %s: %d subgroups, %d quotients, %d failures", G.name,
                report.subgroups_checked, report.quotients_checked, len(report.failures))
    return report


@dataclass
class ReductionReport:
    """Membership of a simple group against membership of its maximal subgroups."""

    group_member: bool
    maximal_members: List[Tuple[SubgroupHandle, bool]]

    @property
    def all_maximal_members(self) -> bool:
        return all(ok for _, ok in self.maximal_members)

    @property
    def consistent(self) -> bool:
        return self.group_member == self.all_maximal_members


def simple_maximal_reduction_check(G: FiniteGroup, settings: Optional[Settings] = None) -> ReductionReport:
    """
    A simple group is a member exactly when all its maximal subgroups are.

    Raises:
        UsageError: G is not simple
        BudgetRefusal: the lattice is truncated
    """
    settings = settings or Settings()
    if not is_simple(G):
        raise UsageError(f"{G.name} is not simple")
    lattice = all_subgroups(G, settings)
    if lattice.truncated:
        raise BudgetRefusal(f"lattice of {G.name} is truncated")
    reps = []
    seen = set()
    for M in lattice.maximal:
        rep, _ = lattice.class_of(M)
        if rep.key not in seen:
            seen.add(rep.key)
            reps.append(rep)
    members = [(M, bruteforce_verdict(M.as_group(), settings).member) for M in reps]
    return ReductionReport(bruteforce_verdict(G, settings).member, members)
