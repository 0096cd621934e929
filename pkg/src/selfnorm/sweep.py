"""
Parameter sweeps.

Family sweeps (D, C, SL2, PSL2) cross-check both deciders on every parameter
in a range and compare the outcome with the closed-form expectation:
- Dih(n) is a member exactly when n is odd or a power of 2;
- cyclic groups are always members;
- SL2(q) and PSL2(q) are members exactly when q <= 5 or q = 2^n with 2^n - 1 prime.

The semidirect sweep runs over C_p x| A for every abelian type A up to a
given order and every automorphism of A of order p (sampled beyond a cap),
and compares the star property of ad_x on A with the brute-force verdict.
"""

import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sympy import factorint, isprime
from sympy.utilities.iterables import partitions

from .catalog import build_named, closed_form_order, parse_spec
from .config import CLOSURE_CAP, TABLE_LIMIT, Settings
from .errors import BudgetRefusal, ParseError, ResourceError, UsageError
from .group import FiniteGroup, abelian_group, semidirect_product, verify_automorphism
from .lattice import MaskedLattice
from .parallel import ordered_map
from .star import star_check, star_scan
from .verdict import bruteforce_extension_verdict, bruteforce_verdict, cross_check

logger = logging.getLogger(__name__)

FAMILIES = ("D", "C", "SL2", "PSL2", "sd-random")
EXHAUSTIVE_SPACE = 20_000
DEFAULT_ACTIONS_CAP = 500
DEFAULT_PRIMES = (2, 3, 5, 7)
SAMPLE_BATCH = 1024


@dataclass
class SweepRow:
    """One swept group: both verdicts, agreement, and the expectation if known."""

    label: str
    order: int
    structural: Optional[bool]
    bruteforce: Optional[bool]
    route: str = ""
    expected: Optional[bool] = None
    refusal: Optional[str] = None
    detail: Dict[str, Any] = field(default_factory=dict)
    timing_ms: float = 0.0

    @property
    def agreement(self) -> Optional[bool]:
        if self.bruteforce is None or self.structural is None:
            return None
        return self.structural == self.bruteforce

    @property
    def matches_expectation(self) -> Optional[bool]:
        if self.expected is None or self.structural is None:
            return None
        return self.structural == self.expected

    @property
    def disagrees(self) -> bool:
        return self.agreement is False or self.matches_expectation is False

    def as_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "order": self.order,
            "structural": self.structural,
            "bruteforce": self.bruteforce,
            "agreement": self.agreement,
            "route": self.route,
            "expected": self.expected,
            "refusal": self.refusal,
            "detail": self.detail,
            "timing_ms": round(self.timing_ms, 3),
        }


def sweep_exit_code(rows: Sequence[SweepRow]) -> int:
    """4 on any disagreement, 2 when a decider refused, else 0."""
    if any(r.disagrees for r in rows):
        return 4
    if any(r.refusal for r in rows):
        return 2
    return 0


def parse_range(text: str) -> Tuple[int, int]:
    """
    Parse 'a..b' (inclusive) or a single integer.

    Raises:
        ParseError: malformed range or a > b
    """
    lo, sep, hi = text.partition("..")
    try:
        a = int(lo)
        b = int(hi) if sep else a
    except ValueError:
        raise ParseError(f"range must look like a..b, got {text!r}", 1, text)
    if a < 1 or a > b:
        raise ParseError(f"range {text!r} is empty or starts below 1", 1, text)
    return a, b


# ============================================================================
# Closed-form expectations
# ============================================================================

def dihedral_expected(n: int) -> bool:
    return n % 2 == 1 or (n & (n - 1)) == 0


def linear_expected(q: int) -> bool:
    if q <= 5:
        return True
    if q & (q - 1):
        return False
    return bool(isprime(q - 1))


def _prime_powers(a: int, b: int) -> List[int]:
    return [q for q in range(max(a, 2), b + 1) if len(factorint(q)) == 1]


def family_specs(family: str, a: int, b: int) -> List[Tuple[str, Optional[bool]]]:
    """Catalog specs and expected membership for one family over [a, b]."""
    if family == "D":
        return [(f"D:{n}", dihedral_expected(n)) for n in range(a, b + 1)]
    if family == "C":
        return [(f"C:{n}", True) for n in range(a, b + 1)]
    if family == "SL2":
        return [(f"SL:2:{q}", linear_expected(q)) for q in _prime_powers(a, b)]
    if family == "PSL2":
        return [(f"PSL:2:{q}", linear_expected(q)) for q in _prime_powers(a, b)]
    raise UsageError(f"unknown sweep family {family!r}; expected one of {', '.join(FAMILIES[:-1])}")


# ============================================================================
# Family sweeps
# ============================================================================

def sweep_family(family: str, a: int, b: int, settings: Optional[Settings] = None) -> List[SweepRow]:
    """Cross-check every group of a family over the parameter range [a, b]."""
    settings = settings or Settings()
    specs = family_specs(family, a, b)
    for text, _ in specs:
        order = closed_form_order(parse_spec(text))
        if order is not None and order > CLOSURE_CAP:
            raise ResourceError(f"{text}: order {order} is beyond the closure cap")
    rows = []
    for text, expected in specs:
        start = time.perf_counter()
        G = build_named(text)
        result = cross_check(G, settings, strict=False)
        row = SweepRow(
            label=text,
            order=G.order,
            structural=result.structural.member,
            bruteforce=result.bruteforce.member if result.bruteforce is not None else None,
            route=result.structural.route_label,
            expected=expected,
            refusal=result.refusal,
            timing_ms=(time.perf_counter() - start) * 1000,
        )
        logger.info("sweep %s: %s %s", family, text,
                    "accepted" if row.structural else "rejected")
        rows.append(row)
    return rows


# ============================================================================
# Abelian groups and their automorphisms
# ============================================================================

def abelian_types(order_max: int, order_min: int = 2) -> List[Tuple[int, ...]]:
    """
    Every abelian group of order in [order_min, order_max], as primary
    invariants in ascending order, sorted by (order, invariants).
    """
    types = []
    for n in range(max(order_min, 1), order_max + 1):
        per_prime = []
        for p, k in sorted(factorint(n).items()):
            options = []
            for part in partitions(k):
                powers = sorted(p ** size for size, mult in part.items() for _ in range(mult))
                options.append(tuple(powers))
            per_prime.append(sorted(options))
        for combo in itertools.product(*per_prime):
            types.append(tuple(sorted(itertools.chain.from_iterable(combo))))
    return sorted(set(types), key=lambda t: (int(np.prod(t)) if t else 1, t))


def _layout(A: FiniteGroup) -> Tuple[np.ndarray, np.ndarray]:
    """Strides and cyclic orders of the factors of an abelian_group table."""
    gens = A.generators
    strides = np.array(gens, dtype=np.int64)
    orders = np.array([A.order_of(g) for g in gens], dtype=np.int64)
    if int(np.prod(orders)) != A.order:
        raise UsageError(f"{A.name} is not laid out as a product of cyclic factors")
    return strides, orders


def _perm_power(phi: np.ndarray, e: int) -> np.ndarray:
    result = np.arange(phi.size)
    base = phi.copy()
    while e:
        if e & 1:
            result = base[result]
        base = base[base]
        e >>= 1
    return result


def _perm_order(phi: np.ndarray) -> int:
    seen = np.zeros(phi.size, dtype=bool)
    order = 1
    for start in range(phi.size):
        if seen[start]:
            continue
        length, j = 0, start
        while not seen[j]:
            seen[j] = True
            j = int(phi[j])
            length += 1
        order = int(np.lcm(order, length))
    return order


def _rows_of_order(phis: np.ndarray, p: int) -> np.ndarray:
    """Mask of the rows (permutations) of exact prime order p."""
    result = np.tile(np.arange(phis.shape[1]), (phis.shape[0], 1))
    base, e = phis, p
    while e:
        if e & 1:
            result = np.take_along_axis(base, result, axis=1)
        base = np.take_along_axis(base, base, axis=1)
        e >>= 1
    identity = np.arange(phis.shape[1])
    return (result == identity).all(axis=1) & (phis != identity).any(axis=1)


def order_p_automorphisms(A: FiniteGroup, p: int, cap: int = DEFAULT_ACTIONS_CAP,
                          seed: int = 0) -> List[Tuple[int, ...]]:
    """
    Automorphisms of exact order p of an abelian_group, as index maps.

    All of them when the space of generator-image tuples has at most 20 000
    points (a seeded sample of `cap` when there are more than that), otherwise
    p-parts of seeded random automorphisms, drawn in batches, until `cap`
    distinct ones are found or the attempts run out. Results are sorted.
    """
    if not isprime(p):
        raise UsageError(f"p = {p} is not prime")
    if A.order == 1:
        return []
    strides, orders = _layout(A)
    n = A.order
    identity = np.arange(n)
    digits = (identity[:, None] // strides[None, :]) % orders[None, :]
    elem_orders = A.element_orders()
    candidates = [np.flatnonzero(m % elem_orders == 0) for m in orders]

    def automorphisms(images: np.ndarray) -> np.ndarray:
        """Index maps of a batch of generator-image tuples; bijective rows only."""
        img_digits = digits[images]                                   # b x k x k
        coords = np.einsum("nk,bkj->bnj", digits, img_digits) % orders
        phis = coords @ strides
        return phis[(np.sort(phis, axis=1) == identity).all(axis=1)]

    rng = np.random.default_rng(seed)
    space = int(np.prod([len(c) for c in candidates]))
    if space <= EXHAUSTIVE_SPACE:
        grid = np.array(list(itertools.product(*candidates)), dtype=np.int64)
        phis = automorphisms(grid)
        result = sorted({tuple(int(v) for v in phi) for phi in phis[_rows_of_order(phis, p)]})
        if len(result) > cap:
            chosen = sorted(rng.choice(len(result), size=cap, replace=False))
            result = [result[i] for i in chosen]
    else:
        found = set()
        attempts = 0
        while len(found) < cap and attempts < 200 * cap:
            images = np.stack([rng.choice(c, size=SAMPLE_BATCH) for c in candidates], axis=1)
            attempts += SAMPLE_BATCH
            for phi in automorphisms(images):
                r = _perm_order(phi)
                if r % p == 0:
                    found.add(tuple(int(v) for v in _perm_power(phi, r // p)))
                    if len(found) == cap:
                        break
        result = sorted(found)
    for action in result:
        verify_automorphism(A, action)
    return result


# ============================================================================
# Semidirect sweep
# ============================================================================

def semidirect_row(H: FiniteGroup, h_spec: str, p: int, action: Sequence[int],
                   settings: Settings, label: Optional[str] = None,
                   lattice: Optional[MaskedLattice] = None) -> SweepRow:
    """
    Star property against brute force for one C_p x| H.

    With the lattice of H both sides read it instead of enumerating
    subgroups of the product: star_scan over its x-invariant rows, and the
    brute force over the subgroups <xa>B built from it.
    """
    start = time.perf_counter()
    G = semidirect_product(H, p, action, name=label)
    x, H_in_G = G.labels["x"], G.embeddings["H"]
    if lattice is None:
        report = star_check(G, x, H_in_G, settings.parallel)
    else:
        report = star_scan(G, x, H_in_G, lattice)
    try:
        if lattice is None:
            brute = bruteforce_verdict(G, settings).member
        else:
            brute = bruteforce_extension_verdict(G, H_in_G, lattice, settings).member
        refusal = None
    except BudgetRefusal as exc:
        brute, refusal = None, str(exc)
    detail = {"H": h_spec, "p": p, "action": [int(a) for a in action]}
    if not report.holds:
        detail["violated_by"] = [int(m) for m in report.violator.members]
    return SweepRow(
        label=label or G.name,
        order=G.order,
        structural=report.holds,
        bruteforce=brute,
        route="star",
        refusal=refusal,
        detail=detail,
        timing_ms=(time.perf_counter() - start) * 1000,
    )


def _type_lattice(A: FiniteGroup, settings: Settings) -> Optional[MaskedLattice]:
    try:
        return MaskedLattice.of(A, settings)
    except BudgetRefusal as exc:
        logger.info("sweep sd-random: %s; deciding row by row", exc)
        return None


def sweep_semidirect(order_max: int, primes: Iterable[int] = DEFAULT_PRIMES,
                     actions_cap: int = DEFAULT_ACTIONS_CAP,
                     settings: Optional[Settings] = None) -> List[SweepRow]:
    """
    Compare the star property with brute force over C_p x| A for every
    abelian type A with |A| <= order_max and every sampled automorphism of
    order p.

    A's lattice is built once per type and shared by all its actions; the
    rows of one (A, p) are spread over settings.parallel workers and kept
    in action order.
    """
    settings = settings or Settings()
    rows = []
    for invariants in abelian_types(order_max):
        label_a = "Ab:" + "x".join(map(str, invariants))
        A = abelian_group(invariants, name=label_a)
        lattice: Optional[MaskedLattice] = None
        built = False
        for p in primes:
            if A.order * p > TABLE_LIMIT:
                continue
            actions = order_p_automorphisms(A, p, actions_cap, settings.seed)
            if not actions:
                continue
            if not built:
                lattice, built = _type_lattice(A, settings), True

            def run(item: Tuple[int, Sequence[int]]) -> SweepRow:
                k, action = item
                return semidirect_row(A, label_a, p, action, settings,
                                      label=f"C{p} x| {label_a} #{k}", lattice=lattice)

            batch = ordered_map(run, list(enumerate(actions)), settings.parallel)
            for row in batch:
                if row.disagrees:
                    logger.error("sweep sd-random: %s disagrees (star %s, brute force %s)",
                                 row.label, row.structural, row.bruteforce)
            rows.extend(batch)
            logger.info("sweep sd-random: %s, p=%d, %d actions", label_a, p, len(actions))
    return rows
