"""
Small Galois fields GF(p^k) with p^k <= 64.

Elements are polynomial residues modulo a monic irreducible polynomial over the
prime field. A residue c_0 + c_1 x + ... + c_{k-1} x^{k-1} is encoded as the
integer code sum(c_i * p^i), so the prime subfield is exactly the codes
0..p-1. Addition and multiplication are precomputed into lookup tables at
construction; the fields are small enough that every operation is one list
index.

The reduction polynomial is chosen deterministically: the first monic
irreducible polynomial of degree k with non-zero constant term, scanning the
lower coefficients as a base-p counter (constant term least significant).
No Conway tables are needed, and fingerprints stay stable across runs.
"""

import itertools
import logging
import random
from functools import lru_cache
from typing import List, Sequence, Tuple

from sympy import isprime

from .errors import FieldError

logger = logging.getLogger(__name__)

MAX_FIELD_ORDER = 64
MAX_DEGREE = 6
EXHAUSTIVE_AXIOM_LIMIT = 16


# ============================================================================
# Polynomial helpers over the prime field (coefficient lists, low degree first)
# ============================================================================

def _trim(poly: List[int]) -> List[int]:
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    return poly


def poly_mod(a: Sequence[int], m: Sequence[int], p: int) -> List[int]:
    """Remainder of a modulo the monic polynomial m over GF(p)."""
    rem = [c % p for c in a]
    deg_m = len(m) - 1
    for shift in range(len(rem) - 1 - deg_m, -1, -1):
        lead = rem[shift + deg_m]
        if lead:
            for i, c in enumerate(m):
                rem[shift + i] = (rem[shift + i] - lead * c) % p
    return _trim(rem[:deg_m] if deg_m > 0 else [0])


def poly_mul(a: Sequence[int], b: Sequence[int], p: int) -> List[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return out


def monic_polynomials(degree: int, p: int):
    """Monic polynomials of the given degree in scan order."""
    for lower in itertools.product(range(p), repeat=degree):
        # itertools.product varies the last position fastest; reverse so the
        # constant term is the least significant digit of the counter
        yield list(reversed(lower)) + [1]


def is_irreducible(poly: Sequence[int], p: int) -> bool:
    """Trial factorisation: no monic divisor of degree 1..deg/2."""
    degree = len(poly) - 1
    if degree < 1:
        return False
    if degree == 1:
        return True
    for d in range(1, degree // 2 + 1):
        for divisor in monic_polynomials(d, p):
            if poly_mod(poly, divisor, p) == [0]:
                return False
    return True


def lowest_irreducible(p: int, k: int) -> Tuple[int, ...]:
    for poly in monic_polynomials(k, p):
        if poly[0] != 0 and is_irreducible(poly, p):
            return tuple(poly)
    raise FieldError(f"no irreducible polynomial of degree {k} over GF({p})")


# ============================================================================
# Field
# ============================================================================

class GaloisField:
    """
    The finite field GF(p^k), elements encoded as integer codes 0..q-1.

    Attributes:
        p: characteristic
        k: extension degree
        q: field order p^k
        reduction_poly: monic irreducible polynomial, coefficients low degree first
        generator: a primitive element (multiplicative order q - 1)
    """

    def __init__(self, p: int, k: int, reduction_poly: Sequence[int]):
        self.p = p
        self.k = k
        self.q = p ** k
        self.reduction_poly = tuple(reduction_poly)
        if len(self.reduction_poly) != k + 1 or self.reduction_poly[-1] != 1:
            raise FieldError(f"reduction polynomial must be monic of degree {k}")
        if not is_irreducible(self.reduction_poly, p):
            raise FieldError(f"{self.poly_str()} is reducible over GF({p})")

        q = self.q
        self._add = [[self.from_vector([(x + y) % p for x, y in zip(self.to_vector(a), self.to_vector(b))])
                      for b in range(q)] for a in range(q)]
        self._mul = [[self._slow_mul(a, b) for b in range(q)] for a in range(q)]
        self._neg = [self.from_vector([(-x) % p for x in self.to_vector(a)]) for a in range(q)]
        self._inv = [0] * q
        for a in range(1, q):
            for b in range(1, q):
                if self._mul[a][b] == 1:
                    self._inv[a] = b
                    break

        self.generator = self._find_generator()

    # --- encoding -----------------------------------------------------------

    def to_vector(self, a: int) -> Tuple[int, ...]:
        """Coefficient vector (length k, constant term first) of a code."""
        out = []
        for _ in range(self.k):
            out.append(a % self.p)
            a //= self.p
        return tuple(out)

    def from_vector(self, vec: Sequence[int]) -> int:
        code = 0
        for c in reversed(list(vec)):
            code = code * self.p + (c % self.p)
        return code

    def _slow_mul(self, a: int, b: int) -> int:
        prod = poly_mul(list(self.to_vector(a)), list(self.to_vector(b)), self.p)
        rem = poly_mod(prod, self.reduction_poly, self.p)
        rem = rem + [0] * (self.k - len(rem))
        return self.from_vector(rem[:self.k])

    # --- arithmetic ---------------------------------------------------------

    def add(self, a: int, b: int) -> int:
        return self._add[a][b]

    def sub(self, a: int, b: int) -> int:
        return self._add[a][self._neg[b]]

    def neg(self, a: int) -> int:
        return self._neg[a]

    def mul(self, a: int, b: int) -> int:
        return self._mul[a][b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse in a field")
        return self._inv[a]

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        result = 1
        while e:
            if e & 1:
                result = self._mul[result][a]
            a = self._mul[a][a]
            e >>= 1
        return result

    def frobenius(self, a: int) -> int:
        return self.pow(a, self.p)

    def multiplicative_order(self, a: int) -> int:
        if a == 0:
            raise FieldError("0 is not in the multiplicative group")
        x, n = a, 1
        while x != 1:
            x = self._mul[x][a]
            n += 1
        return n

    def prime_subfield(self) -> List[int]:
        return list(range(self.p))

    def elements(self) -> range:
        return range(self.q)

    def _find_generator(self) -> int:
        for a in range(1, self.q):
            if self.multiplicative_order(a) == self.q - 1:
                return a
        raise FieldError(f"GF({self.q}) has no primitive element; reduction polynomial is broken")

    # --- verification -------------------------------------------------------

    def verify_axioms(self, seed: int = 0, samples: int = 2000) -> None:
        """
        Check the field axioms, exhaustively for q <= 16 and on random triples above.

        Raises:
            FieldError: naming the first failing triple
        """
        q = self.q
        if q <= EXHAUSTIVE_AXIOM_LIMIT:
            triples = itertools.product(range(q), repeat=3)
        else:
            rng = random.Random(seed)
            triples = ((rng.randrange(q), rng.randrange(q), rng.randrange(q)) for _ in range(samples))
        add, mul = self._add, self._mul
        for a, b, c in triples:
            if add[add[a][b]][c] != add[a][add[b][c]]:
                raise FieldError(f"addition not associative on {(a, b, c)}")
            if mul[mul[a][b]][c] != mul[a][mul[b][c]]:
                raise FieldError(f"multiplication not associative on {(a, b, c)}")
            if mul[a][add[b][c]] != add[mul[a][b]][mul[a][c]]:
                raise FieldError(f"distributivity fails on {(a, b, c)}")
            if add[a][b] != add[b][a] or mul[a][b] != mul[b][a]:
                raise FieldError(f"commutativity fails on {(a, b)}")
        for a in range(q):
            if add[a][self._neg[a]] != 0 or add[a][0] != a or mul[a][1] != a:
                raise FieldError(f"identity or negation fails at {a}")
            if a and mul[a][self._inv[a]] != 1:
                raise FieldError(f"{a} has no inverse")

    # --- dunder -------------------------------------------------------------

    def poly_str(self) -> str:
        terms = []
        for i in range(len(self.reduction_poly) - 1, -1, -1):
            c = self.reduction_poly[i]
            if not c:
                continue
            if i == 0:
                terms.append(str(c))
                continue
            mono = "x" if i == 1 else f"x^{i}"
            terms.append(mono if c == 1 else f"{c}{mono}")
        return " + ".join(terms)

    def __eq__(self, other) -> bool:
        return (isinstance(other, GaloisField) and self.p == other.p and self.k == other.k
                and self.reduction_poly == other.reduction_poly)

    def __hash__(self) -> int:
        return hash((self.p, self.k, self.reduction_poly))

    def __repr__(self) -> str:
        return f"GF({self.q}) [{self.poly_str()}]"


@lru_cache(maxsize=None)
def gf_make(p: int, k: int = 1) -> GaloisField:
    """
    Build GF(p^k) with the deterministic reduction polynomial.

    Args:
        p: prime characteristic
        k: extension degree, 1 <= k <= 6

    Returns:
        The verified field (cached, so equal arguments give the same object)

    Raises:
        FieldError: p not prime, k out of range, or p^k > 64
    """
    if not isinstance(p, int) or not isprime(p):
        raise FieldError(f"characteristic must be prime, got {p}")
    if not 1 <= k <= MAX_DEGREE:
        raise FieldError(f"extension degree must be in 1..{MAX_DEGREE}, got {k}")
    if p ** k > MAX_FIELD_ORDER:
        raise FieldError(f"GF({p}^{k}) has order {p ** k} > {MAX_FIELD_ORDER}")

    field = GaloisField(p, k, lowest_irreducible(p, k))
    field.verify_axioms()
    logger.debug("built %r, generator %d", field, field.generator)
    return field
