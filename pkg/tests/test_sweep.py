"""
Tests for family and semidirect sweeps.
"""

import pytest

from src.selfnorm.config import Settings
from src.selfnorm.errors import ParseError, UsageError
from src.selfnorm.group import abelian_group
from src.selfnorm.sweep import (
    SweepRow,
    abelian_types,
    dihedral_expected,
    family_specs,
    linear_expected,
    order_p_automorphisms,
    parse_range,
    sweep_exit_code,
    sweep_family,
    sweep_semidirect,
)


def _without_timing(rows):
    return [{k: v for k, v in r.as_dict().items() if k != "timing_ms"} for r in rows]


# ============================================================================
# Helpers
# ============================================================================

class TestRangesAndExpectations:
    """
    Test range parsing and the closed-form expectations.

    Goal: Sweeps know what each family should give.
    """

    @pytest.mark.parametrize("text,expected", [("3..16", (3, 16)), ("7", (7, 7)), ("1..1", (1, 1))])
    def test_parse_range(self, text, expected):
        """
        Test: a..b and single integers parse inclusively.
        Purpose: CLI sweep ranges.
        """
        assert parse_range(text) == expected

    @pytest.mark.parametrize("text", ["abc", "5..3", "0..4", "3..x"])
    def test_bad_ranges(self, text):
        """
        Test: Malformed or empty ranges raise ParseError.
        Purpose: Exit code 3 for bad sweep input.
        """
        with pytest.raises(ParseError):
            parse_range(text)

    def test_dihedral_expectation(self):
        """
        Test: Dih(n) is expected exactly for odd n and powers of 2.
        Purpose: Closed form for the dihedral family.
        """
        assert [n for n in range(3, 17) if dihedral_expected(n)] == [3, 4, 5, 7, 8, 9, 11, 13, 15, 16]

    @pytest.mark.parametrize("q,expected", [(2, True), (3, True), (4, True), (5, True), (7, False),
                                            (8, True), (9, False), (16, False), (32, True), (128, True)])
    def test_linear_expectation(self, q, expected):
        """
        Test: q <= 5 or q = 2^n with 2^n - 1 prime.
        Purpose: Closed form for SL2(q) and PSL2(q).
        """
        assert linear_expected(q) == expected

    def test_family_specs(self):
        """
        Test: SL2 ranges keep only prime powers.
        Purpose: q must be a field order.
        """
        assert [s for s, _ in family_specs("SL2", 2, 9)] == ["SL:2:2", "SL:2:3", "SL:2:4", "SL:2:5",
                                                           "SL:2:7", "SL:2:8", "SL:2:9"]
        with pytest.raises(UsageError):
            family_specs("Z", 1, 2)

    def test_exit_code(self):
        """
        Test: 4 beats 2 beats 0.
        Purpose: A disagreement is reported ahead of a refusal.
        """
        ok = SweepRow("a", 2, True, True)
        refused = SweepRow("b", 60, True, None, refusal="truncated")
        bad = SweepRow("c", 6, True, False)
        assert sweep_exit_code([ok]) == 0
        assert sweep_exit_code([ok, refused]) == 2
        assert sweep_exit_code([ok, refused, bad]) == 4
        assert sweep_exit_code([SweepRow("d", 12, False, False, expected=True)]) == 4


class TestAbelianAutomorphisms:
    """
    Test enumeration of abelian types and automorphisms of order p.

    Goal: Complete, sorted, verified action lists.
    """

    def test_abelian_types(self):
        """
        Test: Orders 2..8 give 10 abelian types.
        Purpose: One per partition of each prime exponent.
        """
        types = abelian_types(8)
        assert len(types) == 10
        assert types[:3] == [(2,), (3,), (2, 2)]
        assert (2, 2, 2) in types and (2, 4) in types and (8,) in types

    def test_inversion_on_c3(self):
        """
        Test: The only automorphism of order 2 of C3 is inversion.
        Purpose: Aut(C3) = C2.
        """
        assert order_p_automorphisms(abelian_group((3,)), 2) == [(0, 2, 1)]

    def test_order_three_on_klein(self):
        """
        Test: C2 x C2 has two automorphisms of order 3.
        Purpose: Aut(V4) = Sym(3).
        """
        actions = order_p_automorphisms(abelian_group((2, 2)), 3)
        assert len(actions) == 2
        assert actions == sorted(actions)

    def test_no_actions(self):
        """
        Test: C5 has no automorphism of order 3; a non-prime p is refused.
        Purpose: |Aut(C5)| = 4.
        """
        assert order_p_automorphisms(abelian_group((5,)), 3) == []
        with pytest.raises(UsageError):
            order_p_automorphisms(abelian_group((5,)), 4)

    def test_cap(self):
        """
        Test: The cap bounds the number of returned actions.
        Purpose: Large automorphism groups are sampled.
        """
        A = abelian_group((3, 3))
        assert len(order_p_automorphisms(A, 2, cap=3)) == 3


# ============================================================================
# Sweeps
# ============================================================================

class TestSweeps:
    """
    Test the family and semidirect sweeps end to end.

    Goal: No disagreement and every expectation met.
    """

    def test_dihedral_sweep(self):
        """
        Test: D 3..16 accepts n in {3, 4, 5, 7, 8, 9, 11, 13, 15, 16}.
        Purpose: Both deciders match the closed form.
        """
        rows = sweep_family("D", 3, 16)
        assert not any(r.disagrees for r in rows)
        accepted = {int(r.label.split(":")[1]) for r in rows if r.structural}
        assert accepted == {3, 4, 5, 7, 8, 9, 11, 13, 15, 16}
        assert sweep_exit_code(rows) == 0

    def test_linear_sweep(self):
        """
        Test: PSL2(q) for q in 2..7 matches the expectation.
        Purpose: PSL2(7) is the first rejected linear group.
        """
        rows = sweep_family("PSL2", 2, 7)
        assert [(r.label, r.structural) for r in rows] == [
            ("PSL:2:2", True), ("PSL:2:3", True), ("PSL:2:4", True), ("PSL:2:5", True), ("PSL:2:7", False)]
        assert sweep_exit_code(rows) == 0

    def test_small_semidirect_sweep(self):
        """
        Test: Star property and brute force agree on C_p x| A, |A| <= 9, p in {2, 3}.
        Purpose: The star criterion decides these products.
        """
        rows = sweep_semidirect(9, primes=(2, 3), actions_cap=20)
        assert rows, "some actions exist"
        assert not any(r.disagrees for r in rows), [r.label for r in rows if r.disagrees]
        assert all(r.route == "star" for r in rows)

    def test_without_lattice(self):
        """
        Test: With budget 3 most types have no shared lattice; star values and actions are unchanged.
        Purpose: The row-by-row path decides the star property the same way.
        """
        default = sweep_semidirect(9, primes=(2, 3), actions_cap=20)
        small = sweep_semidirect(9, primes=(2, 3), actions_cap=20, settings=Settings(budget=3))
        assert [(r.label, r.structural, r.detail) for r in small] == \
               [(r.label, r.structural, r.detail) for r in default]
        refused = [r for r in small if r.refusal]
        assert refused
        assert all(r.bruteforce is None for r in refused)
        assert all(r.bruteforce is True for r in small if not r.refusal)
        assert sweep_exit_code(small) == 2

    def test_parallel_rows(self):
        """
        Test: Four workers give the same rows, in the same order, as one.
        Purpose: Sweep output does not depend on --parallel.
        """
        serial = sweep_semidirect(9, primes=(2, 3), actions_cap=20, settings=Settings(parallel=1))
        parallel = sweep_semidirect(9, primes=(2, 3), actions_cap=20, settings=Settings(parallel=4))
        assert _without_timing(parallel) == _without_timing(serial)

    @pytest.mark.slow
    def test_semidirect_sweep_to_32(self):
        """
        Test: No disagreement over |A| <= 32 and p in {2, 3, 5, 7}.
        Purpose: Wider agreement of the two deciders.
        """
        rows = sweep_semidirect(32, actions_cap=50)
        assert sweep_exit_code(rows) == 0

    @pytest.mark.slow
    def test_semidirect_sweep_to_64(self):
        """
        Test: No disagreement or refusal over |A| <= 64, p in {2, 3, 5, 7}, 500 actions per pair.
        Purpose: The full acceptance sweep, the one that shares lattices across actions.
        """
        rows = sweep_semidirect(64)
        assert rows
        assert not any(r.disagrees for r in rows), [r.label for r in rows if r.disagrees]
        assert sweep_exit_code(rows) == 0

    @pytest.mark.slow
    def test_special_linear_sweep(self):
        """
        Test: SL2(q) for prime powers q <= 9 meets the closed form.
        Purpose: Includes SL2(8), a member, and SL2(9), a non-member.
        """
        rows = sweep_family("SL2", 2, 9)
        assert sweep_exit_code(rows) == 0
