"""
Tests for the commutator map ad_x, the star property, and splittings.

The property classes run over the semidirect fixtures plus a small family of
C_p x| A with A abelian of order <= 12, every (sampled) action of order p.
"""

import numpy as np
import pytest

from src.selfnorm.errors import UsageError, ValidationError
from src.selfnorm.group import abelian_group, quotient_group, semidirect_product
from src.selfnorm.lattice import MaskedLattice, all_subgroups, invariant_subgroups
from src.selfnorm.results import REJECTED_FILTER, SOLUBLE_SPLIT
from src.selfnorm.star import (
    AdAction,
    Splitting,
    ad_apply,
    ad_generated,
    ad_image,
    ad_trace,
    ad_vanishes,
    find_splitting,
    induced_action_fixed_point_free,
    is_fixed_point_free,
    soluble_filters,
    soluble_structural_verdict,
    star_check,
    star_scan,
)
from src.selfnorm.structure import (
    center,
    commutator_subgroup,
    hypercenter,
    is_nilpotent,
    subgroup_generated,
)
from src.selfnorm.sweep import abelian_types, order_p_automorphisms
from src.selfnorm.verdict import bruteforce_verdict, fingerprint


FIXTURES = ["c3_inversion", "c5_squaring", "c6_inversion", "q8_c3"]


def _inversion(n):
    return [(-k) % n for k in range(n)]


def _set_product(G, left, right):
    T = G.table
    return set(T[np.ix_(np.asarray(left), np.asarray(right))].ravel().tolist())


@pytest.fixture(scope="module")
def small_products():
    """(label, p, A order, G) for C_p x| A, |A| <= 12, p in {2, 3}, <= 6 actions each."""
    out = []
    for invariants in abelian_types(12):
        A = abelian_group(invariants)
        for p in (2, 3):
            for k, action in enumerate(order_p_automorphisms(A, p, cap=6)):
                label = f"C{p} x| Ab:{'x'.join(map(str, invariants))} #{k}"
                out.append((label, p, A.order, semidirect_product(A, p, action, name=label)))
    return out


@pytest.fixture(scope="module")
def all_products(small_products, semidirect):
    fixtures = []
    for stem in FIXTURES:
        spec, G = semidirect(stem)
        fixtures.append((stem, None, spec.H.order, G))
    return fixtures + small_products


# ============================================================================
# ad_x
# ============================================================================

class TestAdMap:
    """
    Test ad_x(h) = [x, h] and its images.

    Goal: Exact commutator images under the package convention.
    """

    def test_identity_maps_to_identity(self, semidirect):
        """
        Test: ad_x(1) = 1.
        Purpose: Trivial case of the commutator map.
        """
        _, G = semidirect("c5_squaring")
        assert ad_apply(G, G.labels["x"], 0) == 0

    @pytest.mark.parametrize("n", [3, 5, 7, 9, 11])
    def test_inversion_squares(self, group, n):
        """
        Test: With x inverting C_n, [x, h] = h^2, and ad_x is onto C_n for odd n.
        Purpose: Pins the commutator convention on the dihedral case.
        """
        G = semidirect_product(group(f"C:{n}"), 2, _inversion(n))
        x, H = G.labels["x"], G.embeddings["H"]
        assert ad_apply(G, x, 1) == 2
        assert ad_image(G, x, H) == H.members

    def test_quaternion_central_element(self, semidirect):
        """
        Test: The order-3 automorphism of Q8 fixes -1, so [x, -1] = 1.
        Purpose: x has a non-trivial fixed point on Q8.
        """
        _, G = semidirect("q8_c3")
        assert ad_apply(G, G.labels["x"], 2) == 0

    def test_element_arguments(self, semidirect):
        """
        Test: ad_apply on payload elements returns a payload element.
        Purpose: Callers may pass elements instead of indices.
        """
        _, G = semidirect("c3_inversion")
        x, h = G.element(G.labels["x"]), G.element(1)
        assert ad_apply(G, x, h) == G.element(2)

    def test_requires_normalising_x(self, group):
        """
        Test: x must normalise the subgroup it acts on.
        Purpose: ad_x is only defined on x-invariant subgroups.
        """
        G = group("S:3")
        orders = G.element_orders()
        t = int(np.flatnonzero(orders == 2)[0])
        c = int(np.flatnonzero(orders == 3)[0])
        with pytest.raises(UsageError):
            ad_image(G, c, subgroup_generated(G, [t]))


class TestVanishing:
    """
    Test iterated images ad_x^n(K).

    Goal: vanishes(n) at the first n with image {1}; fails on a repeat.
    """

    def test_trivial_subgroup(self, semidirect):
        """
        Test: The trivial subgroup vanishes at n = 1.
        Purpose: The exists-n quantifier starts at 1.
        """
        _, G = semidirect("c3_inversion")
        v = ad_vanishes(G, G.labels["x"], G.trivial)
        assert v.vanishes and v.n == 1
        assert str(v) == "vanishes(1)"

    def test_inversion_on_c3_fails(self, semidirect):
        """
        Test: Inversion on C3 keeps mapping C3 onto itself.
        Purpose: Cycle detection ends a non-vanishing sequence.
        """
        _, G = semidirect("c3_inversion")
        H = G.embeddings["H"]
        assert not ad_vanishes(G, G.labels["x"], H).vanishes
        trace = ad_trace(G, G.labels["x"], H)
        assert trace.label == "regenerates"
        assert trace.generated_image == H

    def test_trivial_action_vanishes_at_once(self, group):
        """
        Test: With x acting trivially, every K vanishes at n = 1.
        Purpose: [x, h] = 1 for all h.
        """
        G = semidirect_product(group("C:5"), 2, list(range(5)))
        v = ad_vanishes(G, G.labels["x"], G.embeddings["H"])
        assert (v.vanishes, v.n) == (True, 1)
        assert star_check(G, G.labels["x"]).holds

    def test_inversion_on_c4_vanishes(self, group):
        """
        Test: Inversion on C4 squares: C4 -> C2 -> 1.
        Purpose: Vanishing after two steps.
        """
        G = semidirect_product(group("C:4"), 2, _inversion(4))
        trace = ad_trace(G, G.labels["x"], G.embeddings["H"])
        assert trace.label == "vanishes(2)"
        assert [len(s) for s in trace.image_sets] == [4, 2, 1]

    def test_c6_inversion_trace(self, semidirect):
        """
        Test: Inversion on C6: images C6 -> C3 -> C3, generated image C3.
        Purpose: The pinned star violator.
        """
        _, G = semidirect("c6_inversion")
        trace = ad_trace(G, G.labels["x"], G.embeddings["H"])
        assert [len(s) for s in trace.image_sets] == [6, 3, 3]
        assert trace.generated_image.order == 3
        assert trace.label == "violates"
        assert not trace.satisfies_star


# ============================================================================
# Star property
# ============================================================================

class TestStarCheck:
    """
    Test star_check on the fixtures.

    Goal: holds / violated_by with the canonically first violator.
    """

    def test_c3_inversion_holds(self, semidirect):
        """
        Test: Inversion on C3 has the star property.
        Purpose: Dih(3) is a member.
        """
        _, G = semidirect("c3_inversion")
        report = star_check(G, G.labels["x"])
        assert report.holds
        assert str(report) == "holds"

    def test_quaternion_holds(self, semidirect):
        """
        Test: The order-3 automorphism of Q8 has the star property.
        Purpose: SL2(3) is a member although x fixes -1.
        """
        _, G = semidirect("q8_c3")
        report = star_check(G, G.labels["x"])
        assert report.holds
        assert [t.label for t in report.traces] == ["vanishes(1)", "vanishes(1)", "regenerates"]

    def test_quaternion_modulo_centre(self, semidirect, group):
        """
        Test: Modulo <-1> the product is Alt(4) and x acts freely on Q8/<-1>.
        Purpose: x fixes -1 on Q8 but no non-trivial coset of it.
        """
        _, G = semidirect("q8_c3")
        x, H = G.labels["x"], G.embeddings["H"]
        Z = subgroup_generated(G, [2])
        assert fingerprint(quotient_group(G, Z)) == fingerprint(group("A:4"))
        assert not is_fixed_point_free(G, x, H)
        assert induced_action_fixed_point_free(G, x, H, Z)

    def test_c6_inversion_violated(self, semidirect):
        """
        Test: Inversion on C6 is violated by K = C6.
        Purpose: Regression fixture for a rejected product (Dih(6)).
        """
        _, G = semidirect("c6_inversion")
        report = star_check(G, G.labels["x"])
        assert not report.holds
        assert report.violator.members == (0, 1, 2, 3, 4, 5)
        labels = {t.K.order: t.label for t in report.traces}
        assert labels == {1: "vanishes(1)", 2: "vanishes(1)", 3: "regenerates", 6: "violates"}

    def test_c5_squaring_holds(self, semidirect):
        """
        Test: Squaring on C5 (x of order 4) has the star property.
        Purpose: ad_x is a bijection on C5; membership also needs x^p central.
        """
        _, G = semidirect("c5_squaring")
        action = AdAction(G, G.labels["x"])
        assert action.star_check().holds
        assert action.is_bijective()
        assert action.is_fixed_point_free()

    def test_worker_count_independent(self, semidirect):
        """
        Test: Parallel star_check reports the same violator and traces.
        Purpose: Determinism across worker counts.
        """
        _, G = semidirect("c6_inversion")
        serial = star_check(G, G.labels["x"], workers=1)
        parallel = star_check(G, G.labels["x"], workers=4)
        assert serial.violator == parallel.violator
        assert [t.label for t in serial.traces] == [t.label for t in parallel.traces]

    def test_non_nilpotent_h(self, group):
        """
        Test: star_check on a non-nilpotent H raises UsageError.
        Purpose: The star property is only defined for nilpotent H.
        """
        G = group("S:4")
        with pytest.raises(UsageError):
            star_check(G, 0, G.whole)


class TestStarScan:
    """
    Test star_scan against star_check.

    Goal: Same verdict and violator from a lattice shared across actions.
    """

    def test_matches_star_check(self, all_products):
        """
        Test: On every product, star_scan and star_check agree on holds and violator.
        Purpose: The sweep's fast path decides exactly what the traced check does.
        """
        for label, _, _, G in all_products:
            x, H = G.labels["x"], G.embeddings["H"]
            lattice = MaskedLattice.of(H.as_group())
            full = star_check(G, x)
            fast = star_scan(G, x, H, lattice)
            assert fast.holds == full.holds, label
            assert fast.violator == full.violator, label
            assert fast.traces == []

    def test_c6_inversion_violator(self, semidirect):
        """
        Test: The scan names C6 itself as the violator of inversion on C6.
        Purpose: Pinned violator through the lattice rows.
        """
        _, G = semidirect("c6_inversion")
        H = G.embeddings["H"]
        report = star_scan(G, G.labels["x"], H, MaskedLattice.of(H.as_group()))
        assert not report.holds
        assert report.violator.members == (0, 1, 2, 3, 4, 5)

    def test_vanishing_h_skips_the_lattice(self, group, monkeypatch):
        """
        Test: When ad_x kills H, the invariant rows are never computed.
        Purpose: Nilpotent products cost one iteration on H.
        """
        G = semidirect_product(group("C:4"), 2, _inversion(4))
        H = G.embeddings["H"]
        lattice = MaskedLattice.of(H.as_group())

        def fail(self, sigma):
            raise AssertionError("invariant rows computed")

        monkeypatch.setattr(MaskedLattice, "invariant_rows", fail)
        assert star_scan(G, G.labels["x"], H, lattice).holds

    def test_wrong_lattice(self, semidirect, group):
        """
        Test: A lattice of another width raises UsageError.
        Purpose: Rows are positions in H and must line up with it.
        """
        _, G = semidirect("c6_inversion")
        with pytest.raises(UsageError):
            star_scan(G, G.labels["x"], G.embeddings["H"], MaskedLattice.of(group("C:5")))


# ============================================================================
# Properties of ad_x over the small products
# ============================================================================

class TestAdProperties:
    """
    Test structural facts about ad_x across the small semidirect products.

    Goal: Each fact holds for every group in the family.
    """

    def test_image_times_derived(self, all_products):
        """
        Test: ad_x(K) K' equals <ad_x(K)> K' element for element.
        Purpose: Images generate a subgroup modulo the derived subgroup.
        """
        for label, _, _, G in all_products:
            action = AdAction(G, G.labels["x"])
            for K in action.invariant_subgroups():
                Kd = commutator_subgroup(G, K, K)
                lhs = _set_product(G, action.image(K), Kd.array)
                rhs = _set_product(G, action.generated(K).array, Kd.array)
                assert lhs == rhs, f"{label}: K of order {K.order}"

    def test_injective_iff_fixed_point_free(self, all_products):
        """
        Test: ad_x is injective on H exactly when x fixes only 1 in H.
        Purpose: [x, h] = [x, k] iff h k^-1 is fixed.
        """
        for label, _, _, G in all_products:
            action = AdAction(G, G.labels["x"])
            assert action.is_injective() == action.is_fixed_point_free(), label

    def test_injective_implies_star(self, all_products):
        """
        Test: If ad_x is injective on H then the star property holds.
        Purpose: On a finite H an injective ad_x maps each invariant K onto itself.
        """
        for label, _, _, G in all_products:
            action = AdAction(G, G.labels["x"])
            if action.is_injective():
                assert action.star_check().holds, label

    def test_vanishing_implies_nilpotent(self, all_products):
        """
        Test: If ad_x^n(H) = 1 for some n then <x> H is nilpotent.
        Purpose: Iterated commutators reaching 1 give a central series.
        """
        for label, _, _, G in all_products:
            if ad_vanishes(G, G.labels["x"], G.embeddings["H"]).vanishes:
                assert is_nilpotent(G), label

    def test_vanishing_subgroup_gives_center(self, all_products):
        """
        Test: Non-nilpotent, star holds, and a non-trivial K vanishes => Z(G) != 1.
        Purpose: A vanishing invariant subgroup meets the centre.
        """
        for label, _, _, G in all_products:
            if is_nilpotent(G):
                continue
            report = star_check(G, G.labels["x"])
            if report.holds and any(t.label.startswith("vanishes") and t.K.order > 1
                                    for t in report.traces):
                assert not center(G).is_trivial, label

    def test_surjective_means_no_p_part(self, small_products):
        """
        Test: If ad_x maps abelian A onto A then p does not divide |A|.
        Purpose: A finite p-divisible abelian group has trivial p-part.
        """
        for label, p, order, G in small_products:
            action = AdAction(G, G.labels["x"])
            if action.is_bijective():
                assert order % p != 0, label

    def test_star_iff_bruteforce(self, all_products):
        """
        Test: star_check agrees with brute-force membership of the product.
        Purpose: The star property characterises membership of <x> x| H.
        """
        for label, _, _, G in all_products:
            if label == "c5_squaring":
                continue  # x^p does not centralise H; the criterion does not apply
            expected = bruteforce_verdict(G).member
            assert star_check(G, G.labels["x"]).holds == expected, label

    def test_abelian_membership_iff_fixed_point_free(self, small_products):
        """
        Test: For p not dividing |A|, membership iff x acts fixed point freely.
        Purpose: On abelian p'-groups the star property reduces to fixed point freeness.
        """
        for label, p, order, G in small_products:
            if order % p == 0:
                continue
            action = AdAction(G, G.labels["x"])
            assert bruteforce_verdict(G).member == action.is_fixed_point_free(), label

    def test_members_act_freely_modulo_hypercenter(self, small_products):
        """
        Test: For non-nilpotent members, x acts fixed point freely on H Z/Z, Z the hypercentre.
        Purpose: Fixed points of x in members are absorbed by the hypercentre.
        """
        for label, p, order, G in small_products:
            if order % p == 0 or is_nilpotent(G) or not bruteforce_verdict(G).member:
                continue
            action = AdAction(G, G.labels["x"])
            assert action.induced_fixed_point_free(hypercenter(G)), label

    def test_non_nilpotent_subgroups_conjugate_into_splitting(self, small_products):
        """
        Test: With the star property, each non-nilpotent subgroup L has a
        conjugate <x> (L^g n H).
        Purpose: Non-nilpotent subgroups are products of <x> with part of H.
        """
        for label, p, order, G in small_products:
            x, H = G.labels["x"], G.embeddings["H"]
            if order % p == 0 or not star_check(G, x).holds:
                continue
            for L, _ in all_subgroups(G).class_reps:
                if is_nilpotent(L):
                    continue
                found = False
                for g in range(G.order):
                    conj = np.sort(G.conj_perm(g)[L.array])
                    inside = H.mask[conj]
                    if x in set(conj.tolist()) and inside.sum() * p == L.order:
                        found = True
                        break
                assert found, f"{label}: non-nilpotent subgroup of order {L.order}"


# ============================================================================
# Splittings
# ============================================================================

class TestSplitting:
    """
    Test find_splitting and the soluble decider.

    Goal: Splittings exist exactly where expected and are fully verified.
    """

    def test_dihedral_five(self, group):
        """
        Test: Dih(5) splits with p = 2 and H = C5.
        Purpose: Reflections complement the rotations.
        """
        s = find_splitting(group("D:5"))
        assert s is not None
        assert (s.p, s.H.order, s.x_order) == (2, 5, 2)
        assert all(s.checks.values())

    def test_sl23(self, group):
        """
        Test: SL2(3) splits with p = 3, H = Q8 and x of order 3.
        Purpose: The splitting H is the p'-part of the Fitting subgroup.
        """
        s = find_splitting(group("SL:2:3"))
        assert (s.p, s.H.order, s.x_order) == (3, 8, 3)

    def test_sym4_has_none(self, group):
        """
        Test: S4 has no splitting.
        Purpose: [S4 : V4] = 6 is not a prime power.
        """
        assert find_splitting(group("S:4")) is None

    def test_invalid_splitting(self, group):
        """
        Test: Constructing a Splitting with H = 1 fails its checks.
        Purpose: Every condition is verified on construction.
        """
        G = group("D:5")
        t = int(np.flatnonzero(G.element_orders() == 2)[0])
        with pytest.raises(ValidationError):
            Splitting(G, 2, t, G.trivial)

    @pytest.mark.parametrize("spec,member", [("D:5", True), ("D:7", True), ("D:9", True),
                                             ("D:6", False), ("D:12", False), ("SL:2:3", True),
                                             ("A:4", True), ("Dic:3", True)])
    def test_soluble_verdicts(self, group, spec, member):
        """
        Test: Soluble decider outcomes on dihedral and small groups.
        Purpose: Dih(n) is a member iff n is odd or a power of 2.
        """
        assert soluble_structural_verdict(group(spec)).member == member

    def test_sym4_filter(self, group):
        """
        Test: S4 fails the soluble filters; [S4 : F] = 6 is not prime.
        Purpose: Filters reject before any splitting search.
        """
        v = soluble_structural_verdict(group("S:4"))
        assert v.route == REJECTED_FILTER
        assert v.filter == "derived-in-fitting", "A4 is not inside V4, checked first"
        filters = dict(soluble_filters(group("S:4")))
        assert not filters["fitting-index-prime"]

    def test_frobenius_twenty_filtered(self, semidirect):
        """
        Test: C4 x| C5 by squaring is rejected although the star property holds.
        Purpose: [G : F] = 4 is not prime, x^2 does not centralise C5.
        """
        _, G = semidirect("c5_squaring")
        v = soluble_structural_verdict(G)
        assert not v.member
        assert v.filter == "fitting-index-prime"
        assert not bruteforce_verdict(G).member

    def test_split_evidence(self, group):
        """
        Test: Accepted soluble verdicts carry the splitting and star report.
        Purpose: Reports show how the decision was reached.
        """
        v = soluble_structural_verdict(group("D:7"))
        assert v.route == SOLUBLE_SPLIT
        assert isinstance(v.evidence["splitting"], Splitting)
        assert v.evidence["star"].holds

    def test_nilpotent_input(self, group):
        """
        Test: The soluble decider refuses nilpotent input.
        Purpose: Nilpotent groups are handled before the soluble branch.
        """
        with pytest.raises(UsageError):
            soluble_structural_verdict(group("D:4"))
