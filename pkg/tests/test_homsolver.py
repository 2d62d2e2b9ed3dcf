from fractions import Fraction

import pytest

from cellcover.constructions import build_corner, build_corrected, build_lemma22
from cellcover.groups import (
    Basis,
    ElementExpr,
    GroupPresentation,
    ROLE_KERNEL,
)
from cellcover.homsolver import (
    GENERATORS,
    Homomorphism,
    SearchBounds,
    ZERO_PROVEN,
    brute_force_homs,
    end_ring,
    homs_in_box,
    is_fully_invariant,
    lift_of_scalar_multiple,
    lifts_agree,
    presentation_of_rational_group,
    replay_trace,
    search_homs,
    solve_hom,
)
from cellcover.rankone import HeightSequence, INF, RationalGroup

from hom_oracle import fraction_oracle_homs
from conftest import random_hom_instance

E = ElementExpr
BOUNDS = SearchBounds(coeff_bound=30, prime_bound=50)


def rank_one(name, default, exc=None):
    return presentation_of_rational_group(name, RationalGroup.of(default, exc or {}))


class TestSymbolicRules:
    def test_divisible_kernel_into_reduced_cokernel(self):
        K = rank_one("e", 0, {3: INF})
        R = rank_one("h", 1, {3: 0})
        v = solve_hom(K, R, BOUNDS)
        assert v.outcome == ZERO_PROVEN

    def test_integers_endomorphisms(self):
        Z = rank_one("x", 0)
        v = solve_hom(Z, Z, BOUNDS)
        assert v.outcome == GENERATORS
        assert v.scalar_module == RationalGroup.integers()
        assert v.generators[0] == Homomorphism.identity(("x",))

    def test_split_projection_found(self):
        cand = build_lemma22(3, 50)
        v = solve_hom(cand.G, cand.K, BOUNDS)
        assert v.outcome == GENERATORS
        # the explicit retraction: kernel fixed, lift sent to the kernel
        # generator; solver must report exactly this one-parameter family
        proj = Homomorphism.from_columns(
            ("e", "a"), ("e",), {"e": E.sym("e"), "a": E.sym("e")}
        )
        assert v.generators == (proj,)
        assert v.scalar_module == RationalGroup.with_inverted(3)

    def test_corrected_candidate_has_no_kernel_homs(self):
        cand = build_corrected(3, 100)
        v = solve_hom(cand.G, cand.K, BOUNDS)
        assert v.outcome == ZERO_PROVEN
        rules = [s.rule for s in v.trace]
        assert "sigma-defeats-scalar" in rules
        assert "sigma-totality" in rules

    def test_zero_proven_trace_replays(self):
        cand = build_corrected(3, 100)
        v = solve_hom(cand.G, cand.K, BOUNDS)
        assert replay_trace(v, cand.G, cand.K, BOUNDS)

    def test_completion_source_zero(self):
        cand = build_corner(1, precision=24, seed=3, coeff_bound=50)
        v = solve_hom(cand.G, cand.K, SearchBounds(coeff_bound=50, prime_bound=20))
        assert v.outcome == ZERO_PROVEN
        assert v.certificates

    def test_completion_trace_replays(self):
        cand = build_corner(1, precision=24, seed=3, coeff_bound=50)
        bounds = SearchBounds(coeff_bound=50, prime_bound=20)
        v = solve_hom(cand.G, cand.K, bounds)
        assert replay_trace(v, cand.G, cand.K, bounds)

    def test_replay_rejects_wrong_presentations(self):
        # a zero verdict replayed against a pair it does not prove must fail
        K = rank_one("e", 0, {3: INF})
        R = rank_one("h", 1, {3: 0})
        v = solve_hom(K, R, BOUNDS)
        assert v.outcome == ZERO_PROVEN
        Z = rank_one("h", 0, {3: INF})
        assert not replay_trace(v, K, Z, BOUNDS)  # target is 3-divisible too


class TestEndRing:
    @pytest.mark.parametrize("q", [2, 3, 5])
    def test_localized_away_from_q(self, q):
        R = rank_one("h", 1, {q: 0})
        v = end_ring(R, BOUNDS)
        assert v.outcome == GENERATORS
        assert v.scalar_module == RationalGroup.integers()
        assert v.generators[0] == Homomorphism.identity(("h",))

    def test_inverted_prime(self):
        A = rank_one("x", 0, {3: INF})
        v = end_ring(A, BOUNDS)
        assert v.scalar_module == RationalGroup.with_inverted(3)
        assert v.generators[0] == Homomorphism.identity(("x",))
        # each 1/3^k multiple preserves the group: box expansion hits them
        box = homs_in_box(v, A, A, SearchBounds(coeff_bound=9, prime_bound=10,
                                                den_exponent_cap=2))
        entries = {h.entry("x", "x") for h in box}
        assert Fraction(1, 3) in entries and Fraction(1, 9) in entries

    def test_integers(self):
        Z = rank_one("x", 0)
        v = end_ring(Z, BOUNDS)
        assert v.scalar_module == RationalGroup.integers()


class TestFullInvariance:
    def test_corrected_kernel_proven(self):
        cand = build_corrected(3, 100)
        v = is_fully_invariant(cand.K, cand.G, BOUNDS)
        assert v.is_proven
        assert v.trace[0].rule == "maximal-divisible-subgroup"

    def test_double_kernel_refuted_by_swap(self):
        K2 = GroupPresentation.of(
            Basis.of(e1=ROLE_KERNEL, e2=ROLE_KERNEL),
            {
                "e1": HeightSequence.of(0, {3: INF}),
                "e2": HeightSequence.of(0, {3: INF}),
            },
        )
        K = GroupPresentation.of(
            Basis.of(e1=ROLE_KERNEL), {"e1": HeightSequence.of(0, {3: INF})}
        )
        v = is_fully_invariant(K, K2, SearchBounds(coeff_bound=5, prime_bound=10,
                                                   den_exponent_cap=1))
        assert v.status == "refuted"
        assert v.witness is not None

    def test_corner_kernel_proven_via_cover_structure(self):
        cand = build_corner(1, precision=24, seed=3, coeff_bound=50)
        v = is_fully_invariant(
            cand.K, cand.G, SearchBounds(coeff_bound=50, prime_bound=20),
            candidate=cand,
        )
        assert v.is_proven
        assert v.trace[0].rule == "cover-structure"


class TestLifting:
    def test_scalar_lift_law(self):
        # the lift of r times the projection is multiplication by r
        cand = build_corrected(3, 100)
        for r in (1, 2, 5):
            psi = lift_of_scalar_multiple(cand, r)
            for s in cand.G.basis.names:
                assert psi.column(s) == E.of({s: r})
            # composing with the projection gives r * pi on every basis symbol
            for s in cand.G.basis.names:
                assert cand.pi.apply(psi.column(s)) == cand.pi.apply(
                    E.sym(s)
                ).scale(r)

    def test_lift_uniqueness_under_zero_hom(self):
        cand = build_corrected(3, 100)
        assert solve_hom(cand.G, cand.K, BOUNDS).outcome == ZERO_PROVEN
        psi1 = lift_of_scalar_multiple(cand, 4)
        psi2 = Homomorphism.scalar(cand.G.basis.names, 4)
        assert lifts_agree(cand, psi1, psi2)


class TestSearchVsBruteForce:
    def test_seeded_instances(self, rng):
        for trial in range(12):
            A, B, coeff = random_hom_instance(rng)
            bounds = SearchBounds(
                coeff_bound=min(coeff, 6), prime_bound=13, den_exponent_cap=2
            )
            v = search_homs(A, B, bounds)
            assert v.outcome == GENERATORS
            assert homs_in_box(v, A, B, bounds) == brute_force_homs(A, B, bounds)

    def test_fraction_oracle_cross_check(self, rng):
        for trial in range(4):
            A, B, coeff = random_hom_instance(rng)
            bounds = SearchBounds(coeff_bound=3, prime_bound=13, den_exponent_cap=1)
            assert brute_force_homs(A, B, bounds) == fraction_oracle_homs(
                A, B, bounds
            )

    def test_solve_hom_agrees_when_symbolic(self, rng):
        for trial in range(8):
            A, B, coeff = random_hom_instance(rng)
            bounds = SearchBounds(coeff_bound=4, prime_bound=13, den_exponent_cap=2)
            v = solve_hom(A, B, bounds)
            if v.outcome != GENERATORS:
                continue
            assert homs_in_box(v, A, B, bounds) == brute_force_homs(A, B, bounds)
