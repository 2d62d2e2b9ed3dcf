from fractions import Fraction
from math import gcd

import pytest

from cellcover.constructions import (
    CellularCandidate,
    build_corner,
    build_corrected,
    build_lemma22,
)
from cellcover.groups import (
    Basis,
    ConstantRule,
    ElementExpr,
    GroupPresentation,
    ROLE_COKERNEL_LIFT,
    ROLE_KERNEL,
    TableRule,
    member,
)
from cellcover.homsolver import Homomorphism, SearchBounds
from cellcover.rankone import HeightSequence, INF
from cellcover.verifier import (
    CASE_CONSTANT,
    CASE_NONCONSTANT,
    CASE_ZERO_VS_NONZERO,
    CONGRUENCE,
    EXTENSION_NOTE,
    KernelNotFreeError,
    SPLIT,
    build_free_kernel_candidate,
    find_section,
    kernel_check,
    make_congruence_trail,
    normalize_zp,
    obstruct_free_kernel,
    replay_congruence_trail,
    verify_cellular,
)

E = ElementExpr
BOUNDS = SearchBounds(coeff_bound=30, prime_bound=50)


class TestVerifyCellular:
    def test_corrected_is_cellular(self):
        report = verify_cellular(build_corrected(3, 100), BOUNDS)
        assert report.overall == "Cellular"
        assert report.hom_GK.outcome == "ZeroProven"
        assert report.hom_KH.outcome == "ZeroProven"
        assert report.fully_invariant.is_proven
        assert report.kernel_identity
        assert report.section is None

    def test_split_counterexample_is_not_cellular(self):
        report = verify_cellular(build_lemma22(3, 50), BOUNDS)
        assert report.overall == "NotCellular"
        assert report.section is not None
        assert report.section.column("h") == E.of(a=1, e=-1)
        # and the nonzero kernel retraction is found independently
        assert report.hom_GK.nonzero_found

    def test_corner_is_cellular(self):
        cand = build_corner(1, precision=24, seed=3, coeff_bound=50)
        report = verify_cellular(cand, SearchBounds(coeff_bound=50, prime_bound=20))
        assert report.overall == "Cellular"
        assert report.hom_GK.outcome == "ZeroProven"
        assert report.hom_GH.generators == (cand.pi,)
        rules = [s.rule for s in report.hom_GH.trace]
        assert "deviation-vanishes" in rules
        assert any("t_w = 0 and r_f = 0" in s.statement for s in report.hom_GH.trace)

    def test_split_with_kernel_to_cokernel_maps_is_refuted(self):
        # integral kernel split off a rank-one cokernel: the retraction
        # composed with a nonzero kernel-to-cokernel map escapes the
        # projection line
        from cellcover.homsolver import prove_hom_equals_scaled_projection

        K = GroupPresentation.of(
            Basis.of(e=ROLE_KERNEL), {"e": HeightSequence.of(0)}
        )
        G = GroupPresentation.of(
            Basis.of(e=ROLE_KERNEL, a=ROLE_COKERNEL_LIFT),
            {"e": HeightSequence.of(0), "a": HeightSequence.of(1, {2: 0})},
        )
        H = GroupPresentation.of(
            Basis.of(h=ROLE_COKERNEL_LIFT), {"h": HeightSequence.of(1, {2: 0})}
        )
        pi = Homomorphism.from_columns(("e", "a"), ("h",), {"a": E.sym("h")})
        section = Homomorphism.from_columns(("h",), ("e", "a"), {"h": E.sym("a")})
        retraction = Homomorphism.from_columns(
            ("e", "a"), ("e",), {"e": E.sym("e")}
        )
        cand = CellularCandidate(
            K=K, G=G, H=H, pi=pi, construction="user",
            section=section, kernel_projection=retraction,
        )
        v = prove_hom_equals_scaled_projection(cand, BOUNDS)
        assert v.outcome == "Generators"
        assert len(v.generators) == 2  # the projection plus an escape witness
        extra = v.generators[1]
        assert not extra.apply(E.sym("e")).is_zero


class TestFindSection:
    def test_constant_offset_immediate_section(self):
        cand = build_free_kernel_candidate(1, ConstantRule(E.of(e1=2)))
        section = find_section(cand, BOUNDS)
        assert section is not None
        assert section.column("h") == E.of(a=1, e1=2)
        # projection composed with the section is the identity on generators
        for p in (3, 5, 7):
            img = section.apply(E.of(h=Fraction(1, p)))
            assert member(cand.G, img)
            assert cand.pi.apply(img) == E.of(h=Fraction(1, p))

    def test_corrected_has_no_section_within_bounds(self):
        cand = build_corrected(3, 100)
        assert find_section(cand, BOUNDS) is None

    def test_split_candidate_section_from_congruence_rule(self):
        cand = build_lemma22(3, 50)
        section = find_section(cand, BOUNDS)
        assert section.column("h") == E.of(a=1, e=-1)


class TestKernelCheck:
    def test_corner_kernel_identity(self):
        cand = build_corner(2, precision=24, seed=11, coeff_bound=50)
        assert kernel_check(cand)

    def test_corrupted_kernel_detected(self):
        # declare only e1 as the kernel of a rank-two mix: the projection also
        # kills e2, so the kernel identity must fail
        cand = build_corner(2, precision=24, seed=11, coeff_bound=50)
        K_small = GroupPresentation.of(
            Basis.of(e1=ROLE_KERNEL), {"e1": HeightSequence.of(0)}
        )
        corrupted = CellularCandidate(
            K=K_small, G=cand.G, H=cand.H, pi=cand.pi,
            construction="user", params=cand.params,
        )
        assert not kernel_check(corrupted)

    def test_extra_kernel_divisibility_detected(self):
        # adjoining an extra denominator on a kernel direction grows the
        # projection kernel beyond the declared K
        cand = build_corner(1, precision=24, seed=11, coeff_bound=50)
        hmap = dict(cand.G.heights)
        hmap["e1"] = HeightSequence.of(0, {7: 1})
        G2 = GroupPresentation(
            basis=cand.G.basis,
            heights=tuple((s, hmap[s]) for s, _ in cand.G.heights),
            families=cand.G.families,
            purified=cand.G.purified,
            ambient=cand.G.ambient,
        )
        corrupted = CellularCandidate(
            K=cand.K, G=G2, H=cand.H, pi=cand.pi,
            construction="user", params=cand.params,
        )
        assert not kernel_check(corrupted)

    def test_plain_split_candidate(self):
        e, h = "e", "h"
        K = GroupPresentation.of(Basis.of(e=ROLE_KERNEL), {e: HeightSequence.of(0)})
        G = GroupPresentation.of(
            Basis.of(e=ROLE_KERNEL, a=ROLE_COKERNEL_LIFT),
            {e: HeightSequence.of(0), "a": HeightSequence.of(0)},
        )
        H = GroupPresentation.of(
            Basis.of(h=ROLE_COKERNEL_LIFT), {h: HeightSequence.of(0)}
        )
        pi = Homomorphism.from_columns(("e", "a"), (h,), {"a": E.sym(h)})
        cand = CellularCandidate(K=K, G=G, H=H, pi=pi, construction="user")
        assert kernel_check(cand)


class TestNormalize:
    def test_erase_divisible_coordinate(self):
        rule = TableRule(
            ((5, E.of(e1=5, e2=2)),), extension=E.of(e1=1, e2=2)
        )
        cand = build_free_kernel_candidate(2, rule)
        normalized = normalize_zp(cand)
        new_rule = normalized.G.families[0].rule
        assert new_rule.entry_map()[5] == E.of(e2=2)

    def test_normalized_table_is_fixed_point(self):
        rule = TableRule(((5, E.of(e1=2)),), extension=E.of(e1=1))
        cand = build_free_kernel_candidate(1, rule)
        once = normalize_zp(cand)
        twice = normalize_zp(once)
        assert once.G.families[0].rule == twice.G.families[0].rule

    def test_congruence_offsets_untouched(self):
        cand = build_lemma22(3, 50)
        normalized = normalize_zp(cand)
        assert normalized.G.families[0].rule == cand.G.families[0].rule

    def test_membership_preserved_on_samples(self):
        rule = TableRule(((5, E.of(e1=10)),), extension=E.of(e1=4))
        cand = build_free_kernel_candidate(1, rule)
        normalized = normalize_zp(cand)
        for p in (3, 5, 7, 11):
            z = cand.G.families[0].rule.offset_at(p)
            g = (E.sym("a") + z).scale(Fraction(1, p))
            assert member(cand.G, g).kind == member(normalized.G, g).kind == "yes"


class TestObstruction:
    def test_zero_vs_nonzero_case_matches_recorded_numbers(self):
        rule = TableRule(
            ((3, E.zero()), (5, E.of(e1=2))), extension=E.of(e1=2)
        )
        cand = build_free_kernel_candidate(1, rule)
        report = obstruct_free_kernel(cand)
        assert report.case == CASE_ZERO_VS_NONZERO
        assert report.conclusion == CONGRUENCE
        w = report.witness
        assert (w["p"], w["q"], w["s"], w["r"]) == (3, 5, 1, 3)
        # the final congruence value 2 * r * zq = 12 is not a multiple of 5
        assert report.trail[-1].const % 5 != 0
        assert abs(report.trail[-1].const) == 12

    def test_constant_rule_splits(self):
        cand = build_free_kernel_candidate(1, ConstantRule(E.of(e1=2)))
        report = obstruct_free_kernel(cand)
        assert report.case == CASE_CONSTANT
        assert report.conclusion == SPLIT
        assert report.section.column("h") == E.of(a=1, e1=2)

    def test_prime_valued_rule_normalizes_to_split(self):
        # offsets equal to the family prime erase entirely; the group is just
        # <F, a/p> and the section 1 -> a splits it
        entries = tuple(
            (p, E.of(e1=p)) for p in (3, 5, 7, 11, 13, 17, 19, 23, 29, 31)
        )
        cand = build_free_kernel_candidate(1, TableRule(entries, E.zero()))
        report = obstruct_free_kernel(cand)
        assert report.conclusion == SPLIT
        assert report.section.column("h") == E.sym("a")
        # and no valid witness pair exists at the un-normalized face value:
        # r would have to be both divisible by and coprime to the prime
        for q in (3, 5):
            zq = q
            assert all((r + s * zq) % q != 0 or gcd(r, q) > 1
                       for r in range(1, q) for s in range(1, q) if gcd(s, q) == 1)

    def test_nonconstant_all_nonzero_case(self):
        rule = TableRule(((3, E.of(e1=1)),), extension=E.of(e1=2))
        cand = build_free_kernel_candidate(1, rule)
        report = obstruct_free_kernel(cand)
        assert report.case == CASE_NONCONSTANT
        assert report.conclusion == CONGRUENCE
        assert replay_congruence_trail(report.trail, report.witness)

    def test_open_table_without_contradiction_is_inconclusive(self):
        rule = TableRule(((3, E.of(e1=2)), (5, E.of(e1=2))), extension=None)
        cand = build_free_kernel_candidate(1, rule)
        report = obstruct_free_kernel(cand)
        assert report.conclusion == EXTENSION_NOTE
        assert "constant" in report.note

    def test_open_table_with_in_table_contradiction_still_refutes(self):
        rule = TableRule(((3, E.of(e1=1)), (5, E.of(e1=2))), extension=None)
        cand = build_free_kernel_candidate(1, rule)
        report = obstruct_free_kernel(cand)
        assert report.conclusion == CONGRUENCE

    def test_non_free_kernel_rejected(self):
        cand = build_lemma22(3, 50)
        with pytest.raises(KernelNotFreeError):
            obstruct_free_kernel(cand)

    def test_ring_cokernel_rejected(self):
        cand = build_free_kernel_candidate(1, ConstantRule(E.of(e1=2)))
        ring_H = GroupPresentation.of(
            Basis.of(h=ROLE_COKERNEL_LIFT), {"h": HeightSequence.of(0, {3: INF})}
        )
        bad = CellularCandidate(
            K=cand.K, G=cand.G, H=ring_H, pi=cand.pi, construction="user"
        )
        with pytest.raises(ValueError):
            obstruct_free_kernel(bad)

    def test_congruence_rule_with_constant_lift_splits(self):
        # lifts of a small positive constant agree at every family prime, so
        # the engine lands in the constant case with the immediate section
        from cellcover.groups import CongruenceConstantRule

        cand = build_free_kernel_candidate(1, CongruenceConstantRule(E.of(e1=2)))
        report = obstruct_free_kernel(cand)
        assert report.conclusion == SPLIT
        assert report.section.column("h") == E.of(a=1, e1=2)

    def test_rank_two_coordinates_classified_independently(self):
        rule = TableRule(
            ((3, E.of(e1=1, e2=0)),), extension=E.of(e1=1, e2=2)
        )
        cand = build_free_kernel_candidate(2, rule)
        report = obstruct_free_kernel(cand)
        # first coordinate constant 1, second mixes zero and nonzero
        assert report.coordinate == "e2"
        assert report.case == CASE_ZERO_VS_NONZERO


class TestTrailSoundness:
    def test_every_step_combination_verified(self):
        steps, final = make_congruence_trail(
            i=0, rank=2, p=3, q=5, r=3, s=1,
            zp_vec=[0, 4], zq_vec=[2, 7],
        )
        witness = {"r": 3, "s": 1, "p": 3, "q": 5, "zp": 0, "zq": 2}
        assert replay_congruence_trail(steps, witness)
        assert final == (0 - 2) * 2 * 3

    def test_tampered_trail_rejected(self):
        steps, _ = make_congruence_trail(
            i=0, rank=1, p=3, q=5, r=3, s=1, zp_vec=[0], zq_vec=[2]
        )
        witness = {"r": 3, "s": 1, "p": 3, "q": 5, "zp": 0, "zq": 2}
        bad = list(steps)
        last = bad[-1]
        from dataclasses import replace

        bad[-1] = replace(last, const=last.const + 1)
        assert not replay_congruence_trail(tuple(bad), witness)

    def test_bad_witness_rejected(self):
        steps, _ = make_congruence_trail(
            i=0, rank=1, p=3, q=5, r=3, s=1, zp_vec=[0], zq_vec=[2]
        )
        assert not replay_congruence_trail(
            steps, {"r": 2, "s": 1, "p": 3, "q": 5, "zp": 0, "zq": 2}
        )  # r + s*zq = 4 not divisible by 5

    def test_violated_congruence_required(self):
        # a constant coordinate gives final constant 0: the trail must NOT
        # count as a violation
        steps, final = make_congruence_trail(
            i=0, rank=1, p=7, q=5, r=3, s=1, zp_vec=[2], zq_vec=[2]
        )
        assert final == 0
        witness = {"r": 3, "s": 1, "p": 7, "q": 5, "zp": 2, "zq": 2}
        assert not replay_congruence_trail(steps, witness)


class TestConsistency:
    @pytest.mark.parametrize("const", [0, 1, 2, 6, 9])
    def test_verifier_and_obstruction_agree(self, const):
        cand = build_free_kernel_candidate(1, ConstantRule(E.of(e1=const)))
        if const == 0:
            # kernel direction decouples entirely; both views still refute
            pass
        report = obstruct_free_kernel(cand)
        cell = verify_cellular(cand, SearchBounds(coeff_bound=10, prime_bound=31))
        assert report.refuted
        assert cell.overall != "Cellular"

    def test_random_total_tables_never_disagree(self):
        # the engine refutes every rule-total candidate; the checklist must
        # never certify one cellular
        import random

        rng = random.Random(31)
        odd_primes = [3, 5, 7, 11, 13, 17, 19, 23, 29, 31]
        for trial in range(25):
            krank = rng.choice([1, 2])
            syms = [f"e{j}" for j in range(1, krank + 1)]
            n_entries = rng.randint(0, 3)
            entries = tuple(
                (p, E.of({s: rng.randint(-10, 10) for s in syms}))
                for p in sorted(rng.sample(odd_primes, n_entries))
            )
            ext = E.of({s: rng.randint(-10, 10) for s in syms})
            cand = build_free_kernel_candidate(krank, TableRule(entries, ext))
            report = obstruct_free_kernel(cand)
            assert report.refuted
            cell = verify_cellular(
                cand, SearchBounds(coeff_bound=8, prime_bound=31)
            )
            assert cell.overall != "Cellular"
