import random
from fractions import Fraction

import pytest

from cellcover.groups import (
    Basis,
    CompletionAmbient,
    ConstantRule,
    CongruenceConstantRule,
    ElementExpr,
    GroupPresentation,
    MalformedElementError,
    PrimeFamily,
    ROLE_COKERNEL_LIFT,
    ROLE_COMPLETION_MIX,
    ROLE_KERNEL,
    TableRule,
    UnsupportedPresentationError,
    is_torsion_quotient,
    max_divisible_subgroup,
    member,
    presentations_equal_as_subgroups,
    purify,
    rank,
)
from cellcover.rankone import HeightSequence, INF
from cellcover.valuations import CompletionElement, MultiplicativeSet, PrimeClass

E = ElementExpr


def lemma22_like(q=3, bound=50):
    basis = Basis.of(e=ROLE_KERNEL, a=ROLE_COKERNEL_LIFT)
    heights = {"e": HeightSequence.of(0, {q: INF}), "a": HeightSequence.of(0)}
    fam = PrimeFamily(
        primes=PrimeClass.complement([q]),
        rule=CongruenceConstantRule(E.of(e=-1)),
        target="a",
    )
    return GroupPresentation.of(basis, heights, [fam])


def corner_like(precision=8, seed="grp"):
    s = MultiplicativeSet.prime_power(5, precision)
    w = CompletionElement.seeded(s, f"{seed}:w")
    w1 = CompletionElement.seeded(s, f"{seed}:w1")
    amb = CompletionAmbient(schedule=s, mixes=(("u", (("e1", w1), ("f", w))),))
    basis = Basis.of(e1=ROLE_KERNEL, f=ROLE_COKERNEL_LIFT, u=ROLE_COMPLETION_MIX)
    hs = {n: HeightSequence.of(0) for n in ("e1", "f", "u")}
    pres = GroupPresentation.of(basis, hs, ambient=amb)
    return s, w, w1, purify(pres, [E.sym("e1"), E.sym("f"), E.sym("u")])


class TestMember:
    def test_shifted_generator_mod_kernel(self):
        # (a + (p-1))/p and (a - 1)/p agree modulo the kernel
        G = lemma22_like()
        for p in (2, 5, 7, 11, 13):
            assert member(G, E.of(a=1, e=-1).scale(Fraction(1, p)))

    def test_basis_symbols_are_members(self):
        G = lemma22_like()
        for s in G.basis.names:
            assert member(G, E.sym(s))

    def test_unit_offset_blocks_plain_division(self):
        # z_3 = e: a/3 inside would force the offset to vanish mod 3
        basis = Basis.of(e=ROLE_KERNEL, a=ROLE_COKERNEL_LIFT)
        heights = {"e": HeightSequence.of(0), "a": HeightSequence.of(0)}
        fam = PrimeFamily(
            primes=PrimeClass.explicit([3]), rule=ConstantRule(E.sym("e")), target="a"
        )
        G = GroupPresentation.of(basis, heights, [fam])
        verdict = member(G, E.sym("a").scale(Fraction(1, 3)))
        assert verdict.kind == "no"
        # brute-force denominator oracle: no integer multiple of the adjoined
        # generator corrects a/3 into the lattice
        gen = (E.sym("a") + E.sym("e")).scale(Fraction(1, 3))
        for t in range(-9, 10):
            diff = E.sym("a").scale(Fraction(1, 3)) - gen.scale(t)
            assert not all(c.denominator == 1 for _, c in diff.coords)

    def test_malformed_element(self):
        G = lemma22_like()
        with pytest.raises(MalformedElementError):
            member(G, E.sym("zz"))

    def test_unknown_at_bound_for_open_table(self):
        basis = Basis.of(e=ROLE_KERNEL, a=ROLE_COKERNEL_LIFT)
        heights = {"e": HeightSequence.of(0), "a": HeightSequence.of(0)}
        fam = PrimeFamily(
            primes=PrimeClass.complement([2]),
            rule=TableRule(((3, E.sym("e")),), None),
            target="a",
        )
        G = GroupPresentation.of(basis, heights, [fam])
        assert member(G, E.sym("a").scale(Fraction(1, 5))).kind == "unknown-at-bound"

    def test_additivity_on_samples(self):
        G = lemma22_like()
        rng = random.Random(2)
        pool = G.generators(20)
        for _ in range(80):
            x = rng.choice(pool).scale(rng.randint(-3, 3))
            y = rng.choice(pool).scale(rng.randint(-3, 3))
            assert member(G, x) and member(G, y)
            assert member(G, x + y)

    def test_completion_membership(self):
        s, w, w1, G = corner_like()
        q_top = s.q(8)
        c_top = E.of(e1=w1.residue(8), f=w.residue(8))
        assert member(G, (E.sym("u") - c_top).scale(Fraction(1, q_top)))
        assert member(G, E.sym("u").scale(Fraction(1, q_top))).kind == "no"
        # intermediate level via coherence
        c3 = E.of(e1=w1.residue(3), f=w.residue(3))
        assert member(G, (E.sym("u") - c3).scale(Fraction(1, s.q(3))))


class TestPurify:
    def test_identity_case(self):
        G = lemma22_like()
        assert purify(G, [E.sym(s) for s in G.basis.names]) == G

    def test_completion_closure_adds_chain(self):
        s, w, w1, G = corner_like()
        fams = G.completion_families()
        assert len(fams) == 1 and fams[0].target == "u"
        assert G.purified
        # q_m * (u - c_m)/q_m lands back in the plain span
        for m in (1, 4, 8):
            off = fams[0].offsets[m - 1]
            assert off.coeff("e1") == -w1.residue(m)
            assert off.coeff("f") == -w.residue(m)

    def test_scaled_span_strips_multiple(self):
        G = lemma22_like()
        N = purify(G, [E.sym("e").scale(2)])
        assert N.basis.names == ("e",)
        assert dict(N.heights)["e"] == HeightSequence.of(0, {3: INF})

    def test_idempotent(self):
        s, w, w1, G = corner_like()
        again = purify(G, [E.sym(n) for n in G.basis.names])
        assert again == G

    def test_monotone_on_symbol_spans(self):
        G = lemma22_like()
        small = purify(G, [E.sym("e").scale(4)])
        # the singleton span sits inside the full span's purification
        assert set(small.basis.names) <= set(G.basis.names)
        for g in small.generators(10):
            assert member(G, g)


class TestDivisibleSubgroup:
    def test_kernel_is_maximal_divisible(self):
        G = lemma22_like()
        K = max_divisible_subgroup(G, 3)
        assert K.basis.names == ("e",)

    def test_plain_lattice_has_none(self):
        G = GroupPresentation.of(
            Basis.of(x=ROLE_KERNEL), {"x": HeightSequence.of(0)}
        )
        assert max_divisible_subgroup(G, 3) is None

    def test_coordinatewise(self):
        G = GroupPresentation.of(
            Basis.of(e1=ROLE_KERNEL, e2=ROLE_KERNEL),
            {"e1": HeightSequence.of(0, {3: INF}), "e2": HeightSequence.of(0)},
        )
        M = max_divisible_subgroup(G, 3)
        assert M.basis.names == ("e1",)


class TestRankAndTorsion:
    def test_rank_counts_basis(self):
        s, w, w1, G = corner_like()
        assert rank(G) == 3

    def test_inverted_prime_over_integers_is_torsion(self):
        K = GroupPresentation.of(
            Basis.of(e=ROLE_KERNEL), {"e": HeightSequence.of(0, {3: INF})}
        )
        Z = GroupPresentation.of(Basis.of(e=ROLE_KERNEL), {"e": HeightSequence.of(0)})
        assert is_torsion_quotient(K, Z)

    def test_extra_direction_is_not_torsion(self):
        M = GroupPresentation.of(
            Basis.of(e=ROLE_KERNEL, f=ROLE_KERNEL),
            {"e": HeightSequence.of(0), "f": HeightSequence.of(0)},
        )
        Z = GroupPresentation.of(Basis.of(e=ROLE_KERNEL), {"e": HeightSequence.of(0)})
        assert not is_torsion_quotient(M, Z)


class TestPurity:
    def test_kernel_is_pure_on_samples(self):
        # s*G intersect K = s*K for sampled scalars and elements
        G = lemma22_like()
        K = max_divisible_subgroup(G, 3)
        rng = random.Random(6)
        for _ in range(60):
            n = rng.randint(-8, 8)
            e_exp = rng.randint(0, 2)
            x = E.of(e=Fraction(n, 3**e_exp))
            for scalar in (2, 3, 5, 7):
                # x in s*G  <=>  x/s in G
                in_sG = member(G, x.scale(Fraction(1, scalar))).kind == "yes"
                in_sK = member(K, x.scale(Fraction(1, scalar))).kind == "yes"
                if member(K, x) and in_sG:
                    assert in_sK


class TestMembershipOracle:
    """member() decides per prime by congruence solving; the oracle decides
    by integer-span membership of the materialized generators (Hermite form
    over a cleared denominator), a disjoint code path."""

    @staticmethod
    def span_oracle(G, x, prime_bound):
        from math import gcd

        from cellcover import intlinalg

        gens = G.generators(prime_bound)
        syms = list(G.basis.names)
        den = 1
        for g in gens + [x]:
            d = g.denominator_lcm()
            den = den * d // gcd(den, d)
        rows = [[int(g.coeff(s) * den) for s in syms] for g in gens]
        target = [int(x.coeff(s) * den) for s in syms]
        h, u = intlinalg.hermite_normal_form(rows)
        # forward-substitute the target through the Hermite rows
        t = list(target)
        for row in h:
            pivot = next((j for j, v in enumerate(row) if v != 0), None)
            if pivot is None:
                continue
            if t[pivot] % row[pivot] == 0:
                c = t[pivot] // row[pivot]
                t = [a - c * b for a, b in zip(t, row)]
        return all(v == 0 for v in t)

    def test_member_agrees_with_span_oracle(self, rng):
        from conftest import random_hom_instance

        for trial in range(10):
            G, _, _ = random_hom_instance(rng)
            gens = G.generators(13)
            samples = []
            for _ in range(12):
                x = ElementExpr.zero()
                for g in rng.sample(gens, min(2, len(gens))):
                    x = x + g.scale(rng.randint(-3, 3))
                samples.append(x)
            for s in G.basis.names:
                samples.append(ElementExpr.of({s: Fraction(1, rng.choice([2, 3, 5]))}))
            for x in samples:
                got = member(G, x)
                if got.kind == "unknown-at-bound":
                    continue
                want = self.span_oracle(G, x, 13)
                assert (got.kind == "yes") == want, f"{x} on {G.basis.names}"


class TestValidation:
    def test_overlapping_families_rejected(self):
        basis = Basis.of(e=ROLE_KERNEL, a=ROLE_COKERNEL_LIFT)
        heights = {"e": HeightSequence.of(0), "a": HeightSequence.of(0)}
        f1 = PrimeFamily(
            primes=PrimeClass.explicit([3, 5]), rule=ConstantRule(E.zero()), target="a"
        )
        f2 = PrimeFamily(
            primes=PrimeClass.explicit([5, 7]), rule=ConstantRule(E.sym("e")), target="a"
        )
        with pytest.raises(UnsupportedPresentationError):
            GroupPresentation.of(basis, heights, [f1, f2])

    def test_fractional_offsets_rejected(self):
        basis = Basis.of(e=ROLE_KERNEL, a=ROLE_COKERNEL_LIFT)
        heights = {"e": HeightSequence.of(0), "a": HeightSequence.of(0)}
        fam = PrimeFamily(
            primes=PrimeClass.explicit([3]),
            rule=ConstantRule(E.of(e=Fraction(1, 2))),
            target="a",
        )
        with pytest.raises(ValueError):
            GroupPresentation.of(basis, heights, [fam])

    def test_equal_as_subgroups(self):
        G1 = lemma22_like()
        G2 = lemma22_like()
        assert presentations_equal_as_subgroups(G1, G2)
