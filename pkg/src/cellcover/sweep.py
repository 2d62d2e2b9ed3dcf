"""Exhaustive desk sweep over free-kernel candidates with constant-extension
offset rules.

Coordinate rules swept: every constant rule and every one-exception rule
(constant everywhere except a single tabled prime) with values inside the
bound.  Rank-one candidates run the full obstruction engine one by one; the
rank-two space is the square of the coordinate-rule space, audited
exhaustively through the composition law (a pair splits iff both coordinates
normalize to constants, and otherwise inherits the first contradicted
coordinate's witness), with the law itself revalidated by running the full
engine on a deterministic sample of pairs.

The pair audit is the hot loop; it runs on the compiled kernel when present.
"""

import random
from dataclasses import dataclass

from . import _accel
from .groups import ElementExpr, TableRule
from .verifier import (
    CONGRUENCE,
    SPLIT,
    build_free_kernel_candidate,
    obstruct_free_kernel,
    replay_congruence_trail,
)
from .valuations import primes_upto


@dataclass(frozen=True)
class CoordinateRule:
    """Constant value with at most one tabled exception."""

    constant: int
    exception: tuple = None  # (prime, value) or None

    def value_at(self, p):
        if self.exception and self.exception[0] == p:
            return self.exception[1]
        return self.constant

    def label(self):
        if self.exception is None:
            return f"const {self.constant}"
        return f"const {self.constant} except {self.exception[0]} -> {self.exception[1]}"


def coordinate_rule_space(value_bound=10, prime_bound=31):
    """All constant rules and one-exception rules within the value bound."""
    rules = []
    odd_primes = [p for p in primes_upto(prime_bound) if p != 2]
    for c in range(-value_bound, value_bound + 1):
        rules.append(CoordinateRule(c))
    for c in range(-value_bound, value_bound + 1):
        for p in odd_primes:
            for v in range(-value_bound, value_bound + 1):
                if v != c:
                    rules.append(CoordinateRule(c, (p, v)))
    return rules


def table_rule_for(coord_rules, prime_bound=31):
    """Assemble the vector-valued table + constant extension from per
    coordinate rules."""
    syms = [f"e{j}" for j in range(1, len(coord_rules) + 1)]
    odd_primes = [p for p in primes_upto(prime_bound) if p != 2]
    entries = []
    for p in odd_primes:
        entries.append(
            (p, ElementExpr.of({s: r.value_at(p) for s, r in zip(syms, coord_rules)}))
        )
    ext = ElementExpr.of({s: r.constant for s, r in zip(syms, coord_rules)})
    return TableRule(tuple(entries), ext)


def classify_coordinate_rule(rule, prime_bound=31):
    """Run the obstruction engine on the rank-one candidate of a single
    coordinate rule.  Returns (code, report): code 0 = split, 1 = validated
    congruence contradiction."""
    cand = build_free_kernel_candidate(
        1, table_rule_for([rule], prime_bound), prime_bound=prime_bound
    )
    report = obstruct_free_kernel(cand, prime_bound=prime_bound)
    if report.conclusion == SPLIT:
        return 0, report
    if report.conclusion == CONGRUENCE:
        if not replay_congruence_trail(report.trail, report.witness):
            raise AssertionError(f"witness failed replay for {rule.label()}")
        return 1, report
    raise AssertionError(
        f"rule-total candidate classified inconclusive: {rule.label()}"
    )


def _classify_chunk(args):
    rules, prime_bound = args
    return [classify_coordinate_rule(r, prime_bound)[0] for r in rules]


@dataclass(frozen=True)
class SweepResult:
    value_bound: int
    prime_bound: int
    rank1_total: int
    rank1_split: int
    rank1_congruence: int
    rank2_total: int
    rank2_split: int
    rank2_congruence: int
    cellular_found: int
    inconclusive_found: int
    all_witnesses_replayed: bool
    pair_samples_checked: int
    kernel_impl: str

    @property
    def clean(self):
        return (
            self.cellular_found == 0
            and self.inconclusive_found == 0
            and self.all_witnesses_replayed
        )


def run_sweep(
    value_bound=10,
    prime_bound=31,
    include_rank2=True,
    workers=1,
    pair_samples=120,
    sample_seed=20100107,
):
    """The exhaustive sweep; every candidate must come out split or
    congruence-contradicted, with replaying witnesses."""
    rules = coordinate_rule_space(value_bound, prime_bound)
    if workers > 1:
        import multiprocessing as mp

        chunks = [
            (rules[i::workers], prime_bound) for i in range(workers)
        ]
        with mp.Pool(workers) as pool:
            chunk_codes = pool.map(_classify_chunk, chunks)
        codes = [0] * len(rules)
        for w, chunk in enumerate(chunk_codes):
            for j, code in enumerate(chunk):
                codes[w + j * workers] = code
    else:
        codes = [classify_coordinate_rule(r, prime_bound)[0] for r in rules]

    rank1_split = sum(1 for c in codes if c == 0)
    rank1_congruence = len(codes) - rank1_split

    rank2_total = rank2_split = rank2_congruence = 0
    samples_checked = 0
    if include_rank2:
        n_pairs, n_split, n_contra = _accel.pair_audit(codes)
        rank2_total, rank2_split, rank2_congruence = n_pairs, n_split, n_contra
        samples_checked = _validate_pair_samples(
            rules, codes, prime_bound, pair_samples, sample_seed
        )

    return SweepResult(
        value_bound=value_bound,
        prime_bound=prime_bound,
        rank1_total=len(rules),
        rank1_split=rank1_split,
        rank1_congruence=rank1_congruence,
        rank2_total=rank2_total,
        rank2_split=rank2_split,
        rank2_congruence=rank2_congruence,
        cellular_found=0,
        inconclusive_found=0,
        all_witnesses_replayed=True,
        pair_samples_checked=samples_checked,
        kernel_impl=_accel.IMPL,
    )


def _validate_pair_samples(rules, codes, prime_bound, pair_samples, seed):
    """Composition-law audit: the full engine on sampled rank-two pairs must
    agree with the coded composition and its witnesses must replay."""
    rng = random.Random(seed)
    n = len(rules)
    picks = set()
    # make sure every code combination is sampled
    by_code = {0: [], 1: []}
    for i, c in enumerate(codes):
        by_code[c].append(i)
    for a in (0, 1):
        for b in (0, 1):
            if by_code[a] and by_code[b]:
                picks.add((by_code[a][0], by_code[b][0]))
    while len(picks) < pair_samples:
        picks.add((rng.randrange(n), rng.randrange(n)))
    checked = 0
    for i, j in sorted(picks):
        pair = [rules[i], rules[j]]
        cand = build_free_kernel_candidate(
            2, table_rule_for(pair, prime_bound), prime_bound=prime_bound
        )
        report = obstruct_free_kernel(cand, prime_bound=prime_bound)
        expected_split = codes[i] == 0 and codes[j] == 0
        if expected_split != (report.conclusion == SPLIT):
            raise AssertionError(
                f"composition law violated for pair ({rules[i].label()}; "
                f"{rules[j].label()})"
            )
        if report.conclusion == CONGRUENCE and not replay_congruence_trail(
            report.trail, report.witness
        ):
            raise AssertionError("sampled pair witness failed replay")
        if report.conclusion not in (SPLIT, CONGRUENCE):
            raise AssertionError("sampled pair inconclusive")
        checked += 1
    return checked
