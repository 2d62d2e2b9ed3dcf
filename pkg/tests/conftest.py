import random

import pytest

from cellcover.groups import (
    Basis,
    ConstantRule,
    ElementExpr,
    GroupPresentation,
    PrimeFamily,
    ROLE_COKERNEL_LIFT,
    ROLE_KERNEL,
    TableRule,
)
from cellcover.rankone import HeightSequence, INF
from cellcover.valuations import PrimeClass


INSTANCE_PRIMES = [2, 3, 5, 7, 11, 13]


def random_hom_instance(rng):
    """A random small source presentation and family-free target, sized so
    the reference grid scan stays affordable."""
    src_rank = rng.choice([1, 1, 2])
    tgt_rank = rng.choice([1, 1, 2])
    src_syms = tuple(f"s{i}" for i in range(src_rank))
    tgt_syms = tuple(f"t{i}" for i in range(tgt_rank))

    def random_heights(allow_inf):
        # infinite source heights make Hom vanish by a genuinely infinitary
        # argument, which the truncated reference cannot echo; the oracle
        # comparison therefore sticks to finite source divisibility
        default = 0
        exc = {}
        if rng.random() < 0.6:
            p = rng.choice(INSTANCE_PRIMES)
            exc[p] = rng.choice([1, 2, INF] if allow_inf else [1, 2])
        return HeightSequence.of(default, exc)

    src_heights = {s: random_heights(False) for s in src_syms}
    tgt_heights = {t: random_heights(True) for t in tgt_syms}

    families = []
    pool = [p for p in INSTANCE_PRIMES]
    rng.shuffle(pool)
    n_fams = rng.choice([0, 1, 1, 2]) if src_rank > 1 else rng.choice([0, 1])
    taken = 0
    for _ in range(n_fams):
        size = rng.choice([1, 2])
        primes = pool[taken : taken + size]
        taken += size
        if not primes:
            break
        target = rng.choice(src_syms)
        others = [s for s in src_syms if s != target]
        if others and rng.random() < 0.8:
            offset_sym = rng.choice(others)
            offset = ElementExpr.of({offset_sym: rng.randint(-3, 3)})
        else:
            offset = ElementExpr.zero()
        if rng.random() < 0.5:
            rule = ConstantRule(offset)
        else:
            entries = tuple(
                (
                    p,
                    ElementExpr.of(
                        {s: rng.randint(-3, 3) for s in others} if others else {}
                    ),
                )
                for p in primes
            )
            rule = TableRule(entries, offset)
        families.append(
            PrimeFamily(
                primes=PrimeClass.explicit(primes), rule=rule, target=target
            )
        )

    src = GroupPresentation.of(
        Basis(src_syms, (ROLE_KERNEL,) * (src_rank - 1) + (ROLE_COKERNEL_LIFT,)),
        src_heights,
        families,
    )
    tgt = GroupPresentation.of(
        Basis(tgt_syms, (ROLE_KERNEL,) * tgt_rank), tgt_heights
    )
    n_entries = src_rank * tgt_rank
    coeff = rng.randint(10, 50) if n_entries <= 2 else rng.randint(2, 5)
    return src, tgt, coeff


@pytest.fixture
def rng():
    return random.Random(1729)
