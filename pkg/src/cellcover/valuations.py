"""Exact arithmetic substrate: primes, p-adic valuations, multiplicative sets,
partial products, and truncated completion elements with coherent digits.
"""

import random
from dataclasses import dataclass
from fractions import Fraction

from . import intlinalg
from .intlinalg import BudgetExceededError  # noqa: F401  (re-exported error type)


class ZeroValuationError(ValueError):
    """valuation(0, p) is undefined; callers treat 0 as infinitely divisible."""


class LevelExceedsPrecisionError(ValueError):
    """A residue was requested beyond the recorded truncation level."""


# ---------------------------------------------------------------------------
# primes

def primes_upto(n):
    """All primes <= n by sieve."""
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return [i for i in range(2, n + 1) if sieve[i]]


def is_prime(n):
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def next_prime(n):
    k = n + 1
    while not is_prime(k):
        k += 1
    return k


def valuation(x, p):
    """Exponent of the prime p in the nonzero rational x."""
    if x == 0:
        raise ZeroValuationError("valuation of 0 is undefined")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    x = Fraction(x)
    v = 0
    num = x.numerator
    while num % p == 0:
        num //= p
        v += 1
    den = x.denominator
    while den % p == 0:
        den //= p
        v -= 1
    return v


# ---------------------------------------------------------------------------
# prime set descriptors

KIND_ALL = "all-primes"
KIND_COFINITE = "cofinite-complement"
KIND_FINITE = "explicit-finite"
KIND_SPLIT = "residue-split"


@dataclass(frozen=True)
class PrimeClass:
    """A describable set of primes.

    kinds:
      all-primes           -- every prime
      cofinite-complement  -- every prime outside a finite excluded set
      explicit-finite      -- exactly the listed primes
      residue-split        -- one side of the deterministic two-way split:
                              forced primes go to their assigned side, the
                              remaining primes alternate (first unforced prime
                              to side 2, next to side 1, ...)
    """

    kind: str
    primes: tuple = ()
    excluded: tuple = ()
    forced: tuple = ()  # ((prime, side), ...) for residue-split
    side: int = 0  # 1 or 2 for residue-split

    def __post_init__(self):
        if self.kind == KIND_FINITE:
            if len(set(self.primes)) != len(self.primes):
                raise ValueError("explicit prime list has duplicates")
            if any(not is_prime(p) for p in self.primes):
                raise ValueError("explicit list contains a non-prime")
        if self.kind == KIND_SPLIT and self.side not in (1, 2):
            raise ValueError("residue-split needs side 1 or 2")

    @classmethod
    def all_primes(cls):
        return cls(KIND_ALL)

    @classmethod
    def complement(cls, excluded):
        return cls(KIND_COFINITE, excluded=tuple(sorted(set(excluded))))

    @classmethod
    def explicit(cls, primes):
        return cls(KIND_FINITE, primes=tuple(sorted(set(primes))))

    @classmethod
    def split_side(cls, side, forced=()):
        return cls(KIND_SPLIT, forced=tuple(sorted(forced)), side=side)

    def _split_assignment(self, p):
        forced = dict(self.forced)
        if p in forced:
            return forced[p]
        parity = 0
        for q in primes_upto(p):
            if q in forced:
                continue
            parity += 1
            if q == p:
                # first unforced prime gets side 2
                return 2 if parity % 2 == 1 else 1
        raise AssertionError("unreachable for prime input")

    def contains(self, p):
        if not is_prime(p):
            return False
        if self.kind == KIND_ALL:
            return True
        if self.kind == KIND_COFINITE:
            return p not in self.excluded
        if self.kind == KIND_FINITE:
            return p in self.primes
        return self._split_assignment(p) == self.side

    def primes_upto(self, n):
        return [p for p in primes_upto(n) if self.contains(p)]

    @property
    def is_infinite(self):
        return self.kind != KIND_FINITE

    def overlaps(self, other, probe_bound=1000):
        """Conservative disjointness probe: may report overlap that a deeper
        probe would refute, never the reverse for primes <= probe_bound."""
        if self.kind == KIND_SPLIT and other.kind == KIND_SPLIT:
            if self.forced == other.forced and self.side != other.side:
                return False
        mine = set(self.primes_upto(probe_bound))
        return bool(mine & set(other.primes_upto(probe_bound)))


# ---------------------------------------------------------------------------
# multiplicative sets and completion elements

@dataclass(frozen=True)
class MultiplicativeSet:
    """Desk truncation of a countable multiplicative set: the generators
    s_0, ..., s_{M-1} together with the partial products q_m = prod(s_n, n<m).
    """

    generators: tuple

    def __post_init__(self):
        if not self.generators:
            raise ValueError("need at least one generator")
        if any(s < 2 for s in self.generators):
            raise ValueError("every generator must be >= 2")
        partials = [1]
        for s in self.generators:
            partials.append(partials[-1] * s)
        object.__setattr__(self, "_partials", tuple(partials))

    @classmethod
    def prime_power(cls, p, count):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        return cls((p,) * count)

    @property
    def levels(self):
        return len(self.generators)

    def q(self, m):
        """Partial product q_m; q_0 = 1."""
        if m < 0 or m > self.levels:
            raise LevelExceedsPrecisionError(f"level {m} outside 0..{self.levels}")
        return self._partials[m]

    def prime_support(self):
        support = set()
        for s in self.generators:
            for p in primes_upto(s):
                if s % p == 0:
                    support.add(p)
        return sorted(support)


def _coherent_digit_stream(base, rng):
    """Residues r_0=0, r_1, ..., r_M with r_{m+1} = r_m + c_m * q_m."""
    residues = [0]
    acc = 0
    for m, s in enumerate(base.generators):
        acc += rng.randrange(s) * base.q(m)
        residues.append(acc)
    return tuple(residues)


@dataclass(frozen=True)
class CompletionElement:
    """A truncated element of the completion along a multiplicative set.

    residues[m] is the element mod q_m; coherence means residues[m] is the
    reduction of residues[m+1] mod q_m.
    """

    base: MultiplicativeSet
    residues: tuple
    seed: object = None

    def __post_init__(self):
        if len(self.residues) != self.base.levels + 1:
            raise ValueError("need one residue per level 0..M")
        if self.residues[0] != 0:
            raise ValueError("level-0 residue must be 0 (q_0 = 1)")
        for m in range(self.base.levels):
            q_m = self.base.q(m)
            r, r_next = self.residues[m], self.residues[m + 1]
            if not (0 <= r < max(q_m, 1)) and m > 0:
                raise ValueError(f"residue at level {m} out of range")
            if r_next % q_m != r % max(q_m, 1):
                raise ValueError(f"digits incoherent between levels {m} and {m + 1}")

    @classmethod
    def seeded(cls, base, seed):
        rng = random.Random(str(seed))
        return cls(base, _coherent_digit_stream(base, rng), seed=seed)

    @classmethod
    def constant(cls, base, value):
        return cls(base, tuple(value % base.q(m) for m in range(base.levels + 1)))

    @property
    def precision(self):
        return self.base.levels

    def residue(self, m):
        """Coherent residue mod q_m; errors past the recorded precision."""
        if m < 0 or m > self.precision:
            raise LevelExceedsPrecisionError(
                f"level {m} exceeds precision {self.precision}"
            )
        return self.residues[m]


# ---------------------------------------------------------------------------
# independence surrogate

NO_RELATION = "no-relation-found"
RELATION = "relation-witness"


@dataclass(frozen=True)
class IndependenceVerdict:
    kind: str
    coeff_bound: int
    level: int
    monomials: tuple
    witness: tuple = None  # coefficient vector, parallel to monomials

    @property
    def found_relation(self):
        return self.kind == RELATION


def default_monomials(n_elems, degree):
    """Exponent supports for all monomials of total degree <= degree,
    including the empty product (the constant 1)."""
    if degree > 2:
        raise ValueError("only degree <= 2 is supported")
    monos = [()]
    monos += [(i,) for i in range(n_elems)]
    if degree >= 2:
        monos += [(i, j) for i in range(n_elems) for j in range(i, n_elems)]
    return tuple(monos)


def monomial_value(elems, mono, level):
    q = elems[0].base.q(level) if elems else 1
    out = 1
    for idx in mono:
        out = (out * elems[idx].residue(level)) % q
    return out % q


def independence_check(
    elems,
    degree=2,
    coeff_bound=1000,
    level=None,
    monomials=None,
    budget=10**7,
):
    """Search for a bounded integer relation among monomials of the elements.

    A relation is a nonzero integer vector c with |c_a| <= coeff_bound and
    sum(c_a * monomial_a) == 0 mod q_level.  Returns relation-witness with the
    smallest vector found, else no-relation-found; the no-relation verdict is
    exhaustive for the given bound and level (lattice enumeration, not
    sampling).  Raises BudgetExceededError when the search space is too big.
    """
    if not elems:
        raise ValueError("need at least one element")
    base = elems[0].base
    if any(e.base != base for e in elems):
        raise ValueError("elements must share a multiplicative set")
    if level is None:
        level = min(e.precision for e in elems)
    if any(e.precision < level for e in elems):
        raise LevelExceedsPrecisionError("element precision below requested level")
    if monomials is None:
        monomials = default_monomials(len(elems), degree)
    else:
        monomials = tuple(tuple(m) for m in monomials)
        if any(len(m) > degree for m in monomials):
            raise ValueError("monomial exceeds requested degree")

    q = base.q(level)
    values = [monomial_value(elems, m, level) for m in monomials]

    witness = _search_relation(values, q, coeff_bound, budget)
    if witness is not None:
        total = sum(c * v for c, v in zip(witness, values))
        assert total % q == 0 and any(witness)
        return IndependenceVerdict(RELATION, coeff_bound, level, monomials, tuple(witness))
    return IndependenceVerdict(NO_RELATION, coeff_bound, level, monomials)


def _search_relation(values, q, bound, budget, scan_cap=40):
    """A small max-norm nonzero c with c . values == 0 mod q, or None.

    Boxes are searched in widening stages, so dense solution sets are caught
    in a cheap small box; the exhaustive full-bound pass (which certifies the
    no-relation answer) only runs when the smaller stages came up empty, and
    then the box holds few lattice points by construction.
    """
    basis = intlinalg.lll_reduce(intlinalg.congruence_lattice([values], [q]))
    stages = []
    b = 1
    while b < bound:
        stages.append(b)
        b *= 4
    stages.append(bound)
    for stage in stages:
        best = None
        best_key = None
        seen = 0
        for v in intlinalg.enumerate_box_vectors(
            basis, stage, budget=budget, pre_reduced=True
        ):
            key = (max(abs(x) for x in v), tuple(abs(x) for x in v), tuple(v))
            if best is None or key < best_key:
                best, best_key = v, key
            seen += 1
            if seen >= scan_cap:
                break
        if best is not None:
            return best
    return None
