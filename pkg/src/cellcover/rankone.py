"""Rank-one subgroups of Q described by per-prime heights.

A height sequence assigns to every prime the largest exponent allowed in
denominators (with INF meaning unbounded).  The group of a sequence h is
{ x in Q : v_p(x) >= -h(p) for all p } together with 0; it always contains 1.
Two sequences are Baer-equivalent when they differ at finitely many primes,
each by a finite amount; infinite entries must agree exactly.  (The source
material leaves the infinite-vs-infinite convention implicit; we adopt the
standard one here.)
"""

from dataclasses import dataclass
from fractions import Fraction

from .valuations import is_prime, primes_upto

INF = float("inf")


def _check_height(v):
    if v == INF:
        return INF
    if isinstance(v, int) and v >= 0:
        return v
    raise ValueError(f"height must be a natural number or INF, got {v!r}")


@dataclass(frozen=True)
class HeightSequence:
    """Default height plus finitely many exceptions keyed by prime."""

    default: object
    exceptions: tuple = ()  # ((prime, height), ...), sorted, none equal to default

    def __post_init__(self):
        _check_height(self.default)
        seen = set()
        cleaned = []
        for p, h in sorted(self.exceptions):
            if not is_prime(p):
                raise ValueError(f"exception key {p} is not prime")
            if p in seen:
                raise ValueError(f"duplicate exception at prime {p}")
            seen.add(p)
            _check_height(h)
            if h != self.default:
                cleaned.append((p, h))
        object.__setattr__(self, "exceptions", tuple(cleaned))

    @classmethod
    def of(cls, default, exceptions=None):
        return cls(default, tuple((exceptions or {}).items()))

    def height(self, p):
        for prime, h in self.exceptions:
            if prime == p:
                return h
        return self.default

    def exception_map(self):
        return dict(self.exceptions)

    def exception_primes(self):
        return [p for p, _ in self.exceptions]


def baer_equivalent(t1, t2):
    """Finitely many differences, each finite (INF positions must agree)."""
    if t1.default != t2.default:
        # One default INF, other finite: cofinitely many infinite differences.
        # Both finite but distinct: infinitely many (finite) differences. The
        # equivalence needs the total difference finite, so both fail.
        return False
    for p in set(t1.exception_primes()) | set(t2.exception_primes()):
        a, b = t1.height(p), t2.height(p)
        if a == b:
            continue
        if a == INF or b == INF:
            return False
    return True


def type_leq(t1, t2):
    """Standard order on types: t1 <= t2 when t1(p) exceeds t2(p) only at
    finitely many primes, by finite amounts."""
    d1, d2 = t1.default, t2.default
    if d1 == INF and d2 != INF:
        return False
    if d1 != INF and d2 != INF and d1 > d2:
        return False
    for p in set(t1.exception_primes()) | set(t2.exception_primes()):
        a, b = t1.height(p), t2.height(p)
        if a == INF and b != INF:
            return False
    return True


@dataclass(frozen=True)
class RationalGroup:
    """The rank-one subgroup of Q determined by a height sequence."""

    heights: HeightSequence

    @classmethod
    def of(cls, default, exceptions=None):
        return cls(HeightSequence.of(default, exceptions))

    @classmethod
    def integers(cls):
        return cls.of(0)

    @classmethod
    def localized_away_from(cls, q):
        """<1/p : p != q>: height 1 everywhere except 0 at q."""
        return cls.of(1, {q: 0})

    @classmethod
    def with_inverted(cls, q):
        """Z[1/q]: height INF at q, 0 elsewhere."""
        return cls.of(0, {q: INF})

    def height(self, p):
        return self.heights.height(p)

    def contains(self, x):
        """x in the group: every denominator prime power within its height."""
        x = Fraction(x)
        if x == 0:
            return True
        den = x.denominator
        p = 2
        while den > 1:
            if den % p == 0:
                e = 0
                while den % p == 0:
                    den //= p
                    e += 1
                if self.height(p) != INF and e > self.height(p):
                    return False
            p = p + 1 if p == 2 else p + 2
        return True

    def is_ring(self):
        """Closed under multiplication: every height is 0 or INF."""
        values = [self.heights.default] + [h for _, h in self.heights.exceptions]
        return all(h == 0 or h == INF for h in values)

    def nucleus(self):
        """Largest unital subring of Q acting on the group: keep INF heights,
        flatten finite ones to 0."""
        default = INF if self.heights.default == INF else 0
        exc = {}
        for p, h in self.heights.exceptions:
            new = INF if h == INF else 0
            if new != default:
                exc[p] = new
        return RationalGroup.of(default, exc)

    def infinite_height_primes_upto(self, n):
        if self.heights.default == INF:
            exc = self.heights.exception_map()
            return [p for p in primes_upto(n) if exc.get(p, INF) == INF]
        return [p for p, h in self.heights.exceptions if h == INF and p <= n]

    def generators_upto(self, n, power_cap=3):
        """1 together with 1/p^e witnesses for p <= n, for sampling tests."""
        gens = [Fraction(1)]
        for p in primes_upto(n):
            h = self.height(p)
            top = power_cap if h == INF else min(h, power_cap)
            for e in range(1, int(top) + 1):
                gens.append(Fraction(1, p**e))
        return gens

    def describe(self):
        parts = [f"default={_fmt(self.heights.default)}"]
        parts += [f"{p}={_fmt(h)}" for p, h in self.heights.exceptions]
        return ";".join(parts)


def _fmt(h):
    return "inf" if h == INF else str(h)


def parse_heights(text):
    """Parse "default=1;3=0;5=inf" into a HeightSequence."""
    default = None
    exceptions = {}
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        key, _, value = chunk.partition("=")
        h = INF if value.strip() == "inf" else int(value)
        if key.strip() == "default":
            default = h
        else:
            exceptions[int(key)] = h
    if default is None:
        raise ValueError("height spec needs a default=... entry")
    return HeightSequence.of(default, exceptions)
