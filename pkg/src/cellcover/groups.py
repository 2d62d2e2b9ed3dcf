"""Finite-rank torsion-free groups presented as a free lattice with rank-one
height data on each basis direction, plus prime-indexed adjunction families.

The supported shapes are exactly the ones the constructions produce:

  * prime families adjoin (target + z_p) / p^k over a describable prime set,
    with the offset z_p given by a total rule (constant, congruence-constant,
    table with optional declared extension, or a sigma-style table of picked
    kernel elements);
  * completion families adjoin (target + o_m) / q_m along the partial
    products of a multiplicative set, with offsets coherent with recorded
    completion digits.

Membership for bounded-denominator elements is decided exactly: after folding
completion families (whose adjunction chain collapses to its top level at a
finite truncation), only finitely many primes can obstruct, and each is a
solvable system of congruences in the family parameter.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from .rankone import INF
from .valuations import MultiplicativeSet, PrimeClass, is_prime

ROLE_KERNEL = "kernel-basis"
ROLE_COKERNEL_LIFT = "cokernel-lift"
ROLE_COMPLETION_MIX = "completion-mix"
ROLES = (ROLE_KERNEL, ROLE_COKERNEL_LIFT, ROLE_COMPLETION_MIX)


class MalformedElementError(ValueError):
    """Element uses a symbol outside the presentation's basis."""


class UnsupportedPresentationError(ValueError):
    """The requested operation is outside the supported presentation shapes."""


# ---------------------------------------------------------------------------
# elements

@dataclass(frozen=True)
class ElementExpr:
    """Finite rational combination of basis symbols."""

    coords: tuple  # ((symbol, Fraction), ...) sorted by symbol, nonzero only

    @classmethod
    def of(cls, mapping=None, **kw):
        data = dict(mapping or {})
        data.update(kw)
        coords = tuple(
            sorted((s, Fraction(c)) for s, c in data.items() if Fraction(c) != 0)
        )
        return cls(coords)

    @classmethod
    def sym(cls, name):
        return cls.of({name: 1})

    @classmethod
    def zero(cls):
        return cls(())

    def coeff(self, s):
        for name, c in self.coords:
            if name == s:
                return c
        return Fraction(0)

    def support(self):
        return [s for s, _ in self.coords]

    @property
    def is_zero(self):
        return not self.coords

    def __add__(self, other):
        data = dict(self.coords)
        for s, c in other.coords:
            data[s] = data.get(s, Fraction(0)) + c
        return ElementExpr.of(data)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return ElementExpr(tuple((s, -c) for s, c in self.coords))

    def scale(self, k):
        k = Fraction(k)
        if k == 0:
            return ElementExpr.zero()
        return ElementExpr(tuple((s, c * k) for s, c in self.coords))

    def is_integral(self):
        return all(c.denominator == 1 for _, c in self.coords)

    def denominator_lcm(self):
        out = 1
        for _, c in self.coords:
            d = c.denominator
            out = out * d // _gcd(out, d)
        return out

    def __str__(self):
        if not self.coords:
            return "0"
        parts = []
        for s, c in self.coords:
            if c == 1:
                parts.append(s)
            elif c == -1:
                parts.append(f"-{s}")
            else:
                parts.append(f"{c}*{s}")
        return " + ".join(parts).replace("+ -", "- ")


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


# ---------------------------------------------------------------------------
# offset rules for prime families

@dataclass(frozen=True)
class ConstantRule:
    """z_p = z for every prime of the family."""

    value: ElementExpr
    kind: str = field(default="constant", init=False)

    def offset_at(self, p):
        return self.value

    @property
    def is_total(self):
        return True


@dataclass(frozen=True)
class CongruenceConstantRule:
    """z_p = the coordinatewise lift of (c mod p) into [0, p).

    For c = -e this produces the offsets (p - 1) * e: not constant as
    integers, but congruent to the fixed element c at every family prime, so
    the adjoined generators agree with the constant-rule ones mod the kernel.
    """

    value: ElementExpr
    kind: str = field(default="congruence-constant", init=False)

    def offset_at(self, p):
        coords = {s: int(c) % p for s, c in self.value.coords}
        return ElementExpr.of(coords)

    @property
    def is_total(self):
        return True


@dataclass(frozen=True)
class TableRule:
    """Explicit finite table p -> z_p, with an optional declared constant
    extension for primes beyond the table."""

    entries: tuple  # ((prime, ElementExpr), ...)
    extension: object = None  # ElementExpr or None

    kind: str = field(default="table", init=False)

    def entry_map(self):
        return dict(self.entries)

    def offset_at(self, p):
        for prime, z in self.entries:
            if prime == p:
                return z
        return self.extension  # None signals "outside the declared table"

    @property
    def is_total(self):
        return self.extension is not None


@dataclass(frozen=True)
class SigmaRule:
    """Offsets b_r picked per prime of the family, driven by a recorded
    scalar-to-prime assignment (see constructions.SigmaAssignment).

    b_table overrides b_default at individual primes; the assignment is
    carried for the symbolic solver, membership only needs the offsets.
    """

    b_default: ElementExpr
    b_table: tuple = ()  # ((prime, ElementExpr), ...)
    assignment: object = None
    kind: str = field(default="sigma", init=False)

    def offset_at(self, p):
        for prime, z in self.b_table:
            if prime == p:
                return z
        return self.b_default

    @property
    def is_total(self):
        return True


# ---------------------------------------------------------------------------
# adjunction families

@dataclass(frozen=True)
class PrimeFamily:
    """Adjoins (target + z_p) / p^exponent for p in the prime class."""

    primes: PrimeClass
    rule: object
    target: str
    exponent: int = 1

    kind = "prime"

    def __post_init__(self):
        if self.exponent < 1:
            raise ValueError("exponent must be >= 1")


@dataclass(frozen=True)
class CompletionFamily:
    """Adjoins (target + offsets[m-1]) / q_m for m = 1..levels.

    Offsets are the negated truncations of a completion-element combination;
    coherence (offset_{m+1} == offset_m mod q_m, coordinatewise) is required,
    which is what makes the chain collapse to its top generator.
    """

    schedule: MultiplicativeSet
    offsets: tuple  # ElementExpr per level 1..levels, integer coords
    target: str

    kind = "completion"

    def __post_init__(self):
        if len(self.offsets) != self.schedule.levels:
            raise ValueError("need one offset per level 1..M")
        for off in self.offsets:
            if not off.is_integral():
                raise ValueError("completion offsets must be lattice elements")
        for m in range(1, self.schedule.levels):
            q_m = self.schedule.q(m)
            lo, hi = self.offsets[m - 1], self.offsets[m]
            for s in set(lo.support()) | set(hi.support()):
                if (int(hi.coeff(s)) - int(lo.coeff(s))) % q_m != 0:
                    raise ValueError(f"offsets incoherent at level {m}")

    @property
    def levels(self):
        return self.schedule.levels

    def top_generator_data(self):
        m = self.levels
        return self.schedule.q(m), self.offsets[m - 1]


# ---------------------------------------------------------------------------
# presentations

@dataclass(frozen=True)
class Basis:
    names: tuple
    roles: tuple

    def __post_init__(self):
        if not self.names:
            raise ValueError("basis must be nonempty")
        if len(set(self.names)) != len(self.names):
            raise ValueError("basis names must be distinct")
        if len(self.roles) != len(self.names):
            raise ValueError("one role per symbol")
        if any(r not in ROLES for r in self.roles):
            raise ValueError(f"roles must be among {ROLES}")

    @classmethod
    def of(cls, **name_to_role):
        return cls(tuple(name_to_role), tuple(name_to_role.values()))

    def role(self, name):
        return self.roles[self.names.index(name)]

    def names_with_role(self, role):
        return [n for n, r in zip(self.names, self.roles) if r == role]


@dataclass(frozen=True)
class CompletionAmbient:
    """Digit data of a truncated completion the presentation embeds into:
    each completion-mix symbol is a recorded combination of completion
    elements over the lattice symbols."""

    schedule: MultiplicativeSet
    mixes: tuple  # ((mix_sym, ((lattice_sym, CompletionElement), ...)), ...)

    def mix_map(self):
        return {sym: dict(parts) for sym, parts in self.mixes}


@dataclass(frozen=True)
class GroupPresentation:
    basis: Basis
    heights: tuple  # ((symbol, HeightSequence), ...) matching basis order
    families: tuple = ()
    purified: bool = False
    ambient: object = None  # CompletionAmbient or None
    seed: object = None

    def __post_init__(self):
        hmap = dict(self.heights)
        if set(hmap) != set(self.basis.names):
            raise ValueError("heights must cover exactly the basis symbols")
        for fam in self.families:
            if fam.target not in self.basis.names:
                raise ValueError(f"family target {fam.target} not in basis")
            offs = _family_offset_samples(fam)
            for off in offs:
                for s in off.support():
                    if s not in self.basis.names:
                        raise ValueError(f"family offset uses unknown symbol {s}")
                if not off.is_integral():
                    raise ValueError("family offsets must lie in the lattice")
        _check_one_family_per_prime(self.families)

    @classmethod
    def of(cls, basis, heights, families=(), **kw):
        hs = tuple((s, heights[s]) for s in basis.names)
        return cls(basis, hs, tuple(families), **kw)

    def height(self, sym, p=None):
        hmap = dict(self.heights)
        return hmap[sym] if p is None else hmap[sym].height(p)

    def height_map(self):
        return dict(self.heights)

    @property
    def rank(self):
        return len(self.basis.names)

    def prime_families(self):
        return [f for f in self.families if f.kind == "prime"]

    def completion_families(self):
        return [f for f in self.families if f.kind == "completion"]

    def family_at_prime(self, p):
        for fam in self.prime_families():
            if fam.primes.contains(p):
                return fam
        return None

    def generators(self, prime_bound, height_cap=3):
        """A generating set for the truncation: basis symbols, height
        witnesses s / p^min(height, cap) for p up to the prime bound, and all
        family generators (completion chains contribute every level)."""
        from .valuations import primes_upto

        gens = [ElementExpr.sym(s) for s in self.basis.names]
        hmap = self.height_map()
        for s in self.basis.names:
            hs = hmap[s]
            for p in primes_upto(prime_bound):
                h = hs.height(p)
                if h == 0:
                    continue
                exp = height_cap if h == INF else min(int(h), height_cap)
                gens.append(ElementExpr.of({s: Fraction(1, p**exp)}))
        for fam in self.prime_families():
            for p in fam.primes.primes_upto(prime_bound):
                z = fam.rule.offset_at(p)
                if z is None:
                    continue
                gens.append(
                    (ElementExpr.sym(fam.target) + z).scale(
                        Fraction(1, p**fam.exponent)
                    )
                )
        for fam in self.completion_families():
            for m in range(1, fam.levels + 1):
                gens.append(
                    (ElementExpr.sym(fam.target) + fam.offsets[m - 1]).scale(
                        Fraction(1, fam.schedule.q(m))
                    )
                )
        return gens


def _family_offset_samples(fam):
    if fam.kind == "completion":
        return list(fam.offsets)
    rule = fam.rule
    if isinstance(rule, ConstantRule):
        return [rule.value]
    if isinstance(rule, CongruenceConstantRule):
        return [rule.value]
    if isinstance(rule, TableRule):
        out = [z for _, z in rule.entries]
        if rule.extension is not None:
            out.append(rule.extension)
        return out
    if isinstance(rule, SigmaRule):
        return [rule.b_default] + [z for _, z in rule.b_table]
    raise UnsupportedPresentationError(f"unknown rule kind {rule!r}")


def _check_one_family_per_prime(families, probe_bound=200):
    """Membership assumes a single family is active at any prime."""
    prime_fams = [f for f in families if f.kind == "prime"]
    for i in range(len(prime_fams)):
        for j in range(i + 1, len(prime_fams)):
            if prime_fams[i].primes.overlaps(prime_fams[j].primes, probe_bound):
                raise UnsupportedPresentationError(
                    "two prime families share a prime; membership would need "
                    "a joint solve that this presentation shape does not use"
                )
    comp_supports = set()
    for f in families:
        if f.kind == "completion":
            comp_supports.update(f.schedule.prime_support())
    for f in prime_fams:
        if any(f.primes.contains(p) for p in comp_supports):
            raise UnsupportedPresentationError(
                "prime family overlaps a completion schedule prime"
            )


# ---------------------------------------------------------------------------
# membership

YES = "yes"
NO = "no"
UNKNOWN = "unknown-at-bound"


@dataclass(frozen=True)
class MemberVerdict:
    kind: str
    reason: str = ""
    prime: object = None

    def __bool__(self):
        return self.kind == YES


def member(G, x):
    """Decide x in G.  Exact (yes/no) for total offset rules; unknown-at-bound
    when a table rule without declared extension is interrogated off-table."""
    for s in x.support():
        if s not in G.basis.names:
            raise MalformedElementError(f"symbol {s} not in basis")
    if x.is_zero:
        return MemberVerdict(YES)

    work = x
    # Completion chains collapse to their top generator at a finite
    # truncation; the integer multiple of that generator is forced by the
    # target coordinate, so fold it away first.
    for fam in G.completion_families():
        q_top, off_top = fam.top_generator_data()
        t = work.coeff(fam.target) * q_top
        if t.denominator != 1:
            return MemberVerdict(
                NO, f"{fam.target}-coordinate denominator outside the schedule"
            )
        gen = (ElementExpr.sym(fam.target) + off_top).scale(Fraction(1, q_top))
        work = work - gen.scale(t)

    hmap = G.height_map()
    relevant = set()
    for _, c in work.coords:
        den = c.denominator
        p = 2
        while den > 1:
            if den % p == 0:
                relevant.add(p)
                while den % p == 0:
                    den //= p
            p = p + 1 if p == 2 else p + 2

    for p in sorted(relevant):
        fam = G.family_at_prime(p)
        if fam is None:
            for s, c in work.coords:
                h = hmap[s].height(p)
                if h != INF and _vp(c, p) < -h:
                    return MemberVerdict(NO, f"height at {p} exceeded on {s}", p)
            continue
        z = fam.rule.offset_at(p)
        if z is None:
            return MemberVerdict(UNKNOWN, f"table rule has no entry at {p}", p)
        verdict = _local_member_with_family(work, p, fam, z, hmap, G)
        if verdict.kind != YES:
            return verdict
    return MemberVerdict(YES)


def _vp(x, p):
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def _local_member_with_family(x, p, fam, z, hmap, G):
    """Solve for t in Z with x - t*(target + z)/p^k locally in the lattice."""
    k = fam.exponent
    pk = p**k
    sol_res, sol_mod = 0, 1  # current solution set: t == sol_res (mod sol_mod)
    for s in G.basis.names:
        h = hmap[s].height(p)
        if h == INF:
            continue
        g = (1 if s == fam.target else 0) + int(z.coeff(s))
        a = x.coeff(s) * pk
        e = k - int(h)
        if e <= 0:
            if a != 0 and _vp(a, p) < e:
                return MemberVerdict(NO, f"height at {p} exceeded on {s}", p)
            continue
        if a != 0 and _vp(a, p) < 0:
            return MemberVerdict(NO, f"height at {p} exceeded on {s}", p)
        pe = p**e
        a_mod = _fraction_mod(a, pe, p)
        res = _solve_scaled_congruence(g, a_mod, p, e)
        if res is None:
            return MemberVerdict(NO, f"no family multiple fits at {p} on {s}", p)
        r, mod = res
        merged = _merge_congruence(sol_res, sol_mod, r, mod, p)
        if merged is None:
            return MemberVerdict(NO, f"family congruences clash at {p}", p)
        sol_res, sol_mod = merged
    return MemberVerdict(YES)


def _fraction_mod(a, pe, p):
    num, den = a.numerator, a.denominator
    assert den % p != 0
    return num * pow(den, -1, pe) % pe


def _solve_scaled_congruence(g, a, p, e):
    """t*g == a (mod p^e) -> (residue, modulus) or None."""
    pe = p**e
    v = 0
    gg = g
    while gg != 0 and gg % p == 0:
        gg //= p
        v += 1
    if g == 0 or v >= e:
        return (0, 1) if a % pe == 0 else None
    if a % (p**v) != 0:
        return None
    mod = p ** (e - v)
    t = (a // (p**v)) * pow(gg, -1, mod) % mod
    return t, mod


def _merge_congruence(r1, m1, r2, m2, p):
    if m1 < m2:
        r1, m1, r2, m2 = r2, m2, r1, m1
    if (r1 - r2) % m2 != 0:
        return None
    return r1, m1


def contains_element(G, x):
    return member(G, x).kind == YES


# ---------------------------------------------------------------------------
# purification

class UnsupportedPurificationError(UnsupportedPresentationError):
    pass


def purify(G, sub_generators):
    """Smallest pure sub-presentation of G containing the given generators.

    Supported shapes (the ones the constructions need):
      * the full basis span inside a presentation carrying completion digit
        data: attaches the truncation family (target + o_m)/q_m per level,
        realizing the pure closure inside the truncated completion;
      * generators that are rational multiples of single basis symbols:
        scaling is stripped (a multiple lies in the subgroup, so the symbol
        itself is in the closure) and the symbol's full height data kept;
      * an already-purified presentation: returned unchanged (idempotence).
    """
    gens = list(sub_generators)
    support = set()
    for g in gens:
        for s in g.support():
            if s not in G.basis.names:
                raise MalformedElementError(f"symbol {s} not in basis")
            support.add(s)
    if not all(_is_scaled_symbol(g) for g in gens):
        raise UnsupportedPurificationError(
            "generator shape outside the supported purification cases"
        )

    # Full-span closure, possibly inside a recorded completion ambient.
    if support == set(G.basis.names):
        if G.ambient is None or not G.ambient.mixes:
            return G
        existing_targets = {f.target for f in G.completion_families()}
        new_families = list(G.families)
        for sym, parts in G.ambient.mixes:
            if sym in existing_targets:
                continue
            schedule = G.ambient.schedule
            offsets = []
            for m in range(1, schedule.levels + 1):
                off = ElementExpr.zero()
                for lattice_sym, elem in parts:
                    off = off + ElementExpr.of({lattice_sym: -elem.residue(m)})
                offsets.append(off)
            new_families.append(
                CompletionFamily(schedule=schedule, offsets=tuple(offsets), target=sym)
            )
        return GroupPresentation(
            basis=G.basis,
            heights=G.heights,
            families=tuple(new_families),
            purified=True,
            ambient=G.ambient,
            seed=G.seed,
        )

    # Scaled single-symbol generators over a proper subset: strip scaling,
    # keep the full height data of each direction.
    names = [s for s in G.basis.names if s in support]
    for fam in G.families:
        if fam.target in names:
            raise UnsupportedPurificationError(
                "sub-presentation cuts through an adjunction family"
            )
    basis = Basis(tuple(names), tuple(G.basis.role(n) for n in names))
    hmap = G.height_map()
    return GroupPresentation.of(basis, {n: hmap[n] for n in names})


def _is_scaled_symbol(g):
    return len(g.coords) == 1


# ---------------------------------------------------------------------------
# divisible subgroups, rank, torsion quotients

def max_divisible_subgroup(G, q):
    """Largest sub-presentation all of whose elements are q^n-divisible in G
    for every n.  At a finite truncation only infinite lattice heights certify
    unbounded divisibility (families carry a fixed finite exponent)."""
    if not is_prime(q):
        raise ValueError(f"{q} is not prime")
    hmap = G.height_map()
    names = [s for s in G.basis.names if hmap[s].height(q) == INF]
    if not names:
        return None
    for fam in G.families:
        if fam.target in names:
            raise UnsupportedPresentationError(
                "divisible subgroup would absorb an adjunction family"
            )
    basis = Basis(tuple(names), tuple(G.basis.role(n) for n in names))
    return GroupPresentation.of(basis, {n: hmap[n] for n in names})


def rank(G):
    return G.rank


def is_torsion_quotient(M, E, prime_bound=100):
    """Every materialized generator of M has a denominator-clearing multiple
    inside E (the quotient is torsion with respect to the allowed primes)."""
    for g in M.generators(prime_bound):
        s = g.denominator_lcm()
        scaled = g.scale(s)
        if any(sym not in E.basis.names for sym in scaled.support()):
            return False
        if member(E, scaled).kind != YES:
            return False
    return True


def presentations_equal_as_subgroups(A, B, prime_bound=50):
    """Mutual containment of materialized generators (same ambient symbols)."""
    if set(A.basis.names) != set(B.basis.names):
        return False
    return all(member(B, g).kind == YES for g in A.generators(prime_bound)) and all(
        member(A, g).kind == YES for g in B.generators(prime_bound)
    )
