"""The three explicit cover candidates.

  * build_corrected: rank-one kernel inverted at q, a two-way split of the
    primes, zero offsets on one side and sigma-picked offsets on the other;
    the sigma table defeats every kernel-restriction scalar.
  * build_lemma22: same kernel, but offsets congruent to -1 at every family
    prime; the cover splits (the classical counterexample to the naive
    offset condition).
  * build_corner: kernel mixed into a rank-two cokernel through seeded
    completion digits, purified along the truncation schedule.
"""

from dataclasses import dataclass
from fractions import Fraction

from .groups import (
    Basis,
    CompletionAmbient,
    ConstantRule,
    CongruenceConstantRule,
    ElementExpr,
    GroupPresentation,
    PrimeFamily,
    ROLE_COKERNEL_LIFT,
    ROLE_COMPLETION_MIX,
    ROLE_KERNEL,
    SigmaRule,
    purify,
)
from .homsolver import Homomorphism
from .rankone import INF, HeightSequence, RationalGroup
from .valuations import (
    CompletionElement,
    MultiplicativeSet,
    PrimeClass,
    independence_check,
    is_prime,
    valuation,
)

CORRECTED = "corrected-cover"
LEMMA_SPLIT = "split-counterexample"
CORNER = "completion-mix-cover"
USER = "user"


class DomainExhaustsPrimesError(RuntimeError):
    """The sigma domain is larger than the truncated prime class."""


class IndependenceSurrogateError(RuntimeError):
    """Seeded digits admit a bounded relation; re-seed the construction."""


@dataclass(frozen=True)
class SigmaAssignment:
    """Injective finite map from nonzero scalars z of Z[1/q] to primes of the
    second split class, with v_sigma(z)(z) <= 0 for every assigned z.

    pairs holds (z, prime) in assignment order; declared_total records that
    the greedy rule is meant as the truncation of a total assignment on all
    nonzero scalars.
    """

    q: int
    pairs: tuple  # ((Fraction, prime), ...)
    numerator_bound: int
    exponent_bound: int
    declared_total: bool = True

    def __post_init__(self):
        primes_used = [r for _, r in self.pairs]
        if len(set(primes_used)) != len(primes_used):
            raise ValueError("assignment must be injective")
        for z, r in self.pairs:
            if valuation(z, r) > 0:
                raise ValueError(f"{z} is divisible by its assigned prime {r}")

    def assigned(self, z):
        for z0, r in self.pairs:
            if z0 == z:
                return r
        return None


def sigma_domain(q, numerator_bound, exponent_bound):
    """Nonzero scalars n / q^e in lowest terms, enumerated by
    (|numerator|, exponent, sign)."""
    out = []
    for absn in range(1, numerator_bound + 1):
        for e in range(0, exponent_bound + 1):
            if e > 0 and absn % q == 0:
                continue
            for n in (absn, -absn):
                out.append(Fraction(n, q**e))
    return out


def sigma_assignment(q, numerator_bound, exponent_bound, pi2, prime_bound):
    """Greedy deterministic assignment: scan the domain in order and give each
    scalar the smallest unused class prime not dividing its numerator."""
    if not is_prime(q):
        raise ValueError(f"{q} is not prime")
    if pi2.contains(q):
        raise ValueError("q must lie outside the second class")
    available = pi2.primes_upto(prime_bound)
    used = set()
    pairs = []
    for z in sigma_domain(q, numerator_bound, exponent_bound):
        r = next(
            (p for p in available if p not in used and z.numerator % p != 0), None
        )
        if r is None:
            raise DomainExhaustsPrimesError(
                f"no unused class prime <= {prime_bound} for scalar {z}; "
                "increase the prime bound"
            )
        used.add(r)
        pairs.append((z, r))
    return SigmaAssignment(q, tuple(pairs), numerator_bound, exponent_bound)


@dataclass(frozen=True)
class CellularCandidate:
    """A kernel-cover-cokernel triple with its projection and build metadata."""

    K: GroupPresentation
    G: GroupPresentation
    H: GroupPresentation
    pi: Homomorphism
    construction: str
    params: tuple = ()  # ((key, value), ...)
    section: object = None  # known splitting section, when built split
    kernel_projection: object = None  # known retraction onto K, when split

    def __post_init__(self):
        for s in self.K.basis.names:
            if not self.pi.apply(ElementExpr.sym(s)).is_zero:
                raise ValueError("projection must kill the kernel")

    def param(self, key, default=None):
        for k, v in self.params:
            if k == key:
                return v
        return default


def default_cokernel(q):
    """<1/p : p != q>, the rank-one non-ring the covers project onto."""
    return RationalGroup.of(1, {q: 0})


def build_corrected(
    q,
    prime_bound,
    numerator_bound=3,
    exponent_bound=1,
    cokernel=None,
):
    """Cover candidate with kernel inverted at q and offsets picked against
    every scalar.

    The kernel direction is e with heights Z[1/q]; the first split class
    adjoins a/p, the second (a + b_r)/r with b_r = e.  With b = e the sigma
    invariant v_sigma(z)(z * 1) <= 0 is exactly the assignment invariant, so
    the choice b = 1 is recorded rather than searched.

    A general rank-one cokernel is supported when its heights are 0 at q, 1 at
    the other finite-height primes, and INF on a recorded nucleus set; the
    nucleus primes become extra lattice divisibility on the lift direction and
    the split classes partition the height-1 primes.
    """
    if not is_prime(q):
        raise ValueError(f"{q} is not prime")
    R = cokernel if cokernel is not None else default_cokernel(q)
    if R.height(q) != 0:
        raise ValueError("cokernel must have height 0 at q")
    if R.is_ring():
        raise ValueError("cokernel must not be a ring")
    nucleus_primes = []
    for p, h in R.heights.exceptions:
        if h == INF:
            nucleus_primes.append(p)
        elif p != q and h != 1:
            raise ValueError(
                "cokernel heights outside {0 at q, 1, INF} are not supported"
            )
    if R.heights.default != 1:
        raise ValueError("cokernel default height must be 1")

    # Nucleus primes must not enter the split classes: they are realized as
    # extra lattice divisibility, so force them to side 0 (neither class).
    forced = tuple(sorted([(q, 1)] + [(p, 0) for p in nucleus_primes]))
    pi1 = PrimeClass("residue-split", forced=forced, side=1)
    pi2 = PrimeClass("residue-split", forced=forced, side=2)

    sigma = sigma_assignment(q, numerator_bound, exponent_bound, pi2, prime_bound)
    e, a, h = "e", "a", "h"
    b_default = ElementExpr.sym(e)

    K = GroupPresentation.of(
        Basis((e,), (ROLE_KERNEL,)), {e: HeightSequence.of(0, {q: INF})}
    )
    lift_heights = HeightSequence.of(0, {p: INF for p in nucleus_primes})
    G = GroupPresentation.of(
        Basis((e, a), (ROLE_KERNEL, ROLE_COKERNEL_LIFT)),
        {e: HeightSequence.of(0, {q: INF}), a: lift_heights},
        [
            PrimeFamily(primes=pi1, rule=ConstantRule(ElementExpr.zero()), target=a),
            PrimeFamily(
                primes=pi2,
                rule=SigmaRule(b_default=b_default, assignment=sigma),
                target=a,
            ),
        ],
    )
    H = GroupPresentation.of(
        Basis((h,), (ROLE_COKERNEL_LIFT,)), {h: R.heights}
    )
    pi = Homomorphism.from_columns((e, a), (h,), {a: ElementExpr.sym(h)})
    params = (
        ("q", q),
        ("prime_bound", prime_bound),
        ("numerator_bound", numerator_bound),
        ("exponent_bound", exponent_bound),
        ("b_choice", "kernel generator"),
        ("nucleus_primes", tuple(nucleus_primes)),
    )
    return CellularCandidate(K, G, H, pi, CORRECTED, params)


def build_lemma22(q, prime_bound):
    """The splitting counterexample: offsets congruent to -1 at every family
    prime, so the adjoined generators collapse to (a - 1)/p mod the kernel."""
    if not is_prime(q):
        raise ValueError(f"{q} is not prime")
    e, a, h = "e", "a", "h"
    K = GroupPresentation.of(
        Basis((e,), (ROLE_KERNEL,)), {e: HeightSequence.of(0, {q: INF})}
    )
    fam = PrimeFamily(
        primes=PrimeClass.complement([q]),
        rule=CongruenceConstantRule(ElementExpr.of({e: -1})),
        target=a,
    )
    G = GroupPresentation.of(
        Basis((e, a), (ROLE_KERNEL, ROLE_COKERNEL_LIFT)),
        {e: HeightSequence.of(0, {q: INF}), a: HeightSequence.of(0)},
        [fam],
    )
    H = GroupPresentation.of(
        Basis((h,), (ROLE_COKERNEL_LIFT,)), {h: default_cokernel(q).heights}
    )
    pi = Homomorphism.from_columns((e, a), (h,), {a: ElementExpr.sym(h)})
    section = Homomorphism.from_columns(
        (h,), (e, a), {h: ElementExpr.of({a: 1, e: -1})}
    )
    retraction = Homomorphism.from_columns(
        (e, a), (e,), {e: ElementExpr.sym(e), a: ElementExpr.sym(e)}
    )
    params = (("q", q), ("prime_bound", prime_bound), ("b_rule", "p-1"))
    return CellularCandidate(
        K, G, H, pi, LEMMA_SPLIT, params, section=section, kernel_projection=retraction
    )


def derive_seed(seed, label):
    return f"{seed}:{label}"


def build_corner(
    kernel_rank,
    schedule=None,
    precision=64,
    seed=0,
    coeff_bound=1000,
    s_prime=5,
):
    """Kernel of rank kappa mixed into a rank-two cokernel.

    Seeded digits w, w_1..w_kappa are drawn along the schedule; the group is
    the purification of <kernel, f, u> with u = sum(w_i e_i) + w f inside the
    truncated completion, and the projection forgets the kernel coordinates.
    Certificates that no bounded relation exists on the supports the cover
    argument uses are computed here and recorded; a found relation aborts the
    build (re-seed).
    """
    if kernel_rank < 1:
        raise ValueError("kernel rank must be >= 1")
    if schedule is None:
        schedule = MultiplicativeSet.prime_power(s_prime, precision)
    if schedule.levels != precision:
        raise ValueError("schedule length must equal the precision")

    w = CompletionElement.seeded(schedule, derive_seed(seed, "w"))
    w_i = [
        CompletionElement.seeded(schedule, derive_seed(seed, f"w{i}"))
        for i in range(1, kernel_rank + 1)
    ]

    # Certificates on the supports the cover argument needs.
    linear = independence_check(
        w_i + [w],
        degree=1,
        coeff_bound=coeff_bound,
        level=precision,
    )
    iw = kernel_rank  # index of w in the ordered list
    quad_support = [(), (iw,), (iw, iw)]
    quad_support += [(i,) for i in range(kernel_rank)]
    quad_support += [(i, iw) for i in range(kernel_rank)]
    quadratic = independence_check(
        w_i + [w],
        degree=2,
        coeff_bound=2 * coeff_bound,
        level=precision,
        monomials=quad_support,
    )
    for cert in (linear, quadratic):
        if cert.found_relation:
            raise IndependenceSurrogateError(
                f"seed {seed!r} admits a bounded relation {cert.witness} on "
                f"monomials {cert.monomials}; re-seed the construction"
            )

    e_syms = tuple(f"e{i}" for i in range(1, kernel_rank + 1))
    f_sym, u_sym, v_sym = "f", "u", "v"

    zero = HeightSequence.of(0)
    K = GroupPresentation.of(
        Basis(e_syms, (ROLE_KERNEL,) * kernel_rank), {s: zero for s in e_syms}
    )

    mixes = (
        (
            u_sym,
            tuple((e_syms[i], w_i[i]) for i in range(kernel_rank)) + ((f_sym, w),),
        ),
    )
    ambient_G = GroupPresentation.of(
        Basis(
            e_syms + (f_sym, u_sym),
            (ROLE_KERNEL,) * kernel_rank + (ROLE_COKERNEL_LIFT, ROLE_COMPLETION_MIX),
        ),
        {**{s: zero for s in e_syms}, f_sym: zero, u_sym: zero},
        ambient=CompletionAmbient(schedule=schedule, mixes=mixes),
        seed=seed,
    )
    G = purify(
        ambient_G,
        [ElementExpr.sym(s) for s in e_syms + (f_sym, u_sym)],
    )

    ambient_H = GroupPresentation.of(
        Basis((f_sym, v_sym), (ROLE_COKERNEL_LIFT, ROLE_COMPLETION_MIX)),
        {f_sym: zero, v_sym: zero},
        ambient=CompletionAmbient(schedule=schedule, mixes=((v_sym, ((f_sym, w),)),)),
        seed=seed,
    )
    H = purify(ambient_H, [ElementExpr.sym(f_sym), ElementExpr.sym(v_sym)])

    pi = Homomorphism.from_columns(
        e_syms + (f_sym, u_sym),
        (f_sym, v_sym),
        {f_sym: ElementExpr.sym(f_sym), u_sym: ElementExpr.sym(v_sym)},
    )
    params = (
        ("kernel_rank", kernel_rank),
        ("precision", precision),
        ("seed", seed),
        ("coeff_bound", coeff_bound),
        ("schedule_generators", schedule.generators),
        ("linear_certificate", linear),
        ("quadratic_certificate", quadratic),
    )
    return CellularCandidate(K, G, H, pi, CORNER, params)
