"""Command-line front end.

Exit codes: 0 = a mathematical verdict was produced (Cellular as well as
NotCellular / Split), 1 = inconclusive or budget exceeded, 2 = usage or input
errors.  Identical configurations (including seeds) produce byte-identical
output files.
"""

import argparse
import os
import sys

from . import fileio
from .constructions import (
    build_corner,
    build_corrected,
    build_lemma22,
    DomainExhaustsPrimesError,
    IndependenceSurrogateError,
)
from .groups import ConstantRule, ElementExpr, TableRule
from .homsolver import (
    BudgetError,
    INCONCLUSIVE,
    SearchBounds,
    end_ring,
    solve_hom,
)
from .intlinalg import BudgetExceededError
from .rankone import RationalGroup, baer_equivalent, parse_heights, type_leq
from .sweep import run_sweep
from .verifier import (
    EXTENSION_NOTE,
    build_free_kernel_candidate,
    obstruct_free_kernel,
    verify_cellular,
)

EXIT_VERDICT = 0
EXIT_INCONCLUSIVE = 1
EXIT_USAGE = 2

DEFAULT_BUDGET = int(os.environ.get("CELLCOVER_BUDGET", 10**7))


def _bounds_from(args):
    return SearchBounds(
        coeff_bound=args.coeff_bound,
        prime_bound=args.prime_bound,
        level=getattr(args, "level", None),
        budget=getattr(args, "budget", DEFAULT_BUDGET),
    )


def _add_bounds(parser, coeff=50, prime=50):
    parser.add_argument("--coeff-bound", type=int, default=coeff)
    parser.add_argument("--prime-bound", type=int, default=prime)
    parser.add_argument("--budget", type=int, default=DEFAULT_BUDGET)


def _write_or_print(args, payload):
    text = fileio.dumps(payload)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def parse_zrule(spec, rank):
    """constant:2  |  constant:2:3  |  table:3=0,5=2;ext=2  (coordinates
    separated by ':' for kernel rank above one)."""
    kind, _, payload = spec.partition(":")
    syms = [f"e{j}" for j in range(1, rank + 1)]

    def vec(text):
        parts = text.split(":")
        if len(parts) != rank:
            raise ValueError(f"expected {rank} coordinates in {text!r}")
        return ElementExpr.of({s: int(p) for s, p in zip(syms, parts)})

    if kind == "constant":
        return ConstantRule(vec(payload))
    if kind == "table":
        body, _, ext = payload.partition(";ext=")
        entries = []
        if body:
            for chunk in body.split(","):
                key, _, val = chunk.partition("=")
                entries.append((int(key), vec(val)))
        extension = vec(ext) if ext else None
        return TableRule(tuple(sorted(entries)), extension)
    raise ValueError(f"unknown offset rule kind {kind!r}")


def parse_cokernel(spec):
    """nonring:exclude=2  |  heights:default=1;2=0"""
    kind, _, payload = spec.partition(":")
    if kind == "nonring":
        key, _, val = payload.partition("=")
        if key != "exclude":
            raise ValueError(f"unknown nonring parameter {key!r}")
        excluded = tuple(int(p) for p in val.split(",") if p)
        return excluded
    if kind == "heights":
        hs = parse_heights(payload)
        excluded = tuple(p for p, v in hs.exceptions if v == 0)
        if hs.default != 1 or any(v != 0 for _, v in hs.exceptions):
            raise ValueError(
                "obstruction cokernels must have default height 1 with "
                "finitely many height-0 primes"
            )
        return excluded
    raise ValueError(f"unknown cokernel spec {kind!r}")


def cmd_construct(args):
    if args.shape == "corrected":
        cand = build_corrected(
            args.q,
            args.prime_bound,
            numerator_bound=args.num_bound,
            exponent_bound=args.exp_bound,
        )
    elif args.shape == "lemma22":
        cand = build_lemma22(args.q, args.prime_bound)
    else:
        cand = build_corner(
            args.kappa,
            precision=args.precision,
            seed=args.seed,
            coeff_bound=args.coeff_bound,
            s_prime=args.s_prime,
        )
    _write_or_print(args, fileio.candidate_to_json(cand))
    return EXIT_VERDICT


def cmd_verify(args):
    cand = fileio.load_candidate(args.bundle)
    report = verify_cellular(cand, _bounds_from(args))
    _write_or_print(args, fileio.cellular_report_to_json(report))
    print(f"overall: {report.overall}", file=sys.stderr)
    return EXIT_VERDICT if report.overall != "Inconclusive" else EXIT_INCONCLUSIVE


def cmd_hom(args):
    A = fileio.load_presentation(args.source)
    B = fileio.load_presentation(args.target)
    verdict = solve_hom(A, B, _bounds_from(args))
    _write_or_print(args, fileio.verdict_to_json(verdict))
    return EXIT_VERDICT if verdict.outcome != INCONCLUSIVE else EXIT_INCONCLUSIVE


def cmd_end(args):
    A = fileio.load_presentation(args.group)
    verdict = end_ring(A, _bounds_from(args))
    _write_or_print(args, fileio.verdict_to_json(verdict))
    return EXIT_VERDICT if verdict.outcome != INCONCLUSIVE else EXIT_INCONCLUSIVE


def cmd_obstruct(args):
    rule = parse_zrule(args.zrule, args.kernel_rank)
    excluded = parse_cokernel(args.cokernel)
    cand = build_free_kernel_candidate(
        args.kernel_rank, rule, excluded=excluded, prime_bound=args.prime_bound
    )
    report = obstruct_free_kernel(cand, prime_bound=args.prime_bound)
    _write_or_print(args, fileio.obstruction_report_to_json(report))
    print(f"conclusion: {report.conclusion}", file=sys.stderr)
    return (
        EXIT_VERDICT
        if report.conclusion != EXTENSION_NOTE
        else EXIT_INCONCLUSIVE
    )


def cmd_sweep(args):
    res = run_sweep(
        value_bound=args.value_bound,
        prime_bound=args.prime_bound,
        include_rank2=args.rank_max >= 2,
        workers=args.workers,
    )
    _write_or_print(args, fileio.sweep_result_to_json(res))
    return EXIT_VERDICT if res.clean else EXIT_INCONCLUSIVE


def cmd_type(args):
    if args.type_cmd == "ring":
        rg = RationalGroup(parse_heights(args.heights))
        print("true" if rg.is_ring() else "false")
        return EXIT_VERDICT
    if args.type_cmd == "nucleus":
        rg = RationalGroup(parse_heights(args.heights))
        print(rg.nucleus().describe())
        return EXIT_VERDICT
    t1 = parse_heights(args.t1)
    t2 = parse_heights(args.t2)
    print(
        fileio.dumps(
            {
                "equivalent": baer_equivalent(t1, t2),
                "leq": type_leq(t1, t2),
                "geq": type_leq(t2, t1),
            }
        ),
        end="",
    )
    return EXIT_VERDICT


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cellcover",
        description="construct and verify cellular covers of torsion-free "
        "abelian groups at desk scale",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build a cover candidate bundle")
    shapes = c.add_subparsers(dest="shape", required=True)
    for shape in ("corrected", "lemma22"):
        sc = shapes.add_parser(shape)
        sc.add_argument("--q", type=int, required=True)
        sc.add_argument("--prime-bound", type=int, default=100)
        if shape == "corrected":
            sc.add_argument("--num-bound", type=int, default=3)
            sc.add_argument("--exp-bound", type=int, default=1)
        sc.add_argument("--out")
        sc.set_defaults(func=cmd_construct)
    sc = shapes.add_parser("corner")
    sc.add_argument("--kappa", type=int, required=True)
    sc.add_argument("--precision", type=int, default=64)
    sc.add_argument("--seed", type=int, default=0)
    sc.add_argument("--coeff-bound", type=int, default=1000)
    sc.add_argument("--s-prime", type=int, default=5)
    sc.add_argument("--out")
    sc.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", help="run the cover checklist on a bundle")
    v.add_argument("bundle")
    v.add_argument("--out")
    v.add_argument("--level", type=int, default=None)
    _add_bounds(v)
    v.set_defaults(func=cmd_verify)

    h = sub.add_parser("hom", help="compute Hom(source, target)")
    h.add_argument("source")
    h.add_argument("target")
    h.add_argument("--out")
    _add_bounds(h)
    h.set_defaults(func=cmd_hom)

    e = sub.add_parser("end", help="compute the endomorphisms of a group")
    e.add_argument("group")
    e.add_argument("--out")
    _add_bounds(e, coeff=200, prime=100)
    e.set_defaults(func=cmd_end)

    o = sub.add_parser("obstruct", help="run the free-kernel obstruction engine")
    o.add_argument("--kernel-rank", type=int, required=True)
    o.add_argument("--zrule", required=True)
    o.add_argument("--H", dest="cokernel", default="nonring:exclude=2")
    o.add_argument("--prime-bound", type=int, default=31)
    o.add_argument("--out")
    o.set_defaults(func=cmd_obstruct)

    s = sub.add_parser("sweep", help="exhaustive free-kernel refutation sweep")
    s.add_argument("--rank-max", type=int, default=2)
    s.add_argument("--value-bound", type=int, default=10)
    s.add_argument("--prime-bound", type=int, default=31)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    t = sub.add_parser("type", help="height-sequence utilities")
    tsub = t.add_subparsers(dest="type_cmd", required=True)
    tc = tsub.add_parser("cmp")
    tc.add_argument("--t1", required=True)
    tc.add_argument("--t2", required=True)
    tc.set_defaults(func=cmd_type)
    tr = tsub.add_parser("ring")
    tr.add_argument("--heights", required=True)
    tr.set_defaults(func=cmd_type)
    tn = tsub.add_parser("nucleus")
    tn.add_argument("--heights", required=True)
    tn.set_defaults(func=cmd_type)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except fileio.GroupFileError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BudgetError, BudgetExceededError) as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except (ValueError, DomainExhaustsPrimesError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IndependenceSurrogateError as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE


if __name__ == "__main__":
    sys.exit(main())
