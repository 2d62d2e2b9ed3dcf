"""Fraction-arithmetic membership oracle for hom sets, independent of both
the solver's congruence lattices and the package's grid-scan reference.

A candidate matrix is accepted when the image of every materialized source
generator lies in the target, checked coordinatewise with RationalGroup
membership on first principles.
"""

from fractions import Fraction
from itertools import product

from cellcover.homsolver import (
    Homomorphism,
    _materialized_source_generators,
    _target_denominators,
)
from cellcover.groups import ElementExpr
from cellcover.rankone import RationalGroup


def fraction_oracle_homs(A, B, bounds):
    dens = _target_denominators(B, bounds)
    gens = _materialized_source_generators(A, bounds)
    tgt_groups = {t: RationalGroup(h) for t, h in B.heights}
    names = A.basis.names
    pairs = [(t, s) for t in B.basis.names for s in names]
    box = range(-bounds.coeff_bound, bounds.coeff_bound + 1)
    accepted = set()
    for vec in product(box, repeat=len(pairs)):
        cols = {}
        for (t, s), n in zip(pairs, vec):
            if n:
                cols[s] = cols.get(s, ElementExpr.zero()) + ElementExpr.of(
                    {t: Fraction(n, dens[t])}
                )
        hom = Homomorphism.from_columns(names, B.basis.names, cols)
        ok = True
        for g in gens:
            img = hom.apply(g)
            for t, c in img.coords:
                if not tgt_groups[t].contains(c):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            accepted.add(hom)
    return accepted
