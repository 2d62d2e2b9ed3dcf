"""Pure-Python hot kernels.

Two inner loops dominate runtime at desk scale: the exhaustive rank-2 pair
audit of the refutation sweep, and the grid scan of the brute-force
enumeration used as the solver's independent cross-check.  Both have a
compiled twin in _kernels_c.pyx with identical semantics; _accel selects at
import time.  Keep these loops allocation-free and int-only so the twins stay
line-for-line comparable.
"""

IMPL = "pure"


def pair_audit(codes):
    """Audit all ordered pairs of per-coordinate verdict codes.

    codes[i] is 0 when coordinate rule i normalizes to a constant (so the
    candidate built from it alone splits) and 1 when it carries a validated
    congruence-violation witness.  A rank-2 candidate (i, j) splits iff both
    coordinates are constant and is contradiction-refuted otherwise.

    Returns (n_pairs, n_split, n_contradiction).  Raises on any other code:
    an unclassified coordinate must never reach the audit.
    """
    n_split = 0
    n_contra = 0
    n = len(codes)
    for a in codes:
        if a == 0:
            for b in codes:
                if b == 0:
                    n_split += 1
                elif b == 1:
                    n_contra += 1
                else:
                    raise ValueError(f"unclassified coordinate code {b}")
        elif a == 1:
            n_contra += n
        else:
            raise ValueError(f"unclassified coordinate code {a}")
    return n * n, n_split, n_contra


def grid_scan(bounds, check_coeffs, check_moduli):
    """Enumerate integer vectors n with |n_j| <= bounds[j] and keep those
    satisfying every congruence sum(check_coeffs[i][j] * n_j) % check_moduli[i] == 0.

    Returns the accepted vectors as tuples, in odometer order (last index
    fastest).  This is the reference brute-force scan: no algebra, every grid
    point is tested against every check.
    """
    d = len(bounds)
    n_checks = len(check_moduli)
    vec = [-b for b in bounds]
    out = []
    while True:
        ok = True
        for i in range(n_checks):
            row = check_coeffs[i]
            acc = 0
            for j in range(d):
                acc += row[j] * vec[j]
            if acc % check_moduli[i] != 0:
                ok = False
                break
        if ok:
            out.append(tuple(vec))
        k = d - 1
        while k >= 0:
            if vec[k] < bounds[k]:
                vec[k] += 1
                break
            vec[k] = -bounds[k]
            k -= 1
        if k < 0:
            return out
