"""Exact integer and rational linear algebra for small dense systems.

Everything here works on plain Python ints / Fractions, so results are exact
for arbitrarily large entries.  Dimensions in this package stay tiny (a dozen
rows at most); clarity wins over asymptotics.
"""

from fractions import Fraction


class BudgetExceededError(RuntimeError):
    """An enumeration or search exceeded its configured node budget."""


def hermite_normal_form(rows):
    """Row-style Hermite normal form of an integer matrix.

    Returns (hnf_rows, transform) with transform unimodular and
    transform @ rows == hnf_rows.  Zero rows sink to the bottom; pivots are
    positive and entries above a pivot are reduced into [0, pivot).
    """
    m = [list(r) for r in rows]
    n_rows = len(m)
    n_cols = len(m[0]) if m else 0
    u = [[1 if i == j else 0 for j in range(n_rows)] for i in range(n_rows)]

    def row_axpy(dst, src, c):
        m[dst] = [a + c * b for a, b in zip(m[dst], m[src])]
        u[dst] = [a + c * b for a, b in zip(u[dst], u[src])]

    def row_swap(i, j):
        m[i], m[j] = m[j], m[i]
        u[i], u[j] = u[j], u[i]

    def row_neg(i):
        m[i] = [-a for a in m[i]]
        u[i] = [-a for a in u[i]]

    pivot_row = 0
    for col in range(n_cols):
        # Euclidean elimination in this column below pivot_row.
        while True:
            nonzero = [i for i in range(pivot_row, n_rows) if m[i][col] != 0]
            if not nonzero:
                break
            i_min = min(nonzero, key=lambda i: abs(m[i][col]))
            row_swap(pivot_row, i_min)
            if m[pivot_row][col] < 0:
                row_neg(pivot_row)
            done = True
            for i in range(pivot_row + 1, n_rows):
                if m[i][col] != 0:
                    qq = m[i][col] // m[pivot_row][col]
                    row_axpy(i, pivot_row, -qq)
                    if m[i][col] != 0:
                        done = False
            if done:
                break
        if pivot_row < n_rows and m[pivot_row][col] != 0:
            for i in range(pivot_row):
                qq = m[i][col] // m[pivot_row][col]
                if qq:
                    row_axpy(i, pivot_row, -qq)
            pivot_row += 1
            if pivot_row == n_rows:
                break
    return m, u


def left_kernel(rows):
    """Basis of {x integer row vector : x @ rows == 0}, in HNF."""
    h, u = hermite_normal_form(rows)
    ker = [u[i] for i in range(len(h)) if all(v == 0 for v in h[i])]
    if not ker:
        return []
    ker_h, _ = hermite_normal_form(ker)
    return [r for r in ker_h if any(v != 0 for v in r)]


def column_kernel(rows):
    """Basis of {x integer column vector : rows @ x == 0}, in HNF."""
    n_cols = len(rows[0]) if rows else 0
    transposed = [[rows[i][j] for i in range(len(rows))] for j in range(n_cols)]
    return left_kernel(transposed)


def congruence_lattice(coeff_rows, moduli):
    """Basis of {x in Z^n : coeff_rows[i] . x == 0 (mod moduli[i]) for all i}.

    Solutions are the projection onto the first n coordinates of the integer
    kernel of [A | -diag(m)]; the projection is injective, so the projected
    kernel basis is a lattice basis.  Returned in HNF.
    """
    k = len(coeff_rows)
    if k == 0:
        raise ValueError("need at least one congruence")
    n = len(coeff_rows[0])
    aug = []
    for i, row in enumerate(coeff_rows):
        aug.append(list(row) + [-(moduli[i]) if j == i else 0 for j in range(k)])
    ker = column_kernel(aug)
    projected = [row[:n] for row in ker]
    basis, _ = hermite_normal_form(projected)
    basis = [r for r in basis if any(v != 0 for v in r)]
    if len(basis) != n:
        raise ArithmeticError("congruence lattice is not full rank")
    return basis


def gram_schmidt(basis):
    """Fraction-exact Gram-Schmidt: returns (orthogonal vectors, mu)."""
    d = len(basis)
    ortho = []
    mu = [[Fraction(0)] * d for _ in range(d)]
    for i in range(d):
        v = [Fraction(x) for x in basis[i]]
        for j in range(i):
            denom = _dot(ortho[j], ortho[j])
            mu[i][j] = _dot([Fraction(x) for x in basis[i]], ortho[j]) / denom
            v = [a - mu[i][j] * b for a, b in zip(v, ortho[j])]
        ortho.append(v)
    return ortho, mu


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def lll_reduce(basis, delta=Fraction(3, 4)):
    """Integer LLL reduction (exact arithmetic).  Input rows must be
    independent.  mu is maintained incrementally under size reduction; swaps
    recompute the affected Gram-Schmidt data."""
    b = [list(map(int, row)) for row in basis]
    d = len(b)
    if d <= 1:
        return b
    ortho, mu = gram_schmidt(b)
    norms = [_dot(o, o) for o in ortho]

    def size_reduce(k, j):
        q = _round_fraction(mu[k][j])
        if q:
            b[k] = [a - q * c for a, c in zip(b[k], b[j])]
            for i in range(j):
                mu[k][i] -= q * mu[j][i]
            mu[k][j] -= q

    k = 1
    while k < d:
        size_reduce(k, k - 1)
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            for j in range(k - 2, -1, -1):
                size_reduce(k, j)
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            ortho, mu = gram_schmidt(b)
            norms = [_dot(o, o) for o in ortho]
            k = max(k - 1, 1)
    return b


def _round_fraction(x):
    return (2 * x.numerator + x.denominator) // (2 * x.denominator)


def enumerate_box_vectors(basis, box_bound, budget=10**7, pre_reduced=False):
    """Yield nonzero lattice vectors v with max-norm |v_i| <= box_bound.

    Fincke-Pohst enumeration below the L2 radius box_bound * sqrt(n) on an
    LLL-reduced copy of the basis, then the exact max-norm filter.  One of
    v/-v is produced, never both.  Raises BudgetExceededError when the node
    count passes the budget.
    """
    if not basis:
        return
    b = basis if pre_reduced else lll_reduce(basis)
    d = len(b)
    n = len(b[0])
    ortho, mu = gram_schmidt(b)
    norms = [_dot(o, o) for o in ortho]
    radius2 = Fraction(box_bound * box_bound * n)
    nodes = 0

    # Depth-first over integer coordinates x_{d-1}, ..., x_0 in the reduced
    # basis; center[i] tracks the Babai-style offset at level i.
    def rec(level, coords, partial2):
        nonlocal nodes
        if level < 0:
            v = [0] * n
            for c, row in zip(coords, b):
                if c:
                    v = [a + c * x for a, x in zip(v, row)]
            if any(v) and all(abs(x) <= box_bound for x in v):
                yield v
            return
        center = -sum(mu[i][level] * coords_map[i] for i in range(level + 1, d))
        slack = radius2 - partial2
        if slack < 0:
            return
        if norms[level] == 0:
            raise ArithmeticError("degenerate basis")
        # |x - center|^2 * norms[level] <= slack
        half_width2 = slack / norms[level]
        lo, hi = _integer_interval(center, half_width2)
        for x in range(lo, hi + 1):
            nodes += 1
            if nodes > budget:
                raise BudgetExceededError(f"enumeration budget {budget} exceeded")
            coords_map[level] = x
            add = (Fraction(x) - center) ** 2 * norms[level]
            yield from rec(level - 1, [x] + coords, partial2 + add)
        coords_map[level] = 0

    coords_map = [0] * d
    # Sign symmetry: force the top nonzero coordinate to be >= 0 by filtering.
    seen_sign = set()
    for v in rec(d - 1, [], Fraction(0)):
        key = tuple(v)
        neg = tuple(-x for x in v)
        if neg in seen_sign:
            continue
        seen_sign.add(key)
        yield v


def _integer_interval(center, half_width2):
    """Integers x with (x - center)^2 <= half_width2 (Fractions, exact)."""
    if half_width2 < 0:
        return 0, -1
    w = _isqrt_fraction(half_width2)
    lo = _ceil_fraction(center - w)
    hi = _floor_fraction(center + w)
    # Guard against rounding at the exact boundary.
    while (Fraction(lo - 1) - center) ** 2 <= half_width2:
        lo -= 1
    while (Fraction(hi + 1) - center) ** 2 <= half_width2:
        hi += 1
    return lo, hi


def _isqrt_fraction(x):
    """Fraction w with w <= sqrt(x), close enough for interval bounds."""
    if x == 0:
        return Fraction(0)
    import math

    num, den = x.numerator, x.denominator
    return Fraction(math.isqrt(num * den), den)


def _ceil_fraction(x):
    return -((-x.numerator) // x.denominator)


def _floor_fraction(x):
    return x.numerator // x.denominator


def solve_gaussian_rational(rows, rhs):
    """Solve rows @ x = rhs over Q; returns one solution or None."""
    m = [[Fraction(v) for v in row] + [Fraction(r)] for row, r in zip(rows, rhs)]
    n_rows = len(m)
    n_cols = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, n_rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        m[r] = [v / m[r][c] for v in m[r]]
        for i in range(n_rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    for i in range(r, n_rows):
        if m[i][n_cols] != 0:
            return None
    x = [Fraction(0)] * n_cols
    for i, c in enumerate(pivots):
        x[c] = m[i][n_cols]
    return x
