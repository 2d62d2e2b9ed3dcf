# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the _kernels loops.  Semantics must match _kernels.py
exactly; tests compare both implementations on shared inputs."""

IMPL = "cython"


def pair_audit(codes):
    cdef long long n_split = 0
    cdef long long n_contra = 0
    cdef Py_ssize_t n = len(codes)
    cdef Py_ssize_t i, j
    cdef int a, b
    cdef int[:] view
    import array
    arr = array.array("i", codes)
    view = arr
    for i in range(n):
        a = view[i]
        if a == 0:
            for j in range(n):
                b = view[j]
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
    import array
    cdef Py_ssize_t d = len(bounds)
    cdef Py_ssize_t n_checks = len(check_moduli)
    if d == 0:
        return [()]
    flat = []
    for row in check_coeffs:
        if len(row) != d:
            raise ValueError("check row length mismatch")
        flat.extend(row)
    bounds_a = array.array("q", bounds)
    coeffs_a = array.array("q", flat) if flat else array.array("q", [0])
    moduli_a = array.array("q", check_moduli) if check_moduli else array.array("q", [1])
    vec_a = array.array("q", [-b for b in bounds])
    cdef long long[:] bv = bounds_a
    cdef long long[:] cv = coeffs_a
    cdef long long[:] mv = moduli_a
    cdef long long[:] vec = vec_a
    cdef Py_ssize_t i, j, k
    cdef long long acc
    cdef bint ok
    out = []
    while True:
        ok = True
        for i in range(n_checks):
            acc = 0
            for j in range(d):
                acc += cv[i * d + j] * vec[j]
            if acc % mv[i] != 0:
                ok = False
                break
        if ok:
            out.append(tuple(vec_a))
        k = d - 1
        while k >= 0:
            if vec[k] < bv[k]:
                vec[k] += 1
                break
            vec[k] = -bv[k]
            k -= 1
        if k < 0:
            return out
