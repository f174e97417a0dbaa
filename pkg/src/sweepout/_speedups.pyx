# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled lattice classification kernel.

Mirrors _kernel_py.classify_tuples exactly: same float operation order,
same conservative guard semantics. Compiled with -ffp-contract=off so the
double arithmetic stays bit-compatible with the interpreter; either way,
final results are backend-independent because near-edge tuples are handed
back for exact resolution.
"""

from libc.stdlib cimport free, malloc

cdef extern from "math.h":
    double INFINITY


cdef inline Py_ssize_t _bisect_left(double* e, Py_ssize_t ne, double s) nogil:
    cdef Py_ssize_t lo = 0, hi = ne, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if e[mid] < s:
            lo = mid + 1
        else:
            hi = mid
    return lo


def classify_tuples(y_hat, bounds, edges, double guard, bint collect):
    """See _kernel_py.classify_tuples for the contract."""
    cdef Py_ssize_t nu = len(y_hat)
    cdef Py_ssize_t ne = len(edges)
    inside = [] if collect else None
    uncertain = []
    if ne == 0:
        return 0, inside, uncertain
    if nu <= 0:
        raise ValueError("empty tuple space")

    cdef double* y = <double*> malloc(nu * sizeof(double))
    cdef long* b = <long*> malloc(nu * sizeof(long))
    cdef long* n = <long*> malloc(nu * sizeof(long))
    cdef double* e = <double*> malloc(ne * sizeof(double))
    if y is NULL or b is NULL or n is NULL or e is NULL:
        free(y); free(b); free(n); free(e)
        raise MemoryError()

    cdef Py_ssize_t i, j, k
    cdef long count = 0
    cdef long nn, b_last
    cdef double s0, s, left, right, y_last
    try:
        for i in range(nu):
            y[i] = y_hat[i]
            b[i] = bounds[i]
            n[i] = -b[i]
        for i in range(ne):
            e[i] = edges[i]
        y_last = y[nu - 1]
        b_last = b[nu - 1]

        while True:
            # fresh prefix sum for the outer coordinates, no drift
            s0 = 0.0
            for i in range(nu - 1):
                s0 += n[i] * y[i]
            for nn in range(-b_last, b_last + 1):
                s = s0 + nn * y_last
                j = _bisect_left(e, ne, s)
                left = s - e[j - 1] if j > 0 else INFINITY
                right = e[j] - s if j < ne else INFINITY
                if left <= guard or right <= guard:
                    uncertain.append(tuple([n[k] for k in range(nu - 1)] + [nn]))
                elif j & 1:
                    if collect:
                        inside.append(tuple([n[k] for k in range(nu - 1)] + [nn]))
                    else:
                        count += 1
            # odometer over the outer coordinates
            i = nu - 2
            while i >= 0 and n[i] == b[i]:
                n[i] = -b[i]
                i -= 1
            if i < 0:
                break
            n[i] += 1
    finally:
        free(y); free(b); free(n); free(e)

    if collect:
        count = len(inside)
    return count, inside, uncertain
