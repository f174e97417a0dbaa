"""Pure-Python lattice classification kernel.

Same contract as the compiled extension (see kernel.py): walk every
integer tuple n with |n_i| <= bounds[i], form s = sum(n_i * y_hat[i]) in
double precision, and classify s against the sorted edge array of a union
of intervals. Tuples whose value lands within `guard` of any edge are
returned for exact resolution by the caller, so the conservative float
arithmetic here never decides a borderline case.
"""

import itertools
import math
from bisect import bisect_left

INF = math.inf


def classify_tuples(y_hat, bounds, edges, guard, collect):
    """Classify all integer tuples against a flattened edge array.

    edges holds [lo1, hi1, lo2, hi2, ...] sorted ascending; a value is
    inside the union exactly when an odd number of edges lies below it.

    Returns (inside_count, inside_tuples_or_None, uncertain_tuples).
    """
    nu = len(y_hat)
    ne = len(edges)
    inside = [] if collect else None
    uncertain = []
    if ne == 0:
        return 0, inside, uncertain
    if nu <= 0:
        raise ValueError("empty tuple space")
    count = 0
    y_last = y_hat[nu - 1]
    b_last = bounds[nu - 1]
    outer = [range(-b, b + 1) for b in bounds[: nu - 1]]
    for prefix in itertools.product(*outer):
        s0 = 0.0
        for v, y in zip(prefix, y_hat):
            s0 += v * y
        for n in range(-b_last, b_last + 1):
            s = s0 + n * y_last
            j = bisect_left(edges, s)
            left = s - edges[j - 1] if j > 0 else INF
            right = edges[j] - s if j < ne else INF
            if left <= guard or right <= guard:
                uncertain.append(prefix + (n,))
            elif j & 1:
                if collect:
                    inside.append(prefix + (n,))
                else:
                    count += 1
    if collect:
        count = len(inside)
    return count, inside, uncertain
