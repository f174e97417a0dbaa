"""Backend selection for the hot lattice-classification loop.

The compiled extension (built from _speedups.pyx) and _kernel_py implement
one contract:

    classify_tuples(y_hat, bounds, edges, guard, collect)
        -> (inside_count, inside_tuples_or_None, uncertain_tuples)

Both are conservative float filters: any tuple whose value falls within
`guard` of an interval edge is reported as uncertain and resolved exactly
by the caller, so counts and hit sets are identical across backends.

Set SWEEPOUT_PURE_KERNEL=1 to force the pure-Python fallback (used by the
benchmark and the backend-agreement tests).
"""

import os

from . import _kernel_py

try:
    from . import _speedups
except ImportError:  # extension not built; pure fallback
    _speedups = None

if _speedups is not None and not os.environ.get("SWEEPOUT_PURE_KERNEL"):
    classify_tuples = _speedups.classify_tuples
    BACKEND = "compiled"
else:
    classify_tuples = _kernel_py.classify_tuples
    BACKEND = "pure-python"


def backends():
    """All importable backends, for benchmarks and agreement tests."""
    out = {"pure-python": _kernel_py.classify_tuples}
    if _speedups is not None:
        out["compiled"] = _speedups.classify_tuples
    return out
