"""Lattice decomposition of a finite support and the graded point sets.

decompose() expresses each support point x_k exactly as an integer
combination of a maximal rationally independent subset Y, divided by a
common denominator p. The graded sets

    A_m = { (n_1 y_1 + ... + n_nu y_nu) / p :
            |n_i| <= m*tau for i < nu,  |n_nu| <= nu*m*tau + 1 }

are then enumerated, counted inside intervals against the density
constant gamma = (2 tau)^(nu-1) p / y_nu, and checked for the shift
closure  A_m cap (-x_l, 0) + X  inside  A_{m+1} cap (-x_l, x_l).

Counting is exhaustive tuple enumeration. The kernel backend performs a
conservative float classification; tuples near an interval edge are
re-decided with exact arithmetic, so every reported count is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import kernel
from .errors import CapExceeded
from .exactreal import (GeneratorBasis, IntervalSet, Point, compare,
                        fraction_str)

DEFAULT_TUPLE_CAP = 10**7


class NuOneDensityError(ValueError):
    """interval_count_ratio requires nu >= 2; rational (nu = 1) supports
    are counted exactly with count_progression instead."""


# ---------------------------------------------------------------------------
# exact linear algebra over the coefficient vectors
# ---------------------------------------------------------------------------

def _echelon_insert(rows, vec):
    """Reduce vec against reduced rows; append if independent.

    rows: list of (pivot_index, row) with row[pivot] == 1.
    Returns True if vec was independent (and got inserted).
    """
    v = list(vec)
    for piv, row in rows:
        if v[piv] != 0:
            c = v[piv]
            for i in range(len(v)):
                v[i] -= c * row[i]
    for piv in range(len(v)):
        if v[piv] != 0:
            inv = 1 / v[piv]
            v = [c * inv for c in v]
            rows.append((piv, v))
            rows.sort(key=lambda pr: pr[0])
            return True
    return False


def _solve_exact(columns, target):
    """Solve sum_j r_j * columns[j] == target exactly over Q.

    columns are linearly independent vectors; the system is assumed
    consistent (target lies in their span). Gaussian elimination with
    exact Fractions.
    """
    ncols = len(columns)
    dim = len(target)
    aug = [[columns[j][i] for j in range(ncols)] + [target[i]] for i in range(dim)]
    row = 0
    piv_cols = []
    for col in range(ncols):
        sel = None
        for r in range(row, dim):
            if aug[r][col] != 0:
                sel = r
                break
        if sel is None:
            continue
        aug[row], aug[sel] = aug[sel], aug[row]
        pv = aug[row][col]
        aug[row] = [c / pv for c in aug[row]]
        for r in range(dim):
            if r != row and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[row])]
        piv_cols.append(col)
        row += 1
        if row == dim:
            break
    sol = [Fraction(0)] * ncols
    for r, col in enumerate(piv_cols):
        sol[col] = aug[r][ncols]
    # consistency check: rows below the pivots must have zero residual
    for r in range(row, dim):
        if aug[r][ncols] != 0:
            raise ValueError("inconsistent system: target outside the span")
    return sol


# ---------------------------------------------------------------------------
# the spec of a decomposed support
# ---------------------------------------------------------------------------

class CertQuotient:
    """Certified value num / den with rational num and a positive Point den."""

    __slots__ = ("num", "den")

    def __init__(self, num: Fraction, den: Point):
        self.num = num
        self.den = den

    def enclosure(self, bits: int) -> tuple[Fraction, Fraction]:
        b = bits
        while True:
            lo, hi = self.den.enclosure(b)
            if lo > 0:
                return self.num / hi, self.num / lo
            b *= 2

    def __float__(self):
        lo, hi = self.enclosure(96)
        return float((lo + hi) / 2)


@dataclass
class LatticeSpec:
    """Exact integer representation of a support over its independent core.

    coeffs[k] holds the integer row of x_k, i.e.
    x_k == sum_i coeffs[k][i] * Y[i] / p, verified at construction time by
    decompose(). tau is the max absolute entry of the matrix.
    """

    basis: GeneratorBasis
    X: tuple[Point, ...]
    Y: tuple[Point, ...]
    coeffs: tuple[tuple[int, ...], ...]
    p: int
    tau: int

    @property
    def nu(self) -> int:
        return len(self.Y)

    @property
    def x_l(self) -> Point:
        return self.X[-1]

    @property
    def gamma(self) -> CertQuotient:
        return CertQuotient(Fraction((2 * self.tau) ** (self.nu - 1) * self.p), self.Y[-1])

    def validate(self):
        if self.Y[-1] != self.X[-1]:
            raise ValueError("largest support point must belong to Y")
        if self.tau != max(abs(n) for row in self.coeffs for n in row):
            raise ValueError("tau does not match the coefficient matrix")
        for x, row in zip(self.X, self.coeffs):
            acc = self.basis.zero()
            for n, y in zip(row, self.Y):
                acc = acc + y * n
            if acc != x * self.p:
                raise ValueError(f"reconstruction failed for {x!r}")

    def bounds(self, m: int) -> list[int]:
        return [m * self.tau] * (self.nu - 1) + [self.nu * m * self.tau + 1]

    def tuple_count(self, m: int) -> int:
        out = 1
        for b in self.bounds(m):
            out *= 2 * b + 1
        return out

    def point_of(self, tup: Sequence[int]) -> Point:
        acc = [Fraction(0)] * self.basis.dim
        mid = 0.0
        rad = 0.0
        mag = 0.0
        for n, y in zip(tup, self.Y):
            if n:
                q = Fraction(n, self.p)
                for i, c in enumerate(y.coeffs):
                    if c:
                        acc[i] += q * c
                ym, yr = y.approx()
                qf = n / self.p
                term = ym * qf
                mid += term
                mag += abs(term)
                rad += (yr + abs(ym) * 1.2e-16) * abs(qf)
        pt = Point(self.basis, tuple(acc))
        pt._approx = (mid, (rad + mag * (len(tup) + 2) * 2.3e-16) * 1.01 + 1e-300)
        return pt

    def to_json(self):
        return {
            "basis": self.basis.spec_strings(),
            "X": [x.to_json() for x in self.X],
            "Y": [y.to_json() for y in self.Y],
            "coeffs": [list(row) for row in self.coeffs],
            "p": self.p,
            "tau": self.tau,
        }

    @classmethod
    def from_json(cls, obj, basis=None) -> "LatticeSpec":
        basis = basis or GeneratorBasis.from_specs(obj["basis"])
        spec = cls(
            basis=basis,
            X=tuple(Point.from_json(basis, x) for x in obj["X"]),
            Y=tuple(Point.from_json(basis, y) for y in obj["Y"]),
            coeffs=tuple(tuple(int(n) for n in row) for row in obj["coeffs"]),
            p=int(obj["p"]),
            tau=int(obj["tau"]),
        )
        return spec


def decompose(X: Sequence[Point]) -> LatticeSpec:
    """Integer representation of X over a maximal independent subset.

    Candidates are scanned from the largest point downward so the chosen
    subset always contains x_l and, among maximal independent subsets, is
    the lexicographically latest by index (deterministic tie-breaking).
    """
    pts = sorted({p.coeffs: p for p in X}.values())
    if not pts:
        raise ValueError("empty support")
    basis = pts[0].basis
    for p in pts:
        if p.basis != basis:
            raise ValueError("support points over different bases")
        if p.sign() <= 0 or compare(p, basis.rational(1)) >= 0:
            raise ValueError(f"support point outside (0,1): {p!r}")
    rows: list = []
    chosen = []
    for p in reversed(pts):
        if _echelon_insert(rows, p.coeffs):
            chosen.append(p)
    Y = tuple(sorted(chosen))
    ycols = [y.coeffs for y in Y]
    rationals = []
    for x in pts:
        rationals.append(_solve_exact(ycols, x.coeffs))
    p_den = 1
    for r in rationals:
        for q in r:
            p_den = p_den * q.denominator // math.gcd(p_den, q.denominator)
    coeffs = tuple(tuple(int(q * p_den) for q in r) for r in rationals)
    tau = max(abs(n) for row in coeffs for n in row)
    spec = LatticeSpec(basis=basis, X=tuple(pts), Y=Y, coeffs=coeffs, p=p_den, tau=tau)
    spec.validate()
    return spec


# ---------------------------------------------------------------------------
# filtered counting: rigorous float data + exact fallback
# ---------------------------------------------------------------------------

def _float_and_err(x: Point, bits=96):
    lo, hi = x.enclosure(bits)
    mid = (lo + hi) / 2
    f = float(mid)
    err = (hi - lo) / 2 + abs(mid - Fraction(f))
    return f, err


def _filter_data(spec: LatticeSpec, window: IntervalSet, bounds: Sequence[int]):
    """(y_hat, edges, guard) for the kernel; guard is a rigorous bound on
    |float classification value - exact value| including all conversion
    and summation rounding, with the edge conversion error folded in."""
    nu = spec.nu
    y_hat = []
    err_sum = Fraction(0)
    mag_sum = Fraction(0)
    for y, b in zip(spec.Y, bounds):
        f, err = _float_and_err(y)
        y_hat.append(f)
        err_sum += b * err
        mag_sum += b * abs(Fraction(f))
    edges = []
    edge_err = Fraction(0)
    for e in window.edge_points():
        f, err = _float_and_err(e * spec.p)
        edges.append(f)
        edge_err = max(edge_err, err)
    rounding = Fraction(nu + 3, 2**53) * mag_sum
    guard_frac = err_sum + rounding + edge_err
    guard = float(guard_frac) * 2.0 + 1e-280
    ok = all(a < b for a, b in zip(edges, edges[1:]))
    return y_hat, edges, guard, ok


def _classify(spec: LatticeSpec, m: int, window: IntervalSet, cap: int, collect: bool):
    """Exact (count, hit_tuples) of A_m inside window."""
    bounds = spec.bounds(m)
    total = spec.tuple_count(m)
    if total > cap:
        raise CapExceeded(f"A_{m} needs {total} tuples, cap is {cap}")
    if window.is_empty():
        return 0, [] if collect else None
    y_hat, edges, guard, ok = _filter_data(spec, window, bounds)
    if not ok:
        # float edge images collided; classify everything exactly (rare)
        hits = []
        count = 0
        from itertools import product

        for tup in product(*[range(-b, b + 1) for b in bounds]):
            if window.contains(spec.point_of(tup)):
                if collect:
                    hits.append(tup)
                else:
                    count += 1
        return (len(hits), hits) if collect else (count, None)
    count, inside, uncertain = kernel.classify_tuples(y_hat, bounds, edges, guard, collect)
    extra = []
    for tup in uncertain:
        if window.contains(spec.point_of(tup)):
            extra.append(tup)
    if collect:
        hits = list(inside) + extra
        return len(hits), hits
    return count + len(extra), None


def lattice_count(spec: LatticeSpec, m: int, window: IntervalSet,
                  cap: int = DEFAULT_TUPLE_CAP) -> int:
    """Exact #(A_m cap window) by exhaustive classification."""
    count, _ = _classify(spec, m, window, cap, collect=False)
    return count


def lattice_hits(spec: LatticeSpec, m: int, window: IntervalSet,
                 cap: int = DEFAULT_TUPLE_CAP) -> list[Point]:
    """Sorted points of A_m cap window."""
    _, hits = _classify(spec, m, window, cap, collect=True)
    return sorted(spec.point_of(t) for t in hits)


def enumerate_lattice(spec: LatticeSpec, m: int,
                      cap: int = DEFAULT_TUPLE_CAP) -> list[Point]:
    """All of A_m as sorted Points (deduplicated via exact equality)."""
    from itertools import product

    total = spec.tuple_count(m)
    if total > cap:
        raise CapExceeded(f"A_{m} needs {total} tuples, cap is {cap}")
    seen = {}
    for tup in product(*[range(-b, b + 1) for b in spec.bounds(m)]):
        pt = spec.point_of(tup)
        seen[pt.coeffs] = pt
    return sorted(seen.values())


def expected_cardinality(spec: LatticeSpec, m: int) -> int:
    """(2 m tau + 1)^(nu-1) * (2 (nu m tau + 1) + 1), exact for an
    independent core."""
    return (2 * m * spec.tau + 1) ** (spec.nu - 1) * (2 * (spec.nu * m * spec.tau + 1) + 1)


# ---------------------------------------------------------------------------
# density counting and shift closure
# ---------------------------------------------------------------------------

@dataclass
class CountReport:
    m: int
    count: int
    predicted_lo: Fraction
    predicted_hi: Fraction
    ratio: float

    def to_json(self):
        return {
            "m": self.m,
            "count": self.count,
            "predicted": {
                "lo": fraction_str(self.predicted_lo.limit_denominator(10**30)),
                "hi": fraction_str(self.predicted_hi.limit_denominator(10**30)),
            },
            "predicted_float": float((self.predicted_lo + self.predicted_hi) / 2),
            "ratio": self.ratio,
        }


def interval_count_ratio(spec: LatticeSpec, m: int, interval: tuple[Point, Point],
                         cap: int = DEFAULT_TUPLE_CAP) -> CountReport:
    """Exact count of A_m in an open interval against the density law.

    The predicted value gamma * m^(nu-1) * |I| is reported as a certified
    enclosure; the enumerated count is the ground truth, the ratio a
    diagnostic only.
    """
    if spec.nu < 2:
        raise NuOneDensityError(
            "density ratio needs nu >= 2; use count_progression for "
            "rational supports")
    lo, hi = interval
    lo = spec.basis.rational(lo) if not isinstance(lo, Point) else lo
    hi = spec.basis.rational(hi) if not isinstance(hi, Point) else hi
    window = IntervalSet.single(spec.basis, lo, hi)
    length = hi - lo
    one = spec.basis.rational(1)
    if compare(lo, -one) < 0 or compare(hi, one) > 0:
        raise ValueError("interval must lie inside (-1, 1)")
    if compare(length * spec.p, spec.Y[-1]) > 0:
        raise ValueError("interval longer than y_nu / p")
    count = lattice_count(spec, m, window, cap=cap)
    glo, ghi = spec.gamma.enclosure(160)
    llo, lhi = length.enclosure(160)
    scale = Fraction(m ** (spec.nu - 1))
    plo, phi = glo * scale * llo, ghi * scale * lhi
    ratio = count / float((plo + phi) / 2)
    return CountReport(m=m, count=count, predicted_lo=plo, predicted_hi=phi, ratio=ratio)


def count_progression(step: Point, bound: int, interval: tuple[Point, Point]) -> int:
    """Exact #{ n*step : |n| <= bound } inside an open interval, for a
    positive step. Binary search on the exact order, no density law."""
    lo, hi = interval
    if step.sign() <= 0:
        raise ValueError("step must be positive")

    def first_with(pred):
        # smallest n in [-bound-1, bound+1] satisfying the monotone pred
        a, b = -bound - 1, bound + 1
        while a < b:
            mid = (a + b) // 2
            if pred(mid):
                b = mid
            else:
                a = mid + 1
        return a

    n_min = first_with(lambda n: compare(step * n, lo) > 0)
    n_max = first_with(lambda n: compare(step * n, hi) >= 0) - 1
    n_min = max(n_min, -bound)
    n_max = min(n_max, bound)
    return max(0, n_max - n_min + 1)


@dataclass
class ClosureCertificate:
    ok: bool
    m: int
    checked_points: int
    checked_sums: int
    witness: dict | None = None

    def to_json(self):
        out = {
            "ok": self.ok,
            "m": self.m,
            "checked_points": self.checked_points,
            "checked_sums": self.checked_sums,
        }
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def shift_closure_check(spec: LatticeSpec, m: int,
                        cap: int = DEFAULT_TUPLE_CAP) -> ClosureCertificate:
    """Exact check of  A_m cap (-x_l, 0) + X  inside  A_{m+1} cap (-x_l, x_l).

    Membership on the left factor is decided by enumeration; each sum is
    checked through its integer representation (unique over the
    independent core) plus an exact interval test. Failure returns the
    violating pair.
    """
    x_l = spec.x_l
    window = IntervalSet.single(spec.basis, -x_l, spec.basis.rational(0))
    _, hits = _classify(spec, m, window, cap, collect=True)
    nu = spec.nu
    hi_bounds = spec.bounds(m + 1)
    checked = 0
    for tup in hits:
        x = spec.point_of(tup)
        for k, row in enumerate(spec.coeffs):
            s = tuple(a + b for a, b in zip(tup, row))
            checked += 1
            ok_bounds = all(abs(s[i]) <= hi_bounds[i] for i in range(nu))
            val = spec.point_of(s)
            ok_interval = compare(val, -x_l) > 0 and compare(val, x_l) < 0
            if not (ok_bounds and ok_interval):
                return ClosureCertificate(
                    ok=False, m=m, checked_points=len(hits), checked_sums=checked,
                    witness={
                        "x_tuple": list(tup),
                        "x": x.to_json(),
                        "k": k,
                        "x_k": spec.X[k].to_json(),
                        "sum_tuple": list(s),
                        "bounds": hi_bounds,
                        "violates": "integer bounds" if not ok_bounds else "interval",
                    })
    return ClosureCertificate(ok=True, m=m, checked_points=len(hits), checked_sums=checked)
