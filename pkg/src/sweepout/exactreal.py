"""Exact arithmetic over a declared generator basis.

Every real number handled by this package is a Point: a vector of rational
coefficients over a small basis of declared generators (the constant 1,
square roots of distinct squarefree integers, or decimal literals with a
declared precision). Two Points are equal exactly when their coefficient
vectors are equal; this is forced by the rational independence of the
generators, which is certified automatically for surd bases and asserted
by the user otherwise.

Order comparisons are decided by adaptive-precision interval evaluation
with a fast floating-point filter in front: the filter only ever decides
cases whose certified error bounds cannot overlap, so every answer is
exact. Undecidable comparisons (possible only when a declared independence
assertion is false, or a decimal generator is too coarse) raise
PrecisionExhausted rather than guessing.

IntervalSet is the companion set type: a canonical finite union of open
intervals with Point endpoints, supporting exact measure, translation,
scaling and intersection.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import PrecisionExhausted

DEFAULT_PRECISION_CAP = 1024

_SQUAREFREE_PRIME_BOUND = 10**6


def parse_fraction(text) -> Fraction:
    """Parse "p/q", integer or decimal strings into an exact Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    return Fraction(str(text).strip())


def fraction_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)


def _is_squarefree(n: int) -> bool:
    if n % 4 == 0:
        return False
    d = 3
    while d * d <= n and d <= _SQUAREFREE_PRIME_BOUND:
        if n % (d * d) == 0:
            return False
        d += 2
    return True


class Generator:
    """One basis element: an exact rational, a square-root surd, or a
    decimal literal of declared precision (in bits)."""

    __slots__ = ("kind", "value", "radicand", "bits", "_cache")

    def __init__(self, kind, value=None, radicand=None, bits=None):
        self.kind = kind
        self.value = value          # Fraction for "rat" and "dec"
        self.radicand = radicand    # int for "sqrt"
        self.bits = bits            # declared precision for "dec"
        self._cache = {}

    @classmethod
    def parse(cls, spec: str) -> "Generator":
        spec = spec.strip()
        if spec.startswith("rat:"):
            v = parse_fraction(spec[4:])
            if v <= 0:
                raise ValueError(f"generator must be positive: {spec}")
            return cls("rat", value=v)
        if spec.startswith("sqrt:"):
            n = int(spec[5:])
            if n < 2:
                raise ValueError(f"sqrt generator needs an integer >= 2: {spec}")
            if not _is_squarefree(n):
                raise ValueError(f"sqrt radicand must be squarefree: {spec}")
            return cls("sqrt", radicand=n)
        m = re.fullmatch(r"dec:([0-9.eE+-]+)@(\d+)", spec)
        if m:
            v = parse_fraction(m.group(1))
            if v <= 0:
                raise ValueError(f"generator must be positive: {spec}")
            return cls("dec", value=v, bits=int(m.group(2)))
        raise ValueError(f"unrecognized generator spec: {spec!r}")

    def spec_string(self) -> str:
        if self.kind == "rat":
            return f"rat:{fraction_str(self.value)}"
        if self.kind == "sqrt":
            return f"sqrt:{self.radicand}"
        return f"dec:{self.value}@{self.bits}"

    def enclosure(self, bits: int) -> tuple[Fraction, Fraction]:
        """Certified interval containing the generator value.

        For "dec" generators the interval never narrows past the declared
        precision; comparisons that need more raise PrecisionExhausted.
        """
        if self.kind == "rat":
            return self.value, self.value
        if self.kind == "dec":
            half = Fraction(1, 2**self.bits)
            return self.value - half, self.value + half
        got = self._cache.get(bits)
        if got is None:
            scaled = math.isqrt(self.radicand << (2 * bits))
            got = (Fraction(scaled, 2**bits), Fraction(scaled + 1, 2**bits))
            self._cache[bits] = got
        return got

    def __repr__(self):
        return f"Generator({self.spec_string()!r})"


class GeneratorBasis:
    """Ordered generator list; coordinate 0 is always the rational one.

    Independence of the generator values together with 1 is certified
    automatically when all irrational generators are surds with distinct
    squarefree radicands, and must be asserted by the caller otherwise.
    """

    __slots__ = ("gens", "independence_certified", "precision_cap",
                 "_enc_cache", "_key")

    def __init__(self, generators: Sequence[Generator], assert_independent=False,
                 precision_cap=DEFAULT_PRECISION_CAP):
        gens = list(generators)
        if not gens or gens[0].kind != "rat":
            gens.insert(0, Generator("rat", value=Fraction(1)))
        for g in gens[1:]:
            if g.kind == "rat":
                raise ValueError("only the leading generator may be rational")
        radicands = [g.radicand for g in gens if g.kind == "sqrt"]
        if len(set(radicands)) != len(radicands):
            raise ValueError("duplicate sqrt radicands in basis")
        all_surds = all(g.kind in ("rat", "sqrt") for g in gens)
        self.gens = tuple(gens)
        self.independence_certified = bool(all_surds or assert_independent)
        self.precision_cap = precision_cap
        self._enc_cache = {}
        self._key = tuple(g.spec_string() for g in self.gens)

    @classmethod
    def from_specs(cls, specs: Sequence[str], **kw) -> "GeneratorBasis":
        return cls([Generator.parse(s) for s in specs], **kw)

    @classmethod
    def rationals(cls, **kw) -> "GeneratorBasis":
        """Basis spanning only the rationals (the unit generator alone)."""
        return cls([], **kw)

    @property
    def dim(self) -> int:
        return len(self.gens)

    def spec_strings(self) -> list[str]:
        return list(self._key)

    def enclosures(self, bits: int):
        got = self._enc_cache.get(bits)
        if got is None:
            got = tuple(g.enclosure(bits) for g in self.gens)
            self._enc_cache[bits] = got
        return got

    def point(self, coeffs) -> "Point":
        coeffs = tuple(parse_fraction(c) for c in coeffs)
        if len(coeffs) != self.dim:
            raise ValueError(f"expected {self.dim} coefficients, got {len(coeffs)}")
        return Point(self, coeffs)

    def rational(self, q) -> "Point":
        """The Point with value q (rational)."""
        q = parse_fraction(q)
        c0 = q / self.gens[0].value
        out = Point(self, (c0,) + (Fraction(0),) * (self.dim - 1))
        m = float(q)
        out._approx = (m, abs(m) * 2.3e-16 + 1e-300)
        return out

    def zero(self) -> "Point":
        out = Point(self, (Fraction(0),) * self.dim)
        out._approx = (0.0, 1e-300)
        return out

    def __eq__(self, other):
        return isinstance(other, GeneratorBasis) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"GeneratorBasis({list(self._key)})"


_APPROX_BITS = 96


class Point:
    """Immutable exact real: rational coefficients over a GeneratorBasis."""

    __slots__ = ("basis", "coeffs", "_approx")

    def __init__(self, basis: GeneratorBasis, coeffs: tuple[Fraction, ...]):
        self.basis = basis
        self.coeffs = coeffs
        self._approx = None

    # -- construction helpers -------------------------------------------

    def _coerce(self, other) -> "Point":
        if type(other) is Point or isinstance(other, Point):
            if other.basis is not self.basis and other.basis != self.basis:
                raise ValueError("points over different bases")
            return other
        return self.basis.rational(other)

    # -- exact arithmetic (module operations over Q) ---------------------
    #
    # When both operands already carry a cached float approximation the
    # result gets one too, with the radius grown conservatively to cover
    # the exact error plus all float rounding; comparisons that the cached
    # bounds cannot decide still fall back to exact interval refinement.

    def __add__(self, other):
        o = self._coerce(other)
        out = Point(self.basis, tuple(a + b if b else a for a, b in zip(self.coeffs, o.coeffs)))
        if self._approx is not None and o._approx is not None:
            am, ar = self._approx
            bm, br = o._approx
            m = am + bm
            out._approx = (m, (ar + br) * 1.01 + abs(m) * 2.3e-16 + 1e-300)
        return out

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        out = Point(self.basis, tuple(a - b if b else a for a, b in zip(self.coeffs, o.coeffs)))
        if self._approx is not None and o._approx is not None:
            am, ar = self._approx
            bm, br = o._approx
            m = am - bm
            out._approx = (m, (ar + br) * 1.01 + abs(m) * 2.3e-16 + 1e-300)
        return out

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        out = Point(self.basis, tuple(-a for a in self.coeffs))
        if self._approx is not None:
            m, r = self._approx
            out._approx = (-m, r)
        return out

    def __mul__(self, scalar):
        q = scalar if type(scalar) is Fraction else parse_fraction(scalar)
        out = Point(self.basis, tuple(a * q if a else a for a in self.coeffs))
        if self._approx is not None:
            am, ar = self._approx
            qf = float(q)
            m = am * qf
            out._approx = ((m),
                           (ar + abs(am) * 1.2e-16) * abs(qf) * 1.01
                           + abs(m) * 1.2e-16 + 1e-300)
        return out

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        q = parse_fraction(scalar)
        return self * (1 / q)

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- equality and ordering -------------------------------------------

    def __eq__(self, other):
        if isinstance(other, Point):
            return self.basis == other.basis and self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self == self.basis.rational(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __lt__(self, other):
        return compare(self, self._coerce(other)) < 0

    def __le__(self, other):
        return compare(self, self._coerce(other)) <= 0

    def __gt__(self, other):
        return compare(self, self._coerce(other)) > 0

    def __ge__(self, other):
        return compare(self, self._coerce(other)) >= 0

    # -- certified evaluation ---------------------------------------------

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("point is not rational")
        return self.coeffs[0] * self.basis.gens[0].value

    def enclosure(self, bits: int) -> tuple[Fraction, Fraction]:
        lo = Fraction(0)
        hi = Fraction(0)
        for c, (gl, gh) in zip(self.coeffs, self.basis.enclosures(bits)):
            if c > 0:
                lo += c * gl
                hi += c * gh
            elif c < 0:
                lo += c * gh
                hi += c * gl
        return lo, hi

    def approx(self) -> tuple[float, float]:
        """(midpoint, radius) doubles with a rigorous radius bound."""
        got = self._approx
        if got is None:
            lo, hi = self.enclosure(_APPROX_BITS)
            mid = (lo + hi) / 2
            m = float(mid)
            rad = (hi - lo) / 2 + abs(mid - Fraction(m))
            r = float(rad) * 1.0000000001 + 5e-324
            got = (m, r)
            self._approx = got
        return got

    def sign(self) -> int:
        """Certified sign: -1, 0 or +1."""
        if self.is_zero():
            return 0
        if self.is_rational():
            return 1 if self.coeffs[0] > 0 else -1
        m, r = self.approx()
        if abs(m) > 4.0 * r + 1e-300:
            return 1 if m > 0 else -1
        cap = self.basis.precision_cap
        bits = 2 * _APPROX_BITS
        while True:
            lo, hi = self.enclosure(bits)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            if bits >= cap:
                raise PrecisionExhausted(
                    f"sign of {self!r} undecided at {cap} bits; a declared "
                    "independence assertion may be violated")
            bits = min(bits * 2, cap)

    def __float__(self):
        return self.approx()[0]

    def __repr__(self):
        return f"Point({self.approx()[0]!r}, coeffs={[fraction_str(c) for c in self.coeffs]})"

    # -- serialization ------------------------------------------------------

    def to_json(self):
        return {"coeffs": [fraction_str(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, basis: GeneratorBasis, obj) -> "Point":
        if isinstance(obj, dict):
            return basis.point(obj["coeffs"])
        return basis.rational(parse_fraction(obj))


def as_point(basis: GeneratorBasis, x) -> Point:
    if isinstance(x, Point):
        if x.basis != basis:
            raise ValueError("points over different bases")
        return x
    return basis.rational(parse_fraction(x))


def compare(a: Point, b: Point) -> int:
    """Total-order comparison: -1, 0 or +1, certified exact."""
    if a.basis != b.basis:
        raise ValueError("points over different bases")
    if a.coeffs == b.coeffs:
        return 0
    am, ar = a.approx()
    bm, br = b.approx()
    d = am - bm
    if abs(d) > 4.0 * (ar + br) + 1e-300:
        return 1 if d > 0 else -1
    return (a - b).sign()


def floor_point(x: Point) -> int:
    """Exact floor of a Point value."""
    if x.is_rational():
        return math.floor(x.rational_value())
    cap = x.basis.precision_cap
    bits = 64
    while True:
        lo, hi = x.enclosure(bits)
        flo = math.floor(lo)
        if flo == math.floor(hi):
            return flo
        if bits >= cap:
            raise PrecisionExhausted(
                f"floor of {x!r} undecided at {cap} bits (value sits on an "
                "integer within the declared generator precision)")
        bits = min(bits * 2, cap)


def reduce_mod1(x: Point) -> Point:
    """Representative of x in [0, 1)."""
    return x - floor_point(x)


def decimal_enclosure_str(x, digits: int = 24) -> dict:
    """Render a Point or Fraction as a certified decimal interval."""
    if isinstance(x, Fraction):
        lo = hi = x
    else:
        lo, hi = x.enclosure(max(96, int(digits * 3.33) + 16))
    scale = 10**digits

    def fmt(q, up):
        n = q * scale
        i = math.ceil(n) if up else math.floor(n)
        sign = "-" if i < 0 else ""
        i = abs(i)
        return f"{sign}{i // scale}.{i % scale:0{digits}d}"

    return {"lo": fmt(lo, up=False), "hi": fmt(hi, up=True)}


class PointSet:
    """Finite set of Points with exact membership, including mod-1 lookup."""

    __slots__ = ("basis", "points", "_keys", "_lift_range")

    def __init__(self, points: Iterable[Point]):
        pts = {}
        basis = None
        for p in points:
            if basis is None:
                basis = p.basis
            elif p.basis != basis:
                raise ValueError("points over different bases")
            pts[p.coeffs] = p
        self.basis = basis
        self.points = tuple(sorted(pts.values())) if pts else ()
        self._keys = frozenset(pts)
        self._lift_range = None

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, p: Point):
        return p.coeffs in self._keys

    def contains_torus(self, v: Point) -> bool:
        """Membership of v mod 1: any integer lift of v in the set."""
        if not self.points:
            return False
        if self._lift_range is None:
            self._lift_range = (floor_point(self.points[0]) - 1,
                                floor_point(self.points[-1]) + 1)
        w = reduce_mod1(v)
        k_lo, k_hi = self._lift_range
        return any((w + k).coeffs in self._keys for k in range(k_lo, k_hi + 1))


class IntervalSet:
    """Canonical finite union of disjoint open intervals with Point endpoints.

    Construct through canonicalize(); instances are immutable. Endpoint
    membership is always false (open intervals throughout).
    """

    __slots__ = ("basis", "intervals", "_los", "_lift_range")

    def __init__(self, basis: GeneratorBasis, intervals: tuple[tuple[Point, Point], ...]):
        self.basis = basis
        self.intervals = intervals
        self._los = [lo for lo, _ in intervals]
        self._lift_range = None

    @classmethod
    def canonicalize(cls, basis: GeneratorBasis, raw) -> "IntervalSet":
        """Sort, reject degenerate intervals, merge overlaps.

        Open semantics: intervals sharing only an endpoint do not merge.
        """
        items = []
        for lo, hi in raw:
            lo = as_point(basis, lo)
            hi = as_point(basis, hi)
            if compare(lo, hi) >= 0:
                raise ValueError(f"interval with lo >= hi: ({lo!r}, {hi!r})")
            items.append((lo, hi))
        items.sort(key=lambda iv: (iv[0], iv[1]))
        merged: list[tuple[Point, Point]] = []
        for lo, hi in items:
            if merged and compare(lo, merged[-1][1]) < 0:
                plo, phi = merged[-1]
                if compare(hi, phi) > 0:
                    merged[-1] = (plo, hi)
            else:
                merged.append((lo, hi))
        return cls(basis, tuple(merged))

    @classmethod
    def empty(cls, basis: GeneratorBasis) -> "IntervalSet":
        return cls(basis, ())

    @classmethod
    def single(cls, basis, lo, hi) -> "IntervalSet":
        return cls.canonicalize(basis, [(lo, hi)])

    def is_empty(self) -> bool:
        return not self.intervals

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __eq__(self, other):
        if not isinstance(other, IntervalSet):
            return NotImplemented
        return self.basis == other.basis and [
            (a.coeffs, b.coeffs) for a, b in self.intervals
        ] == [(a.coeffs, b.coeffs) for a, b in other.intervals]

    def __hash__(self):
        return hash(tuple((a.coeffs, b.coeffs) for a, b in self.intervals))

    def measure(self) -> Point:
        total = self.basis.zero()
        for lo, hi in self.intervals:
            total = total + (hi - lo)
        return total

    def translate(self, y) -> "IntervalSet":
        y = as_point(self.basis, y)
        return IntervalSet(self.basis, tuple((lo + y, hi + y) for lo, hi in self.intervals))

    def scale(self, c) -> "IntervalSet":
        """Pointwise scaling by a nonzero rational."""
        c = parse_fraction(c)
        if c == 0:
            raise ValueError("scale factor must be nonzero")
        if c > 0:
            ivs = tuple((lo * c, hi * c) for lo, hi in self.intervals)
        else:
            ivs = tuple((hi * c, lo * c) for lo, hi in reversed(self.intervals))
        return IntervalSet(self.basis, ivs)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        for alo, ahi in self.intervals:
            for blo, bhi in other.intervals:
                lo = alo if compare(alo, blo) >= 0 else blo
                hi = ahi if compare(ahi, bhi) <= 0 else bhi
                if compare(lo, hi) < 0:
                    out.append((lo, hi))
        return IntervalSet.canonicalize(self.basis, out) if out else IntervalSet.empty(self.basis)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet.canonicalize(self.basis, list(self.intervals) + list(other.intervals))

    def contains(self, x: Point) -> bool:
        import bisect

        j = bisect.bisect_right(self._los, x)
        if j == 0:
            return False
        lo, hi = self.intervals[j - 1]
        return compare(x, lo) > 0 and compare(x, hi) < 0

    def contains_torus(self, x: Point) -> bool:
        """Membership of x mod 1: true when any integer lift of x lies in
        the set, wherever on the line the set happens to sit."""
        if not self.intervals:
            return False
        if self._lift_range is None:
            self._lift_range = (floor_point(self.intervals[0][0]) - 1,
                                floor_point(self.intervals[-1][1]) + 1)
        w = reduce_mod1(x)
        k_lo, k_hi = self._lift_range
        return any(self.contains(w + k) for k in range(k_lo, k_hi + 1))

    def contains_set(self, other: "IntervalSet") -> bool:
        """other is a subset of self (both canonical, open)."""
        import bisect

        for lo, hi in other.intervals:
            j = bisect.bisect_right(self._los, lo)
            if j == 0:
                return False
            slo, shi = self.intervals[j - 1]
            if compare(slo, lo) > 0 or compare(hi, shi) > 0:
                return False
        return True

    def edge_points(self) -> list[Point]:
        out = []
        for lo, hi in self.intervals:
            out.append(lo)
            out.append(hi)
        return out

    def to_json(self):
        return [[lo.to_json(), hi.to_json()] for lo, hi in self.intervals]

    @classmethod
    def from_json(cls, basis, obj) -> "IntervalSet":
        return cls.canonicalize(
            basis, [(Point.from_json(basis, lo), Point.from_json(basis, hi)) for lo, hi in obj]
        ) if obj else cls.empty(basis)

    def __repr__(self):
        parts = ", ".join(f"({float(lo):.6g}, {float(hi):.6g})" for lo, hi in self.intervals)
        return f"IntervalSet[{parts}]"


def canonicalize(basis: GeneratorBasis, raw) -> IntervalSet:
    """Module-level convenience wrapper around IntervalSet.canonicalize."""
    return IntervalSet.canonicalize(basis, raw)


def min_gap(points: Iterable[Point]) -> Point:
    """Minimum pairwise distance of a finite Point set.

    For a singleton {x} the value is |x| (and x must be nonzero); for
    larger sets it is the smallest difference of consecutive sorted
    elements, which equals the minimum over all pairs.
    """
    pts = sorted({p.coeffs: p for p in points}.values())
    if not pts:
        raise ValueError("min_gap of an empty set")
    if len(pts) == 1:
        x = pts[0]
        if x.is_zero():
            raise ValueError("min_gap of the singleton {0} is undefined")
        return abs(x)
    best = None
    for a, b in zip(pts, pts[1:]):
        gap = b - a
        if best is None or compare(gap, best) < 0:
            best = gap
    return best


def max_abs(points: Iterable[Point]) -> Point:
    """max |x| over a nonempty finite Point set."""
    best = None
    for p in points:
        v = abs(p)
        if best is None or compare(v, best) > 0:
            best = v
    if best is None:
        raise ValueError("max_abs of an empty set")
    return best
