"""Witness-pair and sweep-out witness construction with full certification.

The pipeline per measure: fix a scaling parameter lam through the window
search, materialize the fractional-part sets U and V, and grow the
lattice level m until the pair

    E = A_m cap U,   G = A_{m+1} cap V

satisfies, with everything checked exactly,

    E cap G = empty,   #E > eps #G / 4,
    S 1_G(x) > (1 - 3 eps) |mu|  for every x in E.

Across a sequence of measures, pairs are selected greedily so consecutive
point sets satisfy the separation condition  max|A_{k+1}| <= d(A_k)/4,
which forces unique decomposition of sums. The sweep-out witness is the
factored family of m such pairs together with a certified thickening
radius; counts, gaps and all claimed inequalities reduce to factor level,
with explicit sumset enumeration retained as a brute-force oracle for
small instances.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import (CapExceeded, GrowthExhausted, SequenceExhausted,
                     VerificationFailed)
from .exactreal import (GeneratorBasis, IntervalSet, Point, PointSet,
                        compare, decimal_enclosure_str, fraction_str, max_abs,
                        min_gap, parse_fraction, reduce_mod1)
from .lambda_search import WindowConstraints, active_atoms, find_lambda
from .lattice import DEFAULT_TUPLE_CAP, decompose, lattice_hits
from .measures import (DiscreteMeasure, MeasureSequence, convolve_indicator,
                       min_on_interval, step_profile, to_torus)

DEFAULT_M_MAX = 64
DEFAULT_EXPLICIT_CAP = 10**6


# ---------------------------------------------------------------------------
# the per-measure witness pair
# ---------------------------------------------------------------------------

@dataclass
class EGPair:
    """Disjoint finite sets E, G in (-x_l, x_l) with the convolution of
    1_G exceeding (1 - 3 eps)|mu| on all of E; certified at construction
    and re-checkable exactly after deserialization."""

    mu_index: int
    epsilon: Fraction
    lam: Fraction
    m: int
    E: tuple[Point, ...]
    G: tuple[Point, ...]

    def points(self) -> list[Point]:
        return list(self.E) + list(self.G)

    def certify(self, mu: DiscreteMeasure) -> dict:
        """Exact re-check of the three defining inequalities."""
        gset = PointSet(self.G)
        disjoint = not any(p in gset for p in self.E)
        count_ok = Fraction(len(self.E)) > self.epsilon * len(self.G) / 4
        threshold = (1 - 3 * self.epsilon) * mu.total_mass
        h2_min = None
        for x in self.E:
            v = convolve_indicator(mu, gset, x)
            if h2_min is None or v < h2_min:
                h2_min = v
        h2_ok = h2_min is not None and h2_min > threshold
        x_l = mu.x_l
        inside = all(compare(abs(p), x_l) < 0 for p in self.points())
        return {
            "disjoint": disjoint,
            "count_E": len(self.E),
            "count_G": len(self.G),
            "count_ok": count_ok,
            "h2_min": fraction_str(h2_min) if h2_min is not None else None,
            "h2_threshold": fraction_str(threshold),
            "h2_ok": h2_ok,
            "inside_support_interval": inside,
            "ok": disjoint and count_ok and h2_ok and inside,
        }

    def to_json(self):
        return {
            "mu_index": self.mu_index,
            "epsilon": fraction_str(self.epsilon),
            "lam": fraction_str(self.lam),
            "m": self.m,
            "E": [p.to_json() for p in self.E],
            "G": [p.to_json() for p in self.G],
        }

    @classmethod
    def from_json(cls, basis: GeneratorBasis, obj) -> "EGPair":
        return cls(
            mu_index=int(obj["mu_index"]),
            epsilon=parse_fraction(obj["epsilon"]),
            lam=parse_fraction(obj["lam"]),
            m=int(obj["m"]),
            E=tuple(Point.from_json(basis, p) for p in obj["E"]),
            G=tuple(Point.from_json(basis, p) for p in obj["G"]),
        )


def build_eg(mu: DiscreteMeasure, eps: Fraction, m_max: int = DEFAULT_M_MAX,
             mu_index: int = 0, tuple_cap: int = DEFAULT_TUPLE_CAP,
             floor_scale: int = 64) -> EGPair:
    """Construct a certified witness pair for one measure.

    lam is fixed once through the constrained window search; the lattice
    level then grows on a doubling schedule until the pair counts reach
    #E > eps #G / 4. The convolution inequality is re-checked exactly at
    every point of E before the pair is accepted.

    The window search only ever consumes the largest-lam qualifying piece
    here, so a shallow profile floor suffices; the search lowers the
    floor by itself whenever the feasibility constraints reject every
    piece above it.

    A rational support (nu = 1) is degenerate: its grid inside
    (-x_l, x_l) is a fixed finite set, so level growth cannot populate
    the windows. When the graded sets stay empty (always, for a single
    atom) the pair is instead built directly at level 0: E takes the
    component midpoints of U and G the translates of E by the atoms
    active at lam; the same three inequalities are certified exactly.
    """
    eps = parse_fraction(eps)
    if not 0 < eps < Fraction(1, 3):
        raise ValueError("eps must lie in (0, 1/3)")
    spec = decompose(mu.support())
    constraints = WindowConstraints(x_1=mu.x_1, x_l=mu.x_l)
    res = find_lambda(mu, eps, delta=Fraction(1), constraints=constraints,
                      floor_scale=floor_scale)
    U, V = res.U, res.V
    threshold = (1 - 3 * eps) * mu.total_mass
    best_ratio = None
    if len(mu) > 1:
        m = 1
        while m <= m_max:
            E = lattice_hits(spec, m, U, cap=tuple_cap)
            G = lattice_hits(spec, m + 1, V, cap=tuple_cap)
            if E and G:
                ratio = Fraction(len(E), len(G))
                if best_ratio is None or ratio > best_ratio:
                    best_ratio = ratio
                if ratio > eps / 4:
                    gset = PointSet(G)
                    disjoint = not any(p in gset for p in E)
                    h2 = all(convolve_indicator(mu, gset, x) > threshold for x in E)
                    if disjoint and h2:
                        return EGPair(mu_index=mu_index, epsilon=eps, lam=res.lam,
                                      m=m, E=tuple(E), G=tuple(G))
            m *= 2
    if spec.nu == 1:
        pair = _degenerate_pair(mu, eps, res, mu_index)
        if pair is not None:
            return pair
    raise GrowthExhausted(
        f"no level m <= {m_max} reached #E > eps #G / 4 "
        f"(best ratio {best_ratio}, target {eps}/4)",
        best_ratio=best_ratio)


def _degenerate_pair(mu: DiscreteMeasure, eps: Fraction, res,
                     mu_index: int) -> EGPair | None:
    """Level-0 pair for rational supports: U-component midpoints plus
    their translates by the atoms active at lam. The translates land in
    V by the fractional-part addition rule, so disjointness, the count
    ratio and the convolution bound all recertify exactly."""
    act = active_atoms(mu, eps, res.lam)
    E = sorted((lo + hi) * Fraction(1, 2) for lo, hi in res.U)
    g_map = {}
    for x in E:
        for i in act:
            g = x + mu.atoms[i]
            g_map[g.coeffs] = g
    G = sorted(g_map.values())
    if not E or not G:
        return None
    pair = EGPair(mu_index=mu_index, epsilon=eps, lam=res.lam, m=0,
                  E=tuple(E), G=tuple(G))
    return pair if pair.certify(mu)["ok"] else None


# ---------------------------------------------------------------------------
# separation and unique sums
# ---------------------------------------------------------------------------

@dataclass
class SeparationReport:
    ok: bool
    rows: list[dict]
    failing_pair: int | None = None

    def to_json(self):
        return {"ok": self.ok, "failing_pair": self.failing_pair, "rows": self.rows}


def separation_check(sets: Sequence[Sequence[Point]]) -> SeparationReport:
    """Certified check of  max A_{k+1} <= d(A_k) / 4  for consecutive sets.

    The sets may contain negative points; the max is taken of absolute
    values (the quantity the sum-decomposition argument actually bounds).
    The signed-max reading is evaluated too and recorded in each row, so
    the certificate states which reading drove the verdict.
    """
    if not sets:
        raise ValueError("no sets given")
    rows = []
    ok = True
    failing = None
    for k in range(len(sets) - 1):
        d_k = min_gap(sets[k])
        quarter = d_k * Fraction(1, 4)
        nxt = list(sets[k + 1])
        abs_max = max_abs(nxt)
        signed_max = max(nxt)
        ok_abs = compare(abs_max, quarter) <= 0
        ok_signed = compare(signed_max, quarter) <= 0
        rows.append({
            "pair": k,
            "reading": "abs",
            "d_prev": decimal_enclosure_str(d_k),
            "max_abs_next": decimal_enclosure_str(abs_max),
            "ok_abs": ok_abs,
            "ok_signed_reading": ok_signed,
        })
        if not ok_abs and ok:
            ok = False
            failing = k
    return SeparationReport(ok=ok, rows=rows, failing_pair=failing)


def unique_sum_check(sets: Sequence[Sequence[Point]],
                     cap: int = DEFAULT_EXPLICIT_CAP):
    """Exhaustive distinctness of all sums taking one element per set.

    Returns (True, stats) or (False, counterexample). Equality of sums is
    exact (coefficient vectors)."""
    total = 1
    for s in sets:
        if not s:
            raise ValueError("empty factor set")
        total *= len(s)
    if total > cap:
        raise CapExceeded(
            f"{total} sum tuples exceed the cap {cap}; rely on separation_check")
    seen: dict = {}
    for combo in itertools.product(*sets):
        acc = combo[0]
        for p in combo[1:]:
            acc = acc + p
        key = acc.coeffs
        if key in seen:
            return False, {
                "sum": acc.to_json(),
                "first": [p.to_json() for p in seen[key]],
                "second": [p.to_json() for p in combo],
            }
        seen[key] = combo
    return True, {"distinct_sums": total}


# ---------------------------------------------------------------------------
# subsequence selection
# ---------------------------------------------------------------------------

@dataclass
class Selection:
    indices: list[int]
    factors: list[EGPair]
    skipped: list[dict]


def select_subsequence(seq: MeasureSequence, eps: Fraction, m: int,
                       m_max: int = DEFAULT_M_MAX,
                       tuple_cap: int = DEFAULT_TUPLE_CAP,
                       start_index: int = 0) -> Selection:
    """Greedy gap-separated selection of m witness pairs.

    A candidate measure is attempted only when its support bound already
    guarantees progress (the pair sets live inside (-x_l, x_l), so
    x_l <= d(previous E u G)/4 forces the strict gap condition); the
    accepted pair is then re-certified against the actual max |E u G|.
    """
    indices: list[int] = []
    factors: list[EGPair] = []
    skipped: list[dict] = []
    prev_quarter: Point | None = None
    for idx in range(start_index, len(seq)):
        if len(factors) == m:
            break
        mu = seq[idx]
        if prev_quarter is not None and compare(mu.x_l, prev_quarter) > 0:
            skipped.append({"index": idx, "reason": "support bound too large",
                            "x_l": decimal_enclosure_str(mu.x_l),
                            "required": decimal_enclosure_str(prev_quarter)})
            continue
        pair = build_eg(mu, eps, m_max=m_max, mu_index=idx, tuple_cap=tuple_cap)
        pts = pair.points()
        mx = max_abs(pts)
        if prev_quarter is not None and compare(mx, prev_quarter) >= 0:
            skipped.append({"index": idx, "reason": "gap condition failed after build",
                            "max_abs": decimal_enclosure_str(mx)})
            continue
        indices.append(idx)
        factors.append(pair)
        prev_quarter = min_gap(pts) * Fraction(1, 4)
    if len(factors) < m:
        raise SequenceExhausted(
            f"selected only {len(factors)} of {m} factors; next factor needs "
            f"support below {float(prev_quarter) if prev_quarter is not None else 'n/a'}",
            required_bound=prev_quarter)
    return Selection(indices=indices, factors=factors, skipped=skipped)


# ---------------------------------------------------------------------------
# the factored sweep-out witness
# ---------------------------------------------------------------------------

@dataclass
class SweepOutWitness:
    """Factored representation of the thickened sumset witness.

    G is the sumset of the factor G sets, E the union of the mixed
    sumsets F_k (factor k contributing its E set), A and B their open
    eps_prime-thickenings. Counts are certified at factor level through
    the unique-decomposition certificate; explicit enumeration is
    available below the configured cap as an independent oracle.
    """

    Delta: Fraction
    delta: Fraction
    epsilon: Fraction
    m: int
    indices: list[int]
    factors: list[EGPair]
    eps_prime: Point
    count_G: int
    count_E: int
    count_F: list[int]
    separation: SeparationReport

    @property
    def basis(self) -> GeneratorBasis:
        return self.eps_prime.basis

    def factor_sets(self) -> list[list[Point]]:
        return [f.points() for f in self.factors]

    # -- explicit enumeration (oracle scale) ------------------------------

    def explicit_G(self, cap: int = DEFAULT_EXPLICIT_CAP) -> list[Point]:
        total = 1
        for f in self.factors:
            total *= len(f.G)
        if total > cap:
            raise CapExceeded(f"explicit G needs {total} points, cap {cap}")
        out = []
        for combo in itertools.product(*[f.G for f in self.factors]):
            acc = combo[0]
            for p in combo[1:]:
                acc = acc + p
            out.append(acc)
        return out

    def explicit_E(self, cap: int = DEFAULT_EXPLICIT_CAP) -> list[tuple[Point, int]]:
        """(point, k) pairs where k is the factor contributing its E set."""
        total = sum(self.count_F)
        if total > cap:
            raise CapExceeded(f"explicit E needs {total} points, cap {cap}")
        out = []
        for k in range(self.m):
            parts = [f.E if i == k else f.G for i, f in enumerate(self.factors)]
            for combo in itertools.product(*parts):
                acc = combo[0]
                for p in combo[1:]:
                    acc = acc + p
                out.append((acc, k))
        return out

    def thickened(self, points: Sequence[Point]) -> IntervalSet:
        e = self.eps_prime
        return IntervalSet.canonicalize(
            self.basis, [(p - e, p + e) for p in points])

    # -- factored membership through greedy decoding ----------------------

    def decode_near(self, v: Point, use_E_at: int | None = None) -> Point | None:
        """Nearest sumset point within eps_prime of v, or None.

        Factor slots draw from G, except slot use_E_at (if given) which
        draws from E. Greedy per-factor nearest-neighbor selection; both
        bisect neighbors are explored, which is complete inside the
        certified separation radius."""
        import bisect

        factor_lists = []
        for i, f in enumerate(self.factors):
            factor_lists.append(f.E if i == use_E_at else f.G)  # sorted

        def rec(i: int, residual: Point):
            """Final residual after subtracting one point per remaining
            factor, if it can be brought inside eps_prime; else None."""
            if i == len(factor_lists):
                return residual if compare(abs(residual), self.eps_prime) < 0 else None
            pts = factor_lists[i]
            j = bisect.bisect_left(list(pts), residual)
            cands = [c for c in (j - 1, j) if 0 <= c < len(pts)]
            for cand in cands:
                r = rec(i + 1, residual - pts[cand])
                if r is not None:
                    return r
            return None

        res = rec(0, v)
        return None if res is None else v - res

    def contains_A_torus(self, x: Point) -> bool:
        """Membership of x mod 1 in the thickened sumset A, factored."""
        w = reduce_mod1(x)
        return self.decode_near(w) is not None or self.decode_near(w - 1) is not None

    def to_json(self):
        return {
            "Delta": fraction_str(self.Delta),
            "delta": fraction_str(self.delta),
            "epsilon": fraction_str(self.epsilon),
            "m": self.m,
            "indices": list(self.indices),
            "factors": [f.to_json() for f in self.factors],
            "eps_prime": self.eps_prime.to_json(),
            "eps_prime_decimal": decimal_enclosure_str(self.eps_prime),
            "count_G": self.count_G,
            "count_E": self.count_E,
            "count_F": list(self.count_F),
            "separation": self.separation.to_json(),
        }

    @classmethod
    def from_json(cls, basis: GeneratorBasis, obj) -> "SweepOutWitness":
        factors = [EGPair.from_json(basis, f) for f in obj["factors"]]
        sep = SeparationReport(ok=obj["separation"]["ok"],
                               rows=obj["separation"]["rows"],
                               failing_pair=obj["separation"]["failing_pair"])
        return cls(
            Delta=parse_fraction(obj["Delta"]),
            delta=parse_fraction(obj["delta"]),
            epsilon=parse_fraction(obj["epsilon"]),
            m=int(obj["m"]),
            indices=[int(i) for i in obj["indices"]],
            factors=factors,
            eps_prime=Point.from_json(basis, obj["eps_prime"]),
            count_G=int(obj["count_G"]),
            count_E=int(obj["count_E"]),
            count_F=[int(c) for c in obj["count_F"]],
            separation=sep,
        )


def _certified_thickening(factor_sets: Sequence[Sequence[Point]]) -> Point:
    """Lower bound for half the minimum gap of the full sumset:
    min_k ( d(A_k) - 2 sum_{i>k} max|A_i| ) / 2, certified positive."""
    maxima = [max_abs(s) for s in factor_sets]
    best = None
    for k in range(len(factor_sets)):
        slack = min_gap(factor_sets[k])
        for i in range(k + 1, len(factor_sets)):
            slack = slack - maxima[i] * 2
        half = slack * Fraction(1, 2)
        if best is None or compare(half, best) < 0:
            best = half
    if best is None or best.sign() <= 0:
        raise VerificationFailed("thickening radius is not certified positive")
    return best


def required_m(Delta: Fraction, delta: Fraction) -> int:
    """Smallest integer strictly above 12 Delta / (1 - delta)."""
    q = 12 * Delta / (1 - delta)
    return (q.numerator // q.denominator) + 1


def build_witness(seq: MeasureSequence, Delta: Fraction, delta: Fraction,
                  m_cap: int = 64, m_max: int = DEFAULT_M_MAX,
                  tuple_cap: int = DEFAULT_TUPLE_CAP) -> SweepOutWitness:
    """Assemble and certify the factored sweep-out witness.

    Uses eps = (1 - delta)/3 per factor and m factors with
    m > 12 Delta / (1 - delta). The count inequality #E > Delta #G and
    the positive thickening radius are certified exactly; so is the
    separation chain that justifies the factored counting.
    """
    Delta = parse_fraction(Delta)
    delta = parse_fraction(delta)
    if Delta <= 0:
        raise ValueError("Delta must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    eps = (1 - delta) / 3
    m = required_m(Delta, delta)
    if m > m_cap:
        raise CapExceeded(f"witness needs m = {m} factors, cap is {m_cap}")
    sel = select_subsequence(seq, eps, m, m_max=m_max, tuple_cap=tuple_cap)
    factor_sets = [f.points() for f in sel.factors]
    sep = separation_check(factor_sets)
    if not sep.ok:
        raise VerificationFailed("separation chain failed on selected factors",
                                 report=sep.to_json())
    eps_prime = _certified_thickening(factor_sets)
    g_counts = [len(f.G) for f in sel.factors]
    e_counts = [len(f.E) for f in sel.factors]
    count_G = 1
    for c in g_counts:
        count_G *= c
    count_F = []
    for k in range(m):
        fk = e_counts[k]
        for i, c in enumerate(g_counts):
            if i != k:
                fk *= c
        count_F.append(fk)
    count_E = sum(count_F)
    if not Fraction(count_E) > Delta * count_G:
        raise VerificationFailed(
            f"count inequality failed: {count_E} <= {Delta} * {count_G}")
    return SweepOutWitness(Delta=Delta, delta=delta, epsilon=eps, m=m,
                           indices=sel.indices, factors=sel.factors,
                           eps_prime=eps_prime, count_G=count_G,
                           count_E=count_E, count_F=count_F, separation=sep)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

@dataclass
class Check:
    name: str
    claim: str
    computed: dict
    passed: bool
    method: str
    sample_count: int | None = None

    def to_json(self):
        out = {
            "name": self.name,
            "claim": self.claim,
            "computed": self.computed,
            "passed": self.passed,
            "method": self.method,
        }
        if self.sample_count is not None:
            out["sample_count"] = self.sample_count
        return out


@dataclass
class VerificationReport:
    mode: str
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_json(self):
        return {
            "mode": self.mode,
            "passed": self.passed,
            "checks": [c.to_json() for c in self.checks],
        }


def _factor_checks(w: SweepOutWitness, seq: MeasureSequence) -> list[Check]:
    checks = []
    for k, (idx, f) in enumerate(zip(w.indices, w.factors)):
        mu = seq[idx]
        cert = f.certify(mu)
        checks.append(Check(
            name=f"factor[{k}].pair_invariants",
            claim="E cap G empty, #E > eps #G / 4, conv > (1-3eps)|mu| on E",
            computed=cert, passed=bool(cert["ok"]), method="exact"))
        gset = PointSet(f.G)
        worst = None
        for x in f.E:
            v = convolve_indicator(mu, gset, x)
            if worst is None or v < worst:
                worst = v
        scaled = w.delta * mu.total_mass
        checks.append(Check(
            name=f"factor[{k}].threshold",
            claim="conv exceeds delta and delta*|mu| at every point of E",
            computed={"min_value": fraction_str(worst), "points": len(f.E),
                      "delta": fraction_str(w.delta),
                      "delta_scaled": fraction_str(scaled)},
            passed=worst is not None and worst > w.delta and worst > scaled,
            method="exact"))
    sep = separation_check(w.factor_sets())
    checks.append(Check(
        name="separation_chain",
        claim="max|A_{k+1}| <= d(A_k)/4 along the selected factors",
        computed=sep.to_json(), passed=sep.ok, method="exact"))
    eps_prime = _certified_thickening(w.factor_sets())
    checks.append(Check(
        name="thickening_radius",
        claim="stored eps_prime is positive and not above the certified bound",
        computed={"stored": decimal_enclosure_str(w.eps_prime),
                  "certified": decimal_enclosure_str(eps_prime)},
        passed=w.eps_prime.sign() > 0 and compare(w.eps_prime, eps_prime) <= 0,
        method="exact"))
    g_counts = [len(f.G) for f in w.factors]
    e_counts = [len(f.E) for f in w.factors]
    count_G = 1
    for c in g_counts:
        count_G *= c
    count_F = []
    for k in range(w.m):
        fk = e_counts[k]
        for i, c in enumerate(g_counts):
            if i != k:
                fk *= c
        count_F.append(fk)
    count_E = sum(count_F)
    checks.append(Check(
        name="count_inequality",
        claim=f"#E > Delta * #G with Delta = {fraction_str(w.Delta)}",
        computed={"count_E": count_E, "count_G": count_G,
                  "stored_E": w.count_E, "stored_G": w.count_G,
                  "ratio": float(Fraction(count_E, count_G))},
        passed=(count_E == w.count_E and count_G == w.count_G
                and Fraction(count_E) > w.Delta * count_G),
        method="exact"))
    return checks


def _explicit_checks(w: SweepOutWitness, seq: MeasureSequence,
                     cap: int) -> list[Check]:
    checks = []
    g_pts = w.explicit_G(cap=cap)
    g_keys = {p.coeffs for p in g_pts}
    checks.append(Check(
        name="explicit.G_distinct",
        claim="sumset G enumerates with no collisions (product count)",
        computed={"enumerated": len(g_pts), "distinct": len(g_keys),
                  "expected": w.count_G},
        passed=len(g_keys) == len(g_pts) == w.count_G, method="exact"))
    e_pairs = w.explicit_E(cap=cap)
    e_keys = {p.coeffs for p, _ in e_pairs}
    disjoint_FG = not (e_keys & g_keys)
    checks.append(Check(
        name="explicit.E_distinct",
        claim="the mixed sumsets F_k are mutually disjoint and miss G",
        computed={"enumerated": len(e_pairs), "distinct": len(e_keys),
                  "expected": w.count_E, "disjoint_from_G": disjoint_FG},
        passed=len(e_keys) == len(e_pairs) == w.count_E and disjoint_FG,
        method="exact"))

    A = w.thickened(g_pts)
    B = w.thickened([p for p, _ in e_pairs])
    A_t, B_t = to_torus(A), to_torus(B)
    mA, mB = A_t.measure(), B_t.measure()
    two_eps = w.eps_prime * 2
    checks.append(Check(
        name="explicit.thickened_measures",
        claim="|A| = 2 eps' #G and |B| = 2 eps' #E (disjoint thickening)",
        computed={"measure_A": decimal_enclosure_str(mA),
                  "measure_B": decimal_enclosure_str(mB),
                  "expected_A": decimal_enclosure_str(two_eps * w.count_G),
                  "expected_B": decimal_enclosure_str(two_eps * w.count_E)},
        passed=(mA == two_eps * w.count_G and mB == two_eps * w.count_E),
        method="exact"))
    checks.append(Check(
        name="explicit.measure_inequality",
        claim="|B| > Delta |A|",
        computed={"measure_B": decimal_enclosure_str(mB),
                  "Delta_measure_A": decimal_enclosure_str(mA * w.Delta)},
        passed=compare(mB, mA * w.Delta) > 0, method="exact"))

    profiles = {}
    component_rows = []
    all_ok = True
    for pt, k in e_pairs:
        lo, hi = pt - w.eps_prime, pt + w.eps_prime
        order = [k] + [i for i in range(w.m) if i != k]
        comp_ok = False
        used = None
        worst = None
        for i in order:
            mu = seq[w.indices[i]]
            if i not in profiles:
                profiles[i] = step_profile(mu, A)
            val = min_on_interval(mu, A, lo, hi, profile=profiles[i])
            if worst is None or val > worst:
                worst = val
            if val > w.delta:
                comp_ok = True
                used = i
                break
        component_rows.append({
            "center": decimal_enclosure_str(pt), "factor": k,
            "verified_with": used,
            "min_value": fraction_str(worst) if worst is not None else None,
        })
        if not comp_ok:
            all_ok = False
    checks.append(Check(
        name="explicit.sup_on_B_components",
        claim=f"sup_k S 1_A > delta = {fraction_str(w.delta)} on every "
              "component interval of B",
        computed={"components": len(e_pairs), "rows": component_rows[:40],
                  "all_ok": all_ok},
        passed=all_ok, method="exact"))

    level_union = IntervalSet.empty(w.basis)
    for i in range(w.m):
        mu = seq[w.indices[i]]
        if i not in profiles:
            profiles[i] = step_profile(mu, A)
        level_union = level_union.union(profiles[i].level_set(w.delta))
    m_level = level_union.measure()
    checks.append(Check(
        name="explicit.level_set_measure",
        claim="|{x : sup_k S 1_A(x) > delta}| > Delta |A| (contains B)",
        computed={"level_measure": decimal_enclosure_str(m_level),
                  "Delta_measure_A": decimal_enclosure_str(mA * w.Delta)},
        passed=compare(m_level, mA * w.Delta) > 0, method="exact"))
    return checks


def _sampled_checks(w: SweepOutWitness, seq: MeasureSequence,
                    samples: int, seed: int) -> list[Check]:
    rng = random.Random(seed)
    denom = 997
    hits = 0
    rows = []
    for _ in range(samples):
        k = rng.choices(range(w.m), weights=w.count_F)[0]
        pt = None
        for i, f in enumerate(w.factors):
            pool = f.E if i == k else f.G
            choice = pool[rng.randrange(len(pool))]
            pt = choice if pt is None else pt + choice
        offset = w.eps_prime * Fraction(rng.randrange(-denom + 1, denom), denom)
        x = pt + offset
        sup = Fraction(0)
        for i in range(w.m):
            mu = seq[w.indices[i]]
            val = Fraction(0)
            for a, mass in zip(mu.atoms, mu.masses):
                if w.contains_A_torus(x + a):
                    val += mass
            if val > sup:
                sup = val
        ok = sup > w.delta
        hits += ok
        if len(rows) < 20:
            rows.append({"factor": k, "sup": fraction_str(sup), "ok": ok})
    return [Check(
        name="sampled.sup_on_B",
        claim="sup_k S 1_A > delta at sampled points of B",
        computed={"hits": hits, "samples": samples, "rows": rows},
        passed=hits == samples, method="sampled", sample_count=samples)]


def verify_witness(w: SweepOutWitness, seq: MeasureSequence,
                   mode: str = "factor-exact",
                   explicit_cap: int = DEFAULT_EXPLICIT_CAP,
                   samples: int = 100, seed: int = 0) -> VerificationReport:
    """Re-derive every claimed inequality of a witness.

    factor-exact re-checks the per-factor inequalities, separation chain,
    thickening radius and counts (sufficient by the factored reduction).
    explicit-brute-force additionally enumerates the sumsets, builds A
    and B as concrete IntervalSets and establishes the convolution bound
    on every component of B exactly. sampled draws random points of B and
    evaluates the convolution directly through factored membership.
    """
    checks = _factor_checks(w, seq)
    if mode == "factor-exact":
        pass
    elif mode == "explicit-brute-force":
        checks += _explicit_checks(w, seq, cap=explicit_cap)
    elif mode == "sampled":
        checks += _sampled_checks(w, seq, samples=samples, seed=seed)
    else:
        raise ValueError(f"unknown mode: {mode}")
    return VerificationReport(mode=mode, checks=checks)


# ---------------------------------------------------------------------------
# trimming and the oscillation trace
# ---------------------------------------------------------------------------

def trim_witness(w: SweepOutWitness, seq: MeasureSequence,
                 max_points: int = 4) -> SweepOutWitness:
    """Shrink factor sets to oracle scale and re-certify everything.

    Per factor one point of E is kept together with a minimal mass cover
    of its translates inside G, so the convolution inequality survives
    with the trimmed G. Subsets only improve gaps and maxima, but the
    separation chain, thickening radius and counts are recomputed and
    re-certified from scratch.
    """
    new_factors = []
    for idx, f in zip(w.indices, w.factors):
        mu = seq[idx]
        threshold = (1 - 3 * f.epsilon) * mu.total_mass
        gset = PointSet(f.G)
        chosen = None
        for x in f.E:
            translates = []
            for a, mass in zip(mu.atoms, mu.masses):
                cand = x + a
                if cand in gset:
                    translates.append((mass, cand))
            translates.sort(key=lambda t: (-t[0], t[1]))
            acc = Fraction(0)
            cover = []
            for mass, pt in translates:
                acc += mass
                cover.append(pt)
                if acc > threshold:
                    break
            if acc > threshold and len(cover) <= max_points:
                chosen = (x, cover)
                break
        if chosen is None:
            raise VerificationFailed(
                f"cannot trim factor at measure {idx} to {max_points} points")
        x, cover = chosen
        trimmed = EGPair(mu_index=f.mu_index, epsilon=f.epsilon, lam=f.lam,
                         m=f.m, E=(x,), G=tuple(sorted(cover)))
        cert = trimmed.certify(mu)
        if not cert["ok"]:
            raise VerificationFailed(f"trimmed pair failed certification: {cert}")
        new_factors.append(trimmed)
    factor_sets = [f.points() for f in new_factors]
    sep = separation_check(factor_sets)
    if not sep.ok:
        raise VerificationFailed("separation chain failed after trimming")
    eps_prime = _certified_thickening(factor_sets)
    g_counts = [len(f.G) for f in new_factors]
    e_counts = [len(f.E) for f in new_factors]
    count_G = 1
    for c in g_counts:
        count_G *= c
    count_F = []
    for k in range(w.m):
        fk = e_counts[k]
        for i, c in enumerate(g_counts):
            if i != k:
                fk *= c
        count_F.append(fk)
    count_E = sum(count_F)
    if not Fraction(count_E) > w.Delta * count_G:
        raise VerificationFailed("count inequality lost in trimming")
    return SweepOutWitness(Delta=w.Delta, delta=w.delta, epsilon=w.epsilon,
                           m=w.m, indices=list(w.indices), factors=new_factors,
                           eps_prime=eps_prime, count_G=count_G,
                           count_E=count_E, count_F=count_F, separation=sep)


@dataclass
class WitnessTrace:
    Delta: Fraction
    delta: Fraction
    indices: list[int]
    point_ids: list[str]
    rows: list[tuple[int, int, Fraction, Fraction, Fraction]]
    warnings: list[str]

    def csv_rows(self):
        yield ("n", "point_id", "value", "running_max", "running_min")
        for n, pid, v, rmax, rmin in self.rows:
            yield (n, pid, repr(float(v)), repr(float(rmax)), repr(float(rmin)))

    def to_json(self):
        return {
            "Delta": fraction_str(self.Delta),
            "delta": fraction_str(self.delta),
            "indices": self.indices,
            "point_ids": self.point_ids,
            "warnings": self.warnings,
            "rows": [
                {"n": n, "point_id": pid, "value": fraction_str(v),
                 "running_max": fraction_str(rmax), "running_min": fraction_str(rmin)}
                for n, pid, v, rmax, rmin in self.rows
            ],
        }


def oscillation_trace(seq: MeasureSequence, schedule: Sequence[tuple[Fraction, Fraction]],
                      trim_points: int = 4, max_sample_points: int = 24,
                      m_cap: int = 64) -> list[WitnessTrace]:
    """Empirical oscillation along the sequence on built witness sets.

    For each schedule entry a witness is built and trimmed to explicit
    scale; the convolution of 1_A is then evaluated exactly at the
    component centers of B for every measure of the sequence, giving
    per-point running max and min. The values rise above delta at the
    witness indices and fall back to 0 once the measures concentrate,
    provided the sequence extends beyond the last witness index.
    """
    if not schedule:
        raise ValueError("empty schedule")
    traces = []
    for Delta, delta in schedule:
        w = trim_witness(build_witness(seq, Delta, delta, m_cap=m_cap), seq,
                         max_points=trim_points)
        g_pts = w.explicit_G()
        e_pairs = w.explicit_E()
        A = to_torus(w.thickened(g_pts))
        centers = sorted(p for p, _ in e_pairs)[:max_sample_points]
        warnings = []
        if max(w.indices) >= len(seq) - 1:
            warnings.append(
                "no measures beyond the last witness index; decay tail truncated")
        rows = []
        run_max = [None] * len(centers)
        run_min = [None] * len(centers)
        for n, mu in enumerate(seq):
            for pid, c in enumerate(centers):
                v = convolve_indicator(mu, A, c)
                run_max[pid] = v if run_max[pid] is None else max(run_max[pid], v)
                run_min[pid] = v if run_min[pid] is None else min(run_min[pid], v)
                rows.append((n, pid, v, run_max[pid], run_min[pid]))
        traces.append(WitnessTrace(
            Delta=parse_fraction(Delta), delta=parse_fraction(delta),
            indices=list(w.indices),
            point_ids=[str(i) for i in range(len(centers))],
            rows=rows, warnings=warnings))
    return traces
