import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sweepout.errors import PrecisionExhausted
from sweepout.exactreal import (Generator, GeneratorBasis, IntervalSet, Point,
                                PointSet, compare, decimal_enclosure_str,
                                floor_point, min_gap, parse_fraction,
                                reduce_mod1)

rationals = st.fractions(min_value=-4, max_value=4, max_denominator=64)


# ---------------------------------------------------------------------------
# generators and bases
# ---------------------------------------------------------------------------

def test_generator_parsing():
    g = Generator.parse("sqrt:2")
    lo, hi = g.enclosure(64)
    assert lo < F(math.isqrt(2 * 4**64), 2**64) + F(1, 2**60)
    assert hi - lo == F(1, 2**64)
    assert Generator.parse("rat:3/7").value == F(3, 7)
    d = Generator.parse("dec:0.433@40")
    assert d.value == F(433, 1000) and d.bits == 40


@pytest.mark.parametrize("bad", ["sqrt:4", "sqrt:12", "sqrt:1", "rat:-1",
                                 "dec:0.5", "nope:3"])
def test_generator_rejects(bad):
    with pytest.raises(ValueError):
        Generator.parse(bad)


def test_basis_independence_certification():
    assert GeneratorBasis.from_specs(["sqrt:2", "sqrt:3"]).independence_certified
    assert not GeneratorBasis.from_specs(["dec:0.7071@60"]).independence_certified
    assert GeneratorBasis.from_specs(["dec:0.7071@60"],
                                     assert_independent=True).independence_certified
    with pytest.raises(ValueError):
        GeneratorBasis.from_specs(["sqrt:2", "sqrt:2"])


# ---------------------------------------------------------------------------
# points and comparison
# ---------------------------------------------------------------------------

def test_compare_examples(surd_basis, root2_over8, root3_over4):
    half_g1 = surd_basis.point(["0", "1/2", "0"])
    assert compare(half_g1, surd_basis.point(["0", "1/2", "0"])) == 0
    assert compare(root2_over8, root3_over4) == -1
    third = surd_basis.rational(F(1, 3))
    assert compare(third, surd_basis.point(["1/3", "0", "0"])) == 0


def test_point_arithmetic(surd_basis, root2_over8):
    p = root2_over8 * 8
    q = surd_basis.point(["0", "1", "0"])
    assert p == q
    assert (p - q).is_zero()
    assert float(p + 1) == pytest.approx(1 + math.sqrt(2))
    assert abs(-p) == p
    assert (p / 2) * 2 == p


def test_certified_sqrt_digits(surd_basis, root2_over8):
    # independent oracle: integer square root at 140 decimal digits
    digits = 40
    scaled = math.isqrt(2 * 10 ** (2 * digits + 2))
    expected = F(scaled, 10 ** (digits + 1)) / 8
    lo, hi = root2_over8.enclosure(200)
    assert lo <= expected <= hi or abs(expected - lo) < F(1, 10**digits)
    enc = decimal_enclosure_str(root2_over8, digits=20)
    assert enc["lo"].startswith("0.17677669529663688")
    assert enc["hi"].startswith("0.17677669529663688")


def test_precision_exhausted_for_coarse_decimal():
    basis = GeneratorBasis.from_specs(["dec:0.5@20"], assert_independent=True,
                                      precision_cap=256)
    g = basis.point(["0", "1"])
    near = basis.rational(F(1, 2) + F(1, 2**40))
    with pytest.raises(PrecisionExhausted):
        compare(g, near)
    # identical coefficient vectors still compare equal exactly
    assert compare(g, basis.point(["0", "1"])) == 0


def test_floor_and_mod1(surd_basis):
    r2 = surd_basis.point(["0", "1", "0"])
    assert floor_point(r2) == 1
    assert floor_point(-r2) == -2
    assert floor_point(surd_basis.rational(F(7, 2))) == 3
    assert floor_point(surd_basis.rational(-3)) == -3
    w = reduce_mod1(r2)
    assert float(w) == pytest.approx(math.sqrt(2) - 1)
    assert reduce_mod1(surd_basis.rational(F(-1, 4))) == F(3, 4)


@given(st.lists(rationals, min_size=1, max_size=6))
@settings(max_examples=60, deadline=None)
def test_compare_total_order(coeff_list):
    basis = GeneratorBasis.rationals()
    pts = [basis.rational(q) for q in coeff_list]
    s = sorted(pts)
    for a, b in zip(s, s[1:]):
        assert compare(a, b) <= 0
        assert (a.rational_value() <= b.rational_value())


# ---------------------------------------------------------------------------
# interval sets
# ---------------------------------------------------------------------------

def test_canonicalize_examples(rat_basis):
    s = IntervalSet.canonicalize(rat_basis, [(0, 1), (F(1, 2), 2)])
    assert len(s) == 1 and s.measure() == 2
    assert IntervalSet.canonicalize(rat_basis, []).is_empty()
    t = IntervalSet.canonicalize(rat_basis, [(0, 1), (1, 2)])
    assert len(t) == 2  # open intervals: the shared endpoint keeps them apart
    with pytest.raises(ValueError):
        IntervalSet.canonicalize(rat_basis, [(1, 1)])
    with pytest.raises(ValueError):
        IntervalSet.canonicalize(rat_basis, [(2, 1)])


def test_measure_examples(rat_basis, surd_basis, root2_over8):
    s = IntervalSet.canonicalize(rat_basis, [(0, F(1, 4)), (F(1, 2), F(3, 4))])
    assert s.measure() == F(1, 2)
    assert IntervalSet.empty(rat_basis).measure().is_zero()
    m = IntervalSet.single(surd_basis, surd_basis.rational(0), root2_over8).measure()
    enc = decimal_enclosure_str(m, digits=10)
    assert enc["lo"].startswith("0.17677669") and enc["hi"].startswith("0.17677669")


@given(st.lists(st.tuples(rationals, rationals), min_size=0, max_size=8))
@settings(max_examples=80, deadline=None)
def test_canonicalize_idempotent_and_measure_additive(raw):
    basis = GeneratorBasis.rationals()
    ivs = [(lo, hi) for lo, hi in raw if lo < hi]
    s = IntervalSet.canonicalize(basis, ivs)
    again = IntervalSet.canonicalize(basis, list(s.intervals))
    assert s == again
    # union preserved: membership of probe points matches the raw union
    for q in [F(-7, 3), F(-1, 2), F(0), F(1, 3), F(1), F(5, 2)]:
        p = basis.rational(q)
        raw_member = any(lo < q < hi for lo, hi in ivs)
        assert s.contains(p) == raw_member
    # finite additivity for a disjoint translate far away
    t = s.translate(basis.rational(100))
    assert s.union(t).measure() == s.measure() + t.measure()


def test_interval_ops(rat_basis):
    a = IntervalSet.canonicalize(rat_basis, [(0, 1), (2, 3)])
    b = IntervalSet.canonicalize(rat_basis, [(F(1, 2), F(5, 2))])
    inter = a.intersect(b)
    assert inter.measure() == F(1)
    assert a.contains_set(inter) and b.contains_set(inter)
    assert not a.contains_set(b)
    sc = a.scale(F(-1, 2))
    assert sc.measure() == a.measure() * F(1, 2)
    assert sc.contains(rat_basis.rational(F(-1, 4)))
    assert a.translate(F(1, 7)).measure() == a.measure()


def test_contains_torus(rat_basis):
    s = IntervalSet.canonicalize(rat_basis, [(F(-1, 4), F(-1, 8))])
    assert s.contains_torus(rat_basis.rational(F(27, 32)))
    assert not s.contains_torus(rat_basis.rational(F(7, 8)))  # endpoint, open
    assert not s.contains_torus(rat_basis.rational(F(1, 8)))
    assert s.contains_torus(rat_basis.rational(F(-3, 16) + 5))


# ---------------------------------------------------------------------------
# min_gap
# ---------------------------------------------------------------------------

def test_min_gap_examples(rat_basis, surd_basis, root2_over8, root3_over4):
    assert min_gap([rat_basis.rational(F(1, 4))]) == F(1, 4)
    pts = [rat_basis.rational(q) for q in (F(1, 8), F(1, 4), F(1, 2))]
    assert min_gap(pts) == F(1, 8)
    g = min_gap([root2_over8, root3_over4])
    enc = decimal_enclosure_str(g, digits=12)
    assert enc["lo"].startswith("0.25623600659")
    assert enc["hi"].startswith("0.25623600659")


def test_min_gap_errors(rat_basis):
    with pytest.raises(ValueError):
        min_gap([])
    with pytest.raises(ValueError):
        min_gap([rat_basis.rational(0)])
    # duplicates collapse before computing
    p = rat_basis.rational(F(1, 3))
    assert min_gap([p, p]) == F(1, 3)


@given(st.lists(rationals, min_size=2, max_size=30, unique=True))
@settings(max_examples=60, deadline=None)
def test_min_gap_exhaustive_oracle(values):
    basis = GeneratorBasis.rationals()
    pts = [basis.rational(q) for q in values]
    g = min_gap(pts).rational_value()
    brute = min(abs(a - b) for i, a in enumerate(values)
                for b in values[i + 1:])
    assert g == brute
    for i, a in enumerate(values):
        for b in values[i + 1:]:
            assert g <= abs(a - b)


def test_point_set(surd_basis, root2_over8, root3_over4):
    ps = PointSet([root2_over8, root3_over4, root2_over8])
    assert len(ps) == 2
    assert root2_over8 in ps
    assert ps.contains_torus(root2_over8 + 3)
    assert not ps.contains_torus(surd_basis.rational(F(1, 2)))


def test_point_json_roundtrip(surd_basis, root2_over8):
    obj = root2_over8.to_json()
    assert obj == {"coeffs": ["0", "1/8", "0"]}
    back = Point.from_json(surd_basis, obj)
    assert back == root2_over8
    assert Point.from_json(surd_basis, "3/7") == surd_basis.rational(F(3, 7))


def test_parse_fraction():
    assert parse_fraction("2/5") == F(2, 5)
    assert parse_fraction("0.25") == F(1, 4)
    assert parse_fraction(3) == 3
