import json
import random
from fractions import Fraction as F

import pytest

from sweepout.builder import (EGPair, SweepOutWitness, build_eg,
                              build_witness, oscillation_trace, required_m,
                              select_subsequence, separation_check,
                              trim_witness, unique_sum_check, verify_witness)
from sweepout.errors import (CapExceeded, GrowthExhausted, SequenceExhausted)
from sweepout.exactreal import PointSet, compare, min_gap
from sweepout.measures import DiscreteMeasure, MeasureSequence, convolve_indicator
from tests.conftest import geometric_sequence


def rpoints(basis, values):
    return [basis.rational(v) for v in values]


# ---------------------------------------------------------------------------
# witness pairs
# ---------------------------------------------------------------------------

def test_build_eg_pair(mu_pair):
    pair = build_eg(mu_pair, F(1, 6))
    assert F(len(pair.E)) > F(len(pair.G)) / 24
    gset = PointSet(pair.G)
    assert not any(x in gset for x in pair.E)
    # independent convolution re-check at every point of E
    for x in pair.E:
        assert convolve_indicator(mu_pair, gset, x) > F(1, 2)
    assert pair.certify(mu_pair)["ok"]


def test_build_eg_single_atom(rat_basis):
    mu = DiscreteMeasure([rat_basis.rational(F(1, 4))], [F(1)])
    pair = build_eg(mu, F(1, 4))
    gset = PointSet(pair.G)
    quarter = rat_basis.rational(F(1, 4))
    assert all((x + quarter) in gset for x in pair.E)
    assert pair.certify(mu)["ok"]


def test_build_eg_m_exhausted(mu_pair):
    with pytest.raises(GrowthExhausted) as exc:
        build_eg(mu_pair, F(1, 6), m_max=1)
    assert hasattr(exc.value, "best_ratio")


def test_eg_json_roundtrip(mu_pair, surd_basis):
    pair = build_eg(mu_pair, F(1, 6))
    back = EGPair.from_json(surd_basis, json.loads(json.dumps(pair.to_json())))
    assert back.E == pair.E and back.G == pair.G and back.lam == pair.lam
    assert back.certify(mu_pair)["ok"]


# ---------------------------------------------------------------------------
# separation and unique sums
# ---------------------------------------------------------------------------

def test_separation_examples(rat_basis):
    a1 = rpoints(rat_basis, [1, 2])
    assert separation_check([a1, rpoints(rat_basis, [F(1, 10), F(2, 10)])]).ok
    bad = separation_check([a1, rpoints(rat_basis, [F(1, 2), F(3, 2)])])
    assert not bad.ok and bad.failing_pair == 0
    mixed = separation_check([
        rpoints(rat_basis, [F(-1, 2), F(1, 2)]),
        rpoints(rat_basis, [F(-24, 100), F(24, 100)])])
    assert mixed.ok
    assert mixed.rows[0]["reading"] == "abs"
    assert mixed.rows[0]["ok_signed_reading"] is True


def test_unique_sum_examples(rat_basis):
    ok, stats = unique_sum_check([rpoints(rat_basis, [1, 2]),
                                  rpoints(rat_basis, [F(1, 10), F(2, 10)])])
    assert ok and stats["distinct_sums"] == 4
    ok2, ce = unique_sum_check([rpoints(rat_basis, [1, 2]),
                                rpoints(rat_basis, [F(1, 2), F(3, 2)])])
    assert not ok2
    assert ce["sum"] == {"coeffs": ["5/2"]}
    with pytest.raises(CapExceeded):
        unique_sum_check([rpoints(rat_basis, list(range(1, 40)))] * 5, cap=100)


def test_separation_implies_unique(rat_basis):
    rng = random.Random(99)
    confirmed = 0
    for _ in range(120):
        sets = []
        scale = F(1)
        for k in range(rng.randint(2, 4)):
            vals = set()
            while len(vals) < rng.randint(1, 4):
                v = F(rng.randint(-60, 60), 60)
                if v:
                    vals.add(v * scale)
            sets.append(rpoints(rat_basis, sorted(vals)))
            d = min_gap(sets[-1]).rational_value()
            # next scale sometimes safely inside d/4, sometimes not
            scale = d * F(rng.randint(1, 40), 100)
        rep = separation_check(sets)
        if rep.ok:
            ok, _ = unique_sum_check(sets)
            assert ok
            confirmed += 1
    assert confirmed >= 10


# ---------------------------------------------------------------------------
# subsequence selection and witness assembly
# ---------------------------------------------------------------------------

def test_required_m():
    assert required_m(F(1, 4), F(1, 2)) == 7
    assert required_m(F(1, 12), F(1, 2)) == 3
    assert required_m(F(1, 10), F(1, 2)) == 3  # 12/10/(1/2) = 2.4


def test_select_subsequence(geom_seq):
    sel = select_subsequence(geom_seq, F(1, 6), 2)
    assert len(sel.indices) == 2 and sel.indices[0] < sel.indices[1]
    a0 = sel.factors[0].points()
    a1 = sel.factors[1].points()
    from sweepout.exactreal import max_abs

    assert compare(max_abs(a1), min_gap(a0) * F(1, 4)) < 0


def test_select_single_factor(geom_seq):
    sel = select_subsequence(geom_seq, F(1, 6), 1)
    assert len(sel.factors) == 1


def test_select_exhausted_on_constant_supports(surd_basis, mu_pair):
    seq = MeasureSequence([mu_pair] * 6)
    with pytest.raises(SequenceExhausted) as exc:
        select_subsequence(seq, F(1, 6), 3)
    assert exc.value.required_bound is not None


def test_build_witness_m3(geom_seq):
    w = build_witness(geom_seq, F(1, 12), F(1, 2))
    assert w.m == 3
    assert F(w.count_E) > F(1, 12) * w.count_G
    assert w.eps_prime.sign() > 0
    rep = verify_witness(w, geom_seq, mode="factor-exact")
    assert rep.passed


def test_build_witness_validation(geom_seq):
    with pytest.raises(ValueError):
        build_witness(geom_seq, F(1, 12), F(0))
    with pytest.raises(ValueError):
        build_witness(geom_seq, F(1, 12), F(3, 2))
    with pytest.raises(ValueError):
        build_witness(geom_seq, F(0), F(1, 2))
    with pytest.raises(CapExceeded):
        build_witness(geom_seq, F(100), F(1, 2), m_cap=16)


def test_witness_json_roundtrip(geom_seq, surd_basis):
    w = build_witness(geom_seq, F(1, 12), F(1, 2))
    blob = json.dumps(w.to_json(), sort_keys=True)
    back = SweepOutWitness.from_json(surd_basis, json.loads(blob))
    assert back.count_E == w.count_E and back.indices == w.indices
    assert back.eps_prime == w.eps_prime
    rep = verify_witness(back, geom_seq, mode="factor-exact")
    assert rep.passed


def test_corrupted_witness_fails_named_check(geom_seq, surd_basis):
    w = build_witness(geom_seq, F(1, 12), F(1, 2))
    blob = w.to_json()
    # move one point of the first factor's G outside the set
    blob["factors"][0]["G"][0] = {"coeffs": ["9/10", "0", "0"]}
    bad = SweepOutWitness.from_json(surd_basis, blob)
    rep = verify_witness(bad, geom_seq, mode="factor-exact")
    assert not rep.passed
    names = {c.name for c in rep.failing()}
    assert any(n.startswith("factor[0]") for n in names)


def test_trim_and_explicit_verify(geom_seq):
    w = build_witness(geom_seq, F(1, 12), F(1, 2))
    wt = trim_witness(w, geom_seq, max_points=4)
    assert all(len(f.E) <= 4 and len(f.G) <= 4 for f in wt.factors)
    assert F(wt.count_E) > F(1, 12) * wt.count_G
    rep = verify_witness(wt, geom_seq, mode="explicit-brute-force")
    assert rep.passed
    by_name = {c.name: c for c in rep.checks}
    meas = by_name["explicit.thickened_measures"]
    assert meas.passed
    assert by_name["explicit.measure_inequality"].passed
    assert by_name["explicit.sup_on_B_components"].passed
    assert by_name["explicit.level_set_measure"].passed


def test_sampled_verify_deterministic(geom_seq):
    w = build_witness(geom_seq, F(1, 4), F(1, 2))
    r1 = verify_witness(w, geom_seq, mode="sampled", samples=40, seed=5)
    r2 = verify_witness(w, geom_seq, mode="sampled", samples=40, seed=5)
    assert r1.passed and r2.passed
    assert r1.to_json() == r2.to_json()


def test_decode_membership(geom_seq):
    w = trim_witness(build_witness(geom_seq, F(1, 12), F(1, 2)), geom_seq)
    for g in w.explicit_G():
        assert w.decode_near(g) == g
        nudged = g + w.eps_prime * F(1, 3)
        assert w.decode_near(nudged) == g
        # a point offset by more than eps_prime from g is only accepted
        # if some other sumset point is certifiably within the radius
        far = g + w.eps_prime * F(3, 2)
        dec = w.decode_near(far)
        if dec is not None:
            assert compare(abs(far - dec), w.eps_prime) < 0


def test_oscillation_trace(surd_basis):
    seq = geometric_sequence(surd_basis, 14)
    traces = oscillation_trace(seq, [(F(1, 12), F(1, 2))])
    tr = traces[0]
    assert not tr.warnings
    by_point = {}
    for n, pid, v, rmax, rmin in tr.rows:
        by_point.setdefault(pid, []).append(v)
    for pid, vals in by_point.items():
        assert max(vals) > F(1, 2)   # rises above delta at some n
        assert vals[-1] == 0         # decays once measures concentrate
    # truncated tail: sequence ends at the last witness index
    short = MeasureSequence(list(seq)[: max(tr.indices) + 1])
    t2 = oscillation_trace(short, [(F(1, 12), F(1, 2))])
    assert t2[0].warnings


@pytest.mark.parametrize("Delta,delta", [
    (F(1, 12), F(1, 3)),
    (F(1, 12), F(2, 3)),
    (F(1, 6), F(1, 2)),
    (F(1, 5), F(3, 5)),
])
def test_random_parameter_pipelines(geom_seq, Delta, delta):
    # end to end across the parameter grid: factored certification and
    # the explicit brute-force oracle must agree for every combination
    w = build_witness(geom_seq, Delta, delta)
    assert F(w.count_E) > Delta * w.count_G
    assert verify_witness(w, geom_seq, mode="factor-exact").passed
    wt = trim_witness(w, geom_seq, max_points=4)
    rep = verify_witness(wt, geom_seq, mode="explicit-brute-force")
    assert rep.passed, [c.name for c in rep.failing()]


def test_oscillation_trace_second_entry(surd_basis):
    seq = geometric_sequence(surd_basis, 24)
    traces = oscillation_trace(seq, [(F(1, 12), F(1, 2)), (F(1, 12), F(3, 4))])
    assert len(traces) == 2
    vals = [v for _, _, v, _, _ in traces[1].rows]
    assert max(vals) > F(3, 4)
