import math
from fractions import Fraction

import pytest

from kicklab.construct_eus import (
    EusBuild,
    GoodPair,
    build_eus,
    chain_trace_fn,
    continued_eigenvalue,
    diagonalize_on,
    exact_chain,
    expand_window,
    far_crossing,
    find_new_interval,
    good_region,
    shrink_for_closeness,
    v_route_step,
    verify_membership,
)
from kicklab.intervals import IntervalSet
from kicklab.mat2 import Mat2
from kicklab.polymat import PolyMat2, kick_step

_BUILDS = {}


def cached_build(depth):
    if depth not in _BUILDS:
        _BUILDS[depth] = build_eus(depth=depth)
    return _BUILDS[depth]


def base_pair(lo=2 / 3, hi=4 / 3, per=64):
    a0 = kick_step(PolyMat2.shear_t(), Fraction(-1))
    e0 = IntervalSet([(lo, hi)])
    return GoodPair(a0, e0, diagonalize_on(a0, e0, per))


# ---------------------------------------------------------------------------
# exact chain and regions

def test_exact_chain_matches_polynomials():
    cs = [Fraction(-1), Fraction(-1, 16)]
    a0 = kick_step(PolyMat2.shear_t(), cs[0])
    a1 = kick_step(a0, cs[1])
    for t in (Fraction(3, 4), Fraction(1), Fraction(9, 7), Fraction(33)):
        m0, m1 = exact_chain(cs, t)
        assert m0 == tuple(p(t) for p in a0.entries())
        assert m1 == tuple(p(t) for p in a1.entries())
        assert m1[0] * m1[3] - m1[1] * m1[2] == 1


def test_chain_trace_fn_is_exact():
    cs = [Fraction(-1), Fraction(-1, 16)]
    f = chain_trace_fn(cs, 1)
    a1 = kick_step(kick_step(PolyMat2.shear_t(), cs[0]), cs[1])
    tr = a1.trace()
    for t in (0.75, 1.0, 33.015625):
        assert f(t) == float(tr(Fraction(t)))


def test_good_region_of_base_family():
    a0 = kick_step(PolyMat2.shear_t(), Fraction(-1))
    region = good_region(a0, (0.0, 4.0))
    assert len(region) == 1
    lo, hi = region.as_pairs()[0]
    assert abs(lo - 0.0) < 1e-8 and abs(hi - 2.0) < 1e-8


def test_good_region_rejects_constant_trace():
    rot = PolyMat2(PolyMat2.shear_t().a11, PolyMat2.shear_t().a21,
                   PolyMat2.shear_t().a21, PolyMat2.shear_t().a11)
    with pytest.raises(ValueError):
        good_region(rot, (0.0, 1.0))


# ---------------------------------------------------------------------------
# sampled diagonalizers

def test_diagonalize_on_rotation_family_constant_s():
    def rot(t):
        return Mat2.rotation(t)

    samples = diagonalize_on(None, IntervalSet([(0.3, 1.2)]), 48, evaluator=rot)
    for prev, cur in zip(samples, samples[1:]):
        assert (cur.s - prev.s).op_norm() < 1e-12


def test_diagonalize_at_trace_zero():
    a0 = kick_step(PolyMat2.shear_t(), Fraction(-1))
    smp = diagonalize_on(a0, IntervalSet([(0.5, 1.5)]), 1)[0]
    assert smp.t == 1.0
    assert smp.tr == 0
    assert abs(smp.mu - 1j) < 1e-14


def test_diagonalize_rejects_nonelliptic_point():
    a0 = kick_step(PolyMat2.shear_t(), Fraction(-1))
    with pytest.raises(ValueError):
        diagonalize_on(a0, IntervalSet([(2.5, 3.5)]), 4)


def test_pair_reconstruction_residual_small():
    pair = base_pair()
    pair.validate(tol=1e-12)  # A S = S diag(mu, conj mu) near machine level
    assert 0.0 < pair.margin() <= 2.0
    for smp in pair.samples:
        assert abs(smp.s.det() - 1.0) < 1e-12


def test_continued_eigenvalue_tracks_square():
    for theta in (0.3, 1.2, 2.0, 2.9):
        mu = complex(math.cos(theta), math.sin(theta))
        got = continued_eigenvalue(2.0 * math.cos(2.0 * theta), mu)
        want = mu * mu
        assert abs(got - want) < 1e-12


# ---------------------------------------------------------------------------
# shrink step

def test_shrink_halves_until_gates_pass():
    pair = base_pair()
    c, e_tilde, staged, diag = shrink_for_closeness(pair, 2 / 9, Fraction(-1, 4))
    assert c < 0 and c >= Fraction(-1, 4)
    assert diag["excised"] < 2 / 9
    assert diag["max_drift"] < 2 / 9
    assert diag["min_margin"] > 0.0
    # the excision removes a neighborhood of the trace zero at t = 1
    assert not e_tilde.contains(1.0)
    assert e_tilde.contains(0.7) and e_tilde.contains(1.3)
    # staged traces match the exact closed form tr' = tr (tr + c a12) - 2
    for smp, a_next, tr_next, a_float, mu, s in staged:
        assert tr_next == a_next[0] + a_next[3]
        assert -2 < tr_next < 2
        assert abs(s.det() - 1.0) < 1e-12


def test_shrink_gives_up_when_frozen():
    pair = base_pair(per=32)
    with pytest.raises(ArithmeticError):
        shrink_for_closeness(pair, 1e-12, Fraction(-1, 4), max_halvings=0)


def test_v_route_agrees_with_fresh_diagonalizers():
    pair = base_pair()
    c, _, staged, _ = shrink_for_closeness(pair, 2 / 9, Fraction(-1, 4))
    worst = 0.0
    for smp, a_next, tr_next, a_float, mu, s in staged:
        s_v, drift_v = v_route_step(smp, float(c), float(tr_next))
        worst = max(worst, (s_v - s).op_norm())
        assert drift_v < 2 / 9
    assert worst < 1e-8


# ---------------------------------------------------------------------------
# window location

def test_find_new_interval_linear_example():
    t0, lo, hi = find_new_interval(lambda t: 100.0 - t, -1.0, 10.0)
    assert abs(t0 - 100.0) < 1e-6
    assert abs(lo - 98.0) < 1e-6 and abs(hi - 102.0) < 1e-6


def test_find_new_interval_flipped_side():
    t0, lo, hi = find_new_interval(lambda t: 100.0 + t, 1.0, 10.0, direction=-1)
    assert abs(t0 + 100.0) < 1e-6
    assert abs(lo + 102.0) < 1e-6 and abs(hi + 98.0) < 1e-6


def test_far_crossing_needs_sign_change():
    with pytest.raises(ArithmeticError):
        far_crossing(lambda t: 3.0 + 0.0 * t, 1.0, max_doublings=10)


def test_expand_window_needs_interior_start():
    with pytest.raises(ValueError):
        expand_window(lambda t: t, 5.0, 0.0, 10.0, 2.0)


# ---------------------------------------------------------------------------
# small builds

def test_depth1_build_with_hint():
    b = build_eus(depth=1, e0_hint=(0.5, 1.5))
    assert b.e_sets[0].as_pairs() == [[0.5, 1.5]]
    assert abs(b.eps[0] - 1 / 3) < 1e-15
    assert abs(b.eps[1] - 1 / 3) < 1e-15
    assert b.c[0] == -1 and b.c[1] < 0
    # core splits at the t = 1 trace zero, plus one far window
    assert len(b.e_sets[1]) == 3
    lo, hi = b.i_intervals[0]
    assert lo > 1.0 and lo > 2.0  # beyond the level and the good region
    assert b.drift[1] < b.eps[1]
    assert b.check_invariants()["all"]


def test_depth2_build_invariants():
    b = cached_build(2)
    report = b.check_invariants()
    assert report["all"], report
    i1, i2 = b.i_intervals
    assert i1[0] <= i2[0] and i2[1] <= i1[1]
    # eps recomputed from stored widths
    w0 = b.e_sets[0].measure()
    assert math.isclose(b.eps[1], w0 / 3.0, rel_tol=1e-12)
    assert math.isclose(b.eps[2], min(w0, i1[1] - i1[0]) / 9.0, rel_tol=1e-12)
    # kick constants decay three-fold past the built depth
    for n in range(b.depth + 1, b.tail_levels + 1):
        assert b.c[n] == b.c[n - 1] / 3


def test_membership_levels():
    b = cached_build(2)
    assert b.membership_level(b.pick_members(1)[0]) == 0
    i2_lo, i2_hi = b.i_intervals[1]
    assert b.membership_level(0.5 * (i2_lo + i2_hi)) == 1
    assert b.membership_level(1.0) is None  # excised trace zero
    assert b.membership_level(50.0) is None


def test_pick_members_deterministic_and_interior():
    b = cached_build(2)
    ts = b.pick_members(20)
    assert ts == sorted(ts) and len(ts) == 20
    assert ts == b.pick_members(20)
    final = b.final_set()
    for t in ts:
        assert final.contains(t)


def test_verify_membership_core_and_window():
    b = cached_build(2)
    rep = verify_membership(b, b.pick_members(1)[0], 1 << 12)
    assert rep["pass"] and rep["bound_holds"]
    assert rep["member_from"] == 0
    assert rep["ratio"] < 1.5 and rep["slope"] <= 1e-4
    assert rep["block_dev"] < 1e-9 * (1.0 + abs(rep["block_lognorm"]))
    for n, tr in enumerate(rep["traces"]):
        assert -2.0 < tr < 2.0

    i2_lo, i2_hi = b.i_intervals[1]
    rep = verify_membership(b, 0.5 * (i2_lo + i2_hi), 1 << 12)
    assert rep["pass"] and rep["bound_holds"]
    assert rep["member_from"] == 1
    assert rep["bound"] >= rep["sup_norm"]


def test_verify_membership_rejects_outside():
    b = cached_build(2)
    with pytest.raises(ValueError):
        verify_membership(b, 1.0, 1 << 10)
    with pytest.raises(ValueError):
        verify_membership(b, 2.5, 1 << 10)


def test_verify_membership_rejects_horizon_overflow():
    b = cached_build(2)
    with pytest.raises(ValueError):
        verify_membership(b, b.pick_members(1)[0], 1 << 20)


def test_json_roundtrip_reproduces_verdicts():
    b = cached_build(2)
    b2 = EusBuild.from_json(b.to_json())
    assert b2.c == b.c
    assert b2.eps == b.eps
    assert [s.as_pairs() for s in b2.e_sets] == [s.as_pairs() for s in b.e_sets]
    assert b2.check_invariants()["all"]
    t = b.pick_members(3)[1]
    r1 = verify_membership(b, t, 1 << 12)
    r2 = verify_membership(b2, t, 1 << 12)
    assert r1["sup_norm"] == r2["sup_norm"]
    assert r1["bound"] == r2["bound"]
    assert r1["pass"] and r2["pass"]


def test_json_is_stable_text():
    b = cached_build(2)
    assert b.to_json() == EusBuild.from_json(b.to_json()).to_json()


def test_build_rejects_bad_arguments():
    with pytest.raises(ValueError):
        build_eus(depth=1, c0=Fraction(1))
    with pytest.raises(ValueError):
        build_eus(depth=3, tail_levels=2)
    with pytest.raises(ValueError):
        build_eus(depth=1, e0_hint=(5.0, 6.0))  # misses the good region
