"""Oracle and property tests for the evolution layer."""

import math
import random

import pytest

from kicklab.mat2 import Mat2, shear_norm, solve_quadratic_unit_det
from kicklab.evolution import (
    KickError,
    KickSource,
    ScaledProduct,
    condition_star_check,
    constant_kicks,
    evolve,
    growth_lower_bound,
    identity_kicks,
    majorization_limit,
    q_growth_certificate,
    random_bounded_kicks,
)


def test_scaled_product_matches_direct_small_n():
    rng = random.Random(11)
    for trial in range(20):
        kicks = random_bounded_kicks(seed=100 + trial, bound=2.0)
        direct = Mat2.identity()
        prod = ScaledProduct.identity()
        h = Mat2.shear(0.7)
        for n in range(1, 65):
            phi = kicks(n)
            direct = phi @ (h @ direct)
            prod.lmul(h).lmul(phi)
        want = direct.op_norm()
        assert prod.lognorm == pytest.approx(math.log(want), rel=1e-9)
        back = prod.to_mat()
        assert (back - direct).max_abs() <= 1e-9 * direct.max_abs()


def test_scaled_product_det_residual_small():
    prod = ScaledProduct.identity()
    h = Mat2.shear(1.3)
    m = Mat2.lower(-0.4)
    for n in range(1, 40):
        prod.lmul(h).lmul(m)
        r = prod.det_residual()
        if r is None:
            break
        assert r <= 1e-6 * n
    assert prod.det_residual() is None or prod.lognorm < 17.1


def test_scaled_product_matmul_combines_logs():
    a = ScaledProduct(Mat2.shear(3.0))
    b = ScaledProduct(Mat2.lower(-2.0))
    c = a @ b
    want = (Mat2.shear(3.0) @ Mat2.lower(-2.0)).op_norm()
    assert c.lognorm == pytest.approx(math.log(want), rel=1e-12)


def test_evolve_identity_kicks_is_single_shear():
    # with identity kicks the shears compose: P_n = H(n t)
    t = 0.5
    trace = evolve(identity_kicks(), t, 100, record_every=1)
    for n, ln in zip(trace.ns, trace.lognorms):
        assert ln == pytest.approx(math.log(shear_norm(n * t)), rel=1e-12)


def test_evolve_constant_elliptic_bounded():
    # tr(M(-1) H(1)) = 1: elliptic step, powers bounded by the conjugation
    step = Mat2.lower(-1.0) @ Mat2.shear(1.0)
    assert step.tr() == pytest.approx(1.0, abs=1e-15)
    lam, _ = solve_quadratic_unit_det(complex(step.tr()))
    v = (complex(step.a12), lam - step.a11)
    vbar = (v[0].conjugate(), v[1].conjugate())
    det_s = v[0] * vbar[1] - v[1] * vbar[0]
    root = det_s ** 0.5
    s = Mat2(v[0] / root, vbar[0] / root, v[1] / root, vbar[1] / root)
    assert abs(s.det() - 1.0) < 1e-12
    cond_log = 2.0 * math.log(s.op_norm())
    trace = evolve(constant_kicks(Mat2.lower(-1.0)), 1.0, 10**5)
    assert trace.sup_lognorm <= cond_log + 1e-9
    assert trace.stabilized()


def test_evolve_constant_hyperbolic_rate():
    # tr(M(-1) H(5)) = -3: top eigenvalue magnitude (3+sqrt5)/2
    rate = math.log((3.0 + math.sqrt(5.0)) / 2.0)
    trace = evolve(constant_kicks(Mat2.lower(-1.0)), 5.0, 4000)
    assert trace.slope() == pytest.approx(rate, abs=1e-10)
    assert trace.u()[-1] == pytest.approx(rate, abs=1e-2)
    assert not trace.stabilized()


def test_evolve_inverse_chain_norm_symmetry():
    kicks = random_bounded_kicks(seed=5, bound=2.0)
    trace = evolve(kicks, 1.5, 2**14, track_inverse=True)
    assert trace.inverse_lognorm is not None
    # ||P|| = ||P^{-1}|| for unimodular products, up to accumulated roundoff
    assert abs(trace.final.lognorm - trace.inverse_lognorm) <= 1e-9 * 2**14


def test_evolve_rejects_bad_kicks():
    bad = KickSource(lambda k: Mat2(2.0, 0.0, 0.0, 2.0), bound=4.0)
    with pytest.raises(KickError) as err:
        evolve(bad, 1.0, 10)
    assert err.value.index == 1

    def flaky(k):
        if k == 7:
            raise RuntimeError("boom")
        return Mat2.identity()

    with pytest.raises(KickError) as err:
        evolve(KickSource(flaky, bound=1.0), 1.0, 10)
    assert err.value.index == 7


def test_kick_source_norm_bound_enforced():
    src = KickSource(lambda k: Mat2.shear(3.0), bound=1.5)
    with pytest.raises(KickError):
        src(1)


def test_random_bounded_kicks_deterministic_and_bounded():
    a = random_bounded_kicks(seed=42, bound=3.0)
    b = random_bounded_kicks(seed=42, bound=3.0)
    # order-independent lookups: query b out of order
    m5 = b(5)
    for k in (1, 2, 3, 4, 5):
        ma = a(k)
        assert ma.op_norm() <= 3.0 + 1e-12
        if k == 5:
            assert (ma - m5).max_abs() == 0.0
        assert (ma - b(k)).max_abs() == 0.0


def test_certificate_upper_triangular_degenerates():
    # alpha = 0 kicks: factor is 1, Q merely nondecreasing, no violations
    kicks = constant_kicks(Mat2.shear(0.8) @ Mat2.diag(1.25))
    rep = q_growth_certificate(kicks, 1j, 500)
    assert rep["violations"] == 0
    assert rep["first_violation"] is None
    assert rep["min_step_margin"] >= -1e-12
    assert rep["telescoped_half_sum"] == 0.0
    assert rep["telescoped_holds"]


def test_certificate_rotation_kicks_frozen_bound():
    # R(pi/4) kicks, z=i: per-step factor 1 + pi/24, k = 1
    n = 800
    kicks = constant_kicks(Mat2.rotation(math.pi / 4))
    rep = q_growth_certificate(kicks, 1j, n)
    want = 0.5 * n * math.log(1.0 + math.pi / 24.0)
    assert rep["violations"] == 0
    assert rep["telescoped_half_sum"] == pytest.approx(want, rel=1e-12)
    assert rep["log_b_norm"] >= want - 1e-9 * (1 + n)


def test_certificate_random_kicks_no_violations():
    for seed, z in ((1, 0.5 + 0.5j), (2, 1 + 1j), (3, 2 + 0.25j)):
        kicks = random_bounded_kicks(seed=seed, bound=3.0)
        rep = q_growth_certificate(kicks, z, 1000)
        assert rep["violations"] == 0, (seed, z)
        assert rep["telescoped_holds"], (seed, z)


def test_growth_lower_bound_frozen_value():
    # constant rotation pi/4, z = i, n = 1000: bound = 125 pi / 12
    kicks = constant_kicks(Mat2.rotation(math.pi / 4))
    rep = growth_lower_bound(kicks, 1j, 1000)
    assert rep["k"] == 1.0
    assert rep["alpha_sum"] == pytest.approx(250.0 * math.pi, rel=1e-13)
    assert rep["bound"] == pytest.approx(125.0 * math.pi / 12.0, rel=1e-12)
    # conjugation slack is 2 log ||H(i/2)||
    half_norm = (0.5 + math.sqrt(0.25 + 4.0)) / 2.0
    assert rep["conjugation_slack"] == pytest.approx(2 * math.log(half_norm), rel=1e-12)
    assert rep["bound"] <= rep["telescoped_bound"] * 4.0  # same order


def test_growth_lower_bound_zero_for_triangular():
    kicks = constant_kicks(Mat2.shear(1.0))
    rep = growth_lower_bound(kicks, 1j, 50)
    assert rep["bound"] == 0.0
    assert rep["telescoped_bound"] == 0.0


def test_condition_star_frozen_examples():
    assert condition_star_check([0.0] * 20, eps=1e-9, window=3) == 1
    vals = [1.0 / k for k in range(1, 100)]
    assert condition_star_check(vals, eps=0.1, window=3) == 10
    assert condition_star_check([1.0] * 50, eps=0.5, window=3) is None


def test_condition_star_respects_horizon():
    vals = [1.0] * 30 + [0.0] * 10
    assert condition_star_check(vals, eps=0.5, window=4) == 30
    assert condition_star_check(vals, eps=0.5, window=4, horizon=20) is None


def test_majorization_along_random_traces():
    rng = random.Random(9)
    kicks = random_bounded_kicks(seed=21, bound=2.5)
    k = max(1.0, kicks.bound ** 2)
    for _ in range(5):
        z = complex(rng.uniform(0, 4), rng.uniform(0, 2))
        trace = evolve(kicks, z, 400)
        cap = majorization_limit(z, kicks.bound)
        assert max(trace.u()) <= cap + 1e-9
        assert cap == pytest.approx(math.log(1 + abs(z)) + math.log(k), rel=1e-15)


def test_trace_csv_roundtrip(tmp_path):
    trace = evolve(identity_kicks(), 1.0, 32, record_every=8)
    path = tmp_path / "trace.csv"
    trace.write_csv(path)
    rows = path.read_text().strip().splitlines()
    assert rows[0] == "n,lognorm,u_n"
    n, ln, u = rows[1].split(",")
    assert int(n) == 1
    assert float(ln) == pytest.approx(math.log(shear_norm(1.0)))
    assert float(u) == pytest.approx(float(ln) / int(n))
