import math
import random

import pytest

from kicklab.construct_seq import (
    SeqConstruction,
    build,
    trace_annihilating_rotation,
    verify_bounded,
)
from kicklab.evolution import evolve
from kicklab.mat2 import Mat2


def direct_chain(con: SeqConstruction, t: float, n: int) -> Mat2:
    p = Mat2.identity()
    for j in range(1, n + 1):
        p = con.kick(j) @ Mat2.shear(t) @ p
    return p


def test_rotation_kills_trace_of_shear():
    alpha = trace_annihilating_rotation(Mat2.shear(1.0))
    assert alpha == pytest.approx(math.atan2(2.0, -1.0), abs=1e-15)
    assert abs((Mat2.rotation(alpha) @ Mat2.shear(1.0)).tr()) <= 1e-12


def test_rotation_angle_swapped_arguments_fails():
    # the same arctangent with its arguments swapped does not kill the trace
    wrong = math.atan2(-1.0, 2.0)
    assert abs((Mat2.rotation(wrong) @ Mat2.shear(1.0)).tr()) > 0.5


def test_rotation_of_rotation_complementary_angle():
    rng = random.Random(3)
    for _ in range(50):
        beta = rng.uniform(-1.5, 1.5)
        alpha = trace_annihilating_rotation(Mat2.rotation(beta))
        assert alpha == pytest.approx(math.pi / 2 - beta, abs=1e-12)


def test_rotation_random_matrices():
    rng = random.Random(7)
    for _ in range(200):
        m = Mat2(rng.uniform(-3, 3), rng.uniform(-3, 3),
                 rng.uniform(-3, 3), rng.uniform(-3, 3))
        alpha = trace_annihilating_rotation(m)
        assert abs((Mat2.rotation(alpha) @ m).tr()) <= 1e-10 * max(1.0, m.max_abs())


def test_build_validates_targets():
    with pytest.raises(ValueError):
        build([1.0, 1.0])
    with pytest.raises(ValueError):
        build([1.0, math.inf])


def test_schedule_is_ruler_indexed():
    con = build([1.0, 2.5, math.pi])
    want_levels = [1, 2, 1, 3, 1, 2, 1, 3, 1]  # min(v2(n) + 1, 3)
    for n, lvl in enumerate(want_levels, start=1):
        assert con.kick(n).approx_eq(con.prefix_rotation(lvl), 1e-15)
    # prefix rotations compose the stage rotations
    acc = Mat2.identity()
    for j in range(1, 4):
        acc = con.stage_rotation(j) @ acc
        assert con.prefix_rotation(j).approx_eq(acc, 1e-12)
    assert con.stage_rotation(7).approx_eq(Mat2.identity(), 0.0)


def test_defining_identity_at_each_target():
    con = build([1.0, 2.5, math.pi])
    for k, t in enumerate(con.targets, start=1):
        b = con.stage_rotation(k) @ con.block(k, t)
        sq = b @ b
        defect = Mat2(sq.a11 + 1.0, sq.a12, sq.a21, sq.a22 + 1.0).op_norm()
        assert defect <= 1e-12
        assert con.defects[k - 1] <= 1e-12


def test_partial_products_telescope_to_blocks():
    con = build([1.0, 2.5, math.pi])
    rng = random.Random(19)
    for _ in range(20):
        t = rng.uniform(-2.0, 4.0)
        for m in range(5):
            lhs = direct_chain(con, t, 2 ** m)
            rhs = con.stage_rotation(m + 1) @ con.block(m + 1, t)
            scale = max(1.0, rhs.max_abs())
            assert lhs.approx_eq(rhs, 1e-10 * scale)


def test_norms_periodic_at_first_target():
    con = build([1.0, 2.5])
    t = con.targets[0]
    norms = []
    p = Mat2.identity()
    for j in range(1, 65):
        p = con.kick(j) @ Mat2.shear(t) @ p
        norms.append(p.op_norm())
    # A_2(t_1) = -Id, so the norm sequence repeats with period 2^2 = 4.
    # Near-orthogonal matrices sit at the cancellation point of the
    # closed-form norm (T^2 close to 4 det^2), so allow ~1e-8 noise.
    for n in range(60):
        assert norms[n + 4] == pytest.approx(norms[n], rel=1e-7, abs=5e-8)


def test_powers_of_two_are_orthogonal_at_last_target():
    con = build([1.0, 2.5, math.pi])
    t = con.targets[-1]
    for m in range(4, 7):
        p = direct_chain(con, t, 2 ** m)
        assert p.op_norm() == pytest.approx(1.0, abs=1e-10)


def test_verify_bounded_at_all_targets():
    con = build([1.0, 2.5, math.pi])
    for k in range(1, 4):
        trace = verify_bounded(con, k, 2 ** 10)
        assert trace.sup_lognorm < 10.0
        assert trace.stabilized_norm(1e-6)


def test_growth_away_from_targets_when_tail_is_hyperbolic():
    con = build([1.0, 2.5, math.pi])
    t_bad = next(t for t in (40.0, 37.0, 29.0)
                 if abs(con.block(4, t).tr()) > 3.0)
    trace = evolve(con.source(), t_bad, 2 ** 10)
    assert trace.sup_second_half > trace.sup_first_half + 1.0
