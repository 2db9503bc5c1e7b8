"""Oracle and property tests for the 2x2 matrix layer."""

import cmath
import math
import random

import pytest

from kicklab.mat2 import (
    IwasawaFactors,
    Mat2,
    UnimodularError,
    complex_shear_norm,
    iwasawa,
    q_form,
    shear_norm,
    solve_quadratic_unit_det,
)

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


def random_unimodular(rng, scale=1.0):
    """Random real unimodular matrix via shear * diag * rotation."""
    s = rng.uniform(-scale, scale)
    lam = rng.uniform(0.2, scale + 1.0) * rng.choice([-1.0, 1.0])
    alpha = rng.uniform(-math.pi, math.pi)
    return Mat2.shear(s) @ Mat2.diag(lam) @ Mat2.rotation(alpha)


def test_constructors_and_det():
    assert Mat2.identity().entries() == (1.0, 0.0, 0.0, 1.0)
    assert Mat2.shear(3.0).entries() == (1.0, 3.0, 0.0, 1.0)
    assert Mat2.lower(-2.0).entries() == (1.0, 0.0, -2.0, 1.0)
    d = Mat2.diag(4.0)
    assert d.entries() == (4.0, 0.0, 0.0, 0.25)
    for m in (Mat2.shear(7.0), Mat2.lower(0.125), Mat2.diag(3.0), Mat2.rotation(1.1)):
        assert abs(m.det() - 1.0) < 1e-15


def test_matmul_oracle():
    # hand-multiplied: M(c) H(t) = [[1, t], [c, ct + 1]]
    c, t = -2.0, 3.0
    p = Mat2.lower(c) @ Mat2.shear(t)
    assert p.entries() == (1.0, 3.0, -2.0, -5.0)


def test_op_norm_golden_ratio():
    # ||H(1)|| is the golden ratio: singular values phi and 1/phi
    assert Mat2.shear(1.0).op_norm() == pytest.approx(GOLDEN, abs=1e-14)


def test_op_norm_diagonal_and_rotation():
    assert Mat2.diag(5.0).op_norm() == pytest.approx(5.0, abs=1e-13)
    assert Mat2.rotation(0.7).op_norm() == pytest.approx(1.0, abs=1e-13)


def test_op_norm_matches_gram_eigenvalue():
    rng = random.Random(101)
    for _ in range(200):
        m = random_unimodular(rng, scale=5.0)
        # largest eigenvalue of A^T A by direct quadratic formula
        g11 = m.a11 * m.a11 + m.a21 * m.a21
        g12 = m.a11 * m.a12 + m.a21 * m.a22
        g22 = m.a12 * m.a12 + m.a22 * m.a22
        half_tr = 0.5 * (g11 + g22)
        det_g = g11 * g22 - g12 * g12
        lam_max = half_tr + math.sqrt(max(half_tr * half_tr - det_g, 0.0))
        assert m.op_norm() == pytest.approx(math.sqrt(lam_max), rel=1e-12)


def test_norm_of_inverse_equals_norm():
    # for det = 1 the singular values are sigma, 1/sigma; inversion swaps them
    rng = random.Random(7)
    for _ in range(100):
        m = random_unimodular(rng, scale=8.0)
        assert m.inverse().op_norm() == pytest.approx(m.op_norm(), rel=1e-10)


def test_shear_norm_closed_form():
    for s in (0.0, 1.0, -3.5, 12.0):
        assert shear_norm(s) == pytest.approx(Mat2.shear(s).op_norm(), rel=1e-13)
    z = 0.3 + 0.4j
    m = Mat2(1.0, z, 0.0, 1.0)
    assert complex_shear_norm(z) == pytest.approx(m.op_norm(), rel=1e-13)


def test_inverse_requires_unimodular():
    with pytest.raises(UnimodularError):
        Mat2(2.0, 0.0, 0.0, 2.0).inverse()
    m = Mat2.shear(4.0)
    assert (m @ m.inverse()).approx_eq(Mat2.identity(), 1e-14)


def test_iwasawa_frozen_values():
    # H(2) is already a shear: s=2, lam=1, alpha=0
    f = iwasawa(Mat2.shear(2.0))
    assert (f.s, f.lam, f.alpha) == pytest.approx((2.0, 1.0, 0.0), abs=1e-14)
    # a pure rotation: s=0, lam=1, alpha=0.3
    f = iwasawa(Mat2.rotation(0.3))
    assert (f.s, f.lam, f.alpha) == pytest.approx((0.0, 1.0, 0.3), abs=1e-14)


def test_iwasawa_reconstruction_random():
    rng = random.Random(2024)
    for _ in range(300):
        m = random_unimodular(rng, scale=10.0)
        f = iwasawa(m)
        assert abs(f.alpha) <= math.pi / 2 + 1e-12
        assert (f.compose() - m).max_abs() < 1e-10 * max(1.0, m.max_abs())


def test_iwasawa_d_zero_branch():
    # bottom row (c, 0): alpha = +/- pi/2 with the sign of c, lam = 1/|c|
    m = Mat2(0.0, -0.5, 2.0, 0.0)
    assert abs(m.det() - 1.0) < 1e-15
    f = iwasawa(m)
    assert f.alpha == pytest.approx(math.pi / 2, abs=1e-14)
    assert f.compose().approx_eq(m, 1e-13)
    m2 = Mat2(0.0, 0.5, -2.0, 0.0)
    f2 = iwasawa(m2)
    assert f2.alpha == pytest.approx(-math.pi / 2, abs=1e-14)
    assert f2.compose().approx_eq(m2, 1e-13)


def test_iwasawa_rejects_bad_input():
    with pytest.raises(UnimodularError):
        iwasawa(Mat2(2.0, 0.0, 0.0, 2.0))
    with pytest.raises(ValueError):
        iwasawa(Mat2(1.0, 1j, 0.0, 1.0))


def test_q_form_invariance_under_real_unimodular():
    rng = random.Random(55)
    x = (0.7 + 0.2j, -0.3 + 0.9j)
    q0 = q_form(x)
    for _ in range(100):
        m = random_unimodular(rng, scale=4.0)
        assert q_form(m.apply(x)) == pytest.approx(q0, rel=1e-10, abs=1e-12)


def test_q_form_shear_increment():
    # Q(H(z) x) = Q(x) + Im(z) |x2|^2
    rng = random.Random(56)
    for _ in range(50):
        x = (complex(rng.gauss(0, 1), rng.gauss(0, 1)),
             complex(rng.gauss(0, 1), rng.gauss(0, 1)))
        z = complex(rng.gauss(0, 1), rng.uniform(0.1, 2.0))
        h = Mat2(1.0, z, 0.0, 1.0)
        got = q_form(h.apply(x))
        want = q_form(x) + z.imag * abs(x[1]) ** 2
        assert got == pytest.approx(want, rel=1e-12, abs=1e-13)


def test_q_form_probe_value():
    # the probe used by the growth certificate has 2Q = 1
    x = (1j / math.sqrt(2.0), 1.0 / math.sqrt(2.0))
    assert 2.0 * q_form(x) == pytest.approx(1.0, abs=1e-15)


def test_solve_quadratic_unit_det():
    rng = random.Random(77)
    for _ in range(100):
        mu = cmath.exp(complex(rng.uniform(-1, 1), rng.uniform(-math.pi, math.pi)))
        tr = mu + 1.0 / mu
        r1, r2 = solve_quadratic_unit_det(tr)
        assert r1 * r2 == pytest.approx(1.0 + 0.0j, abs=1e-12)
        assert r1 + r2 == pytest.approx(tr, abs=1e-12)
        # the returned pair matches {mu, 1/mu}
        assert min(abs(r1 - mu), abs(r1 - 1.0 / mu)) < 1e-10 * max(1.0, abs(mu))


def test_iwasawa_factors_repr_roundtrip():
    f = IwasawaFactors(1.5, -0.25, 0.1)
    assert "1.5" in repr(f) and "-0.25" in repr(f)
