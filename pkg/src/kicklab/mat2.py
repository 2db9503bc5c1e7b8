"""Plain 2x2 matrices over real or complex scalars.

Everything here is deliberately scalar (no numpy): the evolution and
construction code multiplies one matrix at a time, and a tiny class with
closed-form norm/inverse beats array dispatch overhead by an order of
magnitude at this size.  The vectorized scan engine in ``analysis`` keeps
its own flat arrays instead.
"""

from __future__ import annotations

import cmath
import math


class UnimodularError(ValueError):
    """Raised when an operation requires det = 1 and the input fails it."""


def _sign(x: float) -> float:
    # sign(0) := +1, pinned convention for the Iwasawa branch
    return -1.0 if x < 0 else 1.0


class Mat2:
    """A 2x2 matrix with entries a11, a12, a21, a22 (row major)."""

    __slots__ = ("a11", "a12", "a21", "a22")

    def __init__(self, a11, a12, a21, a22):
        self.a11 = a11
        self.a12 = a12
        self.a21 = a21
        self.a22 = a22

    # ---- constructors -------------------------------------------------

    @classmethod
    def identity(cls) -> "Mat2":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def shear(cls, z) -> "Mat2":
        """Upper-triangular unipotent [[1, z], [0, 1]]."""
        return cls(1.0, z, 0.0, 1.0)

    @classmethod
    def lower(cls, c) -> "Mat2":
        """Lower-triangular unipotent [[1, 0], [c, 1]]."""
        return cls(1.0, 0.0, c, 1.0)

    @classmethod
    def diag(cls, lam) -> "Mat2":
        """Unimodular diagonal [[lam, 0], [0, 1/lam]]."""
        return cls(lam, 0.0, 0.0, 1.0 / lam)

    @classmethod
    def rotation(cls, alpha: float) -> "Mat2":
        """Rotation by alpha: [[cos, -sin], [sin, cos]]."""
        c, s = math.cos(alpha), math.sin(alpha)
        return cls(c, -s, s, c)

    # ---- basic algebra -------------------------------------------------

    def tr(self):
        return self.a11 + self.a22

    def det(self):
        return self.a11 * self.a22 - self.a12 * self.a21

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a11 * other.a11 + self.a12 * other.a21,
            self.a11 * other.a12 + self.a12 * other.a22,
            self.a21 * other.a11 + self.a22 * other.a21,
            self.a21 * other.a12 + self.a22 * other.a22,
        )

    def scale(self, s) -> "Mat2":
        return Mat2(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)

    def __add__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a11 + other.a11,
            self.a12 + other.a12,
            self.a21 + other.a21,
            self.a22 + other.a22,
        )

    def __sub__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a11 - other.a11,
            self.a12 - other.a12,
            self.a21 - other.a21,
            self.a22 - other.a22,
        )

    def adjugate(self) -> "Mat2":
        return Mat2(self.a22, -self.a12, -self.a21, self.a11)

    def inverse(self, tol: float = 1e-9) -> "Mat2":
        """Inverse via the adjugate; requires det = 1 within ``tol``.

        The whole laboratory works with unimodular matrices, so a drifting
        determinant is a bug upstream, not something to mask here.
        """
        d = self.det()
        if abs(d - 1.0) > tol:
            raise UnimodularError(f"det deviates from 1 by {abs(d - 1.0):.3e}")
        return self.adjugate()

    def apply(self, x):
        """Matrix action on a 2-vector given as a (x1, x2) tuple."""
        x1, x2 = x
        return (self.a11 * x1 + self.a12 * x2, self.a21 * x1 + self.a22 * x2)

    # ---- norms ---------------------------------------------------------

    def op_norm(self) -> float:
        """Spectral norm via the closed form for 2x2 singular values.

        sigma_max^2 = (T + sqrt(T^2 - 4 |det|^2)) / 2 with T the squared
        Frobenius norm; the discriminant is clamped at 0 against roundoff.
        """
        t = (
            abs(self.a11) ** 2
            + abs(self.a12) ** 2
            + abs(self.a21) ** 2
            + abs(self.a22) ** 2
        )
        d = abs(self.det())
        disc = t * t - 4.0 * d * d
        if disc < 0.0:
            disc = 0.0
        return math.sqrt(0.5 * (t + math.sqrt(disc)))

    def max_abs(self) -> float:
        return max(abs(self.a11), abs(self.a12), abs(self.a21), abs(self.a22))

    # ---- misc ----------------------------------------------------------

    def approx_eq(self, other: "Mat2", tol: float = 1e-12) -> bool:
        return (self - other).max_abs() <= tol

    def entries(self):
        return (self.a11, self.a12, self.a21, self.a22)

    def is_real(self, tol: float = 0.0) -> bool:
        return all(abs(getattr(v, "imag", 0.0)) <= tol for v in self.entries())

    def __repr__(self) -> str:
        return f"Mat2({self.a11!r}, {self.a12!r}, {self.a21!r}, {self.a22!r})"


class IwasawaFactors:
    """Factorization A = H(s) D(lam) R(alpha) of a real unimodular matrix."""

    __slots__ = ("s", "lam", "alpha")

    def __init__(self, s: float, lam: float, alpha: float):
        self.s = s
        self.lam = lam
        self.alpha = alpha

    def compose(self) -> Mat2:
        return Mat2.shear(self.s) @ Mat2.diag(self.lam) @ Mat2.rotation(self.alpha)

    def __repr__(self) -> str:
        return f"IwasawaFactors(s={self.s!r}, lam={self.lam!r}, alpha={self.alpha!r})"


def iwasawa(m: Mat2, tol: float = 1e-9) -> IwasawaFactors:
    """Decompose a real unimodular 2x2 matrix as shear * diagonal * rotation.

    With bottom row (c, d): the rotation angle satisfies
    sin(alpha) = c * sign(d) / sqrt(c^2 + d^2) with alpha in [-pi/2, pi/2],
    lam = sign(d) / sqrt(c^2 + d^2), and s = (a c + b d) / (c^2 + d^2).
    sign(0) := +1 so d = 0 lands on alpha = +/- pi/2 deterministically.
    """
    if not m.is_real():
        raise ValueError("iwasawa factorization needs a real matrix")
    d = m.det()
    if abs(d - 1.0) > tol:
        raise UnimodularError(f"det deviates from 1 by {abs(d - 1.0):.3e}")
    c, dd = m.a21, m.a22
    r2 = c * c + dd * dd
    if r2 == 0.0:
        raise UnimodularError("bottom row vanishes; matrix cannot be unimodular")
    sg = _sign(dd)
    lam = sg / math.sqrt(r2)
    sin_a = c * sg / math.sqrt(r2)
    # clamp against |sin| = 1 + eps roundoff
    sin_a = max(-1.0, min(1.0, sin_a))
    alpha = math.asin(sin_a)
    s = (m.a11 * c + m.a12 * dd) / r2
    return IwasawaFactors(s, lam, alpha)


def q_form(x) -> float:
    """Q(x) = Im(x1 * conj(x2)) for a 2-vector of complex numbers.

    Q is preserved by real unimodular matrices and gains Im(z) * |x2|^2
    under the complex shear H(z); that one-way monotonicity is what the
    growth certificate in ``evolution`` leans on.
    """
    x1, x2 = x
    return (complex(x1) * complex(x2).conjugate()).imag


def shear_norm(s: float) -> float:
    """Operator norm of the real shear H(s): (|s| + sqrt(s^2 + 4)) / 2."""
    return 0.5 * (abs(s) + math.sqrt(s * s + 4.0))


def complex_shear_norm(z: complex) -> float:
    """Operator norm of H(z) for complex z; same closed form with |z|."""
    a = abs(z)
    return 0.5 * (a + math.sqrt(a * a + 4.0))


def solve_quadratic_unit_det(trace: complex) -> tuple[complex, complex]:
    """Roots of mu^2 - trace*mu + 1, returned as (mu, 1/mu).

    Uses the numerically stable form: compute the larger-magnitude root via
    the sign-coherent sqrt and divide out for the other.
    """
    half = trace / 2.0
    disc = cmath.sqrt(half * half - 1.0)
    # pick the branch that avoids cancellation in half +/- disc
    if (half.real * disc.real + half.imag * disc.imag) >= 0.0:
        big = half + disc
    else:
        big = half - disc
    if big == 0.0:
        return (1j, -1j)
    return (big, 1.0 / big)
