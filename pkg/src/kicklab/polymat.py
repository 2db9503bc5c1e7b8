"""Exact polynomials, 2x2 polynomial matrices, and root isolation.

Coefficients live in ``fractions.Fraction`` so structural facts (det = 1 as
a polynomial identity, the kicked-trace identity, entry degrees) are checked
exactly, with no tolerance tuning.  Pointwise numeric work evaluates through
cached float coefficients or, for anything high-degree at large t, through
the matrix recurrence elsewhere — expanded polynomials are ill-conditioned
there and are used for structure only.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .intervals import IntervalSet
from .mat2 import Mat2


class Poly:
    """Dense polynomial with exact rational coefficients, ascending order."""

    __slots__ = ("coeffs", "_fcoeffs")

    def __init__(self, coeffs):
        cs = [c if isinstance(c, Fraction) else Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)
        self._fcoeffs = None

    @classmethod
    def const(cls, v) -> "Poly":
        return cls([v])

    @classmethod
    def x(cls) -> "Poly":
        return cls([0, 1])

    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def lead(self) -> Fraction:
        if not self.coeffs:
            return Fraction(0)
        return self.coeffs[-1]

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Poly(out)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + other.scale(-1)

    def __mul__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly(())
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            for j, cb in enumerate(b):
                out[i + j] += ca * cb
        return Poly(out)

    def scale(self, v) -> "Poly":
        v = v if isinstance(v, Fraction) else Fraction(v)
        return Poly([c * v for c in self.coeffs])

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __call__(self, t):
        """Horner evaluation: exact for Fraction/int t, float otherwise."""
        if isinstance(t, (Fraction, int)):
            acc = Fraction(0)
            for c in reversed(self.coeffs):
                acc = acc * t + c
            return acc
        if self._fcoeffs is None:
            self._fcoeffs = tuple(float(c) for c in self.coeffs)
        acc = 0.0
        for c in reversed(self._fcoeffs):
            acc = acc * t + c
        return acc

    def __repr__(self) -> str:
        return f"Poly({list(self.coeffs)!r})"


class PolyMat2:
    """2x2 matrix of exact polynomials."""

    __slots__ = ("a11", "a12", "a21", "a22")

    def __init__(self, a11: Poly, a12: Poly, a21: Poly, a22: Poly):
        self.a11, self.a12, self.a21, self.a22 = a11, a12, a21, a22

    @classmethod
    def shear_t(cls) -> "PolyMat2":
        """H(t) = ((1, t), (0, 1)) as a polynomial matrix."""
        one, zero = Poly.const(1), Poly(())
        return cls(one, Poly.x(), zero, one)

    @classmethod
    def lower_const(cls, c) -> "PolyMat2":
        one, zero = Poly.const(1), Poly(())
        return cls(one, zero, Poly.const(c), one)

    def __matmul__(self, other: "PolyMat2") -> "PolyMat2":
        return PolyMat2(
            self.a11 * other.a11 + self.a12 * other.a21,
            self.a11 * other.a12 + self.a12 * other.a22,
            self.a21 * other.a11 + self.a22 * other.a21,
            self.a21 * other.a12 + self.a22 * other.a22,
        )

    def trace(self) -> Poly:
        return self.a11 + self.a22

    def det(self) -> Poly:
        return self.a11 * self.a22 - self.a12 * self.a21

    def degrees(self):
        return (self.a11.degree(), self.a12.degree(),
                self.a21.degree(), self.a22.degree())

    def eval(self, t) -> Mat2:
        return Mat2(self.a11(t), self.a12(t), self.a21(t), self.a22(t))

    def entries(self):
        return (self.a11, self.a12, self.a21, self.a22)


def kick_step(a: PolyMat2, c) -> PolyMat2:
    """A(t) M(c) A(t), with the trace identity asserted exactly.

    tr(A M(c) A) = tr(A) * (tr(A) + c a12) - 2 holds as polynomials for any
    unimodular A; a failure here means the inputs lost unimodularity.
    """
    c = c if isinstance(c, Fraction) else Fraction(c)
    out = (a @ PolyMat2.lower_const(c)) @ a
    tr_a = a.trace()
    want = tr_a * (tr_a + a.a12.scale(c)) - Poly.const(2)
    if out.trace() != want:
        raise ArithmeticError("kicked-trace identity failed; input not unimodular")
    return out


def upper_right_dominating(p: PolyMat2) -> bool:
    """True when deg p12 strictly exceeds the other three entry degrees."""
    d11, d12, d21, d22 = p.degrees()
    return d12 > max(d11, d21, d22)


def bisect_root(f, lo: float, hi: float, xtol: float = 1e-10) -> float:
    """Standard bisection for a sign change of f on [lo, hi]."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError("no sign change on the bracket")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def isolate_roots(f, lo: float, hi: float, samples: int = 512,
                  xtol: float = 1e-10):
    """Sign-change roots of a callable on [lo, hi], refined by bisection.

    Sampled isolation: roots of even multiplicity (no sign change at the
    grid scale) are not reported.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    xs = [lo + (hi - lo) * i / samples for i in range(samples + 1)]
    vals = [f(x) for x in xs]
    roots = []
    for i in range(samples):
        va, vb = vals[i], vals[i + 1]
        if va == 0.0:
            roots.append(xs[i])
        elif (va > 0) != (vb > 0) and vb != 0.0:
            roots.append(bisect_root(f, xs[i], xs[i + 1], xtol))
    if vals[-1] == 0.0:
        roots.append(xs[-1])
    # deduplicate refined roots that collapsed to the same point
    out = []
    for r in sorted(roots):
        if not out or r - out[-1] > 10 * xtol:
            out.append(r)
    return out


def strip_region(f, lo: float, hi: float, low_val: float = -2.0,
                 high_val: float = 2.0, samples: int = 2048,
                 xtol: float = 1e-10) -> IntervalSet:
    """Interval set {t in [lo, hi]: low_val < f(t) < high_val}.

    Cut points are the refined roots of f - low_val and f - high_val plus
    the domain endpoints; each cell is classified at its midpoint.
    """
    cuts = [lo, hi]
    cuts += isolate_roots(lambda t: f(t) - high_val, lo, hi, samples, xtol)
    cuts += isolate_roots(lambda t: f(t) - low_val, lo, hi, samples, xtol)
    cuts = sorted(set(cuts))
    kept = []
    for a, b in zip(cuts, cuts[1:]):
        mid = 0.5 * (a + b)
        if low_val < f(mid) < high_val:
            kept.append((a, b))
    return IntervalSet(kept)
