"""Ruler-sequence kicks and the dyadic product recurrence.

The kick at index k is M(c_{j(k)}) with j(k) the 2-adic valuation of k,
giving the self-similar "abacaba" order M0 M1 M0 M2 M0 M1 M0 M3 ...
Partial products over dyadic blocks collapse to the recurrence
A_{-1}(z) = H(z), A_{m+1}(z) = A_m(z) M(c_{m+1}) A_m(z), and a general
product of K = 2^{j_1} + ... + 2^{j_L} factors (j strictly increasing)
splits into L short factors: the smallest exponent stands leftmost,

    prod_{1<=k<=K} Phi_k H(z)  =  F(j_1) F(j_2) ... F(j_L),
    F(j) = M(c_j) A_{j-1}(z).

That ordering is fixed by a brute-force oracle in the tests (the tempting
reversed order is wrong).
"""

from __future__ import annotations

from .evolution import KickError, KickSource, ScaledProduct
from .mat2 import Mat2, shear_norm


def ruler(k: int) -> int:
    """2-adic valuation of k (largest j with 2^j | k)."""
    if k < 1:
        raise ValueError("ruler sequence is defined for k >= 1")
    return (k & -k).bit_length() - 1


class DyadicKicks:
    """Kick family M(c_{ruler(k)}) from a finite list c_0, c_1, ..."""

    def __init__(self, c):
        c = [float(v) for v in c]
        if not c:
            raise ValueError("need at least one c value")
        if any(v == 0.0 for v in c):
            raise ValueError("all c_j must be nonzero")
        self.c = c

    @property
    def levels(self) -> int:
        return len(self.c)

    @property
    def max_index(self) -> int:
        # indices k < 2^levels have ruler(k) < levels
        return 2 ** self.levels - 1

    def kick(self, k: int) -> Mat2:
        j = ruler(k)
        if j >= self.levels:
            raise KickError(k, f"needs c_{j} but only {self.levels} levels given")
        return Mat2.lower(self.c[j])

    def source(self) -> KickSource:
        bound = max(shear_norm(v) for v in self.c)
        return KickSource(self.kick, bound, self.max_index,
                          f"dyadic({self.levels} levels)")


class DyadicState:
    """Cached A_m(z) values for one kick family at one fixed z.

    Caches are write-once per depth and may be read concurrently.
    """

    def __init__(self, kicks: DyadicKicks, z):
        self.kicks = kicks
        self.z = z
        self._cache = {-1: ScaledProduct(Mat2.shear(z))}

    def a(self, m: int) -> ScaledProduct:
        """A_m(z); A_{-1} = H(z), A_m = A_{m-1} M(c_m) A_{m-1}."""
        if m < -1:
            raise ValueError("depth must be >= -1")
        if m >= self.kicks.levels:
            raise KickError(2 ** m, f"A_{m} needs c_{m}")
        top = max(self._cache)
        while top < m:
            top += 1
            prev = self._cache[top - 1]
            left = prev.copy().rmul(Mat2.lower(self.kicks.c[top]))
            self._cache[top] = left @ prev
        return self._cache[m]

    def factor(self, j: int) -> ScaledProduct:
        """F(j) = M(c_j) A_{j-1}(z), the block for a lone bit 2^j."""
        return self.a(j - 1).copy().lmul(Mat2.lower(self.kicks.c[j]))

    def partial(self, K: int) -> ScaledProduct:
        """prod_{1<=k<=K} Phi_k H(z) via the binary decomposition of K."""
        if K < 1:
            raise ValueError("K must be >= 1")
        out = None
        j = 0
        while K:
            if K & 1:
                f = self.factor(j)
                out = f if out is None else out @ f
            K >>= 1
            j += 1
        return out
