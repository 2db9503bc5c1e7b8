"""Embedding a finite target list into a single bounded-set construction.

Given distinct shear parameters t_1, ..., t_K, build rotation kicks whose
ruler-indexed schedule makes every t_k land in the bounded exceptional set:
stage k picks the rotation R_k that kills the trace of the running block
A_k(t_k), so A_{k+1}(t_k) = (R_k A_k(t_k))^2 = -Id and every later block
evaluates to a rotation there.  The kick at step n is the composed prefix
rotation of level min(v2(n) + 1, K), where v2 is the 2-adic valuation; this
makes the partial products telescope into the block tower:

    P_{2^m}(t) = R_{m+1} A_{m+1}(t),   A_1 = H(t), A_{j+1} = (R_j A_j)^2

with R_j = Id beyond stage K.
"""

from __future__ import annotations

import math

from .dyadic import ruler
from .evolution import GrowthTrace, KickSource, evolve
from .mat2 import Mat2


def trace_annihilating_rotation(m: Mat2) -> float:
    """Angle a with tr(R(a) m) = 0, from cos(a)(m11+m22) + sin(a)(m12-m21).

    Verifies the residual trace before returning.
    """
    if not m.is_real():
        raise ValueError("rotation defined for real matrices only")
    alpha = math.atan2(m.a11 + m.a22, m.a21 - m.a12)
    residual = (Mat2.rotation(alpha) @ m).tr()
    if abs(residual) > 1e-10 * max(1.0, m.max_abs()):
        raise ArithmeticError(f"trace annihilation failed: residual {residual!r}")
    return alpha


class SeqConstruction:
    """Rotation schedule embedding the given targets into the bounded set."""

    __slots__ = ("targets", "alphas", "betas", "defects")

    def __init__(self, targets, alphas, defects):
        self.targets = tuple(targets)
        self.alphas = tuple(alphas)
        betas = [0.0]
        for a in self.alphas:
            betas.append(betas[-1] + a)
        # betas[j] = alpha_1 + ... + alpha_j, so R(betas[j]) = R_j ... R_1
        self.betas = tuple(betas)
        self.defects = tuple(defects)

    @property
    def depth(self) -> int:
        return len(self.targets)

    def stage_rotation(self, j: int) -> Mat2:
        """R_j, the single rotation chosen at stage j (Id beyond depth)."""
        if j < 1:
            raise ValueError("stages are 1-based")
        if j > self.depth:
            return Mat2.identity()
        return Mat2.rotation(self.alphas[j - 1])

    def prefix_rotation(self, j: int) -> Mat2:
        """R_j R_{j-1} ... R_1 = R(alpha_1 + ... + alpha_j), capped at depth."""
        return Mat2.rotation(self.betas[min(j, self.depth)])

    def block(self, n: int, t: float) -> Mat2:
        """A_n(t): A_1 = H(t), A_{j+1} = (R_j A_j)^2."""
        if n < 1:
            raise ValueError("blocks are 1-based")
        a = Mat2.shear(t)
        for j in range(1, n):
            b = self.stage_rotation(j) @ a
            a = b @ b
        return a

    def kick(self, n: int) -> Mat2:
        return self.prefix_rotation(ruler(n) + 1)

    def source(self, length=None) -> KickSource:
        return KickSource(self.kick, bound=1.0, length=length,
                          label=f"seq targets={list(self.targets)!r}")


def build(targets) -> SeqConstruction:
    """Choose the stage rotations for the targets, in order.

    Stage k annihilates the trace of A_k(t_k) given the rotations already
    fixed by stages 1..k-1, then records the defect ||(R_k A_k(t_k))^2 + Id||.
    """
    targets = [float(t) for t in targets]
    if len(set(targets)) != len(targets):
        raise ValueError("targets must be distinct")
    for t in targets:
        if not math.isfinite(t):
            raise ValueError("targets must be finite")
    alphas: list[float] = []
    defects: list[float] = []
    for k, t in enumerate(targets, start=1):
        partial = SeqConstruction(targets[:k - 1], alphas, defects[:k - 1])
        a_k = partial.block(k, t)
        alpha = trace_annihilating_rotation(a_k)
        alphas.append(alpha)
        b = Mat2.rotation(alpha) @ a_k
        sq = b @ b
        defect = Mat2(sq.a11 + 1.0, sq.a12, sq.a21, sq.a22 + 1.0).op_norm()
        defects.append(defect)
    return SeqConstruction(targets, alphas, defects)


def verify_bounded(con: SeqConstruction, target_index: int, n_max: int,
                   slack: float = 1e-6) -> GrowthTrace:
    """Evolve the full chain at one target and check sup-norm stabilization.

    Raises ArithmeticError when the running sup over (n_max/2, n_max] exceeds
    the sup over [1, n_max/2] by more than ``slack`` on the norm scale.
    """
    t = con.targets[target_index - 1]
    trace = evolve(con.source(), t, n_max)
    if not trace.stabilized_norm(slack):
        raise ArithmeticError(
            f"sup norm still moving at target {t!r}: "
            f"first-half {trace.sup_first_half!r}, "
            f"second-half {trace.sup_second_half!r}")
    return trace
