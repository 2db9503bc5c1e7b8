"""Overflow-safe evolution of kicked matrix products.

The chain P_n(z) = K_n H(z) K_{n-1} H(z) ... K_1 H(z) grows exponentially
for generic parameters, so products are carried as a unit-norm matrix plus
an accumulated log of the scale (``ScaledProduct``).  On top of the plain
evolution this module provides the finite-n growth certificate built on the
quadratic form Q(x) = Im(x1 conj(x2)): Q never shrinks under the half-shear
conjugated step, and gains a factor 1 + |alpha| Im(z/2) / (2k (1+|z/2|))
per step, which telescopes into a concrete lower bound for log ||P_n(z)||.
"""

from __future__ import annotations

import csv
import math
import random

from .mat2 import Mat2, complex_shear_norm, iwasawa, q_form


class KickError(RuntimeError):
    """A kick provider failed or produced an invalid matrix at some index."""

    def __init__(self, index: int, message: str):
        super().__init__(f"kick {index}: {message}")
        self.index = index


class KickSource:
    """Indexed provider of unimodular kick matrices, 1-based.

    Parameters
    ----------
    fn : callable k -> Mat2
        Produces the k-th kick, k >= 1.
    bound : float
        Declared bound C with op_norm(kick) <= C for every index.
    length : int or None
        Largest valid index, or None for an unlimited sequence.
    label : str
        Human-readable tag echoed into reports.
    """

    def __init__(self, fn, bound: float, length=None, label: str = "kicks"):
        if bound <= 0:
            raise ValueError("kick bound must be positive")
        self.fn = fn
        self.bound = float(bound)
        self.length = length
        self.label = label

    def __call__(self, k: int) -> Mat2:
        if k < 1:
            raise KickError(k, "indices are 1-based")
        if self.length is not None and k > self.length:
            raise KickError(k, f"beyond declared length {self.length}")
        try:
            m = self.fn(k)
        except KickError:
            raise
        except Exception as exc:  # provider failure aborts with the index
            raise KickError(k, f"provider raised {exc!r}") from exc
        d = m.det()
        if abs(d - 1.0) > 1e-9:
            raise KickError(k, f"not unimodular: |det-1| = {abs(d - 1.0):.3e}")
        nrm = m.op_norm()
        if nrm > self.bound * (1.0 + 1e-9) + 1e-9:
            raise KickError(k, f"norm {nrm!r} exceeds declared bound {self.bound!r}")
        return m


def identity_kicks(length=None) -> KickSource:
    return KickSource(lambda k: Mat2.identity(), 1.0, length, "identity")


def constant_kicks(m: Mat2, label: str = "constant") -> KickSource:
    bound = m.op_norm()
    return KickSource(lambda k: m, bound, None, label)


def random_bounded_kicks(seed: int, bound: float, length=None) -> KickSource:
    """Random kicks with op_norm <= bound guaranteed by construction.

    Samples Iwasawa factors per index: s uniform in [-s_max, s_max] with
    s_max = sqrt(C) - 1/sqrt(C), log(lam) uniform in [-log(C)/2, log(C)/2],
    alpha uniform in [-pi/2, pi/2].  Then ||H(s)D(lam)R(alpha)|| <=
    ||H(s)||*max(lam,1/lam) <= sqrt(C)*sqrt(C) = C.  Each index gets its own
    Random((seed, k)) stream, so lookups are order-independent and safe to
    call from any worker.
    """
    if bound <= 1.0:
        raise ValueError("random kicks need bound > 1")
    s_max = math.sqrt(bound) - 1.0 / math.sqrt(bound)
    l_max = 0.5 * math.log(bound)

    def fn(k: int) -> Mat2:
        # one independent, order-free stream per index
        rng = random.Random((seed << 61) + k)
        s = rng.uniform(-s_max, s_max)
        lam = math.exp(rng.uniform(-l_max, l_max))
        alpha = rng.uniform(-math.pi / 2, math.pi / 2)
        return Mat2.shear(s) @ Mat2.diag(lam) @ Mat2.rotation(alpha)

    return KickSource(fn, bound, length, f"random(seed={seed},C={bound!r})")


class ScaledProduct:
    """A matrix carried as exp(lognorm) * m with op_norm(m) = 1.

    The log of the scale accumulates with Neumaier compensation so that
    million-step chains do not drift.  All mutating operations renormalize.
    """

    __slots__ = ("m", "_log", "_comp")

    def __init__(self, m: Mat2, log: float = 0.0, comp: float = 0.0):
        self.m = m
        self._log = log
        self._comp = comp
        self._renorm()

    @classmethod
    def identity(cls) -> "ScaledProduct":
        return cls(Mat2.identity())

    def _add_log(self, v: float) -> None:
        t = self._log + v
        if abs(self._log) >= abs(v):
            self._comp += (self._log - t) + v
        else:
            self._comp += (v - t) + self._log
        self._log = t

    def _renorm(self) -> None:
        nrm = self.m.op_norm()
        if nrm == 0.0 or math.isnan(nrm) or math.isinf(nrm):
            raise ArithmeticError(f"degenerate product norm {nrm!r}")
        if nrm != 1.0:
            self._add_log(math.log(nrm))
            self.m = self.m.scale(1.0 / nrm)

    @property
    def lognorm(self) -> float:
        return self._log + self._comp

    def lmul(self, a: Mat2) -> "ScaledProduct":
        self.m = a @ self.m
        self._renorm()
        return self

    def rmul(self, a: Mat2) -> "ScaledProduct":
        self.m = self.m @ a
        self._renorm()
        return self

    def __matmul__(self, other: "ScaledProduct") -> "ScaledProduct":
        out = ScaledProduct(self.m @ other.m)
        out._add_log(self.lognorm)
        out._add_log(other.lognorm)
        return out

    def to_mat(self) -> Mat2:
        """Multiply the scale back in; only valid while exp(lognorm) fits."""
        if self.lognorm > 700.0:
            raise OverflowError("product too large to materialize")
        return self.m.scale(math.exp(self.lognorm))

    def det_residual(self):
        """|det(exp(lognorm) m) - 1|, or None when cancellation noise in
        det(m) ~ exp(-2 lognorm) exceeds the signal (lognorm > ~15)."""
        ln = self.lognorm
        if 2.0 * ln > 34.0:
            return None
        d = complex(self.m.det())
        if d == 0:
            return None
        w = 2.0 * ln + math.log(abs(d))
        return abs(math.exp(w) * (d / abs(d)) - 1.0)

    def copy(self) -> "ScaledProduct":
        return ScaledProduct(self.m, self._log, self._comp)

    def __repr__(self) -> str:
        return f"ScaledProduct(lognorm={self.lognorm!r}, m={self.m!r})"


class GrowthTrace:
    """Sampled log-norms of an evolved chain plus running suprema."""

    def __init__(self, z, n_max: int, ns, lognorms, sup_lognorm, sup_n,
                 sup_first_half, sup_second_half, final: ScaledProduct,
                 max_kick_norm: float, inverse_lognorm=None):
        self.z = z
        self.n_max = n_max
        self.ns = ns
        self.lognorms = lognorms
        self.sup_lognorm = sup_lognorm
        self.sup_n = sup_n
        self.sup_first_half = sup_first_half
        self.sup_second_half = sup_second_half
        self.final = final
        self.max_kick_norm = max_kick_norm
        self.inverse_lognorm = inverse_lognorm

    def u(self):
        """Normalized growth exponents u_n = lognorm_n / n at the samples."""
        return [ln / n for n, ln in zip(self.ns, self.lognorms)]

    def stabilized(self, slack: float = 1e-6) -> bool:
        """True when the running max did not move between the two halves."""
        return self.sup_second_half <= self.sup_first_half + slack

    def stabilized_norm(self, slack: float = 1e-6) -> bool:
        """Half-comparison on the norm scale: exp(sup2) <= exp(sup1) + slack.

        Only certifiable while both suprema are small enough to exponentiate.
        """
        if max(self.sup_first_half, self.sup_second_half) > 700.0:
            return False
        return math.exp(self.sup_second_half) <= math.exp(self.sup_first_half) + slack

    def slope(self):
        """Least-squares slope of lognorm vs n over the last half of samples."""
        half = [i for i, n in enumerate(self.ns) if n > self.n_max // 2]
        if len(half) < 2:
            return 0.0
        xs = [float(self.ns[i]) for i in half]
        ys = [self.lognorms[i] for i in half]
        mx = math.fsum(xs) / len(xs)
        my = math.fsum(ys) / len(ys)
        sxx = math.fsum((x - mx) ** 2 for x in xs)
        if sxx == 0.0:
            return 0.0
        sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
        return sxy / sxx

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "lognorm", "u_n"])
            for n, ln in zip(self.ns, self.lognorms):
                w.writerow([n, repr(ln), repr(ln / n)])


def evolve(kicks: KickSource, z, n_max: int, record_every=None,
           track_inverse: bool = False) -> GrowthTrace:
    """Run P_n = K_n H(z) P_{n-1} for n = 1..n_max with per-step rescaling.

    ``record_every`` defaults to about 512 samples across the horizon.
    ``track_inverse`` additionally accumulates P_n^{-1} (right-multiplied
    chain of exact adjugates) so callers can compare log||P|| with
    log||P^{-1}|| as a unimodularity diagnostic at any scale.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if record_every is None:
        record_every = max(1, n_max // 512)
    h = Mat2.shear(z)
    h_inv = Mat2.shear(-z)
    prod = ScaledProduct.identity()
    inv_prod = ScaledProduct.identity() if track_inverse else None
    ns, lognorms = [], []
    sup_lognorm, sup_n = 0.0, 0
    sup_first, sup_second = 0.0, 0.0
    half = n_max // 2
    max_kick_norm = 0.0
    for n in range(1, n_max + 1):
        phi = kicks(n)
        kn = phi.op_norm()
        if kn > max_kick_norm:
            max_kick_norm = kn
        prod.lmul(h).lmul(phi)
        if inv_prod is not None:
            inv_prod.rmul(h_inv).rmul(phi.adjugate())
        ln = prod.lognorm
        if ln < -1e-9:
            raise ArithmeticError(f"lognorm {ln!r} < 0 for a unimodular product")
        if ln > sup_lognorm:
            sup_lognorm, sup_n = ln, n
        if n <= half:
            if ln > sup_first:
                sup_first = ln
        elif ln > sup_second:
            sup_second = ln
        if n % record_every == 0 or n == 1 or n == n_max:
            ns.append(n)
            lognorms.append(ln)
    return GrowthTrace(
        z, n_max, ns, lognorms, sup_lognorm, sup_n, sup_first, sup_second,
        prod, max_kick_norm,
        inverse_lognorm=(inv_prod.lognorm if inv_prod is not None else None),
    )


def _step_matrix(phi: Mat2, half_shear: Mat2) -> Mat2:
    return half_shear @ phi @ half_shear


def growth_factor(alpha: float, z, k: float) -> float:
    """Per-step Q-growth factor 1 + |alpha| Im(w) / (2k (1+|w|)), w = z/2."""
    w = complex(z) / 2.0
    return 1.0 + abs(alpha) * w.imag / (2.0 * k * (1.0 + abs(w)))


def q_growth_certificate(kicks: KickSource, z, n_max: int,
                         tol: float = 1e-12) -> dict:
    """Per-step verification of the Q-form growth inequality.

    For the probe x = (i/sqrt2, 1/sqrt2) and the conjugated chain
    B_n = prod H(z/2) K_j H(z/2), checks at every step
    Q(step y) >= Q(y) * (1 + |alpha_j| Im(z/2) / (2k (1+|z/2|))), k = max(1, C^2),
    and that the telescoped product bounds log ||B_n|| from below at every n.
    """
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("certificate needs Im z > 0")
    k = max(1.0, kicks.bound ** 2)
    half = Mat2(1.0, z / 2.0, 0.0, 1.0)
    y = (1j / math.sqrt(2.0), 1.0 / math.sqrt(2.0))
    log_q_scale = 0.0  # log of the factor taken out of y by renormalization
    chain = ScaledProduct.identity()
    telescoped = 0.0
    violations = 0
    first_violation = None
    min_step_margin = math.inf
    min_norm_margin = math.inf
    for n in range(1, n_max + 1):
        phi = kicks(n)
        alpha = iwasawa(phi).alpha
        factor = growth_factor(alpha, z, k)
        step = _step_matrix(phi, half)
        y_new = step.apply(y)
        q_old = q_form(y)
        q_new = q_form(y_new)
        margin = q_new - q_old * factor
        rel_margin = margin / q_old if q_old > 0 else margin
        if rel_margin < min_step_margin:
            min_step_margin = rel_margin
        if margin < -tol * max(q_old, 1.0):
            violations += 1
            if first_violation is None:
                first_violation = n
        telescoped += math.log(factor)
        chain.lmul(step)
        norm_margin = chain.lognorm - 0.5 * telescoped
        if norm_margin < min_norm_margin:
            min_norm_margin = norm_margin
        # renormalize the probe; Q scales quadratically with the vector
        scale = max(abs(y_new[0]), abs(y_new[1]))
        if scale > 1e6:
            y = (y_new[0] / scale, y_new[1] / scale)
            log_q_scale += 2.0 * math.log(scale)
        else:
            y = y_new
    return {
        "n_max": n_max,
        "z": z,
        "k": k,
        "violations": violations,
        "first_violation": first_violation,
        "min_step_margin": min_step_margin,
        "telescoped_half_sum": 0.5 * telescoped,
        "log_b_norm": chain.lognorm,
        "min_norm_margin": min_norm_margin,
        "telescoped_holds": min_norm_margin >= -1e-9 * (1.0 + n_max),
        "log_q": log_q_scale + math.log(q_form(y)),
    }


def growth_lower_bound(kicks: KickSource, z, n: int) -> dict:
    """Certified finite-n lower-bound data for log ||P_n(z)||.

    Returns the linearized bound (Im(z/2) / (8k (1+|z/2|))) * sum |alpha_j|,
    the sharper telescoped form (1/2) sum log(1 + |alpha_j| Im(z/2) /
    (2k (1+|z/2|))), and the conjugation slack 2 log ||H(z/2)|| that
    separates the B_n chain from P_n itself.
    """
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("growth bound needs Im z > 0")
    k = max(1.0, kicks.bound ** 2)
    w = z / 2.0
    alpha_sum = 0.0
    telescoped = 0.0
    for j in range(1, n + 1):
        alpha = iwasawa(kicks(j)).alpha
        alpha_sum += abs(alpha)
        telescoped += math.log(growth_factor(alpha, z, k))
    coeff = w.imag / (8.0 * k * (1.0 + abs(w)))
    return {
        "n": n,
        "k": k,
        "alpha_sum": alpha_sum,
        "bound": coeff * alpha_sum,
        "telescoped_bound": 0.5 * telescoped,
        "conjugation_slack": 2.0 * math.log(complex_shear_norm(w)),
    }


def condition_star_check(values, eps: float, window: int, horizon=None):
    """First shift i >= 1 with max(|a_{i+1}|..|a_{i+window}|) < eps, or None.

    ``values`` is the sequence a_1, a_2, ... (0-indexed storage); the shift
    convention follows the window definition max_{1<=j<=N} |a_{i+j}|.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    n = len(values) if horizon is None else min(horizon, len(values))
    if n < window:
        return None
    for i in range(1, n - window + 1):
        if max(abs(v) for v in values[i:i + window]) < eps:
            return i
    return None


def majorization_limit(z, kick_bound: float) -> float:
    """The subharmonic majorant log(1+|z|) + log k, k = max(1, C^2)."""
    k = max(1.0, kick_bound ** 2)
    return math.log(1.0 + abs(complex(z))) + math.log(k)
