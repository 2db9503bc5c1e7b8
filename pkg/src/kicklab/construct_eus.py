"""Inductive construction of an essentially unbounded bounded-product set.

Starting from A_0(t) = H(t) M(c_0) H(t) with c_0 < 0, each level multiplies
A_n(t) = A_{n-1}(t) M(c_n) A_{n-1}(t) with |c_n| chosen small enough that

  * the new trace stays strictly inside (-2, 2) on the retained set
    (excising only o(eps_n)-measure neighborhoods of the zeros of the old
    trace, where tr A_n = tr A_{n-1} (tr A_{n-1} + c_n a12) - 2 pins -2), and
  * the unimodular diagonalizers move by less than eps_n per level,

while a new elliptic trace window I_n is located beyond t = n: at level 1
via the far sign change that the c*b12 term forces past the good region,
and at deeper levels nested inside I_{n-1}, where squaring doubles the
eigenvalue angle and tr A_n crosses zero wherever tr A_{n-1} passes +-sqrt(2).

Numerics: all trace decisions are made in exact rational arithmetic via the
matrix recurrence at dyadic sample points (the kick constants are kept as
Fractions).  On the far windows the matrices have norms ~1e8 while their
traces are O(1), so floating-point evaluation of traces is cancellation
noise there; exact evaluation side-steps the conditioning entirely.
Diagonalizers are synthesized from the eigenvector formula per sample (the
entry formula is numerically stable even where the conjugation itself is
ill-conditioned) and compared across levels after sign coherence.
"""

from __future__ import annotations

import cmath
import json
import math
from fractions import Fraction

from .dyadic import DyadicKicks, DyadicState
from .evolution import KickSource, evolve
from .intervals import IntervalSet
from .mat2 import Mat2, solve_quadratic_unit_det
from .polymat import (PolyMat2, isolate_roots, kick_step, strip_region,
                      upper_right_dominating)

TRACE_EDGE = 2.0
WINDOW_MARGIN_FRAC = 0.05  # kept windows satisfy |tr| <= 2*(1 - frac)


# ---------------------------------------------------------------------------
# exact pointwise evaluation

def exact_chain(cs, t: Fraction):
    """A_0(t)..A_n(t) as exact Fraction entry tuples for dyadic-rational t.

    Entry bit-length doubles per level, so keep the level count moderate
    (<= 8 or so); all construction-time decisions live below that.
    """
    t = t if isinstance(t, Fraction) else Fraction(t)
    a = (Fraction(1), t, Fraction(0), Fraction(1))  # H(t)
    out = []
    for c in cs:
        c = c if isinstance(c, Fraction) else Fraction(c)
        # A <- A M(c) A, expanded: (A M) A with M = ((1,0),(c,1))
        b11, b12 = a[0] + a[1] * c, a[1]
        b21, b22 = a[2] + a[3] * c, a[3]
        a = (b11 * a[0] + b12 * a[2], b11 * a[1] + b12 * a[3],
             b21 * a[0] + b22 * a[2], b21 * a[1] + b22 * a[3])
        out.append(a)
    return out


def exact_traces(cs, t: Fraction):
    return [m[0] + m[3] for m in exact_chain(cs, t)]


def chain_trace_fn(cs, level: int):
    """Float-valued, exactly-evaluated tr A_level(t) as a callable of t."""
    cs = list(cs[:level + 1])

    def f(t: float) -> float:
        m = exact_chain(cs, Fraction(t))[-1]
        return float(m[0] + m[3])

    return f


# ---------------------------------------------------------------------------
# sampled diagonalizers

class Sample:
    """One retained grid point of the induction, updated level by level."""

    __slots__ = ("t", "frac", "born", "a", "tr", "a_float", "s", "mu")

    def __init__(self, t, frac, born, a, tr, a_float, s, mu):
        self.t = t
        self.frac = frac
        self.born = born
        self.a = a            # exact entries of the current-level matrix
        self.tr = tr          # exact current-level trace
        self.a_float = a_float
        self.s = s            # unimodular diagonalizer, complex Mat2
        self.mu = mu          # eigenvalue branch continued across levels


def fresh_diagonalizer(a_float: Mat2, mu: complex) -> Mat2:
    """Unimodular S with A S = S diag(mu, conj mu), from the entry formula.

    Columns are (a12, mu - a11) and its conjugate; when a12 degenerates the
    alternative column (mu - a22, a21) is used.  The formula is stable in
    the entries even when the conjugation S itself is ill-conditioned.
    """
    if abs(a_float.a12) >= 1e-12 * max(1.0, a_float.max_abs()):
        v1, v2 = complex(a_float.a12), mu - a_float.a11
    else:
        v1, v2 = mu - a_float.a22, complex(a_float.a21)
    d = v1 * v2.conjugate() - v2 * v1.conjugate()
    if d == 0:
        raise ArithmeticError("degenerate eigenvector pair (trace not elliptic?)")
    root = cmath.sqrt(d)
    return Mat2(v1 / root, v1.conjugate() / root,
                v2 / root, v2.conjugate() / root)


def sign_cohere(s_new: Mat2, s_prev: Mat2) -> Mat2:
    """Resolve the square-root sign of s_new against a reference diagonalizer."""
    z = (s_prev.a11 * s_new.a11.conjugate() + s_prev.a21 * s_new.a21.conjugate()).real
    if z < 0.0:
        return s_new.scale(-1.0)
    return s_new


def continued_eigenvalue(trace: float, mu_prev: complex) -> complex:
    """Root of mu^2 - trace*mu + 1 nearest to mu_prev^2 (branch continuity)."""
    r1, r2 = solve_quadratic_unit_det(trace)
    target = mu_prev * mu_prev
    return r1 if abs(r1 - target) <= abs(r2 - target) else r2


def upper_branch(trace: float) -> complex:
    """Eigenvalue with Im > 0 for an elliptic trace."""
    half = trace / 2.0
    return complex(half, math.sqrt(max(0.0, 1.0 - half * half)))


def diagonalize_on(a, tset: IntervalSet, per_interval: int = 64,
                   evaluator=None, born: int = 0):
    """Fresh sampled diagonalizers on a grid over ``tset``.

    ``a`` is a PolyMat2 evaluated exactly at each dyadic grid point; pass
    ``evaluator`` (t -> Mat2) instead for non-polynomial families.  The
    square-root sign is kept coherent along each interval.
    """
    samples = []
    for t in tset.sample(per_interval):
        frac = Fraction(t)
        if evaluator is not None:
            m = evaluator(t)
            entries = None
            tr = Fraction(m.a11 + m.a22) if m.is_real() else None
            a_float = m
            trace = (m.a11 + m.a22).real if not m.is_real() else m.a11 + m.a22
        else:
            e = tuple(p(frac) for p in a.entries())
            entries = e
            tr = e[0] + e[3]
            trace = float(tr)
            a_float = Mat2(*(float(x) for x in e))
        if not -TRACE_EDGE < trace < TRACE_EDGE:
            raise ValueError(f"trace {trace!r} at t={t!r} is not elliptic")
        mu = upper_branch(trace)
        s = fresh_diagonalizer(a_float, mu)
        if samples:
            s = sign_cohere(s, samples[-1].s)
        samples.append(Sample(t, frac, born, entries, tr, a_float, s, mu))
    return samples


def reconstruction_residual(smp: Sample) -> float:
    """||A S - S diag(mu, conj mu)|| relative to the natural scale."""
    d_mat = Mat2(smp.mu, 0.0, 0.0, smp.mu.conjugate())
    resid = (smp.a_float @ smp.s) - (smp.s @ d_mat)
    scale = 1.0 + smp.a_float.op_norm() * smp.s.op_norm()
    return resid.op_norm() / scale


class GoodPair:
    """Polynomial matrix family elliptic on a compact set, with samples."""

    __slots__ = ("a", "e", "samples")

    def __init__(self, a: PolyMat2, e: IntervalSet, samples):
        self.a = a
        self.e = e
        self.samples = samples

    def margin(self) -> float:
        return min(TRACE_EDGE - abs(float(s.tr)) for s in self.samples)

    def validate(self, tol: float = 1e-8) -> None:
        if self.a is not None and self.a.trace().is_constant():
            raise ValueError("trace must be a non-constant polynomial")
        if self.margin() <= 0.0:
            raise ValueError("trace leaves (-2, 2) on the sample grid")
        worst = max(reconstruction_residual(s) for s in self.samples)
        if worst > tol:
            raise ArithmeticError(f"diagonalizer residual {worst!r} exceeds {tol!r}")


# ---------------------------------------------------------------------------
# one induction step

def _advance_sample(smp: Sample, c: Fraction, tr_next: Fraction):
    """Level-(n+1) exact matrix, float matrix, eigenvalue, and diagonalizer.

    Returns (a_next, a_float, mu, s, drift); drift is inf when the sign
    coherence degenerates.
    """
    a = smp.a
    b11, b12 = a[0] + a[1] * c, a[1]
    b21, b22 = a[2] + a[3] * c, a[3]
    a_next = (b11 * a[0] + b12 * a[2], b11 * a[1] + b12 * a[3],
              b21 * a[0] + b22 * a[2], b21 * a[1] + b22 * a[3])
    a_float = Mat2(*(float(x) for x in a_next))
    mu = continued_eigenvalue(float(tr_next), smp.mu)
    s = sign_cohere(fresh_diagonalizer(a_float, mu), smp.s)
    drift = (s - smp.s).op_norm()
    return a_next, a_float, mu, s, drift


def v_route_step(smp: Sample, c: float, tr_next: float):
    """Diagonalizer update via the eigenvector matrix of D^2 + Delta.

    Delta = S^{-1} (A M(c) A) S - D^2 splits as S^{-1}RS + D eta + eta D +
    eta^2 with R = c A e2 e1^T A rank-one and eta the current residual; the
    rank-one part is evaluated without large cancellations.  Returns
    (S_new, drift) with S_new = S * V/sqrt(det V), the sqrt sign chosen so
    V/sqrt(det V) -> Id as c -> 0.
    """
    s, mu, a = smp.s, smp.mu, smp.a_float
    s_inv = s.adjugate()
    col = (complex(a.a12), complex(a.a22))
    row = (complex(a.a11), complex(a.a12))
    u = (s_inv.a11 * col[0] + s_inv.a12 * col[1],
         s_inv.a21 * col[0] + s_inv.a22 * col[1])
    w = (row[0] * s.a11 + row[1] * s.a21, row[0] * s.a12 + row[1] * s.a22)
    delta = Mat2(c * u[0] * w[0], c * u[0] * w[1],
                 c * u[1] * w[0], c * u[1] * w[1])
    d_mat = Mat2(mu, 0.0, 0.0, mu.conjugate())
    eta = s_inv @ ((a @ s) - (s @ d_mat))
    if eta.op_norm() <= 1e-6:
        delta = delta + (d_mat @ eta) + (eta @ d_mat) + (eta @ eta)
    lam = continued_eigenvalue(tr_next, mu)
    mu2 = mu * mu
    v = Mat2(mu2.conjugate() - lam + delta.a22, delta.a12,
             -delta.a21, lam.conjugate() - mu2 - delta.a11)
    det_v = v.det()
    if det_v == 0:
        return None, math.inf
    root = cmath.sqrt(det_v)
    ref = mu2.conjugate() - mu2  # exact sqrt at Delta = 0
    if abs(root - ref) > abs(-root - ref):
        root = -root
    v_hat = v.scale(1.0 / root)
    s_new = s @ v_hat
    return s_new, (s_new - s).op_norm()


def shrink_for_closeness(pair: GoodPair, eps: float, c_candidate: Fraction,
                         a12_poly=None, max_halvings: int = 60):
    """Halve |c| until the kicked family passes trace and drift gates on E-tilde.

    E-tilde excises open neighborhoods (total measure < eps) of the zeros of
    tr A inside E; on the surviving samples the candidate must keep
    tr A-tilde strictly inside (-2, 2) (exact arithmetic) and move the
    diagonalizers by less than eps.  Returns (c, e_tilde, staged updates,
    diagnostics).
    """
    if pair.a is None:
        raise ValueError("shrink needs the polynomial trace")
    trace_poly = pair.a.trace()

    def tr_f(t: float) -> float:
        return float(trace_poly(Fraction(t)))

    roots = []
    for lo, hi in pair.e.as_pairs():
        roots.extend(isolate_roots(tr_f, lo, hi, samples=192))
    width = eps / (4.0 * max(1, len(roots))) if roots else 0.0
    holes = [(r - width, r + width) for r in roots]
    e_tilde = pair.e.subtract_open(holes) if holes else pair.e
    excised = pair.e.measure() - e_tilde.measure()
    if excised >= eps:
        raise ArithmeticError(f"excised {excised!r} exceeds eps {eps!r}")
    survivors = [s for s in pair.samples if e_tilde.contains(s.t)]
    if not survivors:
        raise ArithmeticError("no samples survive the excision")
    a12x = {id(s): s.a[1] for s in survivors}

    c = c_candidate if isinstance(c_candidate, Fraction) else Fraction(c_candidate)
    diag = {}
    for _ in range(max_halvings + 1):
        staged = []
        max_drift = 0.0
        min_margin = math.inf
        ok = True
        for smp in survivors:
            tr_next = smp.tr * (smp.tr + c * a12x[id(smp)]) - 2
            if not -2 < tr_next < 2:
                ok, diag = False, {"c": float(c), "failed": "trace",
                                   "t": smp.t, "trace": float(tr_next)}
                break
            a_next, a_float, mu, s, drift = _advance_sample(smp, c, tr_next)
            if not drift < eps:
                ok, diag = False, {"c": float(c), "failed": "drift",
                                   "t": smp.t, "drift": drift}
                break
            staged.append((smp, a_next, tr_next, a_float, mu, s))
            max_drift = max(max_drift, drift)
            min_margin = min(min_margin, TRACE_EDGE - abs(float(tr_next)))
        if ok:
            return c, e_tilde, staged, {"excised": excised,
                                        "max_drift": max_drift,
                                        "min_margin": min_margin,
                                        "roots": roots}
        c = c / 2
    raise ArithmeticError(f"no admissible c after {max_halvings} halvings: {diag!r}")


# ---------------------------------------------------------------------------
# window location

def _bisect_to(f, lo, hi, target, xtol=1e-12):
    """Point where f crosses ``target`` inside [lo, hi] (f(lo), f(hi) bracket it)."""
    flo = f(lo) - target
    if flo == 0.0:
        return lo
    for _ in range(200):
        if hi - lo <= xtol * max(1.0, abs(lo), abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid) - target
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def far_crossing(trace_fn, n_floor: float, direction: int = 1,
                 max_doublings: int = 40) -> float:
    """First trace zero beyond n_floor in the given direction.

    Marches n_floor * 2^k until the (exactly evaluated) trace changes sign,
    then bisects.  Raises when no sign change appears within the span.
    """
    start = max(n_floor, 1.0) * direction
    prev = start
    f_prev = trace_fn(prev)
    for k in range(1, max_doublings + 1):
        cur = start * (2.0 ** k)
        f_cur = trace_fn(cur)
        if f_prev == 0.0:
            return prev
        if (f_cur > 0) != (f_prev > 0) or f_cur == 0.0:
            lo, hi = (prev, cur) if direction > 0 else (cur, prev)
            return _bisect_to(trace_fn, lo, hi, 0.0)
        prev, f_prev = cur, f_cur
    raise ArithmeticError(
        f"no trace sign change beyond {n_floor!r} within {max_doublings} doublings")


def expand_window(trace_fn, t0: float, lo_limit: float, hi_limit: float,
                  edge: float, scan: int = 1024):
    """Maximal interval around t0 where |trace| <= edge, found by scanning.

    Walks outward from t0 at resolution (hi_limit - lo_limit)/scan and
    bisects the first step that leaves the band.
    """
    if abs(trace_fn(t0)) > edge:
        raise ValueError("t0 is not inside the requested band")
    step = (hi_limit - lo_limit) / scan
    if step <= 0.0:
        raise ValueError("empty scan range")

    def walk(direction):
        prev = t0
        while True:
            cur = prev + direction * step
            if not lo_limit <= cur <= hi_limit:
                return min(max(lo_limit, prev), hi_limit)
            v = trace_fn(cur)
            if abs(v) > edge:
                target = edge if v > 0 else -edge
                a, b = (prev, cur) if direction > 0 else (cur, prev)
                return _bisect_to(trace_fn, a, b, target)
            prev = cur

    return walk(-1.0), walk(+1.0)


def find_new_interval(trace_fn, c: float, n_floor: float, direction: int = 1,
                      span: float = 64.0):
    """Far elliptic window beyond n_floor: the crossing plus its (-2,2) band.

    ``trace_fn`` must be an exactly-backed evaluator of the kicked trace;
    ``c`` fixes which side of the crossing the window opens toward (sign
    bookkeeping only; the march finds the actual sign change).  Returns
    (t0, lo, hi) with the maximal |tr| < 2 component around t0.
    """
    if c == 0.0:
        raise ValueError("c must be nonzero")
    t0 = far_crossing(trace_fn, n_floor, direction)
    halfspan = max(abs(t0), 1.0) * span
    lo, hi = expand_window(trace_fn, t0, t0 - halfspan, t0 + halfspan,
                           TRACE_EDGE, scan=1 << 22)
    return t0, lo, hi


# ---------------------------------------------------------------------------
# the full induction

class EusBuild:
    """Constructed kick constants, retained sets, windows, and diagnostics."""

    def __init__(self, depth, tail_levels, margin_frac, c, eps, e_sets,
                 i_intervals, drift, excised, window_margins, core_margins,
                 meta=None):
        self.depth = depth
        self.tail_levels = tail_levels
        self.margin_frac = margin_frac
        self.c = list(c)                    # Fractions, levels 0..tail_levels
        self.eps = list(eps)                # floats, levels 0..tail_levels
        self.e_sets = list(e_sets)          # IntervalSet, levels 0..depth
        self.i_intervals = list(i_intervals)  # (lo, hi), levels 1..depth
        self.drift = list(drift)            # per level; None when not tracked
        self.excised = list(excised)
        self.window_margins = list(window_margins)
        self.core_margins = list(core_margins)
        self.meta = dict(meta or {})
        self.a_polys = None                 # transient; rebuilt on demand
        self.samples = None                 # transient construction state

    # -- derived sets ------------------------------------------------------
    def tail_intersection(self, k: int) -> IntervalSet:
        out = self.e_sets[k]
        for n in range(k + 1, self.depth + 1):
            out = out.intersect(self.e_sets[n])
        return out

    def final_set(self) -> IntervalSet:
        return self.tail_intersection(0)

    def membership_level(self, t: float):
        for k in range(self.depth + 1):
            if self.tail_intersection(k).contains(t):
                return k
        return None

    def pick_members(self, count: int):
        """Deterministic interior points of the full intersection, widest first."""
        comps = sorted(self.final_set().as_pairs(),
                       key=lambda p: (p[0] - p[1], p[0]))
        if not comps:
            raise ArithmeticError("empty final set")
        out = []
        per = 1
        while len(out) < count:
            out = []
            for lo, hi in comps:
                w = hi - lo
                for i in range(per):
                    out.append(lo + w * (i + 0.5) / per)
                    if len(out) == count * 2:
                        break
                if len(out) == count * 2:
                    break
            per += 1
            if per > count + 1:
                break
        return sorted(out)[:count]

    # -- sources -----------------------------------------------------------
    def kick_source(self) -> KickSource:
        return DyadicKicks([float(c) for c in self.c]).source()

    # -- invariants ----------------------------------------------------------
    def check_invariants(self) -> dict:
        report = {}
        widths = [self.e_sets[0].measure()]
        eps_ok = math.isclose(self.eps[0], widths[0] / 3.0, rel_tol=1e-12)
        for n in range(1, self.tail_levels + 1):
            # at level n only the widths of E_0, I_1 .. I_{n-1} are known yet
            want = min(widths) / (3.0 ** n)
            if not math.isclose(self.eps[n], want, rel_tol=1e-12):
                eps_ok = False
            if n <= self.depth:
                widths.append(self.i_intervals[n - 1][1] - self.i_intervals[n - 1][0])
        report["eps_formula"] = eps_ok
        report["eps_positive_decreasing"] = all(
            e > 0 for e in self.eps) and all(
            self.eps[n + 1] <= self.eps[n] * (1 + 1e-12)
            for n in range(len(self.eps) - 1))
        report["windows_beyond_level"] = all(
            self.i_intervals[n - 1][0] > n for n in range(1, self.depth + 1))
        report["windows_nested"] = all(
            self.i_intervals[n][0] >= self.i_intervals[n - 1][0] - 1e-12
            and self.i_intervals[n][1] <= self.i_intervals[n - 1][1] + 1e-12
            for n in range(1, len(self.i_intervals)))
        report["drift_below_eps"] = all(
            self.drift[n] is None or self.drift[n] < self.eps[n]
            for n in range(1, self.depth + 1))
        report["excised_below_eps"] = all(
            self.excised[n] < self.eps[n] for n in range(1, self.depth + 1))
        floor = 2.0 * self.margin_frac * (1.0 - 1e-6)
        report["window_margins"] = all(m >= floor for m in self.window_margins)
        report["core_traces_elliptic"] = all(m > 0.0 for m in self.core_margins)
        nested_ok = True
        for n in range(1, self.depth + 1):
            prev = self.e_sets[n - 1].union(
                IntervalSet([self.i_intervals[n - 1]]))
            stray = self.e_sets[n].subtract_open(
                [(lo - 1e-12, hi + 1e-12) for lo, hi in prev.as_pairs()])
            if stray.measure() > 1e-9:
                nested_ok = False
        report["sets_nested"] = nested_ok
        witness_ok = True
        e_last = self.e_sets[self.depth]
        for lo, hi in self.i_intervals:
            kept = e_last.intersect(IntervalSet([(lo, hi)])).measure()
            if not kept > (2.0 / 3.0) * (hi - lo):
                witness_ok = False
        report["measure_witness"] = witness_ok
        if self.a_polys is not None:
            report["det_identity"] = all(
                a.det().coeffs == (Fraction(1),) for a in self.a_polys)
        report["all"] = all(v for v in report.values())
        return report

    # -- persistence ---------------------------------------------------------
    def to_json(self) -> str:
        doc = {
            "version": 1,
            "depth": self.depth,
            "tail_levels": self.tail_levels,
            "margin_frac": self.margin_frac,
            "c": [str(c) for c in self.c],
            "eps": self.eps,
            "e_sets": [s.as_pairs() for s in self.e_sets],
            "i_intervals": self.i_intervals,
            "drift": self.drift,
            "excised": self.excised,
            "window_margins": self.window_margins,
            "core_margins": self.core_margins,
            "meta": self.meta,
        }
        return json.dumps(doc, sort_keys=True, indent=1)

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def from_json(cls, text: str) -> "EusBuild":
        doc = json.loads(text)
        return cls(
            depth=doc["depth"],
            tail_levels=doc["tail_levels"],
            margin_frac=doc["margin_frac"],
            c=[Fraction(s) for s in doc["c"]],
            eps=doc["eps"],
            e_sets=[IntervalSet([tuple(p) for p in pairs])
                    for pairs in doc["e_sets"]],
            i_intervals=[tuple(p) for p in doc["i_intervals"]],
            drift=doc["drift"],
            excised=doc["excised"],
            window_margins=doc["window_margins"],
            core_margins=doc["core_margins"],
            meta=doc["meta"],
        )

    @classmethod
    def load(cls, path: str) -> "EusBuild":
        with open(path) as fh:
            return cls.from_json(fh.read())


def good_region(a: PolyMat2, domain, samples: int = 2048) -> IntervalSet:
    """Subset of the domain where -2 < tr A < 2, endpoints refined.

    The trace polynomial is evaluated exactly at rational points so the
    sign decisions stay honest at any scale.
    """
    tr = a.trace()
    if tr.is_constant():
        raise ValueError("trace must be a non-constant polynomial")
    lo, hi = float(domain[0]), float(domain[1])

    def f(t: float) -> float:
        return float(tr(Fraction(t)))

    return strip_region(f, lo, hi, -TRACE_EDGE, TRACE_EDGE, samples)


def _window_samples(trace_fn, lo: float, hi: float, count: int):
    ts = [lo + (hi - lo) * (i + 0.5) / count for i in range(count)]
    return [(t, trace_fn(t)) for t in ts]


def build_eus(depth: int = 6, e0_hint=None, c0=Fraction(-1),
              tail_levels: int = 14, samples_per_interval: int = 64,
              margin_frac: float = WINDOW_MARGIN_FRAC,
              max_halvings: int = 60) -> EusBuild:
    """Run the induction to the given depth and return the build.

    Levels 1..depth carry the full bookkeeping (excision, drift, window);
    levels depth+1..tail_levels extend the kick sequence with geometrically
    vanishing constants so finite products up to 2^(tail_levels+1)-1 factors
    are defined, without per-level verification.
    """
    c0 = c0 if isinstance(c0, Fraction) else Fraction(c0)
    if not c0 < 0:
        raise ValueError("c0 must be negative")
    if depth < 0 or tail_levels < depth:
        raise ValueError("need 0 <= depth <= tail_levels")

    h = PolyMat2.shear_t()
    a0 = kick_step(h, c0)
    region = good_region(a0, (0.0, max(4.0, 4.0 / float(-c0))))
    g_lo, g_hi = region.as_pairs()[0]
    if e0_hint is not None:
        lo, hi = float(e0_hint[0]), float(e0_hint[1])
        clipped = region.intersect(IntervalSet([(lo, hi)]))
        if not clipped:
            raise ValueError("e0_hint misses the good region")
        e0_lo, e0_hi = max(clipped.as_pairs(), key=lambda p: p[1] - p[0])
    else:
        w = g_hi - g_lo
        e0_lo, e0_hi = g_lo + w / 3.0, g_hi - w / 3.0
    e0 = IntervalSet([(e0_lo, e0_hi)])

    cs = [c0]
    a_polys = [a0]
    eps = [e0.measure() / 3.0]
    e_sets = [e0]
    i_intervals = []
    drift = [None]
    excised = [0.0]
    window_margins = []
    meta = {"c0": str(c0), "good_region": [g_lo, g_hi],
            "samples_per_interval": samples_per_interval}

    samples = diagonalize_on(a0, e0, samples_per_interval, born=0)
    core_margins = [min(TRACE_EDGE - abs(float(s.tr)) for s in samples)]
    widths = [e0.measure()]
    far_floor = max(float(depth), g_hi)

    for n in range(1, depth + 1):
        eps_n = min(widths) / (3.0 ** n)
        pair = GoodPair(a_polys[n - 1], e_sets[n - 1], samples)
        pair.validate(tol=1e-8)

        if n == 1:
            sq = a_polys[0] @ a_polys[0]
            if not upper_right_dominating(sq):
                raise ArithmeticError("A^2 is not upper-right dominating")
            lead = (sq.a12).lead()
            c_sign = -1 if lead > 0 else 1
            warm = Fraction(c_sign, 4)
        else:
            warm = cs[n - 1] / 4

        c_n, e_tilde, staged, diag = shrink_for_closeness(
            pair, eps_n, warm, max_halvings=max_halvings)

        a_n = kick_step(a_polys[n - 1], c_n)
        if a_n.det().coeffs != (Fraction(1),):
            raise ArithmeticError("unimodularity lost at level build")

        trace_fn = chain_trace_fn(cs + [c_n], n)
        if n == 1:
            t0, w_lo, w_hi = find_new_interval(
                trace_fn, float(c_n), max(float(n), far_floor))
        else:
            h_lo, h_hi = i_intervals[n - 2]
            roots = isolate_roots(trace_fn, h_lo, h_hi, samples=512)
            roots = [r for r in roots if e_tilde.contains(r)]
            if not roots:
                raise ArithmeticError(f"no nested trace zero at level {n}")
            best = None
            for r in roots:
                lo_r, hi_r = expand_window(trace_fn, r, h_lo, h_hi, TRACE_EDGE)
                if best is None or hi_r - lo_r > best[2] - best[1]:
                    best = (r, lo_r, hi_r)
            t0, w_lo, w_hi = best
        inner_edge = TRACE_EDGE * (1.0 - margin_frac)
        i_lo, i_hi = expand_window(trace_fn, t0, w_lo, w_hi, inner_edge)
        if not i_lo > n:
            raise ArithmeticError(f"window [{i_lo!r}, {i_hi!r}] not beyond {n}")

        win = _window_samples(trace_fn, i_lo, i_hi, samples_per_interval)
        w_margin = min(TRACE_EDGE - abs(v) for _, v in win)

        # commit the level
        cs.append(c_n)
        a_polys.append(a_n)
        eps.append(eps_n)
        for smp, a_next, tr_next, a_float, mu, s in staged:
            smp.a, smp.tr, smp.a_float, smp.mu, smp.s = (
                a_next, tr_next, a_float, mu, s)
        samples = [s for s in samples if e_tilde.contains(s.t)]
        fresh = diagonalize_on(a_n, IntervalSet([(i_lo, i_hi)]),
                               samples_per_interval, born=n)
        samples.extend(fresh)
        e_n = e_tilde.union(IntervalSet([(i_lo, i_hi)]))
        e_sets.append(e_n)
        i_intervals.append((i_lo, i_hi))
        drift.append(diag["max_drift"])
        excised.append(diag["excised"])
        window_margins.append(w_margin)
        core_margins.append(min(TRACE_EDGE - abs(float(s.tr)) for s in samples))
        widths.append(i_hi - i_lo)

    for n in range(depth + 1, tail_levels + 1):
        cs.append(cs[depth] / 3 ** (n - depth) if depth >= 1
                  else c0 / 3 ** n)
        eps.append(min(widths) / (3.0 ** n))
        drift.append(None)
        excised.append(0.0)

    build = EusBuild(depth, tail_levels, margin_frac, cs, eps, e_sets,
                     i_intervals, drift, excised, window_margins,
                     core_margins, meta)
    build.a_polys = a_polys
    build.samples = samples
    return build


# ---------------------------------------------------------------------------
# membership verification

def verify_membership(build: EusBuild, t: float, k_max: int) -> dict:
    """Boundedness report for one point of the constructed set.

    Membership is taken relative to the tail intersection (points of the
    far windows enter the construction at their birth level, not level 0).
    PASS requires the running sup of ||P_K|| not to grow between the halves
    of the horizon (ratio < 1.5) and the late-sample slope of log||P_K|| to
    stay below 1e-4 per step.
    """
    k = build.membership_level(t)
    if k is None:
        raise ValueError(f"t={t!r} is outside every tail intersection")
    frac = Fraction(t)
    chain = exact_chain(build.c[:build.depth + 1], frac)
    traces = [float(m[0] + m[3]) for m in chain]
    for n in range(k, build.depth + 1):
        if not -TRACE_EDGE < traces[n] < TRACE_EDGE:
            raise ArithmeticError(
                f"trace {traces[n]!r} at level {n} is not elliptic at t={t!r}")

    source = build.kick_source()
    if k_max > source.length:
        raise ValueError(f"k_max {k_max} exceeds the kick horizon {source.length}")
    trace = evolve(source, t, k_max)
    ratio = math.exp(min(trace.sup_second_half - trace.sup_first_half, 700.0))
    slope = trace.slope()
    passed = ratio < 1.5 and slope <= 1e-4

    # proof-side constant: any product over indices <= k_max splits into
    # blocks M(c_j) A_{j-1}(t); bits j <= k are bounded by raw norms, bits
    # beyond k ride the conjugated rotations with c- and drift-perturbations
    norms = []
    s_norms = []
    for n in range(build.depth + 1):
        a_float = Mat2(*(float(x) for x in chain[n]))
        norms.append(a_float.op_norm())
        if n >= k:
            s_norms.append(fresh_diagonalizer(
                a_float, upper_branch(traces[n])).op_norm())
    c_const = max(s_norms) + math.fsum(build.eps[build.depth + 1:])
    h_norm = Mat2.shear(t).op_norm()
    prefactor = 1.0
    for j in range(k + 1):
        a_norm = h_norm if j == 0 else norms[j - 1]
        prefactor *= (1.0 + abs(float(build.c[j]))) * max(1.0, a_norm)
    tail_sum_c = math.fsum(abs(float(c)) for c in build.c[k + 1:])
    tail_sum_eps = math.fsum(build.eps[k + 1:])
    exponent = c_const * (c_const * tail_sum_c + tail_sum_eps)
    bound = prefactor * c_const ** 2 * math.exp(min(exponent, 700.0))

    # association-order spot check of the evolved product
    state = DyadicState(DyadicKicks([float(c) for c in build.c]), t)
    block_lognorm = state.partial(k_max).lognorm
    block_dev = abs(block_lognorm - trace.final.lognorm)

    return {
        "t": t,
        "member_from": k,
        "traces": traces,
        "k_max": k_max,
        "sup_lognorm": trace.sup_lognorm,
        "sup_norm": math.exp(min(trace.sup_lognorm, 700.0)),
        "ratio": ratio,
        "slope": slope,
        "c_const": c_const,
        "bound": bound,
        "bound_holds": bound >= math.exp(min(trace.sup_lognorm, 700.0)),
        "block_lognorm": block_lognorm,
        "block_dev": block_dev,
        "pass": passed,
    }
