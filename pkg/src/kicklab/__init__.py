"""kicklab: a numerical laboratory for kicked products of unimodular 2x2 matrices.

The objects of study are products P_n(t) = K_n H(t) ... K_1 H(t) where H(t)
is the unit shear [[1, t], [0, 1]] and the kicks K_j are unimodular with a
uniform norm bound.  The package provides:

* robust evolution of such products with renormalized norm tracking
  (``kicklab.evolution``),
* a finite-n certificate for exponential norm growth at complex spectral
  parameters (``kicklab.evolution.q_growth_certificate``),
* vectorized scans that measure the set of t where the product stays
  bounded (``kicklab.analysis``),
* two explicit constructions: embedding a prescribed sequence of rotation
  prefixes so the product is bounded on a target set
  (``kicklab.construct_seq``), and an inductive family of dyadic kicks
  whose bounded set has positive measure in every window
  (``kicklab.construct_eus``),
* reporting helpers and a CLI (``kicklab.report``, ``kicklab.cli``).
"""

from .analysis import (
    GrowthMapResult,
    ScanResult,
    TriKicks,
    classify_single,
    growth_map,
    refine_result,
    rost_window,
    scan,
    schrodinger,
)
from .construct_eus import EusBuild, build_eus, verify_membership
from .construct_seq import SeqConstruction
from .construct_seq import build as build_seq
from .construct_seq import verify_bounded
from .dyadic import DyadicKicks, DyadicState, ruler
from .evolution import (
    GrowthTrace,
    KickError,
    KickSource,
    ScaledProduct,
    constant_kicks,
    evolve,
    growth_lower_bound,
    identity_kicks,
    q_growth_certificate,
    random_bounded_kicks,
)
from .mat2 import Mat2, IwasawaFactors, UnimodularError, iwasawa, q_form

__all__ = [
    "DyadicKicks",
    "DyadicState",
    "EusBuild",
    "GrowthMapResult",
    "GrowthTrace",
    "IwasawaFactors",
    "KickError",
    "KickSource",
    "Mat2",
    "ScaledProduct",
    "ScanResult",
    "SeqConstruction",
    "TriKicks",
    "UnimodularError",
    "build_eus",
    "build_seq",
    "classify_single",
    "constant_kicks",
    "evolve",
    "growth_lower_bound",
    "growth_map",
    "identity_kicks",
    "iwasawa",
    "q_form",
    "q_growth_certificate",
    "random_bounded_kicks",
    "refine_result",
    "rost_window",
    "ruler",
    "scan",
    "schrodinger",
    "verify_bounded",
    "verify_membership",
]

__version__ = "0.1.0"
