"""Exact dynamic parameterized subset sampling with O(1) updates.

A set of weighted items answers queries parameterized by non-negative rationals
(alpha, beta): each item x is returned independently with probability exactly
min(w(x) / (alpha * sum(w) + beta), 1), under arbitrary interleaved insertions
and deletions.  The package also ships the exact random-variate generators the
structure is built on (rational Bernoulli coins, bounded and truncated
geometrics) and an integer-sorting reduction driven by a deletion-only sampler.
"""

from .bucketing import BGStructure, DegenerateQueryError, Item, QueryParams
from .halt import Adapter, HaltStructure, LookupTable, SmoothedDpss
from .intset import BoundedIntSet
from .randomness import LazyUniform, RandomSource
from .rationals import DyadicApprox, Rational, ceil_log2, dyadic_round, floor_log2
from .samplers import (
    ApproximableProbability,
    BoundedGeoSampler,
    ber_approx,
    ber_half_inv_pstar,
    ber_pstar,
    ber_rational,
    bgeo,
    bgeo_pmf,
    pstar_approx,
    pstar_exact,
    tgeo,
    tgeo_pmf,
)
from .sortdemo import ReferenceFloatDpss, sort_via_dpss

__all__ = [
    "Adapter",
    "ApproximableProbability",
    "BGStructure",
    "BoundedGeoSampler",
    "BoundedIntSet",
    "DegenerateQueryError",
    "DyadicApprox",
    "HaltStructure",
    "Item",
    "LazyUniform",
    "LookupTable",
    "QueryParams",
    "Rational",
    "RandomSource",
    "ReferenceFloatDpss",
    "SmoothedDpss",
    "ber_approx",
    "ber_half_inv_pstar",
    "ber_pstar",
    "ber_rational",
    "bgeo",
    "bgeo_pmf",
    "ceil_log2",
    "dyadic_round",
    "floor_log2",
    "pstar_approx",
    "pstar_exact",
    "sort_via_dpss",
    "tgeo",
    "tgeo_pmf",
]
