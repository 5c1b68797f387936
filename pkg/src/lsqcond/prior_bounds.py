"""Classical textbook condition estimates and their overestimation ratios.

Three published values are compared against the tight estimate, each under
the scale convention its source assumes:

* Wedin (1973; also Bjorck 1996): ||r|| / sigma_min + ||x||, unscaled
  norms, db = 0. Exceeds the tight value by at most sqrt(2).
* Stewart (1977; Stewart & Sun 1990): ||b|| / sigma_min, unscaled norms,
  db = 0. Can overestimate by as much as the van der Sluis ratio, i.e. up
  to a factor near kappa.
* Golub & Van Loan / Higham: 2 kappa + 1 against the sum of both condition
  numbers under scale_b = scale_r = ||b||. Can overestimate the sum by a
  factor near kappa.
"""

from __future__ import annotations

from dataclasses import dataclass

from .conditioning import SQRT2, ScaleFactors, residual_condition_bounds
from .core import Geometry, LsCache, geometry


@dataclass(frozen=True)
class PriorBoundRow:
    """One published estimate with its own convention and overestimation ratio."""

    source: str  # "wedin" | "stewart" | "gvlh"
    value: float
    scale_convention: str
    ratio_to_tight: float
    max_ratio: float  # theoretical worst-case overestimation factor


def wedin_estimate(cache: LsCache) -> float:
    """||r|| / sigma_min + ||x|| under unscaled norms with db = 0."""
    geometry(cache)
    return cache.norm_r / cache.svd.sigma_min + cache.norm_x


def stewart_estimate(cache: LsCache) -> float:
    """||b|| / sigma_min under unscaled norms with db = 0.

    Identically sqrt((||r|| / sigma_min)^2 + vds^2 ||x||^2): the tight
    value with the solution term inflated by the van der Sluis ratio.
    """
    geometry(cache)
    return cache.norm_b / cache.svd.sigma_min


def gvlh_estimate(geom: Geometry) -> tuple[float, float]:
    """The stated textbook value 2 kappa + 1 and the sharper sum bound kappa + 1.

    Both measure perturbations to A and b by a single quantity and the
    residual against ||b||; the sum of the two condition numbers under that
    convention never exceeds kappa + 1.
    """
    return 2.0 * geom.kappa + 1.0, geom.kappa + 1.0


def compare_table(cache: LsCache) -> list[PriorBoundRow]:
    """All three published estimates with per-row overestimation ratios.

    Each ratio divides the published value by the tight upper estimate
    evaluated under that row's own scale convention, so conventions are
    never mixed.
    """
    geom = geometry(cache)
    absolute = residual_condition_bounds(cache, geom, ScaleFactors.absolute())
    b_rel = residual_condition_bounds(cache, geom, ScaleFactors.b_relative(cache))
    tight_abs = absolute.chi_A_upper
    tight_sum = b_rel.chi_A_upper + b_rel.chi_b

    wedin = wedin_estimate(cache)
    stewart = stewart_estimate(cache)
    stated, _ = gvlh_estimate(geom)
    return [
        PriorBoundRow(
            source="wedin",
            value=wedin,
            scale_convention="scale_A = scale_r = 1, db = 0",
            ratio_to_tight=wedin / tight_abs,
            max_ratio=2.0,
        ),
        PriorBoundRow(
            source="stewart",
            value=stewart,
            scale_convention="scale_A = scale_r = 1, db = 0",
            ratio_to_tight=stewart / tight_abs,
            max_ratio=SQRT2 * geom.kappa,
        ),
        PriorBoundRow(
            source="gvlh",
            value=stated,
            scale_convention="scale_A = ||A||, scale_b = scale_r = ||b||, joint eps",
            ratio_to_tight=stated / tight_sum,
            max_ratio=geom.kappa,
        ),
    ]
