"""What one honest node computes from the vectors it received in a round."""

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

from aggregation.rules import mean
from aggregation.trimming import IndexSet, coordinate_trim, min_diameter_subset, min_diameter_subsets
from aggregation.weiszfeld import DEFAULT_WEISZFELD, WeiszfeldConfig, geometric_median
from core.errors import AgreementInvariantError, InvalidParamsError
from core.hyperbox import Hyperbox, box_intersection
from core.params import SystemParams
from core.vector import TAU, Vector, VectorSet, stack
from geometry.s_geo import geo_hyperbox, mean_hyperbox

TieBreak = Callable[[Sequence[IndexSet]], IndexSet]


class AgreementAlgo(str, Enum):
    HYPERBOX_GEO = "hyperbox_geo"
    HYPERBOX_MEAN = "hyperbox_mean"
    MIN_DIAM_GEO = "min_diam_geo"
    MIN_DIAM_MEAN = "min_diam_mean"

    @property
    def uses_hyperbox(self) -> bool:
        return self in (AgreementAlgo.HYPERBOX_GEO, AgreementAlgo.HYPERBOX_MEAN)

    @property
    def uses_mean(self) -> bool:
        return self in (AgreementAlgo.HYPERBOX_MEAN, AgreementAlgo.MIN_DIAM_MEAN)


@dataclass(frozen=True)
class RoundOutcome:
    vector: Vector
    trusted_box: Optional[Hyperbox] = None
    median_box: Optional[Hyperbox] = None
    subset: Optional[IndexSet] = None


def _check_quorum(m: int, params: SystemParams) -> None:
    if m < params.quorum:
        raise InvalidParamsError(f"need at least n - t = {params.quorum} received vectors, got {m}")


def md_step(received: VectorSet, params: SystemParams, cfg: WeiszfeldConfig = DEFAULT_WEISZFELD,
            use_mean: bool = False, tie_break: Optional[TieBreak] = None) -> RoundOutcome:
    points = stack(received)
    _check_quorum(points.shape[0], params)
    if tie_break is None:
        subset = min_diameter_subset(points, params.quorum)
    else:
        subset = tie_break(min_diameter_subsets(points, params.quorum))
    chosen = points[list(subset)]
    vector = mean(chosen) if use_mean else geometric_median(chosen, cfg)
    return RoundOutcome(vector=vector, subset=subset)


def hyperbox_step(received: VectorSet, params: SystemParams, cfg: WeiszfeldConfig = DEFAULT_WEISZFELD,
                  use_mean: bool = False) -> RoundOutcome:
    points = stack(received)
    _check_quorum(points.shape[0], params)
    trusted = coordinate_trim(points, params)
    medians = mean_hyperbox(points, params) if use_mean else geo_hyperbox(points, params, cfg)
    overlap = box_intersection(trusted, medians, tol=TAU)
    if overlap is None:
        raise AgreementInvariantError(
            f"empty TH ∩ GH: TH={trusted.intervals} GH={medians.intervals}"
        )
    if not trusted.contains_box(overlap, tol=TAU):
        raise AgreementInvariantError(f"TH ∩ GH={overlap.intervals} leaves TH={trusted.intervals}")
    return RoundOutcome(vector=overlap.midpoint(), trusted_box=trusted, median_box=medians)


def md_round(received: VectorSet, params: SystemParams, cfg: WeiszfeldConfig = DEFAULT_WEISZFELD,
             use_mean: bool = False, tie_break: Optional[TieBreak] = None) -> Vector:
    """Median (or mean) of a minimum-diameter subset of n - t received vectors."""
    return md_step(received, params, cfg, use_mean, tie_break).vector


def hyperbox_round(received: VectorSet, params: SystemParams, cfg: WeiszfeldConfig = DEFAULT_WEISZFELD,
                   use_mean: bool = False) -> Vector:
    """Midpoint of the locally trusted hyperbox intersected with the median (or mean) box."""
    return hyperbox_step(received, params, cfg, use_mean).vector


def agreement_step(received: VectorSet, params: SystemParams, algo: AgreementAlgo,
                   cfg: WeiszfeldConfig = DEFAULT_WEISZFELD,
                   tie_break: Optional[TieBreak] = None) -> RoundOutcome:
    algo = AgreementAlgo(algo)
    if algo.uses_hyperbox:
        return hyperbox_step(received, params, cfg, use_mean=algo.uses_mean)
    return md_step(received, params, cfg, use_mean=algo.uses_mean, tie_break=tie_break)
