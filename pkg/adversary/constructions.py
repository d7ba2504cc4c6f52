"""Instance generators: random workloads and the worst-case constructions."""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike

from adversary.behaviors import AdversaryKind, AdversarySpec
from aggregation.rules import krum, multi_krum
from aggregation.weiszfeld import DEFAULT_WEISZFELD, WeiszfeldConfig, geometric_median
from core.errors import InvalidParamsError, ReproductionFailure
from core.params import AgreementInstance, SystemParams
from core.vector import Vector, as_vector, euclidean_distance, stack
from geometry.covering_ball import CoveringBall, min_covering_ball
from geometry.ratio import ApproximationRatio, approximation_ratio
from geometry.s_geo import enumerate_s_geo

logger = logging.getLogger(__name__)

# Minimum medoid-to-median gap a Krum counterexample must show.
KRUM_GAP = 1e-3


def random_instance(params: SystemParams, seed: int, spec: Optional[AdversarySpec] = None,
                    scale: float = 1.0) -> AgreementInstance:
    """Honest inputs drawn from N(0, scale^2 I), deterministic per seed."""
    if spec is None:
        spec = AdversarySpec(AdversaryKind.CRASH, params.f) if params.f else AdversarySpec.honest_only()
    rng = np.random.default_rng(seed)
    honest = rng.normal(0.0, scale, size=(params.honest_count, params.d))
    return AgreementInstance(params, tuple(honest), spec, seed=seed)


def make_md_oscillation_instance(params: SystemParams, v1: ArrayLike, v2: ArrayLike,
                                 seed: int = 0) -> AgreementInstance:
    """Honest nodes split evenly on v1 and v2; half the Byzantine nodes echo each side.

    Byzantine nodes holding v1 reach only the first half of the honest nodes and
    those holding v2 only the second half. The instance turns on the adversarial
    tie-break so equal-diameter subsets are resolved towards the echoed vector.
    """
    problems = []
    if params.quorum % 2:
        problems.append(f"n - t = {params.quorum} must be even")
    if params.t % 2:
        problems.append(f"t = {params.t} must be even")
    if params.f != params.t:
        problems.append(f"all t = {params.t} Byzantine nodes must take part (f = {params.f})")
    if problems:
        raise InvalidParamsError("; ".join(problems))
    a, b = as_vector(v1), as_vector(v2)
    half = params.honest_count // 2
    honest = (a,) * half + (b,) * half
    spec = AdversarySpec(AdversaryKind.MD_OSCILLATION, params.f)
    return AgreementInstance(
        params, honest, spec, seed=seed, adversarial_tie_break=True,
        labels={"v1": a, "v2": b, "diameter": euclidean_distance(a, b)},
    )


@dataclass(frozen=True)
class KrumCounterexample:
    """n - t received vectors whose Krum output is not their geometric median."""

    params: SystemParams
    vectors: np.ndarray
    true_median: Vector
    krum_output: Vector
    ball: CoveringBall
    gap: float

    def ratio(self) -> ApproximationRatio:
        return approximation_ratio(self.krum_output, self.true_median, self.ball)


def certify_krum_gap(vectors: ArrayLike, params: SystemParams,
                     cfg: WeiszfeldConfig = DEFAULT_WEISZFELD) -> float:
    """Smallest distance from the geometric median to Krum or any Multi-Krum output."""
    points = stack(vectors)
    mu = geometric_median(points, cfg)
    outputs = [krum(points, params)]
    outputs += [multi_krum(points, params, q) for q in range(1, points.shape[0] + 1)]
    return min(euclidean_distance(out, mu) for out in outputs)


def make_krum_unbounded_instance(params: SystemParams, seed: int = 0, max_attempts: int = 1000,
                                 cfg: WeiszfeldConfig = DEFAULT_WEISZFELD) -> KrumCounterexample:
    """Search seeded Gaussian instances until the medoid gap is certified.

    The Byzantine nodes stay silent, so the server receives exactly n - t
    vectors and the set of possible medians is a single point.
    """
    if params.quorum < 3:
        raise InvalidParamsError(f"need n - t >= 3 (got {params.quorum})")
    for attempt in range(max_attempts):
        rng = np.random.default_rng([seed, attempt])
        vectors = rng.normal(size=(params.quorum, params.d))
        gap = certify_krum_gap(vectors, params, cfg)
        if gap <= KRUM_GAP:
            logger.debug("krum instance attempt %d rejected (gap %.3g)", attempt, gap)
            continue
        s_geo = enumerate_s_geo(vectors, params, cfg)
        logger.debug("krum instance found after %d attempts (gap %.6g)", attempt + 1, gap)
        return KrumCounterexample(
            params=params,
            vectors=vectors,
            true_median=geometric_median(vectors, cfg),
            krum_output=krum(vectors, params),
            ball=min_covering_ball(s_geo.as_array(), seed=seed),
            gap=gap,
        )
    raise ReproductionFailure(f"no Krum counterexample within {max_attempts} attempts (seed {seed})")


@dataclass(frozen=True)
class SafeAreaConstruction:
    """Labelled instance where the safe area is one point far from the honest median."""

    instance: AgreementInstance
    safe_area: Vector
    true_median: Vector
    limit_vectors: np.ndarray

    def measure(self, cfg: WeiszfeldConfig = DEFAULT_WEISZFELD) -> ApproximationRatio:
        """Ratio of the safe-area output, with S_geo taken on the collapsed groups."""
        s_geo = enumerate_s_geo(self.limit_vectors, self.instance.params, cfg)
        ball = min_covering_ball(s_geo.as_array())
        return approximation_ratio(self.safe_area, self.true_median, ball)


def make_safearea_instance(params: SystemParams, x: float, epsilon: float) -> SafeAreaConstruction:
    """One honest node and every Byzantine node at the origin, d groups of f at x*e1 + eps*e_j."""
    d, f = params.d, params.f
    problems = []
    if d < 3:
        problems.append(f"d must be at least 3 (got {d})")
    if f < 1 or params.t != f:
        problems.append(f"need t = f >= 1 (got t={params.t}, f={f})")
    if params.n != d * f + 1 + f:
        problems.append(f"need n = d*f + 1 + f = {d * f + 1 + f} (got {params.n})")
    if problems:
        raise InvalidParamsError("; ".join(problems))

    origin = np.zeros(d)
    far = np.zeros(d)
    far[0] = x
    groups: Tuple[np.ndarray, ...] = tuple(far + epsilon * np.eye(d)[j] for j in range(d) for _ in range(f))
    honest = (origin,) + groups
    spec = AdversarySpec(AdversaryKind.FIXED_VECTOR, f, vector=origin)
    safe_area, true_median = as_vector(origin), as_vector(far)
    instance = AgreementInstance(
        params, honest, spec,
        labels={"safe_area": safe_area, "true_median": true_median, "x": x, "epsilon": epsilon},
    )
    limit = np.vstack([origin] * (1 + f) + [far] * (d * f))
    return SafeAreaConstruction(instance=instance, safe_area=safe_area,
                                true_median=true_median, limit_vectors=limit)
