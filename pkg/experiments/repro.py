"""Named reproductions: each runs a construction and checks its stated outcome."""

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from adversary.behaviors import AdversaryKind, AdversarySpec, RecipientRule, VectorRule
from adversary.constructions import (
    certify_krum_gap, make_krum_unbounded_instance, make_md_oscillation_instance,
    make_safearea_instance, random_instance,
)
from aggregation.rules import multi_krum
from aggregation.weiszfeld import DEFAULT_WEISZFELD, WeiszfeldConfig, geometric_median
from agreement.engine import run_agreement
from agreement.rounds import AgreementAlgo
from core.params import AgreementInstance, SystemParams
from core.vector import TAU
from csv_handler.parser import EvalRow
from experiments.processor import MD_ONE_ROUND, full_delivery, ratio_rows
from geometry.hull import convex_hull_membership_2d
from geometry.ratio import approximation_ratio
from geometry.s_geo import enumerate_s_geo, geo_hyperbox
from utils.colors import Colors, print_colored
from utils.workers import map_ordered

logger = logging.getLogger(__name__)

SLACK = 1e-6
SWEEP_SIZE = 100
CONTRACTION_DIMS = (1, 2, 5, 16)
CONTRACTION_SEEDS = 5
CONTRACTION_ROUNDS = 8


@dataclass
class ReproResult:
    name: str
    passed: bool = True
    details: List[str] = field(default_factory=list)

    def check(self, condition: bool, message: str) -> None:
        self.details.append(f"{'ok  ' if condition else 'FAIL'} {message}")
        if not condition:
            self.passed = False


# -- non-convergence of the minimum-diameter rule ---------------------------

def repro_md_oscillation(seed: int = 0, cfg: WeiszfeldConfig = DEFAULT_WEISZFELD) -> ReproResult:
    result = ReproResult("md-oscillation")
    params = SystemParams(n=8, t=2, f=2, d=1)
    instance = make_md_oscillation_instance(params, [0.0], [1.0], seed=seed)

    md = run_agreement(instance, AgreementAlgo.MIN_DIAM_GEO, 10, 0.0, cfg)
    diameters = [tr.output_diameter for tr in md]
    result.check(len(md) == 10 and all(abs(d - 1.0) <= TAU for d in diameters),
                 f"min_diam_geo keeps diameter 1 over 10 rounds: {diameters}")

    box = run_agreement(instance, AgreementAlgo.HYPERBOX_GEO, 10, 0.0, cfg)
    final = box[-1].output_diameter
    result.check(final <= 1.0 / 2 ** 9 + TAU, f"hyperbox_geo reaches diameter {final:.3g} <= 2^-9")
    return result


# -- Krum has no approximation guarantee -------------------------------------

def repro_krum_unbounded(seed: int = 0, cfg: WeiszfeldConfig = DEFAULT_WEISZFELD) -> ReproResult:
    result = ReproResult("krum-unbounded")
    triangle = SystemParams(n=4, t=1, f=1, d=2)
    gap = certify_krum_gap([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], triangle, cfg)
    result.check(gap > 1e-3, f"right triangle: Krum output {gap:.6g} away from the Fermat point")

    params = SystemParams(n=7, t=2, f=2, d=2)
    example = make_krum_unbounded_instance(params, seed=seed, cfg=cfg)
    result.check(example.ball.radius < 1e-9, f"n - t received vectors give r_cov = {example.ball.radius:.3g}")
    result.check(example.gap > 1e-3, f"Krum output {example.gap:.6g} away from the geometric median")
    result.check(example.ratio().unbounded, f"Krum ratio is {example.ratio()}")
    for q in range(1, params.quorum + 1):
        out = multi_krum(example.vectors, params, q)
        ratio = approximation_ratio(out, example.true_median, example.ball)
        result.check(ratio.unbounded, f"Multi-Krum q={q} ratio is {ratio}")
    return result


# -- the safe area can be far from the honest median -------------------------

def repro_safearea(seed: int = 0, cfg: WeiszfeldConfig = DEFAULT_WEISZFELD) -> ReproResult:
    result = ReproResult("safearea-unbounded")
    three = make_safearea_instance(SystemParams(n=5, t=1, f=1, d=3), x=10.0, epsilon=0.01).measure(cfg)
    result.check(not three.unbounded and abs(three.value - 4.0) <= SLACK, f"d=3, f=1: ratio {three}")
    four = make_safearea_instance(SystemParams(n=6, t=1, f=1, d=4), x=10.0, epsilon=0.01).measure(cfg)
    result.check(four.unbounded, f"d=4, f=1: ratio {four}")
    return result


# -- hyperbox contraction -----------------------------------------------------

def contraction_adversaries(f: int, d: int) -> List[AdversarySpec]:
    specs = [
        AdversarySpec(AdversaryKind.CRASH, f, crash_round=2),
        AdversarySpec(AdversaryKind.SIGN_FLIP, f),
        AdversarySpec(AdversaryKind.FIXED_VECTOR, f, vector=np.full(d, 5.0)),
        AdversarySpec(AdversaryKind.SELECTIVE_OMISSION, f, vector_rule=VectorRule.OUTLIER,
                      recipient_rule=RecipientRule.HALF),
        AdversarySpec(AdversaryKind.SELECTIVE_OMISSION, f, vector_rule=VectorRule.SPLIT_CORNERS,
                      recipient_rule=RecipientRule.ALTERNATE),
        AdversarySpec(AdversaryKind.SELECTIVE_OMISSION, f, vector_rule=VectorRule.RANDOM_IN_BOX,
                      recipient_rule=RecipientRule.RANDOM),
    ]
    if f % 2 == 0:
        specs.append(AdversarySpec(AdversaryKind.MD_OSCILLATION, f))
    return specs


def contraction_instance(params: SystemParams, spec: AdversarySpec, seed: int) -> AgreementInstance:
    """Random honest inputs, or two seeded honest values for the oscillation attack."""
    if spec.kind is AdversaryKind.MD_OSCILLATION:
        v1, v2 = np.random.default_rng(seed).normal(size=(2, params.d))
        return make_md_oscillation_instance(params, v1, v2, seed=seed)
    return random_instance(params, seed, spec)


def contraction_violations(params: SystemParams, spec: AdversarySpec, seed: int,
                           rounds: int = CONTRACTION_ROUNDS,
                           cfg: WeiszfeldConfig = DEFAULT_WEISZFELD) -> List[str]:
    """Rounds in which E_max of the honest box did not at least halve."""
    instance = contraction_instance(params, spec, seed)
    traces = run_agreement(instance, AgreementAlgo.HYPERBOX_GEO, rounds, 0.0, cfg)
    return [
        f"d={params.d} {spec.kind.value} seed {seed} round {tr.round_index}: "
        f"{tr.output_e_max:.6g} > {tr.input_e_max:.6g} / 2"
        for tr in traces
        if tr.output_e_max > tr.input_e_max / 2 + 1e-9
    ]


def _contraction_job(job: Tuple[int, int, int]) -> List[str]:
    d, which, seed = job
    params = SystemParams(n=10, t=2, f=2, d=d)
    return contraction_violations(params, contraction_adversaries(params.f, d)[which], seed)


def repro_hyperbox_contraction(seed: int = 0, cfg: WeiszfeldConfig = DEFAULT_WEISZFELD) -> ReproResult:
    result = ReproResult("hyperbox-contraction")
    kinds = len(contraction_adversaries(2, 1))
    jobs = [
        (d, which, seed * 1000 + k)
        for d in CONTRACTION_DIMS for which in range(kinds) for k in range(CONTRACTION_SEEDS)
    ]
    found = [line for chunk in map_ordered(_contraction_job, jobs) for line in chunk]
    result.check(not found, f"E_max halves every round in {len(jobs)} instances x {CONTRACTION_ROUNDS} rounds")
    result.details.extend(found)
    return result


# -- approximation sweeps -------------------------------------------------------

def sweep_params(seed: int, index: int, max_n: int = 12, max_t: int = 3, max_d: int = 5,
                 d: Optional[int] = None) -> Tuple[SystemParams, AdversarySpec]:
    """Seeded parameters with f = t and a Byzantine vector rule for one sweep instance."""
    rng = np.random.default_rng([seed, index])
    t = int(rng.integers(1, max_t + 1))
    n = int(rng.integers(3 * t + 1, max(max_n, 3 * t + 1) + 1))
    dim = d if d is not None else int(rng.integers(1, max_d + 1))
    rules = list(VectorRule)
    spec = AdversarySpec(AdversaryKind.SELECTIVE_OMISSION, t, vector_rule=rules[index % len(rules)])
    return SystemParams(n=n, t=t, f=t, d=dim), spec


def _sweep_job(job: Tuple[int, int]) -> Tuple[SystemParams, List[EvalRow]]:
    seed, index = job
    params, spec = sweep_params(seed, index)
    return params, ratio_rows(index, seed * 100_003 + index, params, spec, AgreementAlgo.HYPERBOX_GEO,
                              DEFAULT_WEISZFELD)


def _sweep(seed: int) -> List[Tuple[SystemParams, List[EvalRow]]]:
    return map_ordered(_sweep_job, [(seed, i) for i in range(SWEEP_SIZE)])


def repro_md_one_round(seed: int = 0, cfg: WeiszfeldConfig = DEFAULT_WEISZFELD) -> ReproResult:
    result = ReproResult("md-one-round-2approx")
    worst = 0.0
    for params, rows in _sweep(seed):
        row = next(r for r in rows if r.rule == MD_ONE_ROUND)
        if not row.ratio.within(2.0 + SLACK):
            result.check(False, f"instance {row.instance} (n={params.n} t={params.t} d={params.d}): {row.ratio}")
        elif not row.ratio.unbounded:
            worst = max(worst, row.ratio.value)
    result.check(result.passed, f"one-round min_diam_geo ratio <= 2 over {SWEEP_SIZE} instances (max {worst:.6g})")
    return result


def repro_hyperbox_2sqrt_d(seed: int = 0, cfg: WeiszfeldConfig = DEFAULT_WEISZFELD) -> ReproResult:
    result = ReproResult("hyperbox-2sqrt-d")
    worst = 0.0
    for params, rows in _sweep(seed):
        row = next(r for r in rows if r.rule == AgreementAlgo.HYPERBOX_GEO.value)
        bound = 2.0 * math.sqrt(params.d)
        if not row.ratio.within(bound + SLACK):
            result.check(False, f"instance {row.instance} (d={params.d}): {row.ratio} > {bound:.6g}")
        elif not row.ratio.unbounded:
            worst = max(worst, row.ratio.value / bound)
    result.check(result.passed, f"hyperbox_geo ratio <= 2 sqrt(d) over {SWEEP_SIZE} instances "
                                f"(max {worst:.3g} of the bound)")
    return result


def repro_geom_in_convex(seed: int = 0, cfg: WeiszfeldConfig = DEFAULT_WEISZFELD) -> ReproResult:
    result = ReproResult("geom-in-convex")
    for index in range(SWEEP_SIZE):
        params, spec = sweep_params(seed, index, max_n=10, d=2)
        honest, received = full_delivery(params, seed * 100_003 + index, spec)
        mu = geometric_median(honest, cfg)
        medians = enumerate_s_geo(received, params, cfg).as_array()
        if not convex_hull_membership_2d(mu, medians, TAU):
            result.check(False, f"2-D instance {index}: honest median outside the hull of S_geo")
    result.check(result.passed, f"honest median inside Conv(S_geo) in {SWEEP_SIZE} planar instances")

    boxed = True
    for index in range(SWEEP_SIZE):
        params, spec = sweep_params(seed + 1, index)
        honest, received = full_delivery(params, (seed + 1) * 100_003 + index, spec)
        if not geo_hyperbox(received, params, cfg).contains(geometric_median(honest, cfg), tol=TAU):
            boxed = False
            result.details.append(f"FAIL instance {index} (d={params.d}): honest median outside GH")
    result.check(boxed, f"honest median inside GH in {SWEEP_SIZE} instances with d <= 5")
    return result


REPRODUCTIONS: Dict[str, Callable[[int, WeiszfeldConfig], ReproResult]] = {
    "md-oscillation": repro_md_oscillation,
    "krum-unbounded": repro_krum_unbounded,
    "safearea-unbounded": repro_safearea,
    "hyperbox-contraction": repro_hyperbox_contraction,
    "md-one-round-2approx": repro_md_one_round,
    "hyperbox-2sqrt-d": repro_hyperbox_2sqrt_d,
    "geom-in-convex": repro_geom_in_convex,
}


def cmd_repro(name: str, seed: int = 0, out_dir: Optional[str] = None, quiet: bool = False,
              cfg: WeiszfeldConfig = DEFAULT_WEISZFELD) -> int:
    """Run one reproduction (or ``all``); 0 if every check passed, 1 otherwise, 2 for unknown names."""
    names = list(REPRODUCTIONS) if name == "all" else [name]
    unknown = [n for n in names if n not in REPRODUCTIONS]
    if unknown:
        print_colored(f"❌ Unknown reproduction '{unknown[0]}'. Available:", Colors.RED)
        for known in REPRODUCTIONS:
            print(f"  {known}")
        return 2

    results = []
    for current in names:
        if not quiet:
            print_colored(f"🔬 {current}", Colors.BOLD)
        result = REPRODUCTIONS[current](seed, cfg)
        results.append(result)
        if not quiet:
            for line in result.details:
                color = Colors.RED if line.startswith("FAIL") else Colors.GREEN
                print_colored(f"  {line}", color)
        status = "passed" if result.passed else "FAILED"
        logger.info("%s %s", current, status)
        if not result.passed:
            print_colored(f"❌ {current} failed", Colors.RED)
        elif not quiet:
            print_colored(f"✅ {current} passed", Colors.GREEN)

    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        stem = "all" if name == "all" else name
        with open(os.path.join(out_dir, f"repro_{stem}.json"), "w", encoding="utf-8") as f:
            json.dump({"seed": seed, "results": [asdict(r) for r in results]}, f, indent=2)
            f.write("\n")
    return 0 if all(r.passed for r in results) else 1
