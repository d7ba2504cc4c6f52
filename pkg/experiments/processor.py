"""Orchestration of the agree, eval and learn subcommands."""

import json
import logging
import math
import os
from datetime import datetime, timezone
from statistics import median
from typing import Any, Dict, List, Tuple

import numpy as np

from adversary.behaviors import Adversary, AdversarySpec
from adversary.constructions import make_krum_unbounded_instance, make_md_oscillation_instance, random_instance
from aggregation.rules import krum, medoid, multi_krum
from aggregation.weiszfeld import WeiszfeldConfig, geometric_median
from agreement.engine import run_agreement
from agreement.rounds import AgreementAlgo, agreement_step, md_round
from cli.config import DataSource, ExperimentConfig, InstanceKind
from core.errors import CapacityError
from core.params import SystemParams
from core.vector import euclidean_distance
from csv_handler.parser import (
    EvalRow, RoundRow, write_client_csv, write_eval_csv, write_learning_csv, write_round_csv,
)
from geometry.covering_ball import MAX_WELZL_DIM, min_covering_ball
from geometry.ratio import approximation_ratio
from geometry.s_geo import MAX_S_GEO, enumerate_s_geo
from learning.data import generate_blobs, load_csv_dataset, train_test_split
from learning.loops import AggregationRule, LearningContext, LearningTrace, run_learning
from learning.splits import split_dataset
from utils.colors import Colors, print_colored, print_progress_bar
from utils.workers import map_ordered, worker_count

logger = logging.getLogger(__name__)

MD_ONE_ROUND = "md_geo_one_round"


def _write_json(path: str, payload: Dict[str, Any]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _metadata(cfg: ExperimentConfig) -> Dict[str, Any]:
    return {
        "command": cfg.command,
        "seed": cfg.seed,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def _out_path(cfg: ExperimentConfig, suffix: str) -> str:
    return os.path.join(cfg.out_dir, f"{cfg.get('run', 'name')}_{suffix}")


# -- agree -----------------------------------------------------------------

def cmd_agree(cfg: ExperimentConfig, quiet: bool = False) -> int:
    """Simulate one agreement instance and write its round trace and summary."""
    params = cfg.system_params()
    algo = cfg.get("agreement", "algo")
    rounds, eps = cfg.get("agreement", "rounds"), cfg.get("agreement", "eps")
    if cfg.get("agreement", "instance") is InstanceKind.MD_OSCILLATION:
        instance = make_md_oscillation_instance(
            params, cfg.get("agreement", "v1"), cfg.get("agreement", "v2"), seed=cfg.seed,
        )
    else:
        instance = random_instance(params, cfg.seed, cfg.adversary_spec(params.f), cfg.get("agreement", "scale"))

    if not quiet:
        print_colored(f"🤝 Agreement: {algo.value}, n={params.n} t={params.t} f={params.f} d={params.d}", Colors.BOLD)
    traces = run_agreement(instance, algo, rounds, eps, cfg.weiszfeld())

    rows = [
        RoundRow(tr.round_index, rec.node, tuple(rec.chosen.tolist()), tr.output_diameter, tr.output_e_max)
        for tr in traces for rec in tr.nodes
    ]
    initial = traces[0].input_diameter
    final = traces[-1].output_diameter
    summary = {
        "algo": algo.value,
        "converged": bool(final < eps),
        "rounds_used": len(traces),
        "initial_diameter": initial,
        "final_diameter": final,
        "diameters": [tr.output_diameter for tr in traces],
        "e_max": [tr.output_e_max for tr in traces],
        "metadata": _metadata(cfg),
    }
    os.makedirs(cfg.out_dir, exist_ok=True)
    write_round_csv(_out_path(cfg, "rounds.csv"), rows)
    _write_json(_out_path(cfg, "summary.json"), summary)

    if not quiet:
        print_colored(f"\n📈 Summary:", Colors.BOLD)
        print(f"  Rounds used: {len(traces)}")
        print(f"  Initial diameter: {initial:.6g}")
        print(f"  Final diameter: {final:.6g}")
        color = Colors.GREEN if summary["converged"] else Colors.YELLOW
        print_colored(f"{'✅' if summary['converged'] else '⚠️ '} converged = {summary['converged']}", color)
    return 0


# -- eval ------------------------------------------------------------------

def ratio_bounds(algo: AgreementAlgo, d: int) -> Dict[str, float]:
    """Proven one-round bounds; rules missing from the map have none."""
    bounds = {MD_ONE_ROUND: 2.0}
    if algo is AgreementAlgo.HYPERBOX_GEO:
        bounds[algo.value] = 2.0 * math.sqrt(d)
    elif algo is AgreementAlgo.MIN_DIAM_GEO:
        bounds[algo.value] = 2.0
    return bounds


def full_delivery(params: SystemParams, seed: int, spec: AdversarySpec,
                  scale: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """Honest vectors of a seeded instance and what a node receives when every message arrives.

    The received array holds the honest vectors first, then one vector per
    Byzantine node regardless of its recipient set.
    """
    honest = random_instance(params, seed, spec, scale).honest_array
    byzantine = [m.vector for m in Adversary(spec, params, seed).broadcasts(1, honest)]
    return honest, (np.vstack([honest] + byzantine) if byzantine else honest)


def ratio_rows(index: int, seed: int, params: SystemParams, spec: AdversarySpec, algo: AgreementAlgo,
               wcfg: WeiszfeldConfig, q: int = 3, scale: float = 1.0) -> List[EvalRow]:
    """Approximation ratios of one seeded instance, one row per rule."""
    honest, received = full_delivery(params, seed, spec, scale)
    true_geo = geometric_median(honest, wcfg)
    ball = min_covering_ball(enumerate_s_geo(received, params, wcfg).as_array(), seed=seed)
    outputs = {
        algo.value: agreement_step(received, params, algo, wcfg).vector,
        MD_ONE_ROUND: md_round(received, params, wcfg),
        "krum": krum(received, params),
        "multi_krum": multi_krum(received, params, min(q, received.shape[0])),
        "medoid": medoid(received),
    }
    return [
        EvalRow(index, seed, rule, euclidean_distance(out, true_geo), ball.radius,
                approximation_ratio(out, true_geo, ball))
        for rule, out in outputs.items()
    ]


def _eval_job(job: Tuple[ExperimentConfig, int, int]) -> List[EvalRow]:
    cfg, index, seed = job
    params = cfg.system_params()
    return ratio_rows(index, seed, params, cfg.adversary_spec(params.f), cfg.get("agreement", "algo"),
                      cfg.weiszfeld(), cfg.get("eval", "multi_krum_q"), cfg.get("eval", "scale"))


def _krum_rows(index: int, params: SystemParams, seed: int, wcfg: WeiszfeldConfig, q: int) -> List[EvalRow]:
    example = make_krum_unbounded_instance(params, seed=seed, cfg=wcfg)
    outs = {
        "krum_counterexample": example.krum_output,
        "multi_krum_counterexample": multi_krum(example.vectors, params, min(q, example.vectors.shape[0])),
    }
    return [
        EvalRow(index, seed, rule, euclidean_distance(out, example.true_median), example.ball.radius,
                approximation_ratio(out, example.true_median, example.ball))
        for rule, out in outs.items()
    ]


def cmd_eval(cfg: ExperimentConfig, quiet: bool = False) -> int:
    """Sweep seeded instances and report approximation ratios per rule."""
    params = cfg.system_params()
    if params.n > MAX_S_GEO or params.d > MAX_WELZL_DIM:
        raise CapacityError(
            f"eval supports n <= {MAX_S_GEO} and d <= {MAX_WELZL_DIM} (got n={params.n}, d={params.d})"
        )
    algo = cfg.get("agreement", "algo")
    count = cfg.get("eval", "instances")
    if not quiet:
        print_colored(f"📐 Ratio sweep: {count} instances, n={params.n} t={params.t} d={params.d}", Colors.BOLD)

    jobs = [(cfg, i, cfg.seed + i) for i in range(count)]
    rows = [row for chunk in map_ordered(_eval_job, jobs) for row in chunk]
    if cfg.get("eval", "krum_unbounded") and params.quorum >= 3:
        rows += _krum_rows(count, params, cfg.seed, cfg.weiszfeld(), cfg.get("eval", "multi_krum_q"))

    bounds = ratio_bounds(algo, params.d)
    per_rule: Dict[str, Dict[str, Any]] = {}
    violations = []
    for row in rows:
        stats = per_rule.setdefault(row.rule, {"max_ratio": 0.0, "unbounded": 0, "instances": 0})
        stats["instances"] += 1
        if row.ratio.unbounded:
            stats["unbounded"] += 1
        else:
            stats["max_ratio"] = max(stats["max_ratio"], row.ratio.value)
        bound = bounds.get(row.rule)
        if bound is not None and not row.ratio.within(bound + 1e-6):
            violations.append(f"instance {row.instance} ({row.rule}): ratio {row.ratio} > {bound:.6g}")

    os.makedirs(cfg.out_dir, exist_ok=True)
    write_eval_csv(_out_path(cfg, "eval.csv"), rows)
    _write_json(_out_path(cfg, "eval_summary.json"), {
        "algo": algo.value,
        "rules": per_rule,
        "bounds": bounds,
        "violations": violations,
        "metadata": _metadata(cfg),
    })

    if not quiet:
        print_colored(f"\n📈 Summary:", Colors.BOLD)
        for rule, stats in per_rule.items():
            flag = f", {stats['unbounded']} unbounded" if stats["unbounded"] else ""
            print(f"  {rule}: max ratio {stats['max_ratio']:.6g}{flag}")
    for line in violations:
        print_colored(f"❌ {line}", Colors.RED)
    return 1 if violations else 0


# -- learn -----------------------------------------------------------------

def _learn_job(job: Tuple[ExperimentConfig, AggregationRule, int, bool]) -> LearningTrace:
    cfg, rule, seed, show_progress = job
    if cfg.get("data", "source") is DataSource.CSV:
        dataset = load_csv_dataset(cfg.get("data", "path"), cfg.get("data", "max_value"))
    else:
        dataset = generate_blobs(
            num_classes=cfg.get("data", "num_classes"),
            per_class=cfg.get("data", "per_class"),
            spread=cfg.get("data", "spread"),
            seed=seed,
            input_dim=cfg.get("data", "input_dim"),
            center_scale=cfg.get("data", "center_scale"),
        )
    train, test = train_test_split(dataset, cfg.get("data", "test_fraction"), seed)
    split = split_dataset(train, cfg.get("params", "n"), cfg.get("data", "split"), seed)
    config = cfg.learning_config(rule, seed, dataset.input_dim, dataset.num_classes)

    def progress(current: int, total: int) -> None:
        print_progress_bar(current, total, label=f"{rule.value} seed {seed}")

    return run_learning(LearningContext(config, split, test), progress if show_progress else None)


def cmd_learn(cfg: ExperimentConfig, quiet: bool = False) -> int:
    """Run every configured rule over every seed and write the learning traces."""
    rules = cfg.get("learning", "rules")
    seeds = cfg.learning_seeds()
    show_progress = not quiet and worker_count() == 1
    if not quiet:
        print_colored(
            f"🧠 Learning: {cfg.get('learning', 'architecture').value}, "
            f"{len(rules)} rule(s) x {len(seeds)} seed(s), f={cfg.get('params', 'f')}",
            Colors.BOLD,
        )

    jobs = [(cfg, rule, seed, show_progress) for rule in rules for seed in seeds]
    traces = map_ordered(_learn_job, jobs)

    os.makedirs(cfg.out_dir, exist_ok=True)
    runs = []
    for (_, rule, seed, _), trace in zip(jobs, traces):
        stem = f"{rule.value}_seed{seed}"
        write_learning_csv(_out_path(cfg, f"{stem}_learning.csv"), trace.records)
        if trace.clients:
            write_client_csv(_out_path(cfg, f"{stem}_clients.csv"), trace.clients)
        last = trace.records[-1]
        runs.append({
            "rule": rule.value,
            "seed": seed,
            "final_accuracy_mean": last.accuracy_mean,
            "final_accuracy_min": last.accuracy_min,
            "final_agreed_diameter": trace.agreed_diameters[-1] if trace.agreed_diameters else None,
        })
    medians = {
        rule.value: median(r["final_accuracy_mean"] for r in runs if r["rule"] == rule.value)
        for rule in rules
    }
    _write_json(_out_path(cfg, "learning_summary.json"), {
        "architecture": cfg.get("learning", "architecture").value,
        "runs": runs,
        "median_final_accuracy": medians,
        "metadata": _metadata(cfg),
    })

    if not quiet:
        print_colored(f"\n📈 Summary:", Colors.BOLD)
        for rule, acc in sorted(medians.items(), key=lambda kv: -kv[1]):
            print(f"  {rule}: median final accuracy {acc:.4f}")
        print_colored(f"✅ Traces written to {cfg.out_dir}", Colors.GREEN)
    return 0
