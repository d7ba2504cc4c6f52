"""Centralized and decentralized collaborative learning under Byzantine clients.

Clients 0..h-1 are honest and clients h..n-1 are Byzantine, h = n - f. Every
client owns the shard with its id. Byzantine clients compute an honest gradient
first and then apply their attack to it.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Tuple

import numpy as np

from adversary.behaviors import Adversary, AdversaryKind, AdversarySpec, RecipientRule
from aggregation.rules import krum, mean, multi_krum
from aggregation.weiszfeld import DEFAULT_WEISZFELD, WeiszfeldConfig, geometric_median
from agreement.engine import run_agreement, sub_round_count
from agreement.rounds import AgreementAlgo, agreement_step
from core.errors import InvalidParamsError
from core.messages import check_reliable
from core.params import AgreementInstance, SystemParams
from core.vector import diameter
from csv_handler.parser import ClientRow, IterationRow
from learning.data import Dataset
from learning.models import Model, accuracy, loss_and_gradient
from learning.splits import DataSplit

logger = logging.getLogger(__name__)


class AggregationRule(str, Enum):
    MEAN = "mean"
    GEO_MEDIAN = "geo_median"
    KRUM = "krum"
    MULTI_KRUM = "multi_krum"
    MD_MEAN = "md_mean"
    MD_GEO = "md_geo"
    BOX_MEAN = "box_mean"
    BOX_GEO = "box_geo"

    @property
    def agreement_algo(self) -> Optional[AgreementAlgo]:
        return {
            AggregationRule.MD_MEAN: AgreementAlgo.MIN_DIAM_MEAN,
            AggregationRule.MD_GEO: AgreementAlgo.MIN_DIAM_GEO,
            AggregationRule.BOX_MEAN: AgreementAlgo.HYPERBOX_MEAN,
            AggregationRule.BOX_GEO: AgreementAlgo.HYPERBOX_GEO,
        }.get(self)


class Architecture(str, Enum):
    CENTRALIZED = "centralized"
    DECENTRALIZED = "decentralized"


@dataclass(frozen=True)
class LearningConfig:
    n: int
    t: int
    f: int
    model: Model
    rule: AggregationRule
    architecture: Architecture = Architecture.CENTRALIZED
    iterations: int = 150
    batch_size: Optional[int] = 32
    learning_rate: float = 0.5
    seed: int = 0
    attack: AdversaryKind = AdversaryKind.SIGN_FLIP
    attack_recipients: RecipientRule = RecipientRule.HALF
    multi_krum_q: int = 3
    decay_floor: float = 0.1
    weiszfeld: WeiszfeldConfig = DEFAULT_WEISZFELD

    def __post_init__(self):
        object.__setattr__(self, "rule", AggregationRule(self.rule))
        object.__setattr__(self, "architecture", Architecture(self.architecture))
        object.__setattr__(self, "attack", AdversaryKind(self.attack))
        object.__setattr__(self, "attack_recipients", RecipientRule(self.attack_recipients))
        problems = []
        if self.iterations < 1:
            problems.append(f"iterations must be at least 1 (got {self.iterations})")
        if self.batch_size is not None and self.batch_size < 1:
            problems.append(f"batch_size must be positive (got {self.batch_size})")
        if not self.learning_rate > 0:
            problems.append(f"learning_rate must be positive (got {self.learning_rate})")
        if not 0 < self.decay_floor <= 1:
            problems.append(f"decay_floor must be in (0, 1] (got {self.decay_floor})")
        if self.multi_krum_q < 1:
            problems.append(f"multi_krum_q must be positive (got {self.multi_krum_q})")
        if self.attack is AdversaryKind.MD_OSCILLATION:
            problems.append("md_oscillation is an agreement-only attack")
        if self.architecture is Architecture.DECENTRALIZED and self.rule.agreement_algo is None:
            problems.append(f"decentralized runs need an agreement rule, not {self.rule.value}")
        try:
            self.params
        except InvalidParamsError as e:
            problems.append(str(e))
        if problems:
            raise InvalidParamsError("; ".join(problems))

    @property
    def params(self) -> SystemParams:
        return SystemParams(self.n, self.t, self.f, self.model.param_count)


@dataclass(frozen=True)
class LearningContext:
    config: LearningConfig
    split: DataSplit
    test: Dataset

    def __post_init__(self):
        if len(self.split.shards) != self.config.n:
            raise InvalidParamsError(f"{len(self.split.shards)} shards for {self.config.n} clients")


@dataclass(frozen=True)
class LearningState:
    """One parameter vector per honest client (a single one when centralized)."""

    thetas: Tuple[np.ndarray, ...]
    iteration: int = 0
    loss: float = float("nan")
    gradient_diameter: float = 0.0
    agreed_diameter: float = 0.0


@dataclass
class LearningTrace:
    config: LearningConfig
    records: List[IterationRow] = field(default_factory=list)
    clients: List[ClientRow] = field(default_factory=list)
    agreed_diameters: List[float] = field(default_factory=list)

    @property
    def final_accuracy(self) -> float:
        return self.records[-1].accuracy_mean


def learning_rate(eta: float, iterations: int, t: int, floor: float = 0.1) -> float:
    """Linear decay eta * (1 - (eta / T) * t), never below eta * floor."""
    return max(eta * (1.0 - (eta / iterations) * t), eta * floor)


def mean_accuracy(accs: List[float]) -> float:
    # division can round one ulp outside [min, max]
    return min(max(math.fsum(accs) / len(accs), min(accs)), max(accs))


def initial_state(ctx: LearningContext) -> LearningState:
    cfg = ctx.config
    theta = cfg.model.init_params(cfg.seed)
    copies = 1 if cfg.architecture is Architecture.CENTRALIZED else cfg.params.honest_count
    return LearningState(thetas=tuple(theta.copy() for _ in range(copies)))


def _client_gradient(ctx: LearningContext, client: int, theta: np.ndarray, iteration: int) -> Tuple[float, np.ndarray]:
    cfg = ctx.config
    shard = ctx.split.shards[client]
    if cfg.batch_size is None:
        x, y = shard.features, shard.labels
    else:
        rng = np.random.default_rng([cfg.seed, client, iteration])
        idx = rng.integers(0, len(shard), size=cfg.batch_size)
        x, y = shard.features[idx], shard.labels[idx]
    return loss_and_gradient(cfg.model, theta, x, y)


def _attack_spec(cfg: LearningConfig, byzantine_grads: List[np.ndarray]) -> AdversarySpec:
    if cfg.f == 0:
        return AdversarySpec.honest_only()
    if cfg.attack is AdversaryKind.SIGN_FLIP:
        return AdversarySpec(AdversaryKind.SIGN_FLIP, cfg.f, flip_vectors=tuple(byzantine_grads),
                             recipient_rule=cfg.attack_recipients)
    if cfg.attack is AdversaryKind.FIXED_VECTOR:
        return AdversarySpec(AdversaryKind.FIXED_VECTOR, cfg.f, vector=np.zeros(cfg.model.param_count))
    return AdversarySpec(cfg.attack, cfg.f, recipient_rule=cfg.attack_recipients)


def aggregate(rule: AggregationRule, vectors: np.ndarray, params: SystemParams,
              cfg: WeiszfeldConfig = DEFAULT_WEISZFELD, q: int = 3) -> np.ndarray:
    """Single-shot server-side aggregation of the received gradients."""
    rule = AggregationRule(rule)
    if rule is AggregationRule.MEAN:
        return mean(vectors)
    if rule is AggregationRule.GEO_MEDIAN:
        return geometric_median(vectors, cfg)
    if rule is AggregationRule.KRUM:
        return krum(vectors, params)
    if rule is AggregationRule.MULTI_KRUM:
        return multi_krum(vectors, params, min(q, len(vectors)))
    return agreement_step(vectors, params, rule.agreement_algo, cfg).vector


def centralized_round(state: LearningState, ctx: LearningContext) -> LearningState:
    cfg = ctx.config
    params = cfg.params
    h = params.honest_count
    theta = state.thetas[0]
    t = state.iteration

    losses, honest = zip(*(_client_gradient(ctx, i, theta, t) for i in range(h)))
    honest = np.vstack(honest)
    byzantine = [_client_gradient(ctx, b, theta, t)[1] for b in range(h, cfg.n)]

    adversary = Adversary(_attack_spec(cfg, byzantine), params, cfg.seed)
    messages = check_reliable(adversary.broadcasts(t + 1, honest), adversary.byzantine_ids)
    received = [m.vector for m in messages if m.recipients]
    vectors = np.vstack([honest] + received) if received else honest

    update = aggregate(cfg.rule, vectors, params, cfg.weiszfeld, cfg.multi_krum_q)
    gamma = learning_rate(cfg.learning_rate, cfg.iterations, t, cfg.decay_floor)
    return LearningState(
        thetas=(theta - gamma * update,),
        iteration=t + 1,
        loss=float(np.mean(losses)),
        gradient_diameter=diameter(honest),
    )


def decentralized_round(state: LearningState, ctx: LearningContext, t: Optional[int] = None) -> LearningState:
    """Local gradients, log-many agreement sub-rounds, then a local step per honest client."""
    cfg = ctx.config
    params = cfg.params
    h = params.honest_count
    t = state.iteration if t is None else t

    losses, honest = zip(*(_client_gradient(ctx, i, state.thetas[i], t) for i in range(h)))
    honest = np.vstack(honest)
    # a Byzantine client borrows the model of an honest one
    byzantine = [_client_gradient(ctx, b, state.thetas[(b - h) % h], t)[1] for b in range(h, cfg.n)]

    instance = AgreementInstance(params, tuple(honest), _attack_spec(cfg, byzantine),
                                 seed=cfg.seed * 100_003 + t)
    traces = run_agreement(instance, cfg.rule.agreement_algo, sub_round_count(t + 1), 0.0, cfg.weiszfeld)
    agreed = traces[-1].outputs

    gamma = learning_rate(cfg.learning_rate, cfg.iterations, t, cfg.decay_floor)
    return LearningState(
        thetas=tuple(theta - gamma * g for theta, g in zip(state.thetas, agreed)),
        iteration=t + 1,
        loss=float(np.mean(losses)),
        gradient_diameter=diameter(honest),
        agreed_diameter=traces[-1].output_diameter,
    )


def run_learning(ctx: LearningContext,
                 on_iteration: Optional[Callable[[int, int], None]] = None) -> LearningTrace:
    """Run every iteration and record test accuracy after each update."""
    cfg = ctx.config
    step = centralized_round if cfg.architecture is Architecture.CENTRALIZED else decentralized_round
    state = initial_state(ctx)
    trace = LearningTrace(config=cfg)
    logger.info("learning: %s %s, n=%d f=%d, %d iterations",
                cfg.architecture.value, cfg.rule.value, cfg.n, cfg.f, cfg.iterations)

    for _ in range(cfg.iterations):
        state = step(state, ctx)
        accs = [accuracy(cfg.model, theta, ctx.test.features, ctx.test.labels) for theta in state.thetas]
        trace.records.append(IterationRow(
            iteration=state.iteration,
            accuracy_mean=mean_accuracy(accs),
            accuracy_min=min(accs),
            loss=state.loss,
            gradient_diameter=state.gradient_diameter,
        ))
        if cfg.architecture is Architecture.DECENTRALIZED:
            trace.clients.extend(ClientRow(state.iteration, i, a) for i, a in enumerate(accs))
            trace.agreed_diameters.append(state.agreed_diameter)
        if on_iteration is not None:
            on_iteration(state.iteration, cfg.iterations)
    logger.debug("learning finished: accuracy %.4f", trace.final_accuracy)
    return trace
