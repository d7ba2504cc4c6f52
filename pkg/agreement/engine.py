"""Synchronous round simulator for approximate agreement under reliable broadcast."""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from adversary.behaviors import Adversary
from aggregation.weiszfeld import DEFAULT_WEISZFELD, WeiszfeldConfig
from core.errors import AgreementInvariantError, InvalidParamsError
from core.hyperbox import Hyperbox, bounding_box, e_max
from core.messages import Broadcast, check_reliable
from core.params import AgreementInstance
from core.vector import TAU, Vector, diameter
from agreement.rounds import AgreementAlgo, RoundOutcome, agreement_step

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NodeRecord:
    node: int
    senders: Tuple[int, ...]
    received: np.ndarray
    trusted_box: Optional[Hyperbox]
    median_box: Optional[Hyperbox]
    chosen: Vector


@dataclass(frozen=True)
class RoundTrace:
    """Everything that happened in one round, seen from the simulator."""

    round_index: int
    inputs: np.ndarray
    nodes: Tuple[NodeRecord, ...]
    honest_box: Hyperbox

    @property
    def outputs(self) -> np.ndarray:
        return np.vstack([rec.chosen for rec in self.nodes])

    @property
    def input_diameter(self) -> float:
        return diameter(self.inputs)

    @property
    def output_diameter(self) -> float:
        return diameter(self.outputs)

    @property
    def input_e_max(self) -> float:
        return e_max(self.honest_box)

    @property
    def output_e_max(self) -> float:
        return e_max(bounding_box(self.outputs))


def sub_round_count(iteration: int) -> int:
    """Agreement sub-rounds used in learning iteration t >= 1: max(1, ceil(log2(t + 1)))."""
    return max(1, math.ceil(math.log2(iteration + 1)))


def _deliver(node: int, honest: np.ndarray, byzantine: List[Broadcast]) -> Tuple[Tuple[int, ...], np.ndarray]:
    """Honest messages reach everyone; Byzantine ones only their recipients."""
    senders = list(range(honest.shape[0]))
    rows = [honest]
    extra = [msg for msg in byzantine if node in msg.recipients]
    if extra:
        senders.extend(msg.sender for msg in extra)
        rows.append(np.vstack([msg.vector for msg in extra]))
    return tuple(senders), np.vstack(rows)


def run_agreement(instance: AgreementInstance, algo: AgreementAlgo, rounds: int, eps: float,
                  cfg: WeiszfeldConfig = DEFAULT_WEISZFELD) -> List[RoundTrace]:
    """Run up to ``rounds`` rounds, stopping early once the honest diameter drops below eps."""
    if rounds < 1:
        raise InvalidParamsError(f"rounds must be positive (got {rounds})")
    if eps < 0:
        raise InvalidParamsError(f"eps must be non-negative (got {eps})")
    algo = AgreementAlgo(algo)
    params = instance.params
    adversary = Adversary(instance.adversary, params, instance.seed)
    current = instance.honest_array.copy()
    traces: List[RoundTrace] = []

    for r in range(1, rounds + 1):
        byzantine = check_reliable(adversary.broadcasts(r, current), adversary.byzantine_ids)
        honest_box = bounding_box(current)
        cache: Dict[bytes, RoundOutcome] = {}
        records = []
        for node in adversary.honest_ids:
            senders, received = _deliver(node, current, byzantine)
            if instance.adversarial_tie_break and not algo.uses_hyperbox:
                outcome = agreement_step(
                    received, params, algo, cfg,
                    tie_break=lambda cands, node=node, received=received:
                        adversary.tie_break(node, received, cands),
                )
            else:
                key = received.tobytes()
                if key not in cache:
                    cache[key] = agreement_step(received, params, algo, cfg)
                outcome = cache[key]
            if algo.uses_hyperbox and not honest_box.contains(outcome.vector, tol=TAU):
                raise AgreementInvariantError(
                    f"round {r}: node {node} left the honest box with {outcome.vector.tolist()}"
                )
            records.append(NodeRecord(
                node=node,
                senders=senders,
                received=received,
                trusted_box=outcome.trusted_box,
                median_box=outcome.median_box,
                chosen=outcome.vector,
            ))
        trace = RoundTrace(round_index=r, inputs=current, nodes=tuple(records), honest_box=honest_box)
        traces.append(trace)
        current = trace.outputs
        spread = trace.output_diameter
        logger.debug("round %d: honest diameter %.6g, E_max %.6g", r, spread, trace.output_e_max)
        if spread < eps:
            break
    return traces
