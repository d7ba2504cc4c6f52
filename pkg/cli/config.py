"""INI experiment configuration with key-path validation.

Every problem is reported as ``section.key: message`` and all of them are raised
together as one ConfigError, before any run starts or any file is written.
"""

import configparser
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple, Type

from adversary.behaviors import AdversaryKind, AdversarySpec, RecipientRule, VectorRule
from aggregation.weiszfeld import WeiszfeldConfig
from agreement.rounds import AgreementAlgo
from core.errors import ByzAggError, ConfigError
from core.params import SystemParams
from learning.loops import AggregationRule, Architecture, LearningConfig
from learning.models import Model, ModelKind
from learning.splits import SplitKind

REQUIRED = object()


class DataSource(str, Enum):
    BLOBS = "blobs"
    CSV = "csv"


class InstanceKind(str, Enum):
    RANDOM = "random"
    MD_OSCILLATION = "md_oscillation"


def _int(text: str) -> int:
    return int(text)


def _seed(text: str) -> int:
    value = int(text)
    if value < 0:
        raise ValueError("must be an unsigned integer")
    return value


def _float(text: str) -> float:
    value = float(text)
    if math.isnan(value):
        raise ValueError("NaN is not allowed")
    return value


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "yes", "true", "on"):
        return True
    if lowered in ("0", "no", "false", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _vector(text: str) -> Tuple[float, ...]:
    values = tuple(_float(part) for part in text.split(",") if part.strip())
    if not values or not all(math.isfinite(v) for v in values):
        raise ValueError("expected a comma-separated list of finite numbers")
    return values


def _seeds(text: str) -> Tuple[int, ...]:
    values = tuple(_seed(part) for part in text.split(",") if part.strip())
    if not values:
        raise ValueError("expected at least one seed")
    return values


def _batch(text: str) -> Optional[int]:
    return None if text.strip().lower() == "full" else int(text)


def _choice(enum: Type[Enum]) -> Callable[[str], Enum]:
    def parse(text: str) -> Enum:
        try:
            return enum(text.strip().lower())
        except ValueError:
            raise ValueError(f"expected one of {', '.join(e.value for e in enum)}") from None
    return parse


def _choices(enum: Type[Enum]) -> Callable[[str], Tuple[Enum, ...]]:
    one = _choice(enum)

    def parse(text: str) -> Tuple[Enum, ...]:
        values = tuple(one(part) for part in text.split(",") if part.strip())
        if not values:
            raise ValueError("expected at least one value")
        return values
    return parse


# (section, key) -> (parser, default)
SCHEMA: Dict[Tuple[str, str], Tuple[Callable[[str], Any], Any]] = {
    ("run", "seed"): (_seed, 0),
    ("run", "out"): (str, "results"),
    ("run", "name"): (str, "byzagg"),
    ("params", "n"): (_int, REQUIRED),
    ("params", "t"): (_int, REQUIRED),
    ("params", "f"): (_int, None),
    ("params", "d"): (_int, None),
    ("weiszfeld", "tol"): (_float, 1e-9),
    ("weiszfeld", "max_iter"): (_int, 1000),
    ("weiszfeld", "singularity_eps"): (_float, 1e-12),
    ("agreement", "algo"): (_choice(AgreementAlgo), AgreementAlgo.HYPERBOX_GEO),
    ("agreement", "rounds"): (_int, 10),
    ("agreement", "eps"): (_float, 1e-6),
    ("agreement", "instance"): (_choice(InstanceKind), InstanceKind.RANDOM),
    ("agreement", "scale"): (_float, 1.0),
    ("agreement", "v1"): (_vector, None),
    ("agreement", "v2"): (_vector, None),
    ("adversary", "kind"): (_choice(AdversaryKind), AdversaryKind.CRASH),
    ("adversary", "crash_round"): (_int, 1),
    ("adversary", "vector"): (_vector, None),
    ("adversary", "vector_rule"): (_choice(VectorRule), VectorRule.OUTLIER),
    ("adversary", "recipient_rule"): (_choice(RecipientRule), RecipientRule.ALL),
    ("adversary", "outlier_scale"): (_float, 10.0),
    ("eval", "instances"): (_int, 100),
    ("eval", "multi_krum_q"): (_int, 3),
    ("eval", "krum_unbounded"): (_bool, True),
    ("eval", "scale"): (_float, 1.0),
    ("learning", "architecture"): (_choice(Architecture), Architecture.DECENTRALIZED),
    ("learning", "rules"): (_choices(AggregationRule), (AggregationRule.BOX_GEO,)),
    ("learning", "model"): (_choice(ModelKind), ModelKind.SOFTMAX),
    ("learning", "hidden"): (_int, 32),
    ("learning", "iterations"): (_int, 150),
    ("learning", "batch_size"): (_batch, 32),
    ("learning", "learning_rate"): (_float, 0.5),
    ("learning", "decay_floor"): (_float, 0.1),
    ("learning", "multi_krum_q"): (_int, 3),
    ("learning", "attack"): (_choice(AdversaryKind), AdversaryKind.SIGN_FLIP),
    ("learning", "attack_recipients"): (_choice(RecipientRule), RecipientRule.HALF),
    ("learning", "seeds"): (_seeds, None),
    ("data", "source"): (_choice(DataSource), DataSource.BLOBS),
    ("data", "path"): (str, None),
    ("data", "max_value"): (_float, 255.0),
    ("data", "num_classes"): (_int, 10),
    ("data", "per_class"): (_int, 200),
    ("data", "spread"): (_float, 1.0),
    ("data", "input_dim"): (_int, 16),
    ("data", "center_scale"): (_float, 1.5),
    ("data", "split"): (_choice(SplitKind), SplitKind.MILD),
    ("data", "test_fraction"): (_float, 0.1),
}

COMMAND_KEYS = {
    "agree": [("params", "f"), ("params", "d"), ("agreement", "algo"), ("agreement", "rounds")],
    "eval": [("params", "d"), ("agreement", "algo")],
    "learn": [("params", "f"), ("learning", "rules"), ("learning", "iterations")],
}


@dataclass
class ExperimentConfig:
    """Parsed values keyed by (section, key), plus helpers building domain objects."""

    command: str
    values: Dict[Tuple[str, str], Any] = field(default_factory=dict)
    overridden: frozenset = frozenset()

    def get(self, section: str, key: str) -> Any:
        return self.values[(section, key)]

    @property
    def seed(self) -> int:
        return self.get("run", "seed")

    @property
    def out_dir(self) -> str:
        return self.get("run", "out")

    def system_params(self) -> SystemParams:
        n, t = self.get("params", "n"), self.get("params", "t")
        f = t if self.command == "eval" else self.get("params", "f")
        d = self.get("params", "d") or 1
        return SystemParams(n, t, f, d)

    def weiszfeld(self) -> WeiszfeldConfig:
        return WeiszfeldConfig(
            tol=self.get("weiszfeld", "tol"),
            max_iter=self.get("weiszfeld", "max_iter"),
            singularity_eps=self.get("weiszfeld", "singularity_eps"),
        )

    def adversary_spec(self, f: int) -> AdversarySpec:
        if f == 0:
            return AdversarySpec.honest_only()
        return AdversarySpec(
            kind=self.get("adversary", "kind"),
            f=f,
            crash_round=self.get("adversary", "crash_round"),
            vector=self.get("adversary", "vector"),
            vector_rule=self.get("adversary", "vector_rule"),
            recipient_rule=self.get("adversary", "recipient_rule"),
            outlier_scale=self.get("adversary", "outlier_scale"),
        )

    def learning_seeds(self) -> Tuple[int, ...]:
        # --seed overrides the suite as well
        if ("run", "seed") in self.overridden or self.get("learning", "seeds") is None:
            return (self.seed,)
        return self.get("learning", "seeds")

    def learning_config(self, rule: AggregationRule, seed: int, input_dim: int,
                        num_classes: int) -> LearningConfig:
        model = Model(self.get("learning", "model"), input_dim, num_classes, self.get("learning", "hidden"))
        return LearningConfig(
            n=self.get("params", "n"),
            t=self.get("params", "t"),
            f=self.get("params", "f"),
            model=model,
            rule=rule,
            architecture=self.get("learning", "architecture"),
            iterations=self.get("learning", "iterations"),
            batch_size=self.get("learning", "batch_size"),
            learning_rate=self.get("learning", "learning_rate"),
            seed=seed,
            attack=self.get("learning", "attack"),
            attack_recipients=self.get("learning", "attack_recipients"),
            multi_krum_q=self.get("learning", "multi_krum_q"),
            decay_floor=self.get("learning", "decay_floor"),
            weiszfeld=self.weiszfeld(),
        )


def _read_sections(path: str, problems: List[str]) -> Dict[Tuple[str, str], str]:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as f:
            parser.read_file(f)
    except OSError as e:
        raise ConfigError([f"config: cannot read {path}: {e.strerror or e}"]) from e
    except configparser.Error as e:
        raise ConfigError([f"config: {e.message.strip()}"]) from e
    raw = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            if (section, key) not in SCHEMA:
                problems.append(f"{section}.{key}: unknown key")
            else:
                raw[(section, key)] = value
    return raw


def _check_adversary(cfg: ExperimentConfig, params: SystemParams, problems: List[str]) -> None:
    if cfg.get("adversary", "kind") is AdversaryKind.MD_OSCILLATION:
        problems.append("adversary.kind: md_oscillation needs agreement.instance = md_oscillation")
        return
    vector = cfg.get("adversary", "vector")
    if vector is not None and len(vector) != params.d:
        problems.append(f"adversary.vector: has {len(vector)} coordinates, params.d is {params.d}")
        return
    try:
        cfg.adversary_spec(params.f)
    except ByzAggError as e:
        problems.append(f"adversary: {e}")


def _cross_check(cfg: ExperimentConfig, problems: List[str]) -> None:
    try:
        params = cfg.system_params()
    except ByzAggError as e:
        problems.append(f"params: {e}")
        return
    try:
        cfg.weiszfeld()
    except ByzAggError as e:
        problems.append(f"weiszfeld: {e}")

    if cfg.command == "agree":
        if cfg.get("agreement", "rounds") < 1:
            problems.append("agreement.rounds: must be at least 1")
        if cfg.get("agreement", "eps") < 0:
            problems.append("agreement.eps: must be non-negative")
        if cfg.get("agreement", "instance") is InstanceKind.MD_OSCILLATION:
            for key in ("v1", "v2"):
                v = cfg.get("agreement", key)
                if v is None:
                    problems.append(f"agreement.{key}: required for md_oscillation instances")
                elif len(v) != params.d:
                    problems.append(f"agreement.{key}: has {len(v)} coordinates, params.d is {params.d}")
        else:
            _check_adversary(cfg, params, problems)
    elif cfg.command == "eval":
        _check_adversary(cfg, params, problems)
        if cfg.get("eval", "instances") < 1:
            problems.append("eval.instances: must be at least 1")
        if cfg.get("eval", "multi_krum_q") < 1:
            problems.append("eval.multi_krum_q: must be positive")
    elif cfg.command == "learn":
        if cfg.get("learning", "iterations") < 1:
            problems.append("learning.iterations: must be at least 1")
        rules = list(cfg.get("learning", "rules"))
        if cfg.get("learning", "architecture") is Architecture.DECENTRALIZED:
            for rule in rules:
                if rule.agreement_algo is None:
                    problems.append(f"learning.rules: {rule.value} cannot run decentralized")
            rules = [r for r in rules if r.agreement_algo is not None]
        if rules:
            # input width of a CSV dataset is only known after loading
            try:
                cfg.learning_config(rules[0], cfg.seed, cfg.get("data", "input_dim"),
                                    max(cfg.get("data", "num_classes"), 2))
            except ByzAggError as e:
                problems.append(f"learning: {e}")
        if cfg.get("data", "source") is DataSource.CSV and not cfg.get("data", "path"):
            problems.append("data.path: required when data.source = csv")
        if not 0 < cfg.get("data", "test_fraction") < 1:
            problems.append("data.test_fraction: must be in (0, 1)")


def load_config(path: str, command: str, overrides: Optional[Dict[Tuple[str, str], Any]] = None) -> ExperimentConfig:
    """Parse and validate ``path`` for one subcommand; raises ConfigError listing every problem."""
    problems: List[str] = []
    raw = _read_sections(path, problems)
    values: Dict[Tuple[str, str], Any] = {}
    for (section, key), (parse, default) in SCHEMA.items():
        if (section, key) in raw:
            try:
                values[(section, key)] = parse(raw[(section, key)])
            except ValueError as e:
                problems.append(f"{section}.{key}: {e}")
        elif default is REQUIRED:
            problems.append(f"{section}.{key}: required key is missing")
        else:
            values[(section, key)] = default
    for section, key in COMMAND_KEYS.get(command, []):
        if (section, key) not in raw:
            problems.append(f"{section}.{key}: required key is missing")
    if problems:
        raise ConfigError(sorted(set(problems)))

    given = {k: v for k, v in (overrides or {}).items() if v is not None}
    values.update(given)
    cfg = ExperimentConfig(command=command, values=values, overridden=frozenset(given))
    _cross_check(cfg, problems)
    if problems:
        raise ConfigError(problems)
    return cfg
