"""Run configuration: one TOML or JSON file, env-var secrets, flag overrides."""

import json
import os
import sys
from dataclasses import asdict, dataclass, field

from .attacks import AttackConfig, CandidateProvider, RandomNameProvider
from .attacks.candidates import HARVEST, SUBWORD, SYNONYM
from .corpus import read_corpus
from .errors import ConfigError, IdsubError
from .judge import ChatClient, JudgeConfig, MapPurifier, MockJudge, constant_rule, digit_suffix_rule, marker_rule
from .judge.mock import identity_purifier
from .victim import (
    GENERATION,
    ConjunctionVictim,
    LiteralVictim,
    RemoteVictim,
    ToySummarizer,
    ToyVictim,
    VictimTask,
    train_toy_victim,
)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

VICTIM_TYPES = ("toy", "keyed", "literal", "conjunction", "summarizer", "remote")
STRATEGIES = {"subword": SUBWORD, "synonym": SYNONYM, "harvest": HARVEST}
URL_ENV = {"judge": "IDSUB_JUDGE_URL"}


@dataclass
class RunConfig:
    victims: dict = field(default_factory=dict)
    judge: dict = field(default_factory=dict)
    attack: dict = field(default_factory=dict)
    candidates: dict = field(default_factory=dict)
    datasets: dict = field(default_factory=dict)
    out_dir: str = "runs"
    seed: int = 0
    delta: int = 2
    theta_gen: float = 0.5
    base_dir: str = "."

    def __post_init__(self):
        if self.delta not in (1, 2, 3, 4):
            raise ConfigError(f"delta must be one of 1..4, got {self.delta!r}")
        if not 0 < float(self.theta_gen) <= 1:
            raise ConfigError("theta_gen must be in (0, 1]")
        for key, spec in self.victims.items():
            if not isinstance(spec, dict) or spec.get("type") not in VICTIM_TYPES:
                raise ConfigError(f"victim {key!r} needs a type in {VICTIM_TYPES}")
        for key in ("train", "weights"):
            for vkey, spec in self.victims.items():
                if key in spec:
                    self._require(spec[key], f"victims.{vkey}.{key}")
        for name, path in self.datasets.items():
            self._require(path, f"datasets.{name}")

    def _require(self, path, what):
        if not os.path.exists(self.resolve(path)):
            raise ConfigError(f"{what}: path {path!r} does not exist")

    def resolve(self, path):
        return path if os.path.isabs(path) else os.path.join(self.base_dir, path)

    def to_dict(self):
        d = asdict(self)
        d.pop("base_dir")
        # never echo secrets into reports
        for section in [d["judge"], *d["victims"].values()]:
            for k in list(section):
                if "token" in k and k != "token_env":
                    section[k] = "***"
        return d


def load_config(path=None, overrides=None):
    """Read ``path`` (TOML or JSON; ``None`` means all defaults) and apply ``overrides``."""
    raw = {}
    base = "."
    if path:
        if not os.path.exists(path):
            raise ConfigError(f"config file {path!r} does not exist")
        base = os.path.dirname(os.path.abspath(path))
        try:
            with open(path, "rb") as f:
                raw = json.load(f) if path.endswith(".json") else tomllib.load(f)
        except (ValueError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        section, _, sub = key.partition(".")
        if sub:
            raw.setdefault(section, {})[sub] = value
        else:
            raw[key] = value
    if not raw.get("judge", {}).get("url") and os.environ.get(URL_ENV["judge"]):
        raw.setdefault("judge", {})["url"] = os.environ[URL_ENV["judge"]]
    known = set(RunConfig.__dataclass_fields__) - {"base_dir"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return RunConfig(**raw, base_dir=base)


# -- builders ------------------------------------------------------------------------

def build_victim(config, key):
    if key not in config.victims:
        raise ConfigError(f"victim {key!r} is not defined in the config (known: {sorted(config.victims)})")
    spec = dict(config.victims[key])
    kind = spec.pop("type")
    lang = spec.get("language", "java")
    try:
        if kind == "toy":
            if "weights" in spec:
                return ToyVictim.load(config.resolve(spec["weights"]))
            if "train" not in spec:
                raise ConfigError(f"toy victim {key!r} needs 'train' or 'weights'")
            corpus = read_corpus(config.resolve(spec["train"]))
            rows = [((r.code, r.code2) if r.is_pair else r.code, r.label) for r in corpus]
            return train_toy_victim(rows, seed=spec.get("seed", config.seed), language=lang)
        if kind == "keyed":
            return ToyVictim.keyed(spec["keys"], spec.get("bias", -2.0), lang, spec.get("pair", False))
        if kind == "literal":
            return LiteralVictim(lang, spec.get("confidence", 0.9))
        if kind == "conjunction":
            return ConjunctionVictim(spec["triggers"], spec.get("label", 1), spec.get("confidence", 0.9), lang)
        if kind == "summarizer":
            victim = ToySummarizer(lang, spec.get("max_words", 8))
            victim.task = VictimTask(GENERATION, spec.get("theta_gen", config.theta_gen))
            return victim
        spec.setdefault("theta_gen", config.theta_gen)
        return RemoteVictim.from_config(spec)
    except KeyError as exc:
        raise ConfigError(f"victim {key!r} is missing field {exc}") from None
    except IdsubError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"victim {key!r}: {exc}") from None


def attack_configs(config, methods, budget=None, seed=None):
    params = dict(config.attack)
    params.pop("method", None)
    params.pop("methods", None)
    if budget is not None:
        params["budget"] = budget
    params["seed"] = config.seed if seed is None else seed
    try:
        return [AttackConfig(method=m, **params) for m in methods]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad attack config: {exc}") from None


def build_provider(config, snippets=()):
    spec = config.candidates
    seed = spec.get("seed", config.seed)
    if spec.get("type") == "random":
        return RandomNameProvider(seed=seed)
    names = spec.get("strategies", list(STRATEGIES))
    try:
        strategies = [STRATEGIES[n] for n in names]
    except KeyError as exc:
        raise ConfigError(f"unknown candidate strategy {exc}") from None
    return CandidateProvider(strategies, spec.get("synonyms"), seed).harvest(snippets)


def _mock_rule(spec):
    name, _, arg = spec.partition(":")
    if name == "constant":
        try:
            return constant_rule(int(arg))
        except ValueError:
            raise ConfigError(f"mock judge {spec!r} needs an integer score") from None
    if name == "digit-suffix":
        return digit_suffix_rule()
    if name == "marker" and arg:
        return marker_rule(arg)
    raise ConfigError(f"unknown mock judge {spec!r} (constant:N, digit-suffix, marker:NAME)")


def build_judge(config, records=(), language=None):
    """(client, JudgeConfig) from the ``[judge]`` section.

    ``mock`` selects the offline judge; its ``purifier`` is ``identity`` or
    ``inverse`` (the exact inverse of each record's map, built from ``records``).
    """
    spec = dict(config.judge)
    mock = spec.pop("mock", None)
    purifier_name = spec.pop("purifier", "identity")
    lang = spec.pop("language", None) or language or "java"
    try:
        jcfg = JudgeConfig.from_dict(spec)
    except TypeError as exc:
        raise ConfigError(f"bad judge config: {exc}") from None
    if mock:
        if purifier_name == "identity":
            purifier = identity_purifier
        elif purifier_name == "inverse":
            purifier = MapPurifier((r.adversarial, r.original) for r in records)
        else:
            raise ConfigError(f"unknown mock purifier {purifier_name!r} (identity, inverse)")
        return MockJudge(_mock_rule(mock), purifier, lang), jcfg
    if not jcfg.url:
        raise ConfigError("no judge configured: set judge.url, IDSUB_JUDGE_URL or judge.mock")
    return ChatClient(jcfg), jcfg
