import logging
from pathlib import Path as FsPath

import pydantic
from django.conf import settings
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveInt, field_validator, model_validator

from rmsa.agents import Algorithm, CongestionScope, EpsilonSchedule, RewardPolicy
from rmsa.controller import DEFAULT_GUARD_BAND_SLOTS, ModulationPolicy
from rmsa.exceptions import ConfigError
from rmsa.grid import CONGESTION_THRESHOLD, DEFAULT_SLOTS_PER_CORE
from rmsa.topology import PathLimit
from rmsa.traffic import TrafficConfig

logger = logging.getLogger(__name__)

PRESETS_DIR = FsPath(__file__).resolve().parent / "presets"
DEFAULT_SEEDS = [1, 2, 3, 4]
DEFAULT_FINAL_WINDOW = 10

TRAFFIC_KEYS = (
    "erlang",
    "mean_holding",
    "cores_per_link",
    "requests_per_episode",
    "bit_rate_weights",
    "arrival_normalization",
    "warmup_holding_times",
)
REWARD_KEYS = ("routed_reward", "blocked_reward")
EPSILON_KEYS = ("epsilon", "epsilon_start", "epsilon_end", "epsilon_mode")
PLAIN_KEYS = (
    "label",
    "topology",
    "k",
    "algorithm",
    "slots_per_core",
    "guard_band_slots",
    "modulation_table",
    "modulation_policy",
    "alpha",
    "gamma",
    "c",
    "congestion_scope",
    "congestion_threshold",
    "episodes",
    "seeds",
    "final_window",
    "warm_start",
)
CONFIG_KEYS = frozenset(("preset", *TRAFFIC_KEYS, *REWARD_KEYS, *EPSILON_KEYS, *PLAIN_KEYS))


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    label: str = ""
    topology: str = "nsfnet"
    k: PathLimit = 3
    algorithm: Algorithm
    traffic: TrafficConfig

    slots_per_core: NonNegativeInt = DEFAULT_SLOTS_PER_CORE
    guard_band_slots: NonNegativeInt = DEFAULT_GUARD_BAND_SLOTS
    modulation_table: str = "default"
    modulation_policy: ModulationPolicy = ModulationPolicy.TRY_ALL

    rewards: RewardPolicy | None = None
    epsilon: EpsilonSchedule | None = None
    alpha: float | None = Field(default=None, gt=0.0, le=1.0)
    gamma: float | None = Field(default=None, ge=0.0, le=1.0)
    c: float | None = Field(default=None, ge=0.0)
    congestion_scope: CongestionScope = CongestionScope.PER_PATH
    congestion_threshold: float = Field(default=CONGESTION_THRESHOLD, gt=0.0, le=1.0)

    episodes: PositiveInt = 100
    seeds: list[int] = Field(default_factory=lambda: list(DEFAULT_SEEDS), min_length=1)
    final_window: PositiveInt = DEFAULT_FINAL_WINDOW
    warm_start: str | None = None

    @field_validator("k")
    @classmethod
    def validate_k(cls, v: PathLimit):
        if v != "inf" and v < 1:
            raise ValueError(f"k must be a positive integer or 'inf', got {v}")
        return v

    @model_validator(mode="before")
    @classmethod
    def default_label(cls, data):
        if isinstance(data, dict) and not data.get("label") and data.get("algorithm"):
            data = data | {"label": str(data["algorithm"])}
        return data

    @model_validator(mode="after")
    def check_hyperparameters(self):
        if self.algorithm.learns:
            missing = [name for name in ("rewards", "epsilon") if getattr(self, name) is None]
            if self.algorithm == Algorithm.UCB and self.c is None:
                missing.append("c")
            if self.algorithm == Algorithm.QLEARNING:
                missing += [name for name in ("alpha", "gamma") if getattr(self, name) is None]
            if missing:
                raise ValueError(f"{self.algorithm} needs {', '.join(missing)}")
        elif self.warm_start:
            raise ValueError(f"{self.algorithm} keeps no table to warm-start")

        return self

    @property
    def candidate_limit(self) -> PathLimit:
        """How many candidate paths per pair the algorithm can actually use."""
        if self.algorithm == Algorithm.KSP_INF:
            return "inf"
        if self.algorithm == Algorithm.SPF_FF:
            return 1
        return self.k

    def describe(self) -> str:
        parts = [f"{self.algorithm}", f"erlang={self.traffic.erlang:g}", f"k={self.candidate_limit}"]
        if self.traffic.warmup_holding_times:
            parts.append(f"warmup_holding_times={self.traffic.warmup_holding_times:g}")
        if self.epsilon is not None and self.algorithm.learns:
            parts.append(f"epsilon={self.epsilon}")
        return " ".join(parts)


def parse_key_values(text: str, source: str = "<string>") -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue

        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected `key = value`, got {raw!r}")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")

        values[key] = value.strip()

    return values


def read_config_file(path: str | FsPath) -> dict[str, str]:
    path = FsPath(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e

    return parse_key_values(text, str(path))


def preset_dirs() -> list[FsPath]:
    dirs = [PRESETS_DIR]
    if settings.RMSA_PRESETS_DIR:
        dirs.append(FsPath(settings.RMSA_PRESETS_DIR))
    return dirs


def available_presets() -> list[str]:
    return sorted({p.stem for d in preset_dirs() if d.is_dir() for p in d.glob("*.conf")})


def load_preset(name: str) -> dict[str, str]:
    for directory in preset_dirs():
        candidate = directory / f"{name}.conf"
        if candidate.is_file():
            values = read_config_file(candidate)
            if "preset" in values:
                raise ConfigError(f"Preset {name} cannot itself name a preset")
            return values

    raise ConfigError(f"Unknown preset {name!r}, available: {', '.join(available_presets())}")


def layer(base: dict[str, str], top: dict[str, str]) -> dict[str, str]:
    """`top` wins. An epsilon set in any form on top replaces the whole
    schedule below it."""
    if any(key in top for key in EPSILON_KEYS):
        base = {key: value for key, value in base.items() if key not in EPSILON_KEYS}
    return base | top


def _split_list(value: str) -> list[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def _parse_weights(value: str) -> dict[str, str]:
    weights = {}
    for item in _split_list(value):
        rate, sep, weight = item.partition(":")
        if not sep:
            raise ConfigError(f"Bit rate weights look like `25:3,50:5,100:2`, got {value!r}")
        weights[rate.strip()] = weight.strip()
    return weights


def build_config(flat: dict[str, str]) -> ExperimentConfig:
    """Turns flat `key = value` settings into a validated ExperimentConfig."""
    flat = dict(flat)
    if preset := flat.pop("preset", None):
        flat = layer(load_preset(preset), flat)

    unknown = set(flat) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"Unknown config keys: {', '.join(sorted(unknown))}")

    data: dict = {key: flat[key] for key in PLAIN_KEYS if key in flat}
    if "seeds" in data:
        data["seeds"] = _split_list(data["seeds"])
    if "warm_start" in data and not data["warm_start"]:
        del data["warm_start"]

    traffic: dict = {key: flat[key] for key in TRAFFIC_KEYS if key in flat}
    if "bit_rate_weights" in traffic:
        traffic["bit_rate_weights"] = _parse_weights(traffic["bit_rate_weights"])
    data["traffic"] = traffic

    if any(key in flat for key in REWARD_KEYS):
        data["rewards"] = {key: flat[key] for key in REWARD_KEYS if key in flat}

    if "epsilon" in flat:
        data["epsilon"] = {"start": flat["epsilon"], "mode": "constant"}
    elif any(key in flat for key in EPSILON_KEYS):
        schedule = {"start": flat.get("epsilon_start"), "end": flat.get("epsilon_end")}
        schedule["mode"] = flat.get("epsilon_mode", "linear" if "epsilon_end" in flat else "constant")
        data["epsilon"] = {key: value for key, value in schedule.items() if value is not None}

    try:
        return ExperimentConfig.model_validate(data)
    except pydantic.ValidationError as e:
        raise ConfigError(_format_validation_error(e)) from e


def _format_validation_error(error: pydantic.ValidationError) -> str:
    problems = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "config"
        problems.append(f"{location}: {item['msg']}")
    return "Invalid experiment config: " + "; ".join(problems)


def parse_config(
    path: str | FsPath | None = None,
    preset: str | None = None,
    overrides: dict[str, str] | None = None,
) -> ExperimentConfig:
    """Layers a preset, then a config file, then explicit overrides (CLI
    flags), and validates the result."""
    return build_config(merge_sources(path, preset, overrides))


def merge_sources(
    path: str | FsPath | None = None,
    preset: str | None = None,
    overrides: dict[str, str] | None = None,
) -> dict[str, str]:
    flat: dict[str, str] = {}
    if preset:
        flat["preset"] = preset
    if path is not None:
        from_file = read_config_file(path)
        if preset and from_file.get("preset", preset) != preset:
            raise ConfigError(f"{path} is based on preset {from_file['preset']!r}, which conflicts with {preset!r}")
        flat = layer(flat, from_file)
    if overrides:
        flat = layer(flat, {key: str(value) for key, value in overrides.items() if value is not None})

    return flat


def expand_algorithms(
    flat: dict[str, str],
    algorithms: list[str],
    label_prefix: str | None = None,
) -> list[ExperimentConfig]:
    """One config per algorithm, sharing everything else. With several
    algorithms the labels are derived from them, `<prefix>/<algorithm>`
    when a prefix is given."""
    if len(algorithms) <= 1:
        variant = flat | ({"algorithm": algorithms[0]} if algorithms else {})
        if label_prefix and not variant.get("label"):
            variant["label"] = label_prefix
        return [build_config(variant)]

    configs = []
    for algorithm in algorithms:
        label = f"{label_prefix}/{algorithm}" if label_prefix else algorithm
        configs.append(build_config(flat | {"algorithm": algorithm, "label": label}))
    return configs

