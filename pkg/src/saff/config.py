"""Run configuration: one JSON document, every field optional."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .fairness import ATTRIBUTES, DEFAULT_AGE_CUTOFF, GroupSpec, ValidationError
from .feedback import FeedbackParams
from .learner import INIT_MODES, LearnerConfig
from .simulation import BiasConfig, ExperimentGrid


class ConfigError(ValidationError):
    pass


# Nonzero bias on every attribute so synthetic profiles are not centred at 0.
MODERATE_BIAS = {
    "base_rate": 0.5,
    "spread": 0.25,
    "decision_noise": 0.1,
    "offsets": {"age:old": -0.2, "gender:Female": -0.15, "race:Black": -0.15},
    "noise_offsets": {"age:old": 0.2, "gender:Female": 0.15, "race:Black": 0.15},
    "threshold": 0.5,
}


@dataclass
class SimulationSettings:
    participant_counts: list[int] = field(default_factory=lambda: [25, 50, 75, 100])
    tuple_counts: list[int] = field(default_factory=lambda: [5, 10, 15])
    pairs_per_tuple: int = 10
    repetitions: int = 100
    dataset_participants: int = 75
    dataset_tuples: int = 10
    bias: dict = field(default_factory=lambda: json.loads(json.dumps(MODERATE_BIAS)))


@dataclass
class RunConfig:
    sigma: float = 1.0
    lam: float = 10.0
    step_size: float = 0.1
    epochs: int = 20
    seed: int = 0
    threshold: float = 0.5
    attribute: str = "age"
    init_mode: str = "random"
    groups: dict = field(
        default_factory=lambda: {
            "age": {"age_cutoff": DEFAULT_AGE_CUTOFF},
            "gender": {"privileged": ["Male"]},
            "race": {"privileged": ["Other"]},
        }
    )
    simulation: SimulationSettings = field(default_factory=SimulationSettings)

    def __post_init__(self):
        if self.attribute not in ATTRIBUTES:
            raise ConfigError(f"attribute must be one of {ATTRIBUTES}, got {self.attribute!r}")
        if self.init_mode not in INIT_MODES:
            raise ConfigError(f"init_mode must be one of {INIT_MODES}, got {self.init_mode!r}")
        try:
            self.feedback_params()
            self.learner_config()
            self.group_spec(self.attribute)
            self.bias_config()
        except ValidationError as exc:
            raise ConfigError(str(exc)) from exc
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        sim = data.pop("simulation", {}) or {}
        sim_known = set(SimulationSettings.__dataclass_fields__)
        if set(sim) - sim_known:
            raise ConfigError(f"unknown simulation fields: {sorted(set(sim) - sim_known)}")
        groups = RunConfig().groups
        for attr, spec in (data.pop("groups", {}) or {}).items():
            if attr not in ATTRIBUTES:
                raise ConfigError(f"unknown group attribute {attr!r}")
            groups[attr] = {**groups[attr], **spec}
        bias = json.loads(json.dumps(MODERATE_BIAS))
        bias.update(sim.pop("bias", {}) or {})
        try:
            return cls(**data, groups=groups, simulation=SimulationSettings(**sim, bias=bias))
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path: str | Path | None) -> "RunConfig":
        if path is None:
            return cls()
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["lambda"] = out.pop("lam")
        return out

    def feedback_params(self) -> FeedbackParams:
        return FeedbackParams(self.sigma, self.lam)

    def learner_config(self, init_mode: str | None = None) -> LearnerConfig:
        return LearnerConfig(
            step_size=self.step_size,
            epochs=self.epochs,
            init_mode=init_mode or self.init_mode,
            seed=self.seed,
            params=self.feedback_params(),
        )

    def group_spec(self, attribute: str) -> GroupSpec:
        spec = self.groups[attribute]
        return GroupSpec(
            attribute,
            tuple(spec.get("privileged", ())),
            age_cutoff=int(spec.get("age_cutoff", DEFAULT_AGE_CUTOFF)),
            threshold=self.threshold,
        )

    def bias_config(self) -> BiasConfig:
        b = dict(self.simulation.bias)

        def keyed(d):
            return {tuple(k.split(":", 1)): float(v) for k, v in (d or {}).items()}

        b["offsets"] = keyed(b.get("offsets"))
        b["noise_offsets"] = keyed(b.get("noise_offsets"))
        return BiasConfig(**b)

    def grid(self) -> ExperimentGrid:
        sim = self.simulation
        return ExperimentGrid(
            participant_counts=tuple(sim.participant_counts),
            tuple_counts=tuple(sim.tuple_counts),
            pairs_per_tuple=sim.pairs_per_tuple,
            repetitions=sim.repetitions,
            attribute=self.attribute,
            learner=self.learner_config(),
            bias=self.bias_config(),
            seed=self.seed,
            group=self.group_spec(self.attribute),
        )
