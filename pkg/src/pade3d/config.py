"""Run configuration: defaults, file loading and the run manifest."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ParameterError
from .moga import PARETO_PICKS, GaConfig
from .network import Distribution

METHODS = ("classic", "moga")


@dataclass(frozen=True)
class RunConfig:
    total_nodes: int = 150
    side_length: float = 100.0
    anchor_counts: tuple[int, ...] = (10, 15, 20, 25, 30, 35)
    radii: tuple[float, ...] = (25.0, 30.0, 35.0, 40.0)
    distributions: tuple[str, ...] = ("uniform", "multimodal")
    repeats: int = 50
    seed: int = 2024
    workers: int = 1
    out: str = "results"
    methods: tuple[str, ...] = METHODS
    pop_size: int = 20
    max_iter: int = 500
    crossover_prob: float = 0.9
    mutation_prob: float = 0.1
    normalize_expectation: bool = True
    pareto_pick: str = "normalized_sum"
    record_timings: bool = False
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        for name in ("anchor_counts", "radii", "distributions", "methods"):
            value = getattr(self, name)
            if isinstance(value, (str, int, float)):
                value = (value,)
            object.__setattr__(self, name, tuple(value))
        object.__setattr__(self, "anchor_counts", tuple(int(a) for a in self.anchor_counts))
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        object.__setattr__(
            self, "distributions", tuple(Distribution(d).value for d in self.distributions)
        )
        if self.repeats < 1:
            raise ParameterError("repeats must be >= 1")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ParameterError(f"methods must be a non-empty subset of {METHODS}, got {self.methods}")
        if self.pareto_pick not in PARETO_PICKS:
            raise ParameterError(f"pareto_pick must be one of {PARETO_PICKS}")
        for na in self.anchor_counts:
            if not 4 <= na < self.total_nodes:
                raise ParameterError(f"anchor count {na} outside [4, total_nodes)")
        if any(r <= 0 for r in self.radii):
            raise ParameterError("radii must be positive")
        self.ga_config()

    def ga_config(self) -> GaConfig:
        return GaConfig(
            pop_size=self.pop_size,
            max_iter=self.max_iter,
            crossover_prob=self.crossover_prob,
            mutation_prob=self.mutation_prob,
            pareto_pick=self.pareto_pick,
        )

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("extra")
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)} - {"extra"}
        unknown = set(data) - names
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def replace(self, **changes) -> "RunConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return dataclasses.replace(self, **changes)


def load_config(path) -> RunConfig:
    path = Path(path)
    text = path.read_text()
    data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    return RunConfig.from_dict(data or {})


def write_manifest(config: RunConfig, path, **info) -> None:
    from . import __version__

    payload = {"package_version": __version__, "config": config.to_dict(), **info}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_manifest(path) -> RunConfig:
    payload = json.loads(Path(path).read_text())
    return RunConfig.from_dict(payload["config"])
