"""Experiment configuration: an INI file with documented keys and defaults.

Every run records the resolved config text and its hash next to its
outputs, so a run can be reproduced from the output directory alone. One
master seed fans out to per-component seeds through a fixed spawn-key
table (see `component_seed`).
"""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, field, fields

import numpy as np

# spawn-key table for deriving per-component generators from the master seed
SEED_ROLES = {
    "pool": 0,       # demo-pool sampling
    "learner": 1,    # parameter init / pretraining
    "teacher": 2,    # AGN draws and random fallbacks
    "probe": 3,      # limited-observability queries
    "eval": 4,       # evaluation subsampling and rollouts
    "batches": 5,    # epoch shuffling
}


def component_seed(master_seed, role):
    """Child SeedSequence for a named component of a run."""
    if role not in SEED_ROLES:
        raise ValueError(f"unknown seed role {role!r}; expected one of {sorted(SEED_ROLES)}")
    return np.random.SeedSequence(int(master_seed), spawn_key=(SEED_ROLES[role],))


def component_rng(master_seed, role):
    return np.random.default_rng(component_seed(master_seed, role))


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass
class TeacherCentricConfig:
    steps: int = 100
    learner_model: str = "maxent_irl"
    parameterization: str = "quadratic"
    eta: float = 0.05
    eta_decay: float = 1.0       # 1.0 = constant learning rate
    eta_decay_every: int = 50
    env_seed: int = 0
    gamma: float = 0.99
    demos_per_start: int = 10
    demo_horizon: int = 10
    teacher_kind: str = "soft"
    teacher_sharpness: float = 1.0
    selection_mode: str = "argmax"
    probe_b: int = 1
    probe_k: int | None = None
    initial_task_types: tuple = ()
    pretrain_steps: int = 0
    init_at_target: bool = False


@dataclass
class LearnerCentricConfig:
    epochs: int = 40
    batch_size: int = 32
    lr: float = 0.01
    lr_decay: float = 0.5
    lr_decay_every: int = 500
    schedule_a: float = 0.8
    schedule_b: float = 0.5
    hidden: tuple = (64, 64)
    eval_size: int = 200
    eval_every: int = 100
    rollout_horizon: int = 0  # 0 = the engine default
    dataset_dir: str = ""


@dataclass
class ExperimentConfig:
    kind: str = "teacher_centric"
    environment: str = "car"
    strategy: str = "CUR"
    seed: int = 0
    n_seeds: int = 1
    teacher_centric: TeacherCentricConfig = field(default_factory=TeacherCentricConfig)
    learner_centric: LearnerCentricConfig = field(default_factory=LearnerCentricConfig)

    def __post_init__(self):
        if self.kind not in ("teacher_centric", "learner_centric"):
            raise ConfigError(f"unknown experiment kind {self.kind!r}")

    def seeds(self):
        return list(range(self.seed, self.seed + self.n_seeds))

    def to_ini(self):
        parser = configparser.ConfigParser()
        parser["experiment"] = {
            "kind": self.kind,
            "environment": self.environment,
            "strategy": self.strategy,
            "seed": str(self.seed),
            "n_seeds": str(self.n_seeds),
        }
        parser["teacher_centric"] = _section_dict(self.teacher_centric)
        parser["learner_centric"] = _section_dict(self.learner_centric)
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()

    def hash(self):
        return hashlib.sha256(self.to_ini().encode()).hexdigest()[:16]

    @staticmethod
    def from_ini(text):
        parser = configparser.ConfigParser()
        parser.read_string(text)
        try:
            exp = parser["experiment"]
            cfg = ExperimentConfig(
                kind=exp.get("kind", "teacher_centric"),
                environment=exp.get("environment", "car"),
                strategy=exp.get("strategy", "CUR"),
                seed=exp.getint("seed", 0),
                n_seeds=exp.getint("n_seeds", 1),
            )
            if parser.has_section("teacher_centric"):
                _fill_section(cfg.teacher_centric, parser["teacher_centric"])
            if parser.has_section("learner_centric"):
                _fill_section(cfg.learner_centric, parser["learner_centric"])
        except (configparser.Error, KeyError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return cfg

    @staticmethod
    def from_file(path):
        try:
            with open(path) as fh:
                return ExperimentConfig.from_ini(fh.read())
        except FileNotFoundError as exc:
            raise ConfigError(f"config not found: {path}") from exc


def _section_dict(section_cfg):
    out = {}
    for f in fields(section_cfg):
        value = getattr(section_cfg, f.name)
        if isinstance(value, tuple):
            out[f.name] = ",".join(str(v) for v in value)
        elif value is None:
            out[f.name] = "none"
        else:
            out[f.name] = str(value)
    return out


def _fill_section(section_cfg, section):
    for f in fields(section_cfg):
        if f.name not in section:
            continue
        raw = section[f.name]
        current = getattr(section_cfg, f.name)
        if isinstance(current, tuple):
            value = tuple(int(x) for x in raw.split(",")) if raw else ()
        elif f.name == "probe_k":
            value = None if raw == "none" else int(raw)
        elif isinstance(current, bool):
            value = raw.lower() in ("1", "true", "yes")
        elif isinstance(current, int):
            value = int(raw)
        elif isinstance(current, float):
            value = float(raw)
        else:
            value = raw
        setattr(section_cfg, f.name, value)
