"""Experiment orchestration: configs, logs, run loops, plots, CLI."""

from .config import ExperimentConfig, LearnerCentricConfig, TeacherCentricConfig, component_rng, component_seed
from .logs import ExperimentLog, load_log, log_column, steps_to_reach
from .plots import emit_plots
from .runs import run_learner_centric, run_teacher_centric, run_teacher_centric_suite

__all__ = [
    "ExperimentConfig",
    "ExperimentLog",
    "LearnerCentricConfig",
    "TeacherCentricConfig",
    "component_rng",
    "component_seed",
    "emit_plots",
    "load_log",
    "log_column",
    "run_learner_centric",
    "run_teacher_centric",
    "run_teacher_centric_suite",
    "steps_to_reach",
]
