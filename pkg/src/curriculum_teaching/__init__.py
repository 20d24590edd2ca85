"""Curriculum design for teaching imitation learners with demonstrations.

The package splits into a numerical core (tabular MDP solvers, learner
gradients, difficulty-score teachers), three benchmark environments, a
theory-validation suite, and a seeded experiment harness.
"""

from .curricula import (
    CandidatePool,
    CandidateSet,
    DifficultyScore,
    STRATEGIES,
    Teacher,
    agn_select,
    bbox_select,
    cur_l_select,
    cur_select,
    cur_t_select,
    difficulty,
    omn_select,
    schedule,
    schedule_size,
    scot_batch,
    set_difficulty,
)
from .learners import (
    CROSSENT_BC,
    MAXENT_IRL,
    EtaSchedule,
    LearnerSpec,
    crossent_gradient,
    init_params,
    learner_policy,
    load_checkpoint,
    maxent_gradient,
    save_checkpoint,
    smoothed_feature_map,
    update,
)
from .mdp import (
    Demonstration,
    FeatureMap,
    IterationLimitError,
    MdpValidationError,
    Policy,
    TabularMdp,
    enumerate_trajectories,
    feature_expectation,
    occupancy,
    policy_value,
    sample_trajectory,
    soft_value_iteration,
    trajectory_log_likelihood,
    value_iteration,
    visitation_frequencies,
)
from .probing import PolicyProbe, ProbeConfig, probe_policy, stale_policy_view

__version__ = "0.1.0"

__all__ = [
    "CandidatePool",
    "CandidateSet",
    "CROSSENT_BC",
    "Demonstration",
    "DifficultyScore",
    "EtaSchedule",
    "FeatureMap",
    "IterationLimitError",
    "LearnerSpec",
    "MAXENT_IRL",
    "MdpValidationError",
    "Policy",
    "PolicyProbe",
    "ProbeConfig",
    "STRATEGIES",
    "TabularMdp",
    "Teacher",
    "agn_select",
    "bbox_select",
    "crossent_gradient",
    "cur_l_select",
    "cur_select",
    "cur_t_select",
    "difficulty",
    "enumerate_trajectories",
    "feature_expectation",
    "init_params",
    "learner_policy",
    "load_checkpoint",
    "maxent_gradient",
    "occupancy",
    "omn_select",
    "policy_value",
    "probe_policy",
    "sample_trajectory",
    "save_checkpoint",
    "schedule",
    "schedule_size",
    "scot_batch",
    "set_difficulty",
    "smoothed_feature_map",
    "soft_value_iteration",
    "stale_policy_view",
    "trajectory_log_likelihood",
    "update",
    "value_iteration",
    "visitation_frequencies",
]
