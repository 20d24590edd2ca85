"""Environment constructors: the car strip and the navigation grids."""

from .car import CarEnv, build_car_env, build_start_pool, make_learner_spec, target_params, teacher_policy
from .datasets import (
    GenerationError,
    TaskDataset,
    TaskRecord,
    generate_shortest_path_dataset,
    generate_tsp_dataset,
    load_dataset,
    save_dataset,
)
from .grids import (
    GridTask,
    SHORTEST_PATH,
    TSP,
    compile_task,
    count_optimal_paths,
    engine_values,
    enumerate_optimal_demos,
    greedy_tour_reward,
    optimal_tour_reward,
    rollout,
    state_features,
    to_tabular_mdp,
)

__all__ = [
    "CarEnv",
    "GenerationError",
    "GridTask",
    "SHORTEST_PATH",
    "TSP",
    "TaskDataset",
    "TaskRecord",
    "build_car_env",
    "build_start_pool",
    "compile_task",
    "count_optimal_paths",
    "engine_values",
    "enumerate_optimal_demos",
    "generate_shortest_path_dataset",
    "generate_tsp_dataset",
    "greedy_tour_reward",
    "load_dataset",
    "make_learner_spec",
    "optimal_tour_reward",
    "rollout",
    "save_dataset",
    "state_features",
    "target_params",
    "teacher_policy",
    "to_tabular_mdp",
]
