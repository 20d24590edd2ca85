"""Synthetic two-lane car-driving environment.

Forty tasks (eight types, five seeded layouts each), every task a strip of
10 rows by 2 lanes. The agent always advances one row per step; steering
off the edge of the strip re-draws the lane uniformly. Per-cell binary
features drive the reward; task type 7 makes it nonlinear (an HOV bonus
that flips to a penalty when police occupy the same cell).

Task types:
  T0 empty highway          T4 grass on the right lane
  T1 crowded with cars      T5 grass and cars
  T2 stones on the right    T6 pedestrians and cars
  T3 stones and cars        T7 HOV lane with police
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..curricula import CandidatePool, CandidateSet
from ..learners import LearnerSpec, learner_policy, smoothed_feature_map
from ..mdp import FeatureMap, Policy, TabularMdp, sample_trajectory, value_iteration

N_ROWS = 10
N_LANES = 2
N_TYPES = 8
FEATURES = ("stone", "grass", "car", "ped", "car_front", "ped_front", "hov", "police")
WEIGHTS = np.array([-1.0, -0.5, -5.0, -10.0, -2.0, -5.0, 1.0, 0.0])
ACTIONS = ("left", "straight", "right")
HOV_POLICE_PENALTY = -5.0  # replaces the +1 HOV bonus when police are present

_F = {name: i for i, name in enumerate(FEATURES)}


@dataclass(frozen=True)
class CarEnv:
    mdp: TabularMdp
    feature_map: FeatureMap          # raw view: phi(s, a) = phi_env(s)
    state_features: np.ndarray       # (S, 8), zero at the sink
    start_states: np.ndarray         # (40,) bottom-left cell of each task
    task_types: np.ndarray           # (40,) type id per task
    task_type_of_state: np.ndarray   # (S,) type id, -1 for the sink
    weights: np.ndarray

    @property
    def n_tasks(self):
        return len(self.start_states)

    @property
    def sink(self):
        return self.mdp.n_states - 1

    def smoothed_feature_map(self):
        """One-step-lookahead features used by the cloning learner."""
        return smoothed_feature_map(self.mdp, self.state_features)


def _layout(task_type, rng):
    """Boolean object grids (rows x lanes) for one task instance."""
    cells = {name: np.zeros((N_ROWS, N_LANES), dtype=bool) for name in FEATURES}

    def scatter(name, prob, lanes):
        mask = rng.random((N_ROWS, N_LANES)) < prob
        for lane in range(N_LANES):
            if lane not in lanes:
                mask[:, lane] = False
        occupied = np.zeros((N_ROWS, N_LANES), dtype=bool)
        for other in ("stone", "grass", "car", "ped"):
            occupied |= cells[other]
        cells[name] |= mask & ~occupied

    if task_type == 1:
        scatter("car", 0.3, (0, 1))
    elif task_type == 2:
        scatter("stone", 0.5, (1,))
    elif task_type == 3:
        scatter("stone", 0.35, (1,))
        scatter("car", 0.15, (0, 1))
    elif task_type == 4:
        scatter("grass", 0.5, (1,))
    elif task_type == 5:
        scatter("grass", 0.35, (1,))
        scatter("car", 0.15, (0, 1))
    elif task_type == 6:
        scatter("ped", 0.25, (1,))
        scatter("car", 0.15, (0, 1))
    elif task_type == 7:
        cells["hov"][:, 1] = True
        cells["police"][:, 1] = rng.random(N_ROWS) < 0.25
    for name in ("stone", "grass", "car", "ped"):
        cells[name][0, 0] = False  # keep every start cell clean
    return cells


def _state_index(task, row, lane):
    return task * (N_ROWS * N_LANES) + row * N_LANES + lane


def build_car_env(seed=0, gamma=0.99, instances_per_type=5):
    """Construct the MDP, feature tables, and start states for all tasks.

    The live state space has instances_per_type * 8 * 20 cell states; one
    extra absorbing sink terminates episodes after the top row. Rewards are
    <w, phi(s)> with the HOV/police interaction subtracted, identical for
    all actions.
    """
    rng = np.random.default_rng(seed)
    n_tasks = N_TYPES * instances_per_type
    n_live = n_tasks * N_ROWS * N_LANES
    n_states = n_live + 1
    sink = n_live

    features = np.zeros((n_states, len(FEATURES)))
    task_types = np.zeros(n_tasks, dtype=int)
    task_type_of_state = np.full(n_states, -1, dtype=int)
    task_id = 0
    for task_type in range(N_TYPES):
        for _ in range(instances_per_type):
            cells = _layout(task_type, rng)
            for row in range(N_ROWS):
                for lane in range(N_LANES):
                    s = _state_index(task_id, row, lane)
                    for name in FEATURES:
                        if name in ("car_front", "ped_front"):
                            continue
                        features[s, _F[name]] = cells[name][row, lane]
                    if row + 1 < N_ROWS:
                        features[s, _F["car_front"]] = cells["car"][row + 1, lane]
                        features[s, _F["ped_front"]] = cells["ped"][row + 1, lane]
                    task_type_of_state[s] = task_type
            task_types[task_id] = task_type
            task_id += 1

    reward_per_state = features @ WEIGHTS
    interaction = features[:, _F["hov"]] * features[:, _F["police"]]
    reward_per_state += (HOV_POLICE_PENALTY - WEIGHTS[_F["hov"]]) * interaction
    reward_per_state[sink] = 0.0

    transition = np.zeros((n_states, len(ACTIONS), n_states))
    for task in range(n_tasks):
        for row in range(N_ROWS):
            for lane in range(N_LANES):
                s = _state_index(task, row, lane)
                for a in range(len(ACTIONS)):
                    if a == 0:  # left
                        lanes = [(0, 1.0)] if lane == 1 else [(0, 0.5), (1, 0.5)]
                    elif a == 2:  # right
                        lanes = [(1, 1.0)] if lane == 0 else [(0, 0.5), (1, 0.5)]
                    else:
                        lanes = [(lane, 1.0)]
                    for lane2, p in lanes:
                        if row + 1 < N_ROWS:
                            transition[s, a, _state_index(task, row + 1, lane2)] += p
                        else:
                            transition[s, a, sink] += p
    transition[sink, :, sink] = 1.0

    start_states = np.array([_state_index(t, 0, 0) for t in range(n_tasks)])
    p0 = np.zeros(n_states)
    p0[start_states] = 1.0 / n_tasks

    mdp = TabularMdp(
        transition=transition,
        reward=np.repeat(reward_per_state[:, None], len(ACTIONS), axis=1),
        gamma=gamma,
        p0=p0,
        terminal_mask=np.arange(n_states) == sink,
        horizon=4 * 2 * (N_ROWS + N_LANES),
    )
    return CarEnv(
        mdp=mdp,
        feature_map=FeatureMap.from_state_features(features, len(ACTIONS)),
        state_features=features,
        start_states=start_states,
        task_types=task_types,
        task_type_of_state=task_type_of_state,
        weights=WEIGHTS.copy(),
    )


def target_params(env, parameterization, sharpness=1.0):
    """Parameter vector whose learner reward reproduces the environment reward.

    linear: the feature weights themselves (cannot represent the HOV/police
    interaction, so it is only exact on types T0..T6).
    quadratic: exact everywhere. With theta_2 = sqrt(3) (e_hov - e_police)
    the square contributes 3(phi_hov + phi_police - 2 phi_hov phi_police)
    on binary features, so shifting both linear weights by -3 reproduces
    <w, phi> - 6 phi_hov phi_police, the true reward.

    `sharpness` scales the represented reward by a constant factor, which
    lowers the temperature of the induced soft policy without leaving the
    parameter class (the quadratic block scales by sqrt(sharpness)).
    """
    d = len(FEATURES)
    if parameterization == "linear":
        return sharpness * env.weights
    if parameterization == "quadratic":
        theta = np.zeros(2 * d)
        theta[:d] = env.weights
        theta[_F["hov"]] -= 3.0
        theta[_F["police"]] -= 3.0
        theta[d + _F["hov"]] = np.sqrt(3.0)
        theta[d + _F["police"]] = -np.sqrt(3.0)
        theta[:d] *= sharpness
        theta[d:] *= np.sqrt(sharpness)
        return theta
    raise ValueError(f"no closed-form target for parameterization {parameterization!r}")


def teacher_policy(env, spec, theta_star, kind="greedy", tol=1e-10):
    """The demo-generating policy pi_E.

    kind="greedy": the exact optimal policy from value iteration (ties to
    the lowest action index); its demonstrations only branch over the
    stochastic lane transitions. kind="soft": the learner-family policy at
    the target parameter, pi_{theta*}.

    Difficulty scores always come from the soft pi_{theta*} (see
    `difficulty_policy`); a deterministic policy would score 1 on every
    demonstration it generated itself.
    """
    if kind == "greedy":
        return greedy_optimal_policy(env, tol=tol)
    if kind == "soft":
        return learner_policy(spec, theta_star, env.mdp, tol=tol)
    raise ValueError(f"unknown teacher kind {kind!r}")


def difficulty_policy(env, spec, theta_star, tol=1e-10):
    """pi_{theta*}, the policy defining the teacher-side difficulty score."""
    return learner_policy(spec, theta_star, env.mdp, tol=tol)


def greedy_optimal_policy(env, tol=1e-10):
    """Hard value-iteration reference policy (ties to the lowest action)."""
    _, policy = value_iteration(env.mdp, tol=tol)
    return policy


def build_start_pool(env, policy, demos_per_start=10, horizon=N_ROWS, rng=None):
    """Sampled demo sets per start state for teaching over states.

    Returns a CandidatePool with one candidate per task start; each set
    holds demos_per_start trajectories of `policy` from that start.
    """
    rng = np.random.default_rng(rng)
    candidates = []
    for task_id, start in enumerate(env.start_states):
        demos = tuple(
            sample_trajectory(env.mdp, policy, start, horizon, rng)
            for _ in range(demos_per_start)
        )
        candidates.append(
            CandidateSet(demos=demos, start_state=int(start), label=int(env.task_types[task_id]))
        )
    return CandidatePool(candidates)


def make_learner_spec(env, model, parameterization, eta=None, hidden=(64, 64)):
    """Learner spec wired to this environment's feature conventions.

    The reward learner sees raw per-state features; the cloning learner
    sees the transition-smoothed one-step lookahead.
    """
    from ..learners import CROSSENT_BC, MAXENT_IRL, EtaSchedule

    if model == MAXENT_IRL:
        fmap = env.feature_map
    elif model == CROSSENT_BC:
        fmap = env.smoothed_feature_map()
    else:
        raise ValueError(f"unknown model {model!r}")
    if eta is None:
        eta = 0.1 if parameterization == "linear" else 0.05
    return LearnerSpec(
        model=model,
        parameterization=parameterization,
        feature_map=fmap,
        state_features=env.state_features if parameterization == "mlp" else None,
        hidden=hidden,
        eta=EtaSchedule(eta),
    )
