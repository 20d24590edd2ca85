"""Gridworld navigation tasks: shortest-path and traveling-salesman variants.

A task is a 6x6 grid. The agent has a position and a facing direction;
actions are {move, turn-left, turn-right}, each costing -1. Shortest-path
grids contain goals (+10, episode ends), bombs (-5, episode ends), and
muds (-1 on every entry). Tour grids contain only goals; the episode ends
with +10 when the agent returns to its start cell after visiting every
goal, or at the horizon.

Each task compiles to a compact deterministic engine (successor and reward
tables over an enumerated state space) solved exactly by undiscounted value
iteration; tour tasks are additionally solved by exhaustive permutation
search over goal orders as an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..mdp import Demonstration, FeatureMap, TabularMdp

GRID = 6
N_CELLS = GRID * GRID
N_DIRS = 4          # facing order: north, south, west, east
N_POSES = N_CELLS * N_DIRS
N_ACTIONS = 3       # move, left, right
MOVE, LEFT, RIGHT = 0, 1, 2

_DELTAS = {0: (-1, 0), 1: (1, 0), 2: (0, -1), 3: (0, 1)}
_TURN_LEFT = {0: 2, 2: 1, 1: 3, 3: 0}
_TURN_RIGHT = {0: 3, 3: 1, 1: 2, 2: 0}

STEP_REWARD = -1.0
GOAL_REWARD = 10.0
BOMB_REWARD = -5.0
MUD_REWARD = -1.0

SHORTEST_PATH = "shortest_path"
TSP = "tsp"

SP_CHANNELS = ("agent_n", "agent_s", "agent_w", "agent_e", "mud", "bomb", "goal")
TSP_CHANNELS = ("agent_n", "agent_s", "agent_w", "agent_e", "start", "goal")


def pose_index(cell, direction):
    return cell * N_DIRS + direction


def cell_rc(cell):
    return divmod(cell, GRID)


@dataclass(frozen=True)
class GridTask:
    kind: str
    start_cell: int
    start_dir: int
    goals: tuple
    muds: tuple = ()
    bombs: tuple = ()

    def __post_init__(self):
        occupied = [self.start_cell, *self.goals, *self.muds, *self.bombs]
        if len(set(occupied)) != len(occupied):
            raise ValueError("start, goals, muds, and bombs must not overlap")
        if self.kind not in (SHORTEST_PATH, TSP):
            raise ValueError(f"unknown task kind {self.kind!r}")
        if self.kind == TSP and (self.muds or self.bombs):
            raise ValueError("tour tasks carry no muds or bombs")

    @property
    def feature_dim(self):
        channels = SP_CHANNELS if self.kind == SHORTEST_PATH else TSP_CHANNELS
        return N_CELLS * len(channels)


def _next_pose(pose, action):
    cell, d = divmod(pose, N_DIRS)
    if action == LEFT:
        return pose_index(cell, _TURN_LEFT[d])
    if action == RIGHT:
        return pose_index(cell, _TURN_RIGHT[d])
    r, c = cell_rc(cell)
    dr, dc = _DELTAS[d]
    r2, c2 = r + dr, c + dc
    if 0 <= r2 < GRID and 0 <= c2 < GRID:
        return pose_index(r2 * GRID + c2, d)
    return pose  # blocked at the border; the action still costs a step


@dataclass(frozen=True)
class GridEngine:
    """Deterministic transition tables for one task.

    successors[s, a] and rewards[s, a] over `n_states` states; the last
    index is the absorbing sink. `start` is the initial state.
    """

    task: GridTask
    successors: np.ndarray
    rewards: np.ndarray
    start: int
    n_states: int
    horizon: int

    @property
    def sink(self):
        return self.n_states - 1


def compile_task(task):
    if task.kind == SHORTEST_PATH:
        return _compile_shortest_path(task)
    return _compile_tsp(task)


def _compile_shortest_path(task):
    n_states = N_POSES + 1
    sink = N_POSES
    goal_set, bomb_set, mud_set = set(task.goals), set(task.bombs), set(task.muds)
    successors = np.empty((n_states, N_ACTIONS), dtype=np.int32)
    rewards = np.full((n_states, N_ACTIONS), STEP_REWARD)
    for pose in range(N_POSES):
        for a in range(N_ACTIONS):
            nxt = _next_pose(pose, a)
            cell = nxt // N_DIRS
            entered = a == MOVE and nxt != pose
            if entered and cell in goal_set:
                successors[pose, a] = sink
                rewards[pose, a] = STEP_REWARD + GOAL_REWARD
            elif entered and cell in bomb_set:
                successors[pose, a] = sink
                rewards[pose, a] = STEP_REWARD + BOMB_REWARD
            else:
                successors[pose, a] = nxt
                if entered and cell in mud_set:
                    rewards[pose, a] = STEP_REWARD + MUD_REWARD
    successors[sink] = sink
    rewards[sink] = 0.0
    return GridEngine(
        task=task,
        successors=successors,
        rewards=rewards,
        start=pose_index(task.start_cell, task.start_dir),
        n_states=n_states,
        horizon=4 * 4 * GRID,
    )


def _compile_tsp(task):
    n_goals = len(task.goals)
    n_masks = 1 << n_goals
    n_states = N_POSES * n_masks + 1
    sink = N_POSES * n_masks
    goal_bit = {g: 1 << i for i, g in enumerate(task.goals)}
    full = n_masks - 1
    successors = np.empty((n_states, N_ACTIONS), dtype=np.int32)
    rewards = np.full((n_states, N_ACTIONS), STEP_REWARD)
    for pose in range(N_POSES):
        for mask in range(n_masks):
            s = pose * n_masks + mask
            for a in range(N_ACTIONS):
                nxt = _next_pose(pose, a)
                cell = nxt // N_DIRS
                entered = a == MOVE and nxt != pose
                mask2 = mask
                if entered and cell in goal_bit:
                    mask2 = mask | goal_bit[cell]
                if entered and cell == task.start_cell and mask == full:
                    successors[s, a] = sink
                    rewards[s, a] = STEP_REWARD + GOAL_REWARD
                else:
                    successors[s, a] = nxt * n_masks + mask2
    successors[sink] = sink
    rewards[sink] = 0.0
    return GridEngine(
        task=task,
        successors=successors,
        rewards=rewards,
        start=pose_index(task.start_cell, task.start_dir) * n_masks,
        n_states=n_states,
        horizon=2 * N_CELLS,
    )


def engine_values(engine, max_iters=None):
    """Exact undiscounted optimal values via value iteration.

    All rewards are integers, so the iteration reaches its fixed point
    exactly; iteration stops on the first unchanged sweep.
    """
    max_iters = max_iters or 8 * engine.n_states
    v = np.zeros(engine.n_states)
    for _ in range(max_iters):
        v_new = (engine.rewards + v[engine.successors]).max(axis=1)
        v_new[engine.sink] = 0.0
        if np.array_equal(v_new, v):
            return v
        v = v_new
    raise RuntimeError("grid value iteration failed to stabilize")


def optimal_action_mask(engine, values):
    q = engine.rewards + values[engine.successors]
    mask = q == values[:, None]
    mask[engine.sink] = False
    return mask


def count_optimal_paths(engine, values=None):
    """Exact number of distinct optimal trajectories from the start.

    The optimal subgraph is acyclic (values strictly increase along every
    optimal edge because each step costs at least 1), so a memoized count
    terminates. Returns a Python int; counts can exceed float precision.
    """
    values = engine_values(engine) if values is None else values
    mask = optimal_action_mask(engine, values)
    memo = {engine.sink: 1}

    def count(s):
        if s in memo:
            return memo[s]
        total = 0
        for a in range(N_ACTIONS):
            if mask[s, a]:
                total += count(int(engine.successors[s, a]))
        memo[s] = total
        return total

    import sys

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, engine.n_states + 100))
    try:
        return count(engine.start)
    finally:
        sys.setrecursionlimit(old)


def enumerate_optimal_demos(engine, cap=64, values=None):
    """Up to `cap` optimal trajectories as demonstrations over engine states."""
    values = engine_values(engine) if values is None else values
    mask = optimal_action_mask(engine, values)
    demos = []
    stack = [(engine.start, [])]
    while stack and len(demos) < cap:
        s, prefix = stack.pop()
        if s == engine.sink:
            demos.append(Demonstration(np.array(prefix), final_state=engine.sink))
            continue
        for a in range(N_ACTIONS - 1, -1, -1):  # push reversed for low-action-first order
            if mask[s, a]:
                stack.append((int(engine.successors[s, a]), prefix + [(s, a)]))
    return demos


def rollout(engine, action_fn, horizon=None, rng=None):
    """(total reward, demonstration) following action_fn(state) in the engine."""
    horizon = horizon or engine.horizon
    s = engine.start
    steps, total = [], 0.0
    for _ in range(horizon):
        if s == engine.sink:
            break
        a = int(action_fn(s))
        steps.append((s, a))
        total += float(engine.rewards[s, a])
        s = int(engine.successors[s, a])
    demo = Demonstration(np.array(steps), final_state=s) if steps else None
    return total, demo


# ---------------------------------------------------------------------------
# features
# ---------------------------------------------------------------------------


def _static_channels(task):
    channels = SP_CHANNELS if task.kind == SHORTEST_PATH else TSP_CHANNELS
    grid = np.zeros((N_CELLS, len(channels)))
    if task.kind == SHORTEST_PATH:
        for c in task.muds:
            grid[c, 4] = 1.0
        for c in task.bombs:
            grid[c, 5] = 1.0
        for c in task.goals:
            grid[c, 6] = 1.0
    else:
        grid[task.start_cell, 4] = 1.0
        for c in task.goals:
            grid[c, 5] = 1.0
    return grid


def state_features(task, engine, states):
    """(N, feature_dim) flattened per-cell feature tensors for engine states.

    The per-cell vector stacks a one-hot agent pose channel block with the
    static object channels; the sink maps to all zeros.
    """
    states = np.atleast_1d(np.asarray(states, dtype=int))
    base = _static_channels(task)
    n_channels = base.shape[1]
    out = np.zeros((len(states), N_CELLS, n_channels))
    masks = 1
    if task.kind == TSP:
        masks = 1 << len(task.goals)
    for i, s in enumerate(states):
        if s == engine.sink:
            continue
        pose = s // masks if task.kind == TSP else s
        cell, d = divmod(pose, N_DIRS)
        out[i] = base
        out[i, cell, d] = 1.0
    return out.reshape(len(states), -1)


def demo_features(task, engine, demo):
    """(T, feature_dim) inputs paired with demo.actions for cloning updates."""
    return state_features(task, engine, demo.states)


# ---------------------------------------------------------------------------
# tour oracles
# ---------------------------------------------------------------------------


@lru_cache(maxsize=1)
def _pose_distances():
    """All-pairs minimum action counts between poses on an empty grid (BFS)."""
    from collections import deque

    dist = np.full((N_POSES, N_POSES), -1, dtype=np.int16)
    for src in range(N_POSES):
        dist[src, src] = 0
        queue = deque([src])
        while queue:
            p = queue.popleft()
            for a in range(N_ACTIONS):
                q = _next_pose(p, a)
                if dist[src, q] < 0:
                    dist[src, q] = dist[src, p] + 1
                    queue.append(q)
    return dist


def _cost_to_cell(dist_row, cell):
    return int(dist_row[cell * N_DIRS : (cell + 1) * N_DIRS].min())


def optimal_tour_reward(task):
    """Best tour reward by exhaustive search over goal visit orders.

    For each permutation a small program over arrival facings accumulates
    exact leg costs from the all-pairs pose distances; the tour ends back
    at the start cell with any facing. Exact for <= 4 goals.
    """
    from itertools import permutations

    dist = _pose_distances()
    p0 = pose_index(task.start_cell, task.start_dir)
    best_cost = None
    for order in permutations(task.goals):
        # costs[f] = min actions to stand on the current goal facing f
        costs = {f: dist[p0, pose_index(order[0], f)] for f in range(N_DIRS)}
        for g_prev, g_next in zip(order[:-1], order[1:]):
            costs = {
                f: min(
                    costs[f2] + dist[pose_index(g_prev, f2), pose_index(g_next, f)]
                    for f2 in range(N_DIRS)
                )
                for f in range(N_DIRS)
            }
        total = min(
            costs[f2] + _cost_to_cell(dist[pose_index(order[-1], f2)], task.start_cell)
            for f2 in range(N_DIRS)
        )
        if best_cost is None or total < best_cost:
            best_cost = total
    return GOAL_REWARD - float(best_cost)


def greedy_tour_reward(task):
    """Tour reward of the nearest-unvisited-goal heuristic, then return home.

    Distance is the exact action count from the current pose; ties resolve
    to the goal listed first in the task. The heuristic is evaluated on the
    same pose metric as the optimal oracle, so greedy <= optimal always.
    """
    dist = _pose_distances()
    pose = pose_index(task.start_cell, task.start_dir)
    remaining = list(task.goals)
    cost = 0
    while remaining:
        scored = [(_cost_to_cell(dist[pose], g), i) for i, g in enumerate(remaining)]
        best_cost, best_i = min(scored)
        goal = remaining.pop(best_i)
        cost += best_cost
        # stand on the goal with the cheapest arrival facing
        arrival = min(range(N_DIRS), key=lambda f: dist[pose, pose_index(goal, f)])
        pose = pose_index(goal, arrival)
    cost += _cost_to_cell(dist[pose], task.start_cell)
    return GOAL_REWARD - float(cost)


# ---------------------------------------------------------------------------
# dense MDP view (cross-checks against the shared DP kernel)
# ---------------------------------------------------------------------------


def to_tabular_mdp(task, engine=None):
    """Materialize the engine as a dense TabularMdp (gamma = 1, episodic).

    Intended for small cross-checks; tour state spaces get large.
    """
    engine = engine or compile_task(task)
    n, a = engine.n_states, N_ACTIONS
    transition = np.zeros((n, a, n))
    rows = np.repeat(np.arange(n), a)
    cols = np.tile(np.arange(a), n)
    transition[rows, cols, engine.successors.ravel()] = 1.0
    p0 = np.zeros(n)
    p0[engine.start] = 1.0
    return TabularMdp(
        transition=transition,
        reward=engine.rewards.copy(),
        gamma=1.0,
        p0=p0,
        terminal_mask=np.arange(n) == engine.sink,
        horizon=engine.horizon,
    )


def feature_map_for(task, engine=None):
    """FeatureMap over engine states (same features for every action)."""
    engine = engine or compile_task(task)
    feats = state_features(task, engine, np.arange(engine.n_states))
    return FeatureMap.from_state_features(feats, N_ACTIONS)
