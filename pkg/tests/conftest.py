import numpy as np
import pytest

from curriculum_teaching.mdp import FeatureMap, Policy, TabularMdp


def make_self_loop(reward=1.0, gamma=0.9, n_actions=1):
    """Single absorbing-free state looping onto itself."""
    return TabularMdp(
        transition=np.ones((1, n_actions, 1)),
        reward=np.full((1, n_actions), reward),
        gamma=gamma,
        p0=np.array([1.0]),
        terminal_mask=np.array([False]),
    )


def make_chain(rewards, gamma=1.0, n_actions=2):
    """Deterministic chain s0 -> s1 -> ... -> terminal; rewards[s][a]."""
    rewards = np.asarray(rewards, dtype=float)
    n = rewards.shape[0] + 1
    transition = np.zeros((n, n_actions, n))
    for s in range(n - 1):
        transition[s, :, s + 1] = 1.0
    transition[n - 1, :, n - 1] = 1.0
    reward = np.zeros((n, n_actions))
    reward[: n - 1] = rewards
    p0 = np.zeros(n)
    p0[0] = 1.0
    return TabularMdp(
        transition=transition,
        reward=reward,
        gamma=gamma,
        p0=p0,
        terminal_mask=np.arange(n) == n - 1,
    )


def random_mdp(seed, n_states=5, n_actions=3, gamma=0.9, episodic=False):
    """Random stochastic MDP; optionally with one absorbing terminal."""
    rng = np.random.default_rng(seed)
    t = rng.random((n_states, n_actions, n_states)) + 0.05
    t /= t.sum(axis=2, keepdims=True)
    reward = rng.normal(size=(n_states, n_actions))
    terminal = np.zeros(n_states, dtype=bool)
    if episodic:
        terminal[-1] = True
        t[-1] = 0.0
        t[-1, :, -1] = 1.0
        reward[-1] = 0.0
    p0 = rng.random(n_states)
    p0 /= p0.sum()
    return TabularMdp(t, reward, gamma, p0, terminal)


def random_feature_map(seed, n_states, n_actions, dim):
    rng = np.random.default_rng(seed)
    return FeatureMap(rng.normal(size=(n_states, n_actions, dim)))


@pytest.fixture
def self_loop():
    return make_self_loop()


@pytest.fixture
def uniform_policy():
    return lambda s, a: Policy(np.full((s, a), 1.0 / a))
