"""Soft values, soft policies, and trajectory weights on a tiny gridchain.

Builds a small deterministic episodic MDP, solves it with the soft-Bellman
operator, and shows that the product of the policy's action probabilities
along every trajectory reproduces the exponential-family trajectory weight
exp(<theta, mu>) normalized by an enumerated partition function.
"""

import numpy as np

from curriculum_teaching import enumerate_trajectories, soft_value_iteration
from curriculum_teaching.theory import check_gibbs_consistency, random_episodic_mdp

rng = np.random.default_rng(0)
mdp, features = random_episodic_mdp(rng, n_states=7, n_actions=3, depth=4, feature_dim=3)
theta = rng.normal(size=3)

solution = soft_value_iteration(mdp, reward=features.table @ theta, tol=1e-12)
print("soft values per state:", np.round(solution.v, 4))
print("policy row sums:", solution.policy.probs.sum(axis=1))

trajectories = enumerate_trajectories(mdp, start=0, horizon=mdp.horizon)
print(f"\n{len(trajectories)} trajectories from the start state")
weights = np.array([theta @ t.mu(features, mdp.gamma) for t in trajectories])
gibbs = np.exp(weights) / np.exp(weights).sum()
products = np.array(
    [np.prod(solution.policy.probs[t.states, t.actions]) for t in trajectories]
)
print("max |policy product - normalized trajectory weight|:",
      float(np.abs(products - gibbs).max()))

report = check_gibbs_consistency(mdp, features, theta)
print("consistency check:", "pass" if report.passed() else "FAIL",
      f"(max relative error {report.max_rel_error:.2e})")
