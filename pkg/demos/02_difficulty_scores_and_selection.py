"""Difficulty scores and what each teaching strategy picks.

Enumerates a demo pool on a small instance, scores every demo under the
teacher's and the learner's policies, and compares the picks of the
curriculum teacher and the baselines on one snapshot.
"""

import numpy as np

from curriculum_teaching import (
    CandidatePool,
    CandidateSet,
    Teacher,
    enumerate_trajectories,
    soft_value_iteration,
)
from curriculum_teaching.learners import LearnerSpec, MAXENT_IRL, maxent_gradient
from curriculum_teaching.theory import random_episodic_mdp

rng = np.random.default_rng(1)
mdp, features = random_episodic_mdp(rng, n_states=8, n_actions=3, depth=5, feature_dim=4)
theta_star = rng.normal(size=4)
theta_t = rng.normal(size=4) * 0.3

pool = CandidatePool(
    [CandidateSet.single(d) for d in enumerate_trajectories(mdp, 0, mdp.horizon)]
)
teacher_policy = soft_value_iteration(mdp, reward=features.table @ theta_star).policy
learner_policy = soft_value_iteration(mdp, reward=features.table @ theta_t).policy

log_psi_e = pool.log_difficulties(teacher_policy)
log_psi_l = pool.log_difficulties(learner_policy)
print(f"pool of {len(pool)} demos")
print("teacher difficulty (log):", np.round(log_psi_e[:8], 3))
print("learner difficulty (log):", np.round(log_psi_l[:8], 3))

spec = LearnerSpec(MAXENT_IRL, "linear", feature_map=features)


def grad_fn(candidate, theta, view):
    return maxent_gradient(spec, theta, list(candidate.demos), mdp)


strategies = {
    "CUR": dict(),
    "CUR-T": dict(),
    "CUR-L": dict(),
    "AGN": dict(),
    "OMN": dict(theta_star=theta_star, grad_fn=grad_fn),
    "BBOX": dict(mdp=mdp),
    "SCOT": dict(mdp=mdp, feature_map=features),
}
for name, extra in strategies.items():
    teacher = Teacher(
        name, pool, log_psi_e=log_psi_e, teacher_policy=teacher_policy, rng=0, **extra
    )
    pick = teacher.select(1, learner_policy, theta_t=theta_t, eta=0.1)
    print(f"{name:6s} picks demo {pick.index}")

# the curriculum pick maximizes the difficulty-score ratio, which on these
# instances equals picking the demo whose features best align with theta*-theta
mus = pool.mean_mu(features, mdp.gamma)
oracle = int(np.argmax(mus @ (theta_star - theta_t)))
cur_pick = Teacher("CUR", pool, log_psi_e=log_psi_e).select(1, learner_policy).index
print(f"\nalignment oracle picks {oracle}; CUR picks {cur_pick}")
