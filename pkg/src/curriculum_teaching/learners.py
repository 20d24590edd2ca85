"""Sequential imitation learners and their gradients.

Two learner families share one online update rule:

  * a maximum-entropy reward learner whose policy is the soft-Bellman
    policy of a parametric reward R_theta solved on the MDP, and
  * a cross-entropy action-cloning learner whose policy is a per-state
    softmax of a parametric score H_theta.

Parameterizations: linear and quadratic forms over a state-action feature
map, plus a small fully-connected scoring network for the cloning learner.
Every analytic gradient here has a matching loss function so it can be
checked against central finite differences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .mdp import (
    FeatureMap,
    Policy,
    feature_expectation,
    soft_value_iteration,
)
from .mlp import ScoringMlp

MAXENT_IRL = "maxent_irl"
CROSSENT_BC = "crossent_bc"

_MODELS = (MAXENT_IRL, CROSSENT_BC)
_PARAMETERIZATIONS = ("linear", "quadratic", "mlp")


@dataclass(frozen=True)
class EtaSchedule:
    """Learning-rate schedule: constant, or step decay every `every` updates."""

    base: float
    kind: str = "constant"
    factor: float = 0.5
    every: int = 500

    def value(self, t):
        if self.kind == "constant":
            return self.base
        if self.kind == "step_decay":
            return self.base * self.factor ** (t // self.every)
        raise ValueError(f"unknown schedule kind {self.kind!r}")


@dataclass(frozen=True)
class LearnerSpec:
    """Model family, parameterization, and the learner's feature view.

    `feature_map` drives the linear/quadratic forms. The mlp
    parameterization instead scores per-state feature rows
    (`state_features`), one score per action.
    """

    model: str
    parameterization: str
    feature_map: FeatureMap | None = None
    state_features: np.ndarray | None = None
    hidden: tuple = (64, 64)
    eta: EtaSchedule = field(default_factory=lambda: EtaSchedule(0.1))
    projection: tuple | None = None

    def __post_init__(self):
        if self.model not in _MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.parameterization not in _PARAMETERIZATIONS:
            raise ValueError(f"unknown parameterization {self.parameterization!r}")
        if self.parameterization == "mlp":
            if self.model != CROSSENT_BC:
                raise ValueError("mlp scoring is only supported for the cloning learner")
            if self.state_features is None:
                raise ValueError("mlp parameterization requires state_features")
            object.__setattr__(
                self, "state_features", np.asarray(self.state_features, dtype=float)
            )
        elif self.feature_map is None:
            raise ValueError("linear/quadratic parameterizations require a feature_map")

    @property
    def feature_dim(self):
        if self.parameterization == "mlp":
            return self.state_features.shape[1]
        return self.feature_map.dim

    @property
    def param_dim(self):
        if self.parameterization == "linear":
            return self.feature_dim
        if self.parameterization == "quadratic":
            return 2 * self.feature_dim
        return self.network().n_params

    def network(self):
        if self.parameterization != "mlp":
            raise ValueError("network() only applies to the mlp parameterization")
        n_actions = None
        if self.feature_map is not None:
            n_actions = self.feature_map.table.shape[1]
        return ScoringMlp(self.feature_dim, n_actions or 3, hidden=self.hidden)


def init_params(spec, rng=None):
    """Initial parameter vector: zeros, except the mlp which needs a seeded init."""
    if spec.parameterization == "mlp":
        if rng is None:
            raise ValueError("mlp init requires an rng (zero weights stall training)")
        return spec.network().init_params(rng)
    return np.zeros(spec.param_dim)


def _split_quadratic(spec, theta):
    d = spec.feature_dim
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.param_dim,):
        raise ValueError(f"expected theta of dim {spec.param_dim}, got {theta.shape}")
    if spec.parameterization == "linear":
        return theta, None
    return theta[:d], theta[d:]


def score_table(spec, theta):
    """R_theta (reward learner) or H_theta (cloning learner) on every (s, a).

    linear:    <theta, phi(s, a)>
    quadratic: <theta_1, phi> + <theta_2, phi>^2
    """
    if spec.parameterization == "mlp":
        return spec.network().forward(theta, spec.state_features)
    th1, th2 = _split_quadratic(spec, theta)
    table = spec.feature_map.table @ th1
    if th2 is not None:
        table = table + (spec.feature_map.table @ th2) ** 2
    return table


def augmented_features(spec, theta):
    """Gradient of the score table w.r.t. theta: psi(s, a) with d(score)/d(theta) = psi.

    linear: psi = phi. quadratic: psi = [phi; 2 <theta_2, phi> phi].
    """
    if spec.parameterization == "mlp":
        raise ValueError("augmented features are undefined for the mlp scoring network")
    th1, th2 = _split_quadratic(spec, theta)
    del th1
    phi = spec.feature_map.table
    if th2 is None:
        return spec.feature_map
    inner = phi @ th2
    return FeatureMap(np.concatenate([phi, 2.0 * inner[..., None] * phi], axis=2))


def learner_policy(spec, theta, mdp, tol=1e-10, v_init=None):
    """The learner's policy at theta; see `learner_policy_solution` for values."""
    return learner_policy_solution(spec, theta, mdp, tol=tol, v_init=v_init)[0]


def learner_policy_solution(spec, theta, mdp, tol=1e-10, v_init=None):
    """(Policy, soft V or None). The soft values let callers warm-start."""
    if spec.model == MAXENT_IRL:
        sol = soft_value_iteration(mdp, reward=score_table(spec, theta), tol=tol, v_init=v_init)
        return sol.policy, sol.v
    scores = score_table(spec, theta)
    scores = scores - scores.max(axis=1, keepdims=True)
    probs = np.exp(scores)
    probs /= probs.sum(axis=1, keepdims=True)
    return Policy(probs), None


def _as_demo_list(demos):
    return list(demos) if isinstance(demos, (list, tuple)) else [demos]


def _mean_mu(demos, fmap, gamma):
    return np.mean([d.mu(fmap, gamma) for d in demos], axis=0)


def maxent_gradient(spec, theta, demos, mdp, start=None, policy=None, tol=1e-10):
    """Feature-expectation gradient of the reward learner.

    g = mu^{pi_theta, start} - mean over demos of mu^xi, in the augmented
    feature space of the current parameterization. `demos` may be a single
    demonstration or a set sharing a start state; when `start` is omitted it
    defaults to the common demo start (teaching over states), falling back
    to the MDP's initial distribution when starts differ.
    """
    if spec.model != MAXENT_IRL:
        raise ValueError("maxent_gradient requires the reward learner")
    demos = _as_demo_list(demos)
    if start is None:
        starts = {d.start_state for d in demos}
        start = starts.pop() if len(starts) == 1 else None
    psi = augmented_features(spec, theta)
    if policy is None:
        policy = learner_policy(spec, theta, mdp, tol=tol)
    mu_pi = feature_expectation(mdp, policy, psi, start=start, tol=tol)
    return mu_pi - _mean_mu(demos, psi, mdp.gamma)


def maxent_demo_loss(spec, theta, demos, mdp, start=None, tol=1e-12):
    """Loss whose exact gradient is `maxent_gradient`.

    V_theta(start) - mean discounted R_theta along the demos. For
    deterministic, episodic, undiscounted MDPs this equals the negative
    log-likelihood of the demo under the soft-Bellman policy (up to the
    theta-independent start term); in general it is the standard
    per-trajectory surrogate whose gradient is the feature-expectation
    difference. Used by the finite-difference oracle.
    """
    demos = _as_demo_list(demos)
    if start is None:
        starts = {d.start_state for d in demos}
        if len(starts) != 1:
            raise ValueError("demo loss needs a common start state")
        start = starts.pop()
    table = score_table(spec, theta)
    sol = soft_value_iteration(mdp, reward=table, tol=tol)
    returns = np.mean([d.discounted_return(table, mdp.gamma) for d in demos])
    return float(sol.v[start] - returns)


def crossent_gradient(spec, theta, demos, policy=None):
    """Cross-entropy gradient of the cloning learner.

    g = sum over demo steps of (E_{a ~ pi_theta(.|s)}[psi(s, a)] - psi(s, a_t)),
    averaged over the demo set. The mlp case backpropagates the equivalent
    softmax deltas through the network.
    """
    if spec.model != CROSSENT_BC:
        raise ValueError("crossent_gradient requires the cloning learner")
    demos = _as_demo_list(demos)
    if spec.parameterization == "mlp":
        net = spec.network()
        total = np.zeros(spec.param_dim)
        for demo in demos:
            x = spec.state_features[demo.states]
            _, grad = mlp_crossent(net, theta, x, demo.actions)
            total += grad
        return total / len(demos)
    if policy is None:
        scores = score_table(spec, theta)
        scores = scores - scores.max(axis=1, keepdims=True)
        probs = np.exp(scores)
        probs /= probs.sum(axis=1, keepdims=True)
    else:
        probs = policy.probs
    psi = augmented_features(spec, theta).table
    total = np.zeros(spec.param_dim)
    for demo in demos:
        s, a = demo.states, demo.actions
        expected = np.einsum("ta,tad->td", probs[s], psi[s]).sum(axis=0)
        total += expected - psi[s, a].sum(axis=0)
    return total / len(demos)


def crossent_demo_loss(spec, theta, demos):
    """Summed cross-entropy -sum_t log pi_theta(a_t | s_t), averaged over demos."""
    demos = _as_demo_list(demos)
    if spec.parameterization == "mlp":
        net = spec.network()
        losses = []
        for demo in demos:
            log_pi = net.log_policy(theta, spec.state_features[demo.states])
            losses.append(-log_pi[np.arange(len(demo)), demo.actions].sum())
        return float(np.mean(losses))
    scores = score_table(spec, theta)
    log_z = np.log(np.exp(scores - scores.max(axis=1, keepdims=True)).sum(axis=1))
    log_z += scores.max(axis=1)
    losses = []
    for demo in demos:
        s, a = demo.states, demo.actions
        losses.append(float((log_z[s] - scores[s, a]).sum()))
    return float(np.mean(losses))


def mlp_crossent(net, theta, x, actions):
    """(loss, flat gradient) of the summed cross-entropy on one feature batch."""
    actions = np.asarray(actions, dtype=int)
    log_pi = net.log_policy(theta, x)
    loss = float(-log_pi[np.arange(len(actions)), actions].sum())
    deltas = np.exp(log_pi)
    deltas[np.arange(len(actions)), actions] -= 1.0
    return loss, net.grad_from_score_deltas(theta, x, deltas)


def update(theta, grad, eta, projection=None):
    """Online projected gradient step: Proj[theta - eta * grad].

    projection=None means the whole parameter space; a (lo, hi) pair clamps
    coordinatewise.
    """
    theta = np.asarray(theta, dtype=float) - float(eta) * np.asarray(grad, dtype=float)
    if projection is not None:
        lo, hi = projection
        theta = np.clip(theta, lo, hi)
    return theta


# ---------------------------------------------------------------------------
# checkpoints (schema v1, exact round-trip via JSON float repr)
# ---------------------------------------------------------------------------

_CHECKPOINT_SCHEMA = "learner-checkpoint/1"


def save_checkpoint(spec, theta, path, extra=None):
    payload = {
        "schema": _CHECKPOINT_SCHEMA,
        "model": spec.model,
        "parameterization": spec.parameterization,
        "feature_dim": int(spec.feature_dim),
        "hidden": list(spec.hidden),
        "theta": [float(x) for x in np.asarray(theta, dtype=float)],
    }
    if extra:
        payload["extra"] = extra
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_checkpoint(path):
    """Returns (metadata dict, theta). The caller re-binds feature tables."""
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("schema") != _CHECKPOINT_SCHEMA:
        raise ValueError(f"unsupported checkpoint schema {payload.get('schema')!r}")
    theta = np.array(payload.pop("theta"), dtype=float)
    return payload, theta


def smoothed_feature_map(mdp, state_features):
    """Transition-smoothed view phi(s, a) = E_{s' ~ T(.|s, a)}[phi_env(s')].

    The cloning learner uses this one-step lookahead of the environment's
    per-state features as its own feature map.
    """
    sf = np.asarray(state_features, dtype=float)
    return FeatureMap(np.einsum("sat,td->sad", mdp.transition, sf))
