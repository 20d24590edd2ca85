"""Tabular MDPs and the exact dynamic-programming kernel.

Everything downstream (learners, teachers, diagnostics) consumes the types
and solvers in this module. All solvers are pure functions of their inputs;
randomness enters only through explicitly passed seeds or generators.

Conventions:
  * transition[s, a, s'] is the probability of landing in s' from (s, a),
  * terminal states are absorbing with zero reward on every action and are
    excluded from occupancy mass (absorbed mass leaves the system),
  * soft values pin V = 0 and a uniform policy on terminal states.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

TRANSITION_TOL = 1e-12
POLICY_ROW_TOL = 1e-10

_feature_map_tokens = itertools.count()


class MdpValidationError(ValueError):
    """An MDP, policy, or demonstration violates a structural invariant."""


class IterationLimitError(RuntimeError):
    """A fixed-point solve exhausted its iteration budget.

    Carries the last sup-norm residual so callers can distinguish slow
    convergence from genuine divergence.
    """

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = float(residual)


def _freeze(a):
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class TabularMdp:
    """Finite MDP with dense transition tensor and state-action rewards.

    Fields:
        transition: (S, A, S) float array, rows over s' sum to 1.
        reward: (S, A) float array in environment units.
        gamma: discount in [0, 1]. gamma = 1 is allowed for episodic MDPs
            whose terminal states absorb all trajectories.
        p0: (S,) initial state distribution.
        terminal_mask: (S,) bool; terminal states are absorbing and give
            zero reward on every action.
        horizon: optional episode cap used by samplers and occupancy
            propagation when gamma alone does not truncate mass.
    """

    transition: np.ndarray
    reward: np.ndarray
    gamma: float
    p0: np.ndarray
    terminal_mask: np.ndarray
    horizon: int | None = None

    def __post_init__(self):
        t = np.asarray(self.transition, dtype=float)
        r = np.asarray(self.reward, dtype=float)
        p0 = np.asarray(self.p0, dtype=float)
        term = np.asarray(self.terminal_mask, dtype=bool)
        if t.ndim != 3 or t.shape[0] != t.shape[2]:
            raise MdpValidationError(f"transition must be (S, A, S), got {t.shape}")
        s, a, _ = t.shape
        if r.shape != (s, a):
            raise MdpValidationError(f"reward must be {(s, a)}, got {r.shape}")
        if p0.shape != (s,) or term.shape != (s,):
            raise MdpValidationError("p0 and terminal_mask must have length S")
        if np.any(t < 0):
            raise MdpValidationError("transition entries must be nonnegative")
        row_sums = t.sum(axis=2)
        if np.any(np.abs(row_sums - 1.0) > TRANSITION_TOL):
            worst = np.abs(row_sums - 1.0).max()
            raise MdpValidationError(f"transition rows must sum to 1 (off by {worst:.3e})")
        if abs(p0.sum() - 1.0) > TRANSITION_TOL or np.any(p0 < 0):
            raise MdpValidationError("p0 must be a probability distribution")
        if not (0.0 <= self.gamma <= 1.0):
            raise MdpValidationError(f"gamma must be in [0, 1], got {self.gamma}")
        if term.any():
            idx = np.flatnonzero(term)
            if np.any(np.abs(r[idx]) > 0):
                raise MdpValidationError("terminal states must have zero reward")
            self_loop = t[idx, :, :][:, :, idx].sum(axis=2) if len(idx) else None
            for k, si in enumerate(idx):
                if not np.allclose(t[si, :, si], 1.0, atol=TRANSITION_TOL):
                    raise MdpValidationError(f"terminal state {si} is not absorbing")
            del self_loop
        object.__setattr__(self, "transition", _freeze(t))
        object.__setattr__(self, "reward", _freeze(r))
        object.__setattr__(self, "p0", _freeze(p0))
        object.__setattr__(self, "terminal_mask", _freeze(term))
        object.__setattr__(self, "_flat_transition", None)

    @property
    def n_states(self):
        return self.transition.shape[0]

    @property
    def n_actions(self):
        return self.transition.shape[1]

    @property
    def flat_transition(self):
        """(S*A, S) contiguous view of the transition tensor (cached)."""
        if self._flat_transition is None:
            flat = _freeze(self.transition.reshape(-1, self.n_states))
            object.__setattr__(self, "_flat_transition", flat)
        return self._flat_transition

    def is_deterministic(self, tol=TRANSITION_TOL):
        return bool(np.all(np.abs(self.transition.max(axis=2) - 1.0) <= tol))

    def successor_table(self):
        """(S, A) int array of successors; valid only for deterministic MDPs."""
        if not self.is_deterministic():
            raise MdpValidationError("successor_table requires deterministic transitions")
        return self.transition.argmax(axis=2)


@dataclass(frozen=True)
class Policy:
    """Row-stochastic action distribution per state."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 2:
            raise MdpValidationError("policy table must be (S, A)")
        if np.any(p < 0):
            raise MdpValidationError("policy entries must be nonnegative")
        if np.any(np.abs(p.sum(axis=1) - 1.0) > POLICY_ROW_TOL):
            worst = np.abs(p.sum(axis=1) - 1.0).max()
            raise MdpValidationError(f"policy rows must sum to 1 (off by {worst:.3e})")
        object.__setattr__(self, "probs", _freeze(p))

    @property
    def n_states(self):
        return self.probs.shape[0]

    @property
    def n_actions(self):
        return self.probs.shape[1]

    @staticmethod
    def deterministic(actions, n_actions):
        actions = np.asarray(actions, dtype=int)
        p = np.zeros((actions.shape[0], n_actions))
        p[np.arange(actions.shape[0]), actions] = 1.0
        return Policy(p)

    @staticmethod
    def uniform(n_states, n_actions):
        return Policy(np.full((n_states, n_actions), 1.0 / n_actions))

    def greedy_actions(self):
        return self.probs.argmax(axis=1)


@dataclass(frozen=True)
class FeatureMap:
    """State-action feature table phi(s, a) of fixed dimension."""

    table: np.ndarray
    token: int = field(default_factory=lambda: next(_feature_map_tokens), compare=False)

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if t.ndim != 3:
            raise MdpValidationError("feature table must be (S, A, d)")
        if not np.all(np.isfinite(t)):
            raise MdpValidationError("feature entries must be finite")
        object.__setattr__(self, "table", _freeze(t))

    @property
    def dim(self):
        return self.table.shape[2]

    @staticmethod
    def from_state_features(state_features, n_actions):
        """Broadcast per-state features to every action: phi(s, a) = phi(s)."""
        sf = np.asarray(state_features, dtype=float)
        return FeatureMap(np.repeat(sf[:, None, :], n_actions, axis=1))


class Demonstration:
    """A state-action trajectory with cached discounted feature vectors.

    `steps` is an (T, 2) int array of (state, action) pairs. `final_state`
    records the successor of the last step when known (needed to score the
    last transition factor of the likelihood); it may be None.
    """

    __slots__ = ("steps", "final_state", "_mu_cache")

    def __init__(self, steps, final_state=None):
        steps = np.asarray(steps, dtype=int)
        if steps.ndim != 2 or steps.shape[1] != 2 or steps.shape[0] == 0:
            raise MdpValidationError("steps must be a nonempty (T, 2) array")
        self.steps = _freeze(steps)
        self.final_state = None if final_state is None else int(final_state)
        self._mu_cache = {}

    def __len__(self):
        return self.steps.shape[0]

    def __eq__(self, other):
        return (
            isinstance(other, Demonstration)
            and np.array_equal(self.steps, other.steps)
            and self.final_state == other.final_state
        )

    def __hash__(self):
        return hash((self.steps.tobytes(), self.final_state))

    @property
    def start_state(self):
        return int(self.steps[0, 0])

    @property
    def states(self):
        return self.steps[:, 0]

    @property
    def actions(self):
        return self.steps[:, 1]

    def validate(self, mdp, horizon=None):
        """Check transition consistency and the optional length cap."""
        cap = horizon if horizon is not None else mdp.horizon
        if cap is not None and len(self) > cap:
            raise MdpValidationError(f"demonstration longer than horizon {cap}")
        s, a = self.states, self.actions
        if np.any(s >= mdp.n_states) or np.any(a >= mdp.n_actions):
            raise MdpValidationError("state or action index out of range")
        probs = mdp.transition[s[:-1], a[:-1], s[1:]]
        if np.any(probs <= 0):
            bad = int(np.flatnonzero(probs <= 0)[0])
            raise MdpValidationError(f"zero-probability transition at step {bad}")
        if self.final_state is not None:
            if mdp.transition[s[-1], a[-1], self.final_state] <= 0:
                raise MdpValidationError("zero-probability final transition")

    def mu(self, feature_map, gamma):
        """Discounted feature vector sum_t gamma^t phi(s_t, a_t), cached."""
        key = (feature_map.token, float(gamma))
        cached = self._mu_cache.get(key)
        if cached is None:
            disc = gamma ** np.arange(len(self))
            phi = feature_map.table[self.states, self.actions]
            cached = _freeze(disc @ phi)
            self._mu_cache[key] = cached
        return cached

    def visitation(self, n_states, n_actions, gamma):
        """Discounted empirical visitation rho^xi over (s, a) pairs."""
        rho = np.zeros((n_states, n_actions))
        disc = gamma ** np.arange(len(self))
        np.add.at(rho, (self.states, self.actions), disc)
        return rho

    def discounted_return(self, reward, gamma):
        disc = gamma ** np.arange(len(self))
        return float(disc @ reward[self.states, self.actions])


def value_iteration(mdp, tol=1e-10, max_iters=100_000):
    """Optimal values and a greedy deterministic policy for R under gamma.

    Ties in the greedy argmax break toward the lowest action index. Raises
    IterationLimitError when the sup-norm Bellman residual is still above
    tol after max_iters sweeps.
    """
    shape = (mdp.n_states, mdp.n_actions)
    v = np.zeros(mdp.n_states)
    for _ in range(max_iters):
        q = mdp.reward + mdp.gamma * (mdp.flat_transition @ v).reshape(shape)
        v_new = q.max(axis=1)
        residual = np.abs(v_new - v).max()
        v = v_new
        if residual < tol:
            break
    else:
        raise IterationLimitError("value iteration did not converge", residual)
    q = mdp.reward + mdp.gamma * (mdp.flat_transition @ v).reshape(shape)
    return v, Policy.deterministic(q.argmax(axis=1), mdp.n_actions)


@dataclass(frozen=True)
class SoftSolution:
    v: np.ndarray
    q: np.ndarray
    policy: Policy


def soft_value_iteration(mdp, reward=None, tol=1e-10, max_iters=100_000, v_init=None):
    """Soft-Bellman fixed point: V = logsumexp_a Q, pi = exp(Q - V).

    Q(s, a) = R(s, a) + gamma * sum_s' T(s'|s, a) V(s'). Terminal states
    are pinned at V = 0 with a uniform policy, so that telescoping the
    policy product over an episodic trajectory reproduces its Gibbs weight.

    `reward` overrides mdp.reward (used by learners with parametric R).
    `v_init` warm-starts the sweep; the fixed point does not depend on it.
    """
    r = mdp.reward if reward is None else np.asarray(reward, dtype=float)
    if r.shape != (mdp.n_states, mdp.n_actions):
        raise MdpValidationError(f"reward table must be {(mdp.n_states, mdp.n_actions)}")
    live = ~mdp.terminal_mask
    v = np.zeros(mdp.n_states) if v_init is None else np.array(v_init, dtype=float)
    v[mdp.terminal_mask] = 0.0
    shape = (mdp.n_states, mdp.n_actions)
    for _ in range(max_iters):
        q = r + mdp.gamma * (mdp.flat_transition @ v).reshape(shape)
        v_new = np.where(live, logsumexp(q, axis=1), 0.0)
        residual = np.abs(v_new - v).max()
        v = v_new
        if residual < tol:
            break
    else:
        raise IterationLimitError("soft value iteration did not converge", residual)
    q = r + mdp.gamma * (mdp.flat_transition @ v).reshape(shape)
    q[mdp.terminal_mask] = 0.0
    log_pi = q - np.where(live, logsumexp(q, axis=1), np.log(mdp.n_actions))[:, None]
    return SoftSolution(v=_freeze(v), q=_freeze(q), policy=Policy(np.exp(log_pi)))


def _start_distribution(mdp, start):
    if start is None:
        return np.array(mdp.p0, dtype=float)
    d = np.zeros(mdp.n_states)
    d[int(start)] = 1.0
    return d


def occupancy(mdp, policy, start=None, tol=1e-10, max_steps=None, method="propagate"):
    """Discounted state-action occupancy rho(s, a).

    rho(s, a) = sum_t gamma^t P(S_t = s) pi(a|s), with mass entering a
    terminal state removed (absorbed) rather than accumulated. When no
    terminal state truncates mass, sum rho = 1 / (1 - gamma).

    method="propagate" pushes mass forward until the per-step contribution
    drops below tol (or max_steps is hit). method="solve" solves the linear
    flow equations directly; both agree to solver precision and the second
    is kept as an independent cross-check and for stiff gamma ~ 1 cases.
    """
    d = _start_distribution(mdp, start)
    d[mdp.terminal_mask] = 0.0
    live = ~mdp.terminal_mask
    if method == "solve":
        flow = np.einsum("sa,sat->st", policy.probs, mdp.transition)
        flow[:, mdp.terminal_mask] = 0.0
        flow[mdp.terminal_mask, :] = 0.0
        state_occ = np.linalg.solve(
            np.eye(mdp.n_states) - mdp.gamma * flow.T, d
        )
        state_occ[mdp.terminal_mask] = 0.0
        return state_occ[:, None] * policy.probs
    if method != "propagate":
        raise ValueError(f"unknown occupancy method {method!r}")
    if max_steps is None:
        if mdp.gamma < 1.0:
            max_steps = int(np.ceil(np.log(max(tol, 1e-300)) / np.log(mdp.gamma))) + 1
        else:
            max_steps = mdp.horizon if mdp.horizon is not None else 100_000
    # the whole remaining tail contributes at most mass * 1/(1-gamma)
    tail_factor = 1.0 / (1.0 - mdp.gamma) if mdp.gamma < 1.0 else 1.0
    rho = np.zeros((mdp.n_states, mdp.n_actions))
    for _ in range(max_steps):
        if d.sum() * tail_factor < tol:
            break
        mass = d[:, None] * policy.probs
        rho += mass
        d = mdp.gamma * (mass.reshape(-1) @ mdp.flat_transition)
        d *= live
    return rho


def visitation_frequencies(mdp, policy, start=None, tol=1e-10, max_steps=None):
    """Alias of `occupancy` under the name used by teaching baselines."""
    return occupancy(mdp, policy, start=start, tol=tol, max_steps=max_steps)


def feature_expectation(mdp, policy, feature_map, start=None, tol=1e-10, max_steps=None):
    """mu^pi = sum over (s, a) of rho(s, a) phi(s, a), optionally from a fixed start.

    Shares the occupancy computation at the same tol, so the identity
    mu = sum rho * phi holds exactly against `occupancy` with equal
    arguments; pass a tighter tol when feature magnitudes demand it.
    """
    rho = occupancy(mdp, policy, start=start, tol=tol, max_steps=max_steps)
    return np.einsum("sa,sad->d", rho, feature_map.table)


def policy_value(mdp, policy, start=None, tol=1e-10, max_steps=None):
    """Total expected discounted reward V^pi from p0 (or a fixed start).

    Agrees with direct Bellman evaluation (`policy_state_values`) to tol.
    """
    scale = max(1.0, float(np.abs(mdp.reward).max()))
    rho = occupancy(mdp, policy, start=start, tol=tol / scale, max_steps=max_steps)
    return float(np.sum(rho * mdp.reward))


def policy_state_values(mdp, policy):
    """Per-state V^pi(s) by direct Bellman evaluation (linear solve)."""
    r_pi = np.sum(policy.probs * mdp.reward, axis=1)
    flow = np.einsum("sa,sat->st", policy.probs, mdp.transition)
    flow[:, mdp.terminal_mask] = 0.0
    flow[mdp.terminal_mask, :] = 0.0
    r_pi = np.where(mdp.terminal_mask, 0.0, r_pi)
    return np.linalg.solve(np.eye(mdp.n_states) - mdp.gamma * flow, r_pi)


def sample_trajectory(mdp, policy, start, horizon, rng):
    """Roll out `policy` from `start`, truncating at a terminal state or horizon.

    `rng` is a numpy Generator or an int seed; identical seeds give identical
    trajectories.
    """
    if horizon < 1:
        raise MdpValidationError("horizon must be >= 1")
    rng = np.random.default_rng(rng)
    s = int(start)
    steps = []
    for _ in range(horizon):
        if mdp.terminal_mask[s]:
            break
        a = int(rng.choice(mdp.n_actions, p=policy.probs[s]))
        steps.append((s, a))
        s = int(rng.choice(mdp.n_states, p=mdp.transition[s, a]))
    if not steps:
        raise MdpValidationError(f"start state {start} is terminal")
    return Demonstration(np.array(steps), final_state=s)


def trajectory_log_likelihood(mdp, policy, demo):
    """log P(xi | policy) = log p0(s0) + sum_t [log pi(a|s) + log T(s'|s, a)].

    Returns -inf when any factor is zero. The transition factor of the last
    step is included only when demo.final_state is known.
    """
    demo.validate(mdp)
    s, a = demo.states, demo.actions
    factors = [mdp.p0[s[0]]]
    factors.extend(policy.probs[s, a])
    factors.extend(mdp.transition[s[:-1], a[:-1], s[1:]])
    if demo.final_state is not None:
        factors.append(mdp.transition[s[-1], a[-1], demo.final_state])
    factors = np.asarray(factors)
    if np.any(factors <= 0.0):
        return float("-inf")
    return float(np.log(factors).sum())


def enumerate_trajectories(mdp, start, horizon):
    """All trajectories from `start` in a deterministic MDP.

    Trajectories stop at the first terminal state or after `horizon` steps.
    Used by the enumeration oracles (partition functions, Gibbs checks).
    """
    succ = mdp.successor_table()
    out = []

    def extend(prefix, s, depth):
        if mdp.terminal_mask[s] or depth == horizon:
            if prefix:
                out.append(Demonstration(np.array(prefix), final_state=s))
            return
        for a in range(mdp.n_actions):
            extend(prefix + [(s, a)], int(succ[s, a]), depth + 1)

    extend([], int(start), 0)
    return out


# ---------------------------------------------------------------------------
# plain-text serialization (schema v1)
# ---------------------------------------------------------------------------

_MDP_SCHEMA = "tabular-mdp/1"
_POLICY_SCHEMA = "policy/1"
_DEMOS_SCHEMA = "demos/1"


def _fmt(x):
    return repr(float(x))


def save_mdp(mdp, path):
    """Write an MDP as versioned plain text with row-major tables."""
    s, a = mdp.n_states, mdp.n_actions
    lines = [
        f"schema {_MDP_SCHEMA}",
        f"n_states {s}",
        f"n_actions {a}",
        f"gamma {_fmt(mdp.gamma)}",
        f"horizon {mdp.horizon if mdp.horizon is not None else 'none'}",
        "p0 " + " ".join(_fmt(x) for x in mdp.p0),
        "terminal " + " ".join(str(int(x)) for x in mdp.terminal_mask),
        "reward " + " ".join(_fmt(x) for x in mdp.reward.ravel()),
        "transition " + " ".join(_fmt(x) for x in mdp.transition.ravel()),
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_mdp(path):
    fields = {}
    with open(path) as fh:
        for line in fh:
            key, _, rest = line.rstrip("\n").partition(" ")
            fields[key] = rest
    if fields.get("schema") != _MDP_SCHEMA:
        raise MdpValidationError(f"unsupported mdp schema {fields.get('schema')!r}")
    s = int(fields["n_states"])
    a = int(fields["n_actions"])
    horizon = None if fields["horizon"] == "none" else int(fields["horizon"])
    return TabularMdp(
        transition=np.fromstring(fields["transition"], sep=" ").reshape(s, a, s),
        reward=np.fromstring(fields["reward"], sep=" ").reshape(s, a),
        gamma=float(fields["gamma"]),
        p0=np.fromstring(fields["p0"], sep=" "),
        terminal_mask=np.fromstring(fields["terminal"], sep=" ").astype(bool),
        horizon=horizon,
    )


def save_policy(policy, path):
    lines = [f"schema {_POLICY_SCHEMA}", f"shape {policy.n_states} {policy.n_actions}"]
    lines += [" ".join(_fmt(x) for x in row) for row in policy.probs]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_policy(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if lines[0] != f"schema {_POLICY_SCHEMA}":
        raise MdpValidationError(f"unsupported policy schema {lines[0]!r}")
    rows = [np.fromstring(line, sep=" ") for line in lines[2:]]
    return Policy(np.vstack(rows))


def save_demonstrations(demos, path):
    """Line-per-step text records; demos separated by `demo` header lines."""
    lines = [f"schema {_DEMOS_SCHEMA}"]
    for demo in demos:
        final = demo.final_state if demo.final_state is not None else "none"
        lines.append(f"demo {len(demo)} {final}")
        lines += [f"{s} {a}" for s, a in demo.steps]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_demonstrations(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if lines[0] != f"schema {_DEMOS_SCHEMA}":
        raise MdpValidationError(f"unsupported demos schema {lines[0]!r}")
    demos = []
    i = 1
    while i < len(lines):
        _, n, final = lines[i].split()
        n = int(n)
        steps = [tuple(map(int, lines[i + 1 + k].split())) for k in range(n)]
        demos.append(
            Demonstration(np.array(steps), final_state=None if final == "none" else int(final))
        )
        i += 1 + n
    return demos
