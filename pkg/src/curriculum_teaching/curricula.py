"""Difficulty scores, demonstration-selection strategies, and the epoch scheduler.

The difficulty of a demonstration under a policy is the inverse likelihood
of its actions, kept in log domain:

    log_psi = -sum_t log pi(a_t | s_t)   (>= 0, zero iff pi follows xi surely)

A start-state demo set scores as the arithmetic mean of its members'
difficulties. The curriculum teacher ranks candidates by the gap between
the learner's and the teacher's difficulty; the remaining strategies are
baselines with different knowledge requirements.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .mdp import feature_expectation, occupancy

STRATEGIES = ("CUR", "CUR-T", "CUR-L", "AGN", "OMN", "BBOX", "SCOT")


@dataclass(frozen=True)
class DifficultyScore:
    """Log-domain difficulty; +inf marks a zero-probability action (hardest)."""

    log_psi: float

    @property
    def psi(self):
        return float(np.exp(self.log_psi))


def demo_log_difficulty(policy, demo):
    """log Psi of one demonstration under a policy."""
    with np.errstate(divide="ignore"):
        logs = np.log(policy.probs[demo.states, demo.actions])
    return float(-logs.sum())


def difficulty(policy, demo):
    return DifficultyScore(demo_log_difficulty(policy, demo))


def set_difficulty(policy, demos):
    """Mean difficulty of a demo set: log of the arithmetic mean of the Psi."""
    logs = np.array([demo_log_difficulty(policy, d) for d in demos])
    return DifficultyScore(float(logsumexp(logs) - np.log(len(logs))))


@dataclass(frozen=True)
class CandidateSet:
    """One selectable unit: a single demo or all pooled demos from one start."""

    demos: tuple
    start_state: int
    label: object = None

    @staticmethod
    def single(demo, label=None):
        return CandidateSet(demos=(demo,), start_state=demo.start_state, label=label)


class CandidatePool:
    """Immutable pool of candidate sets with vectorized difficulty scoring.

    Step indices are flattened once at construction so that scoring the
    whole pool under a new policy is a single gather + segment sum.
    """

    def __init__(self, candidates):
        self.candidates = tuple(candidates)
        if not self.candidates:
            raise ValueError("candidate pool must be nonempty")
        flat_s, flat_a, demo_bounds, demo_owner = [], [], [0], []
        for ci, cand in enumerate(self.candidates):
            for demo in cand.demos:
                flat_s.append(demo.states)
                flat_a.append(demo.actions)
                demo_bounds.append(demo_bounds[-1] + len(demo))
                demo_owner.append(ci)
        self._flat_s = np.concatenate(flat_s)
        self._flat_a = np.concatenate(flat_a)
        self._demo_starts = np.array(demo_bounds[:-1])
        self._demo_owner = np.array(demo_owner)
        self._mu_cache = {}

    def __len__(self):
        return len(self.candidates)

    @property
    def n_demos(self):
        return len(self._demo_owner)

    def demo_log_difficulties(self, policy):
        """log Psi per pooled demo (over all candidates, in pool order)."""
        with np.errstate(divide="ignore"):
            logs = np.log(policy.probs[self._flat_s, self._flat_a])
        neg = -logs
        # reduceat needs finite values; patch +inf back in afterwards
        infmask = np.isinf(neg)
        if infmask.any():
            sums = np.add.reduceat(np.where(infmask, 0.0, neg), self._demo_starts)
            inf_hits = np.add.reduceat(infmask.astype(float), self._demo_starts)
            return np.where(inf_hits > 0, np.inf, sums)
        return np.add.reduceat(neg, self._demo_starts)

    def log_difficulties(self, policy):
        """Mean-Psi difficulty per candidate set, in log domain."""
        per_demo = self.demo_log_difficulties(policy)
        out = np.empty(len(self.candidates))
        for ci in range(len(self.candidates)):
            logs = per_demo[self._demo_owner == ci]
            out[ci] = logsumexp(logs) - np.log(len(logs))
        return out

    def mean_mu(self, feature_map, gamma):
        """(n_candidates, d) mean discounted demo features per candidate."""
        key = (feature_map.token, float(gamma))
        if key not in self._mu_cache:
            self._mu_cache[key] = np.stack(
                [
                    np.mean([d.mu(feature_map, gamma) for d in c.demos], axis=0)
                    for c in self.candidates
                ]
            )
        return self._mu_cache[key]

    def mean_visitation(self, n_states, n_actions, gamma):
        return np.stack(
            [
                np.mean([d.visitation(n_states, n_actions, gamma) for d in c.demos], axis=0)
                for c in self.candidates
            ]
        )

    def starts(self):
        return np.array([c.start_state for c in self.candidates])


@dataclass(frozen=True)
class SelectionResult:
    index: int
    scores: np.ndarray
    log_psi_e: float = float("nan")
    log_psi_l: float = float("nan")


def _argbest(scores, mode, rng=None, maximize=True):
    scores = np.asarray(scores, dtype=float)
    if mode == "argmax":
        return int(np.argmax(scores) if maximize else np.argmin(scores))
    if mode == "sample":
        if rng is None:
            raise ValueError("sampling selection needs an rng")
        z = scores if maximize else -scores
        finite = np.isfinite(z)
        if not finite.all():
            # +inf candidates dominate; tie-break among them by lowest index
            if np.any(z == np.inf):
                return int(np.argmax(z == np.inf))
            z = np.where(finite, z, z[finite].min() if finite.any() else 0.0)
        w = np.exp(z - z.max())
        w /= w.sum()
        return int(rng.choice(len(z), p=w))
    raise ValueError(f"unknown selection mode {mode!r}")


def curriculum_scores(log_psi_l, log_psi_e):
    """log(Psi_L / Psi_E) with explicit infinity handling.

    +inf learner difficulty beats everything finite; +inf teacher difficulty
    sinks a candidate; doubly infinite entries score 0 (neutral).
    """
    log_psi_l = np.asarray(log_psi_l, dtype=float)
    log_psi_e = np.asarray(log_psi_e, dtype=float)
    both = np.isinf(log_psi_l) & np.isinf(log_psi_e)
    with np.errstate(invalid="ignore"):
        ratio = log_psi_l - log_psi_e
    return np.where(both, 0.0, ratio)


def cur_select(pool, log_psi_e, learner_policy, mode="argmax", rng=None):
    """Pick argmax of log Psi_L - log Psi_E; ties go to the lowest pool index."""
    log_psi_l = pool.log_difficulties(learner_policy)
    scores = curriculum_scores(log_psi_l, log_psi_e)
    idx = _argbest(scores, mode, rng)
    return SelectionResult(idx, scores, float(log_psi_e[idx]), float(log_psi_l[idx]))


def cur_t_select(pool, log_psi_e, mode="argmax", rng=None):
    """Teacher-difficulty-only variant: easiest for the teacher first."""
    scores = np.asarray(log_psi_e, dtype=float)
    idx = _argbest(scores, mode, rng, maximize=False)
    return SelectionResult(idx, scores, log_psi_e=float(scores[idx]))


def cur_l_select(pool, learner_policy, mode="argmax", rng=None):
    """Learner-difficulty-only variant: hardest for the learner first."""
    scores = pool.log_difficulties(learner_policy)
    idx = _argbest(scores, mode, rng)
    return SelectionResult(idx, scores, log_psi_l=float(scores[idx]))


def agn_select(pool, rng):
    """Agnostic baseline: uniform random pick."""
    idx = int(rng.integers(len(pool)))
    return SelectionResult(idx, np.zeros(len(pool)))


def omn_select(pool, theta_star, theta_t, eta, grad_fn):
    """Omniscient baseline: argmin ||theta* - (theta_t - eta g(xi))||.

    `grad_fn(candidate)` must return the learner's gradient for that
    candidate; the teacher therefore needs the full learner model.
    """
    diff = np.asarray(theta_star, dtype=float) - np.asarray(theta_t, dtype=float)
    scores = np.array(
        [np.linalg.norm(diff + eta * grad_fn(c)) for c in pool.candidates]
    )
    idx = int(np.argmin(scores))
    return SelectionResult(idx, scores)


def bbox_select(pool, learner_policy, mdp, tol=1e-10):
    """Reward-weighted occupancy-mismatch baseline.

    score(xi) = | sum_(s,a) (rho^{pi_L, start} - rho^xi)(s, a) R(s, a) |,
    with rho^xi the mean empirical visitation of the candidate's demos.
    Needs the true reward but not the learner internals.
    """
    demo_rho = pool.mean_visitation(mdp.n_states, mdp.n_actions, mdp.gamma)
    scores = np.empty(len(pool))
    occ_cache = {}
    for i, cand in enumerate(pool.candidates):
        s0 = cand.start_state
        if s0 not in occ_cache:
            occ_cache[s0] = occupancy(mdp, learner_policy, start=s0, tol=tol)
        scores[i] = abs(np.sum((occ_cache[s0] - demo_rho[i]) * mdp.reward))
    idx = int(np.argmax(scores))
    return SelectionResult(idx, scores)


def scot_batch(pool, teacher_policy, feature_map, mdp, direction_tol=1e-8, tol=1e-10):
    """Greedy set-cover batch over halfspace constraint directions.

    Each candidate induces the constraint vector
    mu^{pi_E, start} - mean mu^{xi}; vectors are deduplicated by normalized
    direction (tolerance `direction_tol`) and near-zero vectors are dropped
    as trivially satisfied. A candidate covers exactly the directions its
    own constraint matches, so the greedy pass returns one representative
    per distinct direction, ordered by coverage count then pool index.
    """
    mu_demo = pool.mean_mu(feature_map, mdp.gamma)
    constraints = np.empty_like(mu_demo)
    occ_cache = {}
    for i, cand in enumerate(pool.candidates):
        s0 = cand.start_state
        if s0 not in occ_cache:
            occ_cache[s0] = feature_expectation(
                mdp, teacher_policy, feature_map, start=s0, tol=tol
            )
        constraints[i] = occ_cache[s0] - mu_demo[i]
    norms = np.linalg.norm(constraints, axis=1)
    nontrivial = norms > direction_tol
    if not nontrivial.any():
        warnings.warn("all teaching constraints are trivial; empty batch")
        return []
    dirs = constraints[nontrivial] / norms[nontrivial, None]
    owner = np.flatnonzero(nontrivial)
    unique_dirs = []
    membership = []  # candidate indices whose constraint matches each direction
    for k, d in enumerate(dirs):
        for u, group in zip(unique_dirs, membership):
            if np.linalg.norm(d - u) <= direction_tol:
                group.append(int(owner[k]))
                break
        else:
            unique_dirs.append(d)
            membership.append([int(owner[k])])
    uncovered = set(range(len(unique_dirs)))
    batch = []
    while uncovered:
        best, best_cover = None, -1
        for i in range(len(pool)):
            if i in batch:
                continue
            cover = sum(1 for u in uncovered if i in membership[u])
            if cover > best_cover:
                best, best_cover = i, cover
        if best_cover <= 0:
            warnings.warn(f"{len(uncovered)} constraint directions left uncoverable")
            break
        batch.append(best)
        uncovered = {u for u in uncovered if best not in membership[u]}
    return batch


class Teacher:
    """Strategy dispatcher holding whatever knowledge the strategy requires.

    The only mutable state is the SCOT batch pointer and the rng used by
    AGN and the post-batch random fallback; everything else is a pure
    function of (pool, learner view, step).
    """

    def __init__(
        self,
        strategy,
        pool,
        *,
        log_psi_e=None,
        theta_star=None,
        grad_fn=None,
        mdp=None,
        feature_map=None,
        teacher_policy=None,
        rng=None,
        selection_mode="argmax",
    ):
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
        self.strategy = strategy
        self.pool = pool
        self.log_psi_e = None if log_psi_e is None else np.asarray(log_psi_e, dtype=float)
        self.theta_star = theta_star
        self.grad_fn = grad_fn
        self.mdp = mdp
        self.feature_map = feature_map
        self.teacher_policy = teacher_policy
        self.rng = np.random.default_rng(rng)
        self.selection_mode = selection_mode
        if strategy in ("CUR", "CUR-T") and self.log_psi_e is None:
            if teacher_policy is None:
                raise ValueError(f"{strategy} needs log_psi_e or the teacher policy")
            self.log_psi_e = pool.log_difficulties(teacher_policy)
        if strategy == "OMN" and (theta_star is None or grad_fn is None):
            raise ValueError("OMN needs theta_star and the learner gradient map")
        if strategy == "BBOX" and mdp is None:
            raise ValueError("BBOX needs the MDP (true rewards)")
        self._scot_queue = None
        if strategy == "SCOT":
            if teacher_policy is None or feature_map is None or mdp is None:
                raise ValueError("SCOT needs the teacher policy, feature map, and MDP")
            self._scot_queue = list(
                scot_batch(pool, teacher_policy, feature_map, mdp)
            )

    def select(self, t, learner_view=None, theta_t=None, eta=None):
        pool = self.pool
        if self.strategy == "CUR":
            return cur_select(pool, self.log_psi_e, learner_view, self.selection_mode, self.rng)
        if self.strategy == "CUR-T":
            return cur_t_select(pool, self.log_psi_e, self.selection_mode, self.rng)
        if self.strategy == "CUR-L":
            return cur_l_select(pool, learner_view, self.selection_mode, self.rng)
        if self.strategy == "AGN":
            return agn_select(pool, self.rng)
        if self.strategy == "OMN":
            # grad_fn(candidate, theta_t, learner_view) -> learner gradient
            return omn_select(
                pool,
                self.theta_star,
                theta_t,
                eta,
                lambda c: self.grad_fn(c, theta_t, learner_view),
            )
        if self.strategy == "BBOX":
            return bbox_select(pool, learner_view, self.mdp)
        if self._scot_queue:
            idx = self._scot_queue.pop(0)
            return SelectionResult(idx, np.zeros(len(pool)))
        return agn_select(pool, self.rng)


def schedule_size(epoch, a, b, n_epochs, pool_size):
    """Number of top-preference demos released at `epoch` (1-based).

    X = floor(b|P| + (e / (aN)) (1 - b)|P|) while e < aN, then |P|.
    Flooring is the documented rounding choice; X is monotone in e.
    """
    if not (0 < a <= 1 and 0 < b <= 1):
        raise ValueError("schedule parameters must satisfy 0 < a <= 1 and 0 < b <= 1")
    if not (1 <= epoch <= n_epochs):
        raise ValueError(f"epoch must be in [1, {n_epochs}], got {epoch}")
    if pool_size < 1:
        raise ValueError("pool must be nonempty")
    if epoch >= a * n_epochs:
        return int(pool_size)
    x = b * pool_size + (epoch / (a * n_epochs)) * (1.0 - b) * pool_size
    return min(int(np.floor(x)), int(pool_size))


def schedule(preference, epoch, a, b, n_epochs):
    """Top-X slice of a best-first preference ordering for this epoch."""
    preference = np.asarray(preference, dtype=int)
    x = schedule_size(epoch, a, b, n_epochs, len(preference))
    return preference[:x]
