"""Limited-observability estimation of the learner's policy.

Instead of reading the learner's policy directly, the teacher may probe it:
every B steps it queries k actions from each state and keeps the empirical
frequencies until the next probe. (B=1, k=None) reproduces full
observability exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mdp import Policy


@dataclass(frozen=True)
class ProbeConfig:
    """B: steps between probes; k: queries per state (None = exact read)."""

    b: int = 1
    k: int | None = None

    def __post_init__(self):
        if self.b < 1:
            raise ValueError("B must be >= 1")
        if self.k is not None and self.k < 1:
            raise ValueError("k must be >= 1")


def probe_policy(policy, k, rng):
    """Empirical policy estimate from k per-state action samples.

    Each state is queried independently; rows of the estimate are valid
    distributions (counts / k). Terminal or deterministic rows reproduce
    the policy exactly for any k >= 1 in expectation and almost surely
    once the row is degenerate.
    """
    if k is None:
        return policy
    rng = np.random.default_rng(rng)
    counts = np.stack([rng.multinomial(k, row) for row in policy.probs])
    return Policy(counts / float(k))


def total_variation(p, q):
    """Mean per-state total variation distance between two policies."""
    return float(0.5 * np.abs(p.probs - q.probs).sum(axis=1).mean())


class PolicyProbe:
    """Stateful probe schedule used by the teaching loop.

    `view(t, policy)` returns the teacher-visible policy at step t
    (1-based): refreshed at t = 1, B+1, 2B+1, ... and held constant in
    between.
    """

    def __init__(self, config, rng):
        self.config = config
        self.rng = np.random.default_rng(rng)
        self._estimate = None
        self.events = []

    def view(self, t, policy):
        if (t - 1) % self.config.b == 0 or self._estimate is None:
            self._estimate = probe_policy(policy, self.config.k, self.rng)
            self.events.append(
                {
                    "t": t,
                    "b": self.config.b,
                    "k": self.config.k,
                    "tv_to_true": total_variation(self._estimate, policy),
                }
            )
        return self._estimate


def stale_policy_view(history, t, b):
    """Teacher's view at step t given the probe history.

    `history` maps probe times to estimates; the view is the most recent
    probe at or before t, where probes happen at multiples of B offset to
    t = 1. Provided for direct inspection in tests; the loop itself uses
    PolicyProbe.
    """
    if not history:
        raise ValueError("probe history is empty")
    probe_times = sorted(pt for pt in history if pt <= t)
    if not probe_times:
        raise ValueError(f"no probe at or before t={t}")
    anchored = [pt for pt in probe_times if (pt - 1) % b == 0]
    return history[(anchored or probe_times)[-1]]
