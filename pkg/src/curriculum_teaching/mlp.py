"""Small fully-connected scoring network with manual backpropagation.

Maps a feature vector to one score per action. Parameters live in a single
flat vector so the network plugs into the same online update rule as the
linear and quadratic parameterizations. No autodiff framework involved.
"""

from __future__ import annotations

import numpy as np


class ScoringMlp:
    """tanh MLP: features -> hidden layers -> action scores.

    The flat parameter layout is (W1, b1, W2, b2, ..., Wout, bout) in
    row-major order; `pack`/`unpack` convert between the flat vector and
    per-layer weight lists.
    """

    def __init__(self, in_dim, n_actions, hidden=(64, 64)):
        self.in_dim = int(in_dim)
        self.n_actions = int(n_actions)
        self.hidden = tuple(int(h) for h in hidden)
        dims = [self.in_dim, *self.hidden, self.n_actions]
        self.shapes = []
        for a, b in zip(dims[:-1], dims[1:]):
            self.shapes.append((a, b))
        self.n_params = sum(a * b + b for a, b in self.shapes)

    def init_params(self, rng):
        """Seeded Xavier-style init; zeros would stall the tanh layers."""
        rng = np.random.default_rng(rng)
        chunks = []
        for a, b in self.shapes:
            chunks.append(rng.normal(0.0, 1.0 / np.sqrt(a), size=a * b))
            chunks.append(np.zeros(b))
        return np.concatenate(chunks)

    def unpack(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got {theta.shape}")
        weights, offset = [], 0
        for a, b in self.shapes:
            w = theta[offset : offset + a * b].reshape(a, b)
            offset += a * b
            bias = theta[offset : offset + b]
            offset += b
            weights.append((w, bias))
        return weights

    def forward(self, theta, x):
        """Scores for a batch of feature rows x (N, in_dim) -> (N, n_actions)."""
        layers = self.unpack(theta)
        h = np.asarray(x, dtype=float)
        for w, b in layers[:-1]:
            h = np.tanh(h @ w + b)
        w, b = layers[-1]
        return h @ w + b

    def _forward_cached(self, theta, x):
        layers = self.unpack(theta)
        acts = [np.asarray(x, dtype=float)]
        for w, b in layers[:-1]:
            acts.append(np.tanh(acts[-1] @ w + b))
        w, b = layers[-1]
        return layers, acts, acts[-1] @ w + b

    def grad_from_score_deltas(self, theta, x, deltas):
        """Flat gradient of sum_n <deltas[n], scores[n]> w.r.t. theta.

        With deltas = softmax(scores) - onehot(actions) this is the
        cross-entropy gradient; callers supply whatever output deltas their
        loss produces.
        """
        layers, acts, _ = self._forward_cached(theta, x)
        grads = [None] * len(layers)
        d = np.asarray(deltas, dtype=float)
        for i in range(len(layers) - 1, -1, -1):
            w, _ = layers[i]
            grads[i] = (acts[i].T @ d, d.sum(axis=0))
            if i > 0:
                d = (d @ w.T) * (1.0 - acts[i] ** 2)
        return np.concatenate([np.concatenate([gw.ravel(), gb]) for gw, gb in grads])

    def log_policy(self, theta, x):
        """Row-wise log-softmax of the scores."""
        scores = self.forward(theta, x)
        scores = scores - scores.max(axis=1, keepdims=True)
        return scores - np.log(np.exp(scores).sum(axis=1, keepdims=True))
