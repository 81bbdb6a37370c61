"""Standard (non-decomposed) Double DQN, written independently of the
package, used as the reference for the degenerate-decomposition check."""

import numpy as np


class ReferenceDoubleDQN:
    def __init__(self, n_features, n_actions, hidden, seed, gamma,
                 learning_rate, clip_norm, sync_interval):
        rng = np.random.default_rng(seed)
        sizes = (n_features, *hidden, n_actions)
        self.w, self.b = [], []
        for fan_in, fan_out in zip(sizes, sizes[1:]):
            self.w.append(rng.normal(0.0, np.sqrt(2.0 / fan_in),
                                     size=(fan_in, fan_out)))
            self.b.append(np.zeros(fan_out))
        self.tw = [w.copy() for w in self.w]
        self.tb = [b.copy() for b in self.b]
        self.gamma = gamma
        self.lr = learning_rate
        self.clip = clip_norm
        self.sync = sync_interval
        self.updates = 0

    def _forward(self, weights, biases, x):
        activations = [x]
        h = x
        for i in range(len(weights) - 1):
            h = np.maximum(h @ weights[i] + biases[i], 0.0)
            activations.append(h)
        return h @ weights[-1] + biases[-1], activations

    def update(self, states, actions, rewards, next_states, dones):
        batch = states.shape[0]
        next_q, _ = self._forward(self.w, self.b, next_states)
        best_next = np.argmax(next_q, axis=1)
        target_q, _ = self._forward(self.tw, self.tb, next_states)
        targets = rewards + self.gamma * target_q[np.arange(batch), best_next] \
            * (1.0 - dones)
        out, activations = self._forward(self.w, self.b, states)
        taken = out[np.arange(batch), actions]
        err = taken - targets

        grad_out = np.zeros_like(out)
        grad_out[np.arange(batch), actions] = 2.0 * err / batch
        grads_w = [None] * len(self.w)
        grads_b = [None] * len(self.w)
        delta = grad_out
        for i in range(len(self.w) - 1, -1, -1):
            grads_w[i] = activations[i].T @ delta
            grads_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.w[i].T) * (activations[i] > 0.0)

        total = sum(float(np.sum(g * g)) for g in grads_w) \
            + sum(float(np.sum(g * g)) for g in grads_b)
        norm = np.sqrt(total)
        if norm > self.clip:
            scale = self.clip / norm
            grads_w = [g * scale for g in grads_w]
            grads_b = [g * scale for g in grads_b]
        for i in range(len(self.w)):
            self.w[i] = self.w[i] - self.lr * grads_w[i]
            self.b[i] = self.b[i] - self.lr * grads_b[i]
        self.updates += 1
        if self.sync > 0 and self.updates % self.sync == 0:
            self.tw = [w.copy() for w in self.w]
            self.tb = [b.copy() for b in self.b]
        loss = float(np.mean(err * err))
        return loss
