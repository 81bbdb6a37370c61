"""Decomposed Double DQN agent.

One shared MLP trunk ends in a ``channels x actions`` output block, so each
reward channel keeps its own Q-values while actions are ranked by the channel
sum. Targets use the online network to pick the next action and the target
network to evaluate it, per channel:

    a* = argmax_a sum_c Q_c_online(s', a)
    y_c = r_c + gamma * Q_c_target(s', a*)        (y_c = r_c on terminal steps)

The loss for one step is the batch mean of the squared error summed over
channels. Optimization is plain SGD with global-norm gradient clipping.
"""

import json
from pathlib import Path

import numpy as np

from .config import REWARD_CHANNELS, AgentConfig, EnvConfig
from .errors import ConfigurationError
from .network import MLP
from .replay import Batch, ReplayBuffer, Transition
from .simenv import N_FEATURES, Action, action_name

CHECKPOINT_VERSION = 1


class DecomposedDQNAgent:
    def __init__(self, config=None, channels=REWARD_CHANNELS, n_features=N_FEATURES,
                 n_actions=len(Action)):
        self.config = config or AgentConfig()
        self.channels = tuple(channels)
        self.n_channels = len(self.channels)
        self.n_actions = int(n_actions)
        self.n_features = int(n_features)
        sizes = (self.n_features, *self.config.hidden_sizes,
                 self.n_channels * self.n_actions)
        init_rng = np.random.default_rng(self.config.seed)
        self.online = MLP(sizes, rng=init_rng)
        self.target = self.online.copy()
        self.buffer = ReplayBuffer(self.config.buffer_capacity,
                                   seed=self.config.seed + 1)
        self._explore_rng = np.random.default_rng(self.config.seed + 2)
        self.update_count = 0
        self.env_steps = 0

    # ------------------------------------------------------------------ acting

    def q_values(self, features):
        """Per-channel Q-values for one state, shape (channels, actions)."""
        out = self.online.predict(np.asarray(features, dtype=np.float64))
        return out.reshape(self.n_channels, self.n_actions)

    def select_action(self, features, mode="greedy", epsilon=None):
        """Pick an action and return it with the full per-channel Q table.

        Greedy mode maximizes the channel-summed Q-values; ties go to the
        lowest action index. Epsilon-greedy explores uniformly with the
        agent's seeded generator, so rollouts replay exactly under a seed.
        """
        q = self.q_values(features)
        if mode == "epsilon_greedy":
            eps = self.current_epsilon() if epsilon is None else epsilon
            if self._explore_rng.random() < eps:
                action = int(self._explore_rng.integers(self.n_actions))
                return action, q
        elif mode != "greedy":
            raise ConfigurationError(f"unknown action mode: {mode!r}")
        action = int(np.argmax(q.sum(axis=0)))
        return action, q

    def current_epsilon(self):
        cfg = self.config
        if cfg.epsilon_decay_steps <= 0:
            return cfg.epsilon_end
        frac = min(self.env_steps / cfg.epsilon_decay_steps, 1.0)
        return cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start)

    # ---------------------------------------------------------------- learning

    def update(self, batch: Batch):
        """One Double-DQN gradient step on a batch; returns the scalar loss."""
        cfg = self.config
        B = batch.states.shape[0]
        C, A = self.n_channels, self.n_actions

        next_online = self.online.predict(batch.next_states).reshape(B, C, A)
        best_next = np.argmax(next_online.sum(axis=1), axis=1)
        next_target = self.target.predict(batch.next_states).reshape(B, C, A)
        bootstrap = next_target[np.arange(B), :, best_next]
        targets = batch.rewards + cfg.gamma * bootstrap * (1.0 - batch.dones)[:, None]

        out, cache = self.online.forward(batch.states)
        q_all = out.reshape(B, C, A)
        q_taken = q_all[np.arange(B), :, batch.actions]
        err = q_taken - targets
        loss = float(np.mean(np.sum(err * err, axis=1)))

        grad_out = np.zeros((B, C, A), dtype=np.float64)
        grad_out[np.arange(B), :, batch.actions] = 2.0 * err / B
        grads = self.online.backward(cache, grad_out.reshape(B, C * A))
        self.online.apply_gradients(grads, cfg.learning_rate, cfg.grad_clip_norm)

        self.update_count += 1
        if cfg.target_sync_interval > 0 and \
                self.update_count % cfg.target_sync_interval == 0:
            self.sync_target()
        return loss

    def sync_target(self):
        self.target.set_weights(self.online.get_weights())

    def train(self, env, episodes):
        """Train with experience replay; returns the per-episode log.

        The whole run is a deterministic function of the agent seed: the
        workload trace, exploration draws, and replay samples all come from
        seeded generators.
        """
        cfg = self.config
        log = []
        for episode in range(episodes):
            state = env.reset(seed=cfg.seed)
            features = env.observation(state)
            channel_return = np.zeros(self.n_channels)
            total_return = 0.0
            losses = []
            steps = 0
            while not env.episode_over(state):
                action, _ = self.select_action(features, mode="epsilon_greedy")
                next_state, reward = env.step(state, action)
                next_features = env.observation(next_state)
                done = env.episode_over(next_state)
                self.buffer.push(Transition(
                    state=features,
                    action=action,
                    reward=self._reward_channels(reward),
                    next_state=next_features,
                    done=done,
                ))
                self.env_steps += 1
                if len(self.buffer) >= max(cfg.min_replay_size, cfg.batch_size):
                    losses.append(self.update(self.buffer.sample(cfg.batch_size)))
                channel_return += self._reward_channels(reward)
                total_return += reward.total()
                state, features = next_state, next_features
                steps += 1
            log.append({
                "episode": episode,
                "steps": steps,
                "epsilon": self.current_epsilon(),
                "return_total": total_return,
                "return_channels": {
                    name: float(v) for name, v in zip(self.channels, channel_return)
                },
                "mean_loss": float(np.mean(losses)) if losses else None,
            })
        return log

    def _reward_channels(self, reward):
        if self.n_channels == 1:
            return np.array([reward.total()], dtype=np.float64)
        return reward.channels()

    # ------------------------------------------------------------- persistence

    def save(self, path):
        """Write a self-describing JSON checkpoint (shapes, weights, config)."""
        payload = {
            "version": CHECKPOINT_VERSION,
            "channels": list(self.channels),
            "n_actions": self.n_actions,
            "n_features": self.n_features,
            "config": {
                "gamma": self.config.gamma,
                "learning_rate": self.config.learning_rate,
                "epsilon_start": self.config.epsilon_start,
                "epsilon_end": self.config.epsilon_end,
                "epsilon_decay_steps": self.config.epsilon_decay_steps,
                "target_sync_interval": self.config.target_sync_interval,
                "batch_size": self.config.batch_size,
                "buffer_capacity": self.config.buffer_capacity,
                "min_replay_size": self.config.min_replay_size,
                "hidden_sizes": list(self.config.hidden_sizes),
                "grad_clip_norm": self.config.grad_clip_norm,
                "seed": self.config.seed,
            },
            "layers": [
                {"weights": w.tolist(), "biases": b.tolist()}
                for w, b in self.online.get_weights()
            ],
        }
        Path(path).write_text(json.dumps(payload))

    @classmethod
    def load(cls, path):
        payload = json.loads(Path(path).read_text())
        if payload.get("version") != CHECKPOINT_VERSION:
            raise ConfigurationError(
                f"unsupported checkpoint version: {payload.get('version')!r}"
            )
        raw = dict(payload["config"])
        raw["hidden_sizes"] = tuple(raw["hidden_sizes"])
        config = AgentConfig(**raw)
        agent = cls(config, channels=tuple(payload["channels"]),
                    n_features=payload["n_features"],
                    n_actions=payload["n_actions"])
        params = [
            (np.array(layer["weights"]), np.array(layer["biases"]))
            for layer in payload["layers"]
        ]
        agent.online.set_weights(params)
        agent.sync_target()
        return agent


def random_policy_returns(env, episodes, seed=0):
    """Mean undiscounted total return of a uniform random policy (baseline)."""
    rng = np.random.default_rng(seed)
    totals = []
    for _ in range(episodes):
        state = env.reset(seed=seed)
        total = 0.0
        while not env.episode_over(state):
            action = int(rng.integers(len(Action)))
            state, reward = env.step(state, action)
            total += reward.total()
        totals.append(total)
    return float(np.mean(totals))


def write_training_log(log, path):
    """Training log as JSONL, one record per episode."""
    with open(path, "w") as fh:
        for entry in log:
            fh.write(json.dumps(entry) + "\n")
