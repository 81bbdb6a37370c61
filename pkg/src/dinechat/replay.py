"""Experience replay: fixed-capacity ring buffer with seeded sampling."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Transition:
    state: np.ndarray          # feature vector
    action: int
    reward: np.ndarray         # per-channel rewards
    next_state: np.ndarray
    done: bool


@dataclass
class Batch:
    states: np.ndarray         # (B, F)
    actions: np.ndarray        # (B,)
    rewards: np.ndarray        # (B, C)
    next_states: np.ndarray    # (B, F)
    dones: np.ndarray          # (B,)


class ReplayBuffer:
    """Ring buffer; once full, pushes overwrite the oldest transition."""

    def __init__(self, capacity, seed=0):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = int(capacity)
        self._storage = []
        self._next = 0
        self._rng = np.random.default_rng(seed)

    def __len__(self):
        return len(self._storage)

    def push(self, transition):
        if len(self._storage) < self.capacity:
            self._storage.append(transition)
        else:
            self._storage[self._next] = transition
        self._next = (self._next + 1) % self.capacity

    def sample(self, batch_size):
        if batch_size > len(self._storage):
            raise ValueError(
                f"cannot sample {batch_size} from buffer of {len(self._storage)}"
            )
        idx = self._rng.choice(len(self._storage), size=batch_size, replace=False)
        picked = [self._storage[i] for i in idx]
        return Batch(
            states=np.stack([t.state for t in picked]),
            actions=np.array([t.action for t in picked], dtype=np.int64),
            rewards=np.stack([t.reward for t in picked]),
            next_states=np.stack([t.next_state for t in picked]),
            dones=np.array([t.done for t in picked], dtype=np.float64),
        )

    def oldest(self):
        """Transition that the next overflow push would evict."""
        if not self._storage:
            return None
        if len(self._storage) < self.capacity:
            return self._storage[0]
        return self._storage[self._next]
