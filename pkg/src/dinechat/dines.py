"""Decision insight extraction and the DINE wire format.

Two insight kinds are computed per decision:

* Relative reward channel dominance: per channel, the Q-value of each action
  minus the channel's minimum over actions. Each channel therefore shows 0.0
  at its weakest action, and the channel sums preserve the greedy argmax.
* Uncertainty: the normalized entropy of the softmax over channel-summed
  Q-values. A score above the threshold flags the decision as uncertain.

Encoded DINEs nest as ``{action: {channel: value}}`` with values rounded to
two decimals; trajectories are arrays of per-timestep objects.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .config import REWARD_CHANNELS
from .errors import ConfigurationError, OutOfRangeError
from .simenv import ACTION_NAMES, EnvState, RewardVector, action_name

UNCERTAINTY_THRESHOLD = 0.9
ALL_KINDS = ("dominance", "uncertainty", "q_table", "state", "reward")
COMPACT_KINDS = ("dominance", "uncertainty")


def compute_dominance(q_table):
    """Min-subtract each channel row of a (channels, actions) Q table."""
    q = np.asarray(q_table, dtype=np.float64)
    return q - q.min(axis=1, keepdims=True)


def compute_uncertainty(q_table, threshold=UNCERTAINTY_THRESHOLD):
    """Normalized softmax entropy of the channel-summed Q-values.

    Returns ``(score, uncertain)`` with score in [0, 1]; shifting all summed
    Q-values by a constant leaves the score unchanged.
    """
    q = np.asarray(q_table, dtype=np.float64)
    summed = q.sum(axis=0)
    if summed.size < 2:
        raise ConfigurationError("uncertainty needs at least two actions")
    shifted = summed - summed.max()
    weights = np.exp(shifted)
    probs = weights / weights.sum()
    nonzero = probs[probs > 0.0]
    entropy = -float(np.sum(nonzero * np.log(nonzero)))
    score = entropy / math.log(summed.size)
    score = min(max(score, 0.0), 1.0)
    return score, score > threshold


@dataclass(frozen=True)
class TimestepRecord:
    timestep: int
    state: EnvState
    chosen_action: str
    q_table: np.ndarray          # (channels, actions)
    reward: RewardVector
    dominance: np.ndarray        # (channels, actions)
    uncertainty_score: float
    uncertain: bool
    channels: tuple = REWARD_CHANNELS
    actions: tuple = ACTION_NAMES

    def dominance_map(self):
        """Wire nesting: action name -> {channel name -> value}."""
        return {
            a_name: {
                c_name: float(self.dominance[ci, ai])
                for ci, c_name in enumerate(self.channels)
            }
            for ai, a_name in enumerate(self.actions)
        }

    def q_map(self):
        return {
            c_name: {
                a_name: float(self.q_table[ci, ai])
                for ai, a_name in enumerate(self.actions)
            }
            for ci, c_name in enumerate(self.channels)
        }

    def to_dict(self):
        return {
            "timestep": self.timestep,
            "state": self.state.to_dict(),
            "chosen_action": self.chosen_action,
            "q_table": self.q_map(),
            "reward": self.reward.to_dict(),
            "dominance": self.dominance_map(),
            "uncertainty_score": self.uncertainty_score,
            "uncertain": self.uncertain,
        }

    @classmethod
    def from_dict(cls, d):
        channels = tuple(d["q_table"].keys())
        actions = tuple(next(iter(d["q_table"].values())).keys())
        q = np.array([[d["q_table"][c][a] for a in actions] for c in channels])
        dom = np.array([[d["dominance"][a][c] for a in actions] for c in channels])
        return cls(
            timestep=int(d["timestep"]),
            state=EnvState.from_dict(d["state"]),
            chosen_action=d["chosen_action"],
            q_table=q,
            reward=RewardVector.from_dict(d["reward"]),
            dominance=dom,
            uncertainty_score=float(d["uncertainty_score"]),
            uncertain=bool(d["uncertain"]),
            channels=channels,
            actions=actions,
        )


def make_record(timestep, state, q_table, action, reward,
                threshold=UNCERTAINTY_THRESHOLD, channels=REWARD_CHANNELS):
    score, uncertain = compute_uncertainty(q_table, threshold)
    return TimestepRecord(
        timestep=timestep,
        state=state,
        chosen_action=action_name(action),
        q_table=np.asarray(q_table, dtype=np.float64),
        reward=reward,
        dominance=compute_dominance(q_table),
        uncertainty_score=score,
        uncertain=uncertain,
        channels=tuple(channels),
    )


@dataclass
class Trace:
    trace_id: str
    description: str
    checkpoint_ref: str
    records: list = field(default_factory=list)

    def __post_init__(self):
        for i, record in enumerate(self.records):
            if record.timestep != i:
                raise ConfigurationError(
                    f"trace timesteps must increase from 0, found {record.timestep} "
                    f"at position {i}"
                )

    def __len__(self):
        return len(self.records)

    def timesteps(self):
        return [r.timestep for r in self.records]

    def record_at(self, timestep):
        matches = [r for r in self.records if r.timestep == timestep]
        if not matches:
            raise OutOfRangeError([timestep], self.timestep_range())
        return matches[0]

    def timestep_range(self):
        ts = self.timesteps()
        return (ts[0], ts[-1]) if ts else (0, -1)


def slice_trace(trace, timesteps):
    """Records for the requested timesteps, in trace order."""
    wanted = set(int(t) for t in timesteps)
    present = set(trace.timesteps())
    missing = wanted - present
    if missing:
        raise OutOfRangeError(missing, trace.timestep_range())
    return [r for r in trace.records if r.timestep in wanted]


# ------------------------------------------------------------------ wire format

def _round2(value):
    return round(float(value), 2)


def _record_wire(record, kinds):
    obj = {"timestep": record.timestep, "chosen_action": record.chosen_action}
    if "dominance" in kinds:
        obj["relative_reward_channel_dominance"] = {
            a: {c: _round2(v) for c, v in channels.items()}
            for a, channels in record.dominance_map().items()
        }
    if "uncertainty" in kinds:
        obj["uncertainty_score"] = _round2(record.uncertainty_score)
        obj["uncertain"] = record.uncertain
    if "q_table" in kinds:
        obj["q_values"] = {
            c: {a: _round2(v) for a, v in actions.items()}
            for c, actions in record.q_map().items()
        }
    if "state" in kinds:
        state = record.state.to_dict()
        obj["state"] = {k: _round2(v) if isinstance(v, float) else v
                        for k, v in state.items()}
    if "reward" in kinds:
        reward = record.reward.to_dict()
        obj["reward"] = {
            k: [_round2(x) for x in v] if isinstance(v, list) else _round2(v)
            for k, v in reward.items()
        }
    return obj


def encode_dines(records, kinds=COMPACT_KINDS):
    """Serialize records to the DINE JSON wire text.

    One record encodes as a single object; several encode as an array of
    per-timestep objects. An empty kinds filter yields ``[]``.
    """
    if not records:
        raise ConfigurationError("cannot encode an empty record list")
    kinds = tuple(kinds)
    unknown = set(kinds) - set(ALL_KINDS)
    if unknown:
        raise ConfigurationError(f"unknown DINE kinds: {sorted(unknown)}")
    if not kinds:
        return "[]"
    if len(records) == 1:
        payload = _record_wire(records[0], kinds)
    else:
        payload = [_record_wire(r, kinds) for r in records]
    return json.dumps(payload, separators=(",", ":"))


def rollout_and_record(agent, env, steps, seed=0, trace=None,
                       threshold=UNCERTAINTY_THRESHOLD, trace_id="trace",
                       description="", checkpoint_ref=""):
    """Greedy rollout of `steps` decisions with one DINE record per step."""
    if steps < 1:
        raise ConfigurationError("rollout needs at least one step")
    state = env.reset(seed=seed, trace=trace)
    records = []
    for t in range(steps):
        features = env.observation(state)
        action, q_table = agent.select_action(features, mode="greedy")
        next_state, reward = env.step(state, action)
        records.append(make_record(
            timestep=t, state=state, q_table=q_table, action=action,
            reward=reward, threshold=threshold, channels=agent.channels,
        ))
        state = next_state
    return Trace(trace_id=trace_id, description=description,
                 checkpoint_ref=checkpoint_ref, records=records)
