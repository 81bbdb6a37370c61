"""Deterministic discrete-time simulator of an adaptive multi-tier webshop.

The shop can be adapted by adding/removing web servers and by changing the
dimmer, the proportion of requests that receive optional recommendation
content. Latency follows an aggregated single-queue approximation: with
per-request mean service time ``s(d) = service_time_base + d * service_time_rec``
and utilization ``rho = arrival_rate * s(d) / servers``, the mean response time
is ``s(d) / (1 - rho)``, capped once the system saturates.

The reward is decomposed into three channels (user satisfaction, revenue,
costs) whose weighted sum is the scalar training signal.
"""

import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import REWARD_CHANNELS, EnvConfig
from .errors import ConfigurationError, TraceParseError


class Action(enum.IntEnum):
    ADD_SERVER = 0
    REMOVE_SERVER = 1
    INCREASE_DIMMER = 2
    DECREASE_DIMMER = 3
    NOOP = 4


ACTION_NAMES = ("AddServer", "RemoveServer", "IncreaseDimmer", "DecreaseDimmer", "NoOp")


def action_name(action):
    return ACTION_NAMES[int(action)]


def action_from_name(name):
    try:
        return Action(ACTION_NAMES.index(name))
    except ValueError:
        raise ConfigurationError(f"unknown action name: {name!r}") from None


@dataclass(frozen=True)
class EnvState:
    arrival_rate: float      # requests/second
    servers: int
    dimmer: float            # fraction of requests with recommendations
    response_time: float     # seconds
    utilization: float
    timestep: int

    def to_dict(self):
        return {
            "arrival_rate": self.arrival_rate,
            "servers": self.servers,
            "dimmer": self.dimmer,
            "response_time": self.response_time,
            "utilization": self.utilization,
            "timestep": self.timestep,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            arrival_rate=float(d["arrival_rate"]),
            servers=int(d["servers"]),
            dimmer=float(d["dimmer"]),
            response_time=float(d["response_time"]),
            utilization=float(d["utilization"]),
            timestep=int(d["timestep"]),
        )


@dataclass(frozen=True)
class RewardVector:
    """Per-channel rewards plus the weights combining them."""

    user_satisfaction: float
    revenue: float
    costs: float
    weights: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if self.costs > 0:
            raise ConfigurationError("costs channel must be non-positive")

    def total(self):
        a, b, c = self.weights
        return a * self.user_satisfaction + b * self.revenue + c * self.costs

    def channels(self):
        return np.array(
            [self.user_satisfaction, self.revenue, self.costs], dtype=np.float64
        )

    def to_dict(self):
        return {
            "user_satisfaction": self.user_satisfaction,
            "revenue": self.revenue,
            "costs": self.costs,
            "weights": list(self.weights),
            "total": self.total(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            user_satisfaction=float(d["user_satisfaction"]),
            revenue=float(d["revenue"]),
            costs=float(d["costs"]),
            weights=tuple(float(w) for w in d["weights"]),
        )


class WorkloadTrace:
    """Ordered arrival rates, one per timestep."""

    def __init__(self, rates):
        rates = [float(r) for r in rates]
        if not rates:
            raise ConfigurationError("workload trace is empty")
        if any(r < 0 for r in rates):
            raise ConfigurationError("workload trace contains negative rates")
        self.rates = rates

    def __len__(self):
        return len(self.rates)

    def rate_at(self, timestep):
        # clamp to the final rate so an episode's last step stays defined
        return self.rates[min(timestep, len(self.rates) - 1)]


def load_trace(path):
    """Read a workload trace file: one non-negative arrival rate per line."""
    rates = []
    for line_no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            rate = float(stripped)
        except ValueError:
            raise TraceParseError(path, line_no, f"not a number: {stripped!r}") from None
        if rate < 0:
            raise TraceParseError(path, line_no, f"negative arrival rate: {rate}")
        rates.append(rate)
    if not rates:
        raise TraceParseError(path, 0, "trace file holds no rates")
    return WorkloadTrace(rates)


def save_trace(trace, path):
    Path(path).write_text("".join(f"{r}\n" for r in trace.rates))


def generate_trace(seed, length, profile="diurnal", *, base=80.0, amplitude=60.0,
                   period=200, noise=5.0):
    """Build a seeded synthetic workload trace.

    Profiles: ``constant`` (base only), ``diurnal`` (sinusoid plus noise),
    ``bursty`` (constant with random spikes).
    """
    if length <= 0:
        raise ConfigurationError("trace length must be positive")
    rng = np.random.default_rng(seed)
    t = np.arange(length, dtype=np.float64)
    if profile == "constant":
        rates = np.full(length, base)
    elif profile == "diurnal":
        rates = base + amplitude * np.sin(2.0 * math.pi * t / period)
        rates = rates + noise * rng.standard_normal(length)
    elif profile == "bursty":
        rates = np.full(length, base) + noise * rng.standard_normal(length)
        spikes = rng.random(length) < 0.05
        rates = rates + spikes * rng.uniform(base, 3 * base, length)
    else:
        raise ConfigurationError(f"unknown workload profile: {profile!r}")
    return WorkloadTrace(np.clip(rates, 0.0, None).tolist())


def service_time(dimmer, config):
    return config.service_time_base + dimmer * config.service_time_rec


def compute_reward(arrival_rate, servers, dimmer, response_time, config):
    """Evaluate the three reward channels for a (post-action) configuration."""
    if response_time <= config.response_time_threshold:
        satisfaction = 1.0
    else:
        satisfaction = -min(response_time / config.response_time_threshold, 5.0)
    capacity = servers / service_time(dimmer, config)
    served = min(arrival_rate, capacity)
    revenue = dimmer * served * config.revenue_per_request
    costs = -servers * config.server_cost
    return RewardVector(satisfaction, revenue, costs, weights=config.weights())


class WebshopEnv:
    """RL environment over the webshop model. Instances hold the workload
    trace and constants; `step` itself is a pure function of its arguments."""

    def __init__(self, config=None):
        self.config = config or EnvConfig()
        self.trace = None

    @property
    def episode_length(self):
        return self.config.episode_length

    def reset(self, seed=0, trace=None):
        """Start an episode: minimum servers, initial dimmer, timestep 0.

        With no explicit trace a synthetic one is generated from `seed` using
        the configured profile, so distinct seeds yield distinct workloads.
        """
        cfg = self.config
        if trace is not None:
            if len(trace) == 0:
                raise ConfigurationError("workload trace is empty")
            self.trace = trace
        else:
            self.trace = generate_trace(
                seed,
                cfg.episode_length + 1,
                cfg.trace_profile,
                base=cfg.trace_base_rate,
                amplitude=cfg.trace_amplitude,
                period=cfg.trace_period,
                noise=cfg.trace_noise,
            )
        if len(self.trace) < cfg.episode_length:
            raise ConfigurationError(
                f"trace length {len(self.trace)} shorter than episode "
                f"length {cfg.episode_length}"
            )
        return self._observe(cfg.min_servers, cfg.dimmer_init, timestep=0)

    def _observe(self, servers, dimmer, timestep):
        cfg = self.config
        rate = self.trace.rate_at(timestep)
        s = service_time(dimmer, cfg)
        rho = rate * s / servers
        if rho < 1.0:
            response = min(s / (1.0 - rho), cfg.response_time_cap)
        else:
            response = cfg.response_time_cap
        return EnvState(
            arrival_rate=rate,
            servers=servers,
            dimmer=dimmer,
            response_time=response,
            utilization=rho,
            timestep=timestep,
        )

    def step(self, state, action):
        """Apply `action` with clamping, advance the workload one timestep,
        and emit the decomposed reward for the resulting configuration."""
        if self.trace is None:
            raise ConfigurationError("reset() must be called before step()")
        cfg = self.config
        action = Action(action)
        servers = state.servers
        dimmer = state.dimmer
        if action == Action.ADD_SERVER:
            servers = min(servers + 1, cfg.max_servers)
        elif action == Action.REMOVE_SERVER:
            servers = max(servers - 1, cfg.min_servers)
        elif action == Action.INCREASE_DIMMER:
            dimmer = min(round(dimmer + cfg.dimmer_step, 9), 1.0)
        elif action == Action.DECREASE_DIMMER:
            dimmer = max(round(dimmer - cfg.dimmer_step, 9), 0.0)
        next_state = self._observe(servers, dimmer, state.timestep + 1)
        reward = compute_reward(
            next_state.arrival_rate, servers, dimmer, next_state.response_time, cfg
        )
        return next_state, reward

    def episode_over(self, state):
        return state.timestep >= self.config.episode_length

    def observation(self, state):
        """Min-max normalized feature vector for the value network."""
        cfg = self.config
        span = max(cfg.max_servers - cfg.min_servers, 1)
        return np.array(
            [
                min(state.arrival_rate / cfg.arrival_rate_max, 1.0),
                (state.servers - cfg.min_servers) / span,
                state.dimmer,
                min(state.response_time / cfg.response_time_cap, 1.0),
                min(state.utilization / cfg.utilization_max, 1.0),
            ],
            dtype=np.float64,
        )


N_FEATURES = 5
N_ACTIONS = len(Action)
N_CHANNELS = len(REWARD_CHANNELS)
