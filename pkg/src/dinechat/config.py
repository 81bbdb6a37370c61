"""Shared configuration: dataclass defaults plus a plain-text key=value loader.

Config files are flat ``key = value`` lines with ``#`` comments. Keys may be
prefixed with a section (``env.max_servers``, ``agent.gamma``, ``gateway.model``,
``service.data_dir``); unprefixed keys belong to the environment section for
compatibility with bare environment config files.
"""

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigurationError

REWARD_CHANNELS = ("user_satisfaction", "revenue", "costs")


@dataclass(frozen=True)
class EnvConfig:
    """Constants of the adaptive webshop simulator."""

    min_servers: int = 1
    max_servers: int = 10
    dimmer_step: float = 0.1
    dimmer_init: float = 0.5
    service_time_base: float = 0.04   # seconds per request, recommendations off
    service_time_rec: float = 0.02    # extra seconds per request at dimmer 1.0
    response_time_threshold: float = 0.5
    response_time_cap: float = 10.0
    revenue_per_request: float = 0.01
    server_cost: float = 0.1
    weight_user_satisfaction: float = 1.0
    weight_revenue: float = 1.0
    weight_costs: float = 1.0
    episode_length: int = 200
    # synthetic workload defaults (one decision per simulated minute)
    trace_profile: str = "diurnal"
    trace_base_rate: float = 80.0
    trace_amplitude: float = 60.0
    trace_period: int = 200
    trace_noise: float = 5.0
    # feature normalization bounds
    arrival_rate_max: float = 200.0
    utilization_max: float = 2.0

    def weights(self):
        return (
            self.weight_user_satisfaction,
            self.weight_revenue,
            self.weight_costs,
        )

    def __post_init__(self):
        if self.min_servers < 1 or self.max_servers < self.min_servers:
            raise ConfigurationError(
                f"invalid server bounds [{self.min_servers}, {self.max_servers}]"
            )
        if not 0.0 <= self.dimmer_init <= 1.0:
            raise ConfigurationError("dimmer_init must lie in [0, 1]")
        if self.episode_length < 1:
            raise ConfigurationError("episode_length must be positive")


@dataclass(frozen=True)
class AgentConfig:
    """Hyper-parameters of the decomposed Double DQN agent."""

    gamma: float = 0.9
    learning_rate: float = 1e-3
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_steps: int = 10_000
    target_sync_interval: int = 500
    batch_size: int = 32
    buffer_capacity: int = 20_000
    min_replay_size: int = 500
    hidden_sizes: tuple = (64, 64)
    grad_clip_norm: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigurationError("gamma must lie in [0, 1)")
        if self.learning_rate <= 0:
            raise ConfigurationError("learning_rate must be positive")
        for name in ("epsilon_start", "epsilon_end"):
            eps = getattr(self, name)
            if not 0.0 <= eps <= 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1]")
        if self.batch_size < 1 or self.buffer_capacity < self.batch_size:
            raise ConfigurationError("buffer must hold at least one batch")


@dataclass(frozen=True)
class GatewayConfig:
    """Completion endpoint, token limits, and sampling defaults."""

    base_url: str = "https://api.openai.com/v1"
    model: str = "gpt-3.5-turbo"
    api_key_env: str = "LLM_API_KEY"
    request_token_limit: int = 4096
    tokens_per_minute: int = 90_000
    max_token: int = 350
    token_safety_factor: float = 1.0
    retry_backoff: tuple = (1.0, 2.0, 4.0)
    timeout: float = 60.0


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: str = "data"
    host: str = "127.0.0.1"
    port: int = 8000
    backend: str = "oracle"
    mock_script: str = ""


@dataclass(frozen=True)
class AppConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    agent: AgentConfig = field(default_factory=AgentConfig)
    gateway: GatewayConfig = field(default_factory=GatewayConfig)
    service: ServiceConfig = field(default_factory=ServiceConfig)


_SECTIONS = {
    "env": EnvConfig,
    "agent": AgentConfig,
    "gateway": GatewayConfig,
    "service": ServiceConfig,
}


def _coerce(raw, target_type):
    if target_type is bool:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ValueError(raw)
    if target_type is tuple:
        return tuple(float(part) for part in raw.split(",") if part.strip())
    return target_type(raw)


def parse_config_text(text, path="<config>"):
    """Parse ``key = value`` lines into an AppConfig."""
    overrides = {name: {} for name in _SECTIONS}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigurationError(f"{path}:{line_no}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        section, _, bare = key.partition(".")
        if not bare:
            section, bare = "env", section
        if section not in _SECTIONS:
            raise ConfigurationError(f"{path}:{line_no}: unknown section '{section}'")
        cls = _SECTIONS[section]
        field_types = {f.name: f.type for f in fields(cls)}
        if bare not in field_types:
            raise ConfigurationError(
                f"{path}:{line_no}: unknown key '{bare}' in section '{section}'"
            )
        default = getattr(cls(), bare)
        target = type(default) if default is not None else str
        if isinstance(default, tuple):
            target = tuple
        try:
            overrides[section][bare] = _coerce(raw, target)
        except ValueError as exc:
            raise ConfigurationError(
                f"{path}:{line_no}: cannot parse '{raw}' for '{key}'"
            ) from exc
    return AppConfig(
        env=EnvConfig(**overrides["env"]),
        agent=AgentConfig(**overrides["agent"]),
        gateway=GatewayConfig(**overrides["gateway"]),
        service=ServiceConfig(**overrides["service"]),
    )


def load_config(path=None):
    """Load an AppConfig, falling back to defaults when `path` is None."""
    if path is None:
        return AppConfig()
    p = Path(path)
    if not p.exists():
        raise ConfigurationError(f"config file not found: {path}")
    return parse_config_text(p.read_text(), path=str(path))


def with_overrides(config, **section_overrides):
    """Return a copy of `config` with whole sections replaced."""
    return replace(config, **section_overrides)
