import pytest

from dinechat.config import AppConfig, EnvConfig, load_config, parse_config_text
from dinechat.errors import ConfigurationError


def test_defaults_match_documented_constants():
    env = EnvConfig()
    assert (env.min_servers, env.max_servers) == (1, 10)
    assert env.dimmer_step == 0.1
    assert env.dimmer_init == 0.5
    assert env.service_time_base == 0.04
    assert env.service_time_rec == 0.02
    assert env.response_time_threshold == 0.5
    assert env.response_time_cap == 10.0
    assert env.revenue_per_request == 0.01
    assert env.server_cost == 0.1
    assert env.weights() == (1.0, 1.0, 1.0)
    assert env.episode_length == 200


def test_parse_sections_and_bare_keys():
    config = parse_config_text(
        "# comment\n"
        "max_servers = 6\n"
        "env.dimmer_step = 0.2\n"
        "agent.gamma = 0.95\n"
        "gateway.model = test-model\n"
        "service.port = 9000\n")
    assert config.env.max_servers == 6
    assert config.env.dimmer_step == 0.2
    assert config.agent.gamma == 0.95
    assert config.gateway.model == "test-model"
    assert config.service.port == 9000


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ConfigurationError) as exc:
        parse_config_text("max_servers = 6\nnot a pair\n")
    assert ":2:" in str(exc.value)
    with pytest.raises(ConfigurationError):
        parse_config_text("env.unknown = 1\n")
    with pytest.raises(ConfigurationError):
        parse_config_text("agent.gamma = not_a_number\n")


def test_load_config_missing_file():
    with pytest.raises(ConfigurationError):
        load_config("/nonexistent/config.txt")
    assert isinstance(load_config(None), AppConfig)


def test_invalid_ranges_rejected():
    with pytest.raises(ConfigurationError):
        EnvConfig(min_servers=5, max_servers=2)
    with pytest.raises(ConfigurationError):
        EnvConfig(dimmer_init=1.5)
