import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dinechat import assets
from dinechat.gateway import ChatGateway, OracleBackend, SimulatedClock


@pytest.fixture(scope="session")
def reference_trace():
    return assets.load_reference_trace()


@pytest.fixture(scope="session")
def question_bank():
    return assets.load_default_bank()


@pytest.fixture(scope="session")
def description():
    return assets.load_default_description()


@pytest.fixture
def oracle_gateway():
    return ChatGateway(OracleBackend(), clock=SimulatedClock())
