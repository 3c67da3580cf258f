# Ensure project root is on sys.path for imports like `domain.*` and `services.*`
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

import pytest

from domain.config import ScenarioConfig, with_overrides
from domain.models import ControllerMode
from domain.simulation import simulate


def make_cfg(**overrides):
    """Default five-user scenario with top-level overrides (mode, duration, seed...)."""
    return with_overrides(ScenarioConfig.default(), **overrides)


@pytest.fixture
def default_cfg():
    return ScenarioConfig.default()


@pytest.fixture
def short_cfg():
    # Long enough for queues to fill, drops to start and a few epochs to pass.
    return make_cfg(duration=3.0)


@pytest.fixture
def short_qoe_result(short_cfg):
    return simulate(short_cfg)


@pytest.fixture(scope="session")
def default_comparison():
    """The full 200 s baseline-vs-qoe comparison, computed once per session."""
    from services.runner import compare

    return compare(ScenarioConfig.default())


@pytest.fixture(scope="session")
def default_by_mode(default_comparison):
    return {
        mode: {m.flow_id: m for m in outcome.metrics}
        for mode, outcome in default_comparison.outcomes.items()
    }


BASELINE = ControllerMode.BASELINE
QOE = ControllerMode.QOE
