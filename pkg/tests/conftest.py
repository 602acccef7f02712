import dataclasses
import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

from ransomgame.model import GlobalParams, GroupParams

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = ROOT / "scenarios"
SPECS = SCENARIOS / "specs"

BASE_GROUP = GroupParams(size=100, wealth=100.0, failure_loss=5.0, ransom_loss=5.0, interruption_loss=10.0)
EMPTY_GROUP = dataclasses.replace(BASE_GROUP, size=0)
BASE_GLOBALS = GlobalParams(
    discount=0.9, base_difficulty=10.0, backup_unit_cost=1.0, attack_unit_cost=10.0, dev_cost=10.0
)


def with_globals(**changes) -> GlobalParams:
    return dataclasses.replace(BASE_GLOBALS, **changes)


@pytest.fixture
def single():
    return (BASE_GROUP, EMPTY_GROUP)


@pytest.fixture
def pair():
    return (BASE_GROUP, BASE_GROUP)


@pytest.fixture
def gp():
    return BASE_GLOBALS


positive = st.floats(min_value=0.2, max_value=20.0, allow_nan=False)


@st.composite
def groups_st(draw, min_size=0):
    def group():
        return GroupParams(
            size=draw(st.integers(min_value=min_size, max_value=200)),
            wealth=draw(st.floats(min_value=0.0, max_value=1000.0)),
            failure_loss=draw(positive),
            ransom_loss=draw(positive),
            interruption_loss=draw(st.floats(min_value=0.0, max_value=20.0)),
        )

    return (group(), group())


@st.composite
def globals_st(draw):
    return GlobalParams(
        discount=draw(st.floats(min_value=0.05, max_value=1.0)),
        base_difficulty=draw(st.floats(min_value=1.0, max_value=50.0)),
        backup_unit_cost=draw(st.floats(min_value=0.1, max_value=5.0)),
        attack_unit_cost=draw(st.floats(min_value=0.5, max_value=30.0)),
        dev_cost=draw(st.floats(min_value=0.0, max_value=50.0)),
    )


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.RESULTS:
        terminalreporter.write_line(line)
