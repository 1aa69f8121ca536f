import pytest

from sinkopt.candidates import StarterMode
from sinkopt.configuration import Configuration
from sinkopt.errors import ConfigurationError


def test_configuration_empty() -> None:
    configuration = Configuration.from_runnable_config({})
    assert configuration.nu == 0.8
    assert configuration.max_card == 3
    assert configuration.mode is StarterMode.ALL_MINIMUM
    assert configuration.cover_size is None


def test_configuration_ignores_unknown_keys() -> None:
    configuration = Configuration.from_runnable_config(
        {"configurable": {"nu": 0.5, "thread_id": "abc"}}
    )
    assert configuration.nu == 0.5


@pytest.mark.parametrize(
    "values",
    [
        {"nu": 0.0},
        {"nu": 1.2},
        {"max_card": 0},
        {"threads": -1},
        {"starter_mode": "random"},
        {"empty_part_cap": 0},
    ],
)
def test_configuration_rejects(values) -> None:
    with pytest.raises(ConfigurationError):
        Configuration(**values)
