from pathlib import Path

import pytest

from apps.synth_data.services.generator import SynthConfig, generate, write_fixture


def pytest_addoption(parser: pytest.Parser) -> None:
    parser.addoption("--runslow", action="store_true", default=False, help="Run slow training tests.")


def pytest_collection_modifyitems(config: pytest.Config, items: list[pytest.Item]) -> None:
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def small_synth_config() -> SynthConfig:
    return SynthConfig(
        seed=7,
        n_failures=4,
        n_min=120,
        n_max=160,
        parameter_count=6,
        n_informative=3,
        window_length=8,
        horizon=10,
    )


@pytest.fixture
def synth_fixture_dir(tmp_path: Path, small_synth_config: SynthConfig) -> Path:
    out_dir = tmp_path / "fixture"
    write_fixture(generate(small_synth_config), out_dir)
    return out_dir
