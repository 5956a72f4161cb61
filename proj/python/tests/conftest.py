from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def surrogate_path():
    return str(ROOT / "scenarios" / "surrogate.cfg")


@pytest.fixture()
def surrogate(surrogate_path):
    import etmpc

    return etmpc.load_scenario(surrogate_path)
