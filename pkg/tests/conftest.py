from pathlib import Path

import pytest

from swapparams.amm import PoolState
from swapparams.mev import MevParams
from swapparams.stochastic import MarketModel

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"
GOLDEN = Path(__file__).resolve().parent / "golden"


def ref1_model(**changes) -> MarketModel:
    model = MarketModel(PoolState(1e6, 1e6, 0.003), price_vol=0.002, depth_vol=0.001, gas=1.0,
                        mev=MevParams(attacker_gas=1.0, enabled=True))
    return model.replace(**changes) if changes else model


def zero_noise_model(gas=1.0, **changes) -> MarketModel:
    model = MarketModel(PoolState(1e6, 1e6, 0.0), gas=gas, mev=MevParams(enabled=False))
    return model.replace(**changes) if changes else model


@pytest.fixture
def ref1():
    return ref1_model()


@pytest.fixture
def zero_noise():
    return zero_noise_model()


def pytest_configure(config):
    import sys
    sys.path.insert(0, str(Path(__file__).resolve().parent))


# (criterion number, title, passed, detail) rows filled in by test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number}. {title}: {detail}")
