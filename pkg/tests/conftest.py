import pytest

from matisk.core import PulseSpec, SystemConfig, make_pulse
from matisk.pipeline import build_system

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def full_cfg():
    """64 antennas, T = 70, QPSK, 800 ns symbols."""
    return SystemConfig()


@pytest.fixture(scope="session")
def full_system(full_cfg):
    return build_system(full_cfg)


@pytest.fixture(scope="session")
def small_cfg():
    # support of the BT=0.3, L=4 pulse is 5 chips, so T - N = 8 leaves a clean window
    return SystemConfig(
        n_subcarriers=8,
        repetition=16,
        psk_order=4,
        chip_period_s=1e-8,
        oversampling=8,
        pulse_spec=PulseSpec(bt_product=0.3, truncation_chips=4),
        seed=3,
    )


@pytest.fixture(scope="session")
def small_pulse(small_cfg):
    return make_pulse(small_cfg.pulse_spec, small_cfg.chip_period_s, small_cfg.oversampling)
