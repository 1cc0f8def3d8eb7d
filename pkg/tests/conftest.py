import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from bohmwell.spectrum import WellGeometry  # noqa: E402
from bohmwell.timing import band_ensembles, critical_points  # noqa: E402
from bohmwell.wavepacket import CumulativeDensity, WavePacket  # noqa: E402


@pytest.fixture(scope="session")
def geom():
    return WellGeometry(1.0, 0.2, 60.0)


@pytest.fixture(scope="session")
def packet(geom):
    return WavePacket.build(geom)


@pytest.fixture(scope="session")
def single_mode(geom):
    return WavePacket.build(geom, c_even=1.0, c_odd=0.0)


@pytest.fixture(scope="session")
def cdf0(packet):
    return CumulativeDensity(packet, 0.0)


@pytest.fixture(scope="session")
def crit(packet, cdf0):
    return critical_points(packet, cdf=cdf0)


@pytest.fixture(scope="session")
def bands512(packet, crit, cdf0):
    """512-member ensembles in the traveller, returner and inside bands."""
    return band_ensembles(packet, crit, 512, cdf=cdf0)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_line(capsys):
    """Record (and echo) the one-line verdict of an acceptance criterion."""

    def emit(line: str) -> None:
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)

    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
