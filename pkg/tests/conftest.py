import sys, os
sys.path.insert(0, os.path.dirname(__file__))
import pytest
from shapely.geometry import box

from doubletopt.field import GroundwaterField
from doubletopt.geometry import BlockGeometry, PrepConfig


@pytest.fixture(scope="session")
def rich_field():
    # every well clears 1 l/s on both limits; flow towards +x
    return GroundwaterField.uniform(K=2e-3, B=10.0, h_n=500.0, h_max=502.0, grad_h=2e-3, flow_azimuth_deg=90.0)


@pytest.fixture
def square_block():
    return BlockGeometry("S", box(0, 0, 50, 50), [])


@pytest.fixture
def prep():
    return PrepConfig()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
