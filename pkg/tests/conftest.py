import sys
import numpy as np
import pytest

from anisoeq import seeds
from anisoeq.sampling import SampleSet


@pytest.fixture(scope="session")
def small_samples():
    return SampleSet(count=1500)


@pytest.fixture(scope="session")
def samples():
    return SampleSet(count=10_000)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def catalog():
    return {
        "vacuum": seeds.make_vacuum_planar_harmonic("exp-trig", Bz0=1.0),
        "helical": seeds.make_force_free_helical(1.0, 2.0),
        "abc": seeds.make_abc_beltrami(1.0, 1.0, 1.0),
        "theta": seeds.make_theta_pinch(),
        "flow": seeds.make_field_aligned_flow(1.0, 1.0, None, 1.0, 1.0),
    }


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    verdicts = getattr(mod, "VERDICTS", None)
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(verdicts):
        terminalreporter.write_line(verdicts[n])
