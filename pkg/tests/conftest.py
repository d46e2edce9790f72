import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import LIOUVILLE, RUNNING, SU3_CASE0, SU3_CASE1  # noqa: E402
from toda_hyper.builder import construct  # noqa: E402
from toda_hyper.gamma import SingularData  # noqa: E402

INSTANCES = Path(__file__).resolve().parent.parent / "instances"


def make(d) -> SingularData:
    return SingularData(d["n"], d["gamma0"], d["gamma1"], d["gammaInf"])


def random_data(rng: np.random.Generator, n: int, den: int = 20) -> SingularData:
    def frac(lo):
        return Fraction(int(rng.integers(lo * den + 1, 3 * den)), den)
    return SingularData(n, [frac(-1) for _ in range(n - 1)], [frac(-1) for _ in range(n - 1)],
                        [frac(1) for _ in range(n - 1)])


@pytest.fixture(scope="session")
def running_data():
    return make(RUNNING)


@pytest.fixture(scope="session")
def running_sol(running_data):
    return construct(running_data)


@pytest.fixture(scope="session")
def liouville_sol():
    return construct(make(LIOUVILLE))


@pytest.fixture(scope="session")
def case0_sol():
    return construct(make(SU3_CASE0))


@pytest.fixture(scope="session")
def case1_sol():
    return construct(make(SU3_CASE1))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def random_case_data(rng: np.random.Generator, n: int, den: int = 20) -> SingularData:
    """Random instance whose gamma_1 fits one of the n necessary-condition cases."""
    base = random_data(rng, n, den)
    g1 = [Fraction(0)] * (n - 1)
    case = int(rng.integers(0, n))
    if case in (0, n - 1):
        x = Fraction(0)
        while x == 0:
            x = Fraction(int(rng.integers(-den + 1, 3 * den)), den)
        g1[0 if case == 0 else n - 2] = x
    else:
        x = Fraction(int(rng.integers(-den + 1, 0)), den)
        g1[case - 1], g1[case] = x, -1 - x
    return SingularData(n, base.gamma0, g1, base.gammaInf)
