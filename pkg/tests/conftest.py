import pytest

from dunklab.core import build_structure
from dunklab.poly import orthonormal_basis

ACCEPTANCE_LINES = []


def record(criterion, passed, detail=""):
    line = f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


@pytest.fixture
def acceptance():
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def s1_half():
    return build_structure(1, [0.5])


@pytest.fixture(scope="session")
def s1_zero():
    return build_structure(1, [0.0])


@pytest.fixture(scope="session")
def s1_one():
    return build_structure(1, [1.0])


@pytest.fixture(scope="session")
def s2():
    return build_structure(2, [0.5, 1.0])


@pytest.fixture(scope="session")
def b1_half(s1_half):
    return orthonormal_basis(s1_half, 60)


@pytest.fixture(scope="session")
def b1_zero(s1_zero):
    return orthonormal_basis(s1_zero, 60)


@pytest.fixture(scope="session")
def b1_one(s1_one):
    return orthonormal_basis(s1_one, 60)


@pytest.fixture(scope="session")
def b2_small(s2):
    return orthonormal_basis(s2, 24)
