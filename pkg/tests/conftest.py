import pathlib

import pytest

from badlands.circuit import build_memory_circuit
from badlands.lattice import build_lattice
from badlands.noise import homogeneous_profile

GOLDEN = pathlib.Path(__file__).parent / "golden"


def memory_circuit(d, p, rounds=3):
    lattice = build_lattice(d)
    return build_memory_circuit(lattice, homogeneous_profile(lattice, p), rounds)


@pytest.fixture(scope="session")
def golden():
    return GOLDEN


@pytest.fixture(scope="session")
def d3_circuit():
    return memory_circuit(3, 0.001)


@pytest.fixture(scope="session")
def d5_circuit():
    return memory_circuit(5, 0.001)


# One line per acceptance criterion, echoed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def record_criterion(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
