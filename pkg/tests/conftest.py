import math

import pytest

from ndsl.coeffmodel import load_problem, simple_problem
from ndsl.fixtures import fixture_path

Q_A = -9 * math.pi**2 / 16


@pytest.fixture(scope="session")
def trivial():
    return load_problem(fixture_path("trivial"))


@pytest.fixture(scope="session")
def example_a():
    return load_problem(fixture_path("exampleA"))


@pytest.fixture(scope="session")
def example_b():
    return load_problem(fixture_path("exampleB"))


@pytest.fixture(scope="session")
def example_a_q0():
    return load_problem(fixture_path("exampleA_q0"))


def two_piece(q: str, a=0.0, mid=1.0, b=2.0, **kw):
    return simple_problem(a, b, q=q, r=[(mid, "1"), (b, "-1")], **kw)


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
