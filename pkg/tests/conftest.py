from pathlib import Path

import pytest

from cloneops.clone_engine import FinAlgebra
from cloneops.finite_ops import FinUniverse, OpTable
from cloneops.formats import parse_algebra

ALGEBRAS = Path(__file__).resolve().parents[1] / "algebras"

ACCEPTANCE_RESULTS: dict[int, tuple[str, bool]] = {}


def load(name: str) -> FinAlgebra:
    return parse_algebra(ALGEBRAS / f"{name}.alg")


@pytest.fixture(scope="session")
def U2():
    return FinUniverse("2", ("0", "1"))


@pytest.fixture(scope="session")
def nand():
    return load("nand")


@pytest.fixture(scope="session")
def ba():
    return load("ba")


@pytest.fixture(scope="session")
def sets():
    return load("sets")


@pytest.fixture(scope="session")
def lz():
    return load("lz")


@pytest.fixture(scope="session")
def rz():
    return load("rz")


@pytest.fixture(scope="session")
def ops2(U2):
    """A few named operations on {0,1}."""
    t = lambda arity, tab: OpTable(U2, arity, tab)
    return {
        "and": t(2, (0, 0, 0, 1)), "or": t(2, (0, 1, 1, 1)), "xor": t(2, (0, 1, 1, 0)),
        "nand": t(2, (1, 1, 1, 0)), "not": t(1, (1, 0)), "id": t(1, (0, 1)),
        "c0": t(0, (0,)), "c1": t(0, (1,)),
    }


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_RESULTS):
        name, ok = ACCEPTANCE_RESULTS[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {name}")
