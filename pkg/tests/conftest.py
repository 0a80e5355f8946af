import numpy as np
import pytest

from deepmp.datagen import generate_synthetic_dictionary

ACCEPTANCE_RESULTS: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_RESULTS


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def small_dictionary():
    """10x50 dictionary shared by solver tests."""
    return generate_synthetic_dictionary(10, 50, seed=424242)


@pytest.fixture(scope="session")
def table_dictionary():
    """The 30x200 reference-scale synthetic dictionary."""
    return generate_synthetic_dictionary(30, 200, seed=20240801)


def random_unit_dictionary(rng: np.random.Generator, rows: int, cols: int):
    """Non-negative column-normalized matrix without the generator's seeding."""
    atoms = np.abs(rng.standard_normal((rows, cols)))
    atoms /= np.linalg.norm(atoms, axis=0)
    return atoms
