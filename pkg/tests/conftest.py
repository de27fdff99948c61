"""Test configuration and fixtures."""

import os
import sys
from fractions import Fraction
from pathlib import Path

import pytest

# Add src to Python path for imports
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

# Keep test runs off any developer log file
os.environ.setdefault("LOG_LEVEL", "WARNING")
os.environ["LOG_FILE"] = ""

from branchsys.core.config import Settings  # noqa: E402
from branchsys.models.grid import GridFunction  # noqa: E402
from branchsys.models.matrix import ExplicitBlockMatrix  # noqa: E402
from branchsys.services.constructions import (  # noqa: E402
    build_standard,
    counterexample,
    doubling,
    example_O_infinity,
    example_quadratic,
)

CELLS = 4096


@pytest.fixture(scope="session")
def test_settings():
    """Fixture for test settings."""
    return Settings()


@pytest.fixture(scope="session")
def doubling_system():
    return doubling()


@pytest.fixture(scope="session")
def standard_system():
    """build_standard on [[1, 1], [1, 0]]: ambient [0, 4), R_1 = [1, 2), R_2 = [2, 3)."""
    return build_standard(ExplicitBlockMatrix.of([[1, 1], [1, 0]]))


@pytest.fixture(scope="session")
def o_infinity_system():
    return example_O_infinity(8)


@pytest.fixture(scope="session")
def quadratic_system():
    return example_quadratic(6)


@pytest.fixture(scope="session")
def counterexample_system():
    return counterexample()


@pytest.fixture
def linear_density():
    """phi(x) = 2x on [0, 1)."""
    return GridFunction.from_callable(lambda x: 2.0 * x, Fraction(1), CELLS)


@pytest.fixture
def write_config(tmp_path):
    """Write a run config into tmp_path; reports go to tmp_path / "reports"."""

    def _write(body: str, name: str = "run.toml") -> Path:
        path = tmp_path / name
        path.write_text(f'output_dir = "{(tmp_path / "reports").as_posix()}"\n{body}', encoding="utf-8")
        return path

    return _write
