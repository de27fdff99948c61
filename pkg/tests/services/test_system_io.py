"""Tests for config, system description and density loading."""

from fractions import Fraction
from pathlib import Path

import pytest

from branchsys.core.exceptions import ConfigError, GridMismatchError
from branchsys.models.grid import GridFunction
from branchsys.models.matrix import ExplicitBlockMatrix
from branchsys.services.constructions import (
    build_standard,
    doubling,
    example_O_infinity,
    example_quadratic,
)
from branchsys.services.system_io import (
    load_run_config,
    load_system_description,
    read_density,
    resolve_system,
    system_from_dict,
)

REPO_ROOT = Path(__file__).resolve().parents[2]

COUNTEREXAMPLE_BODY = """\
name = "split"
ambient = "2"

[matrix]
kind = "explicit_block"
rows = [[1, 1], [1, 0]]

[[branches]]
index = 1
domain = [[0, 1, 1, 1]]
range = [[0, 1, 1, 1]]

[[branches.pieces]]
kind = "affine"
source = [0, 1, 1, 1]
target = [0, 1, 1, 1]
slope = "1"

[[branches]]
index = 2

[[branches.pieces]]
kind = "affine"
source = [1, 1, 2, 1]
target = [1, 1, 2, 1]
slope = 1
"""


class TestLoadRunConfig:
    """Run configs: parsing, overrides and error locations."""

    def test_defaults(self, write_config):
        config = load_run_config(write_config('[system]\nbuiltin = "doubling"\n'))
        assert config.system.builtin == "doubling"
        assert config.grid.cells == 4096
        assert config.perron.ns == [1, 2, 4, 8, 16]

    def test_overrides(self, write_config):
        path = write_config('seed = 3\n[system]\nbuiltin = "o-infinity"\nn_max = 4\n')
        config = load_run_config(
            path, {"seed": 9, "grid.cells": 1024, "system.n_max": None, "perron.n": 2}
        )
        assert config.seed == 9
        assert config.grid.cells == 1024
        assert config.system.n_max == 4
        assert config.perron.n == 2

    def test_syntax_error_has_location(self, write_config):
        path = write_config('[system]\nbuiltin = "doubling\n')
        with pytest.raises(ConfigError) as exc_info:
            load_run_config(path)
        assert exc_info.value.location is not None
        assert exc_info.value.location[0] == 3
        assert "line 3" in str(exc_info.value)

    def test_unknown_key(self, write_config):
        path = write_config('[system]\nbuiltin = "doubling"\n[grid]\ncels = 64\n')
        with pytest.raises(ConfigError) as exc_info:
            load_run_config(path)
        assert exc_info.value.key == "grid.cels"

    def test_float_rational_rejected(self, write_config):
        path = write_config('[system]\nbuiltin = "quadratic"\nambient = 8.0\n')
        with pytest.raises(ConfigError) as exc_info:
            load_run_config(path)
        assert exc_info.value.key == "system.ambient"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_run_config(tmp_path / "absent.toml")

    def test_relative_description_is_resolved(self, write_config, tmp_path):
        (tmp_path / "systems").mkdir()
        (tmp_path / "systems" / "split.toml").write_text(COUNTEREXAMPLE_BODY, encoding="utf-8")
        config = load_run_config(write_config('[system]\ndescription = "systems/split.toml"\n'))
        assert config.system.description == tmp_path / "systems" / "split.toml"
        assert resolve_system(config.system).name == "split"

    @pytest.mark.parametrize(
        "name", ["doubling", "o_infinity", "quadratic", "standard", "counterexample"]
    )
    def test_shipped_configs(self, name):
        config = load_run_config(REPO_ROOT / "configs" / f"{name}.toml")
        system = resolve_system(config.system)
        assert system.n_max >= 2


class TestSystemDescriptions:
    """Piece-by-piece descriptions."""

    def test_counterexample_description(self, tmp_path):
        path = tmp_path / "split.toml"
        path.write_text(COUNTEREXAMPLE_BODY, encoding="utf-8")
        system = load_system_description(path)
        assert system.ambient == 2
        assert system.branch(2).range.measure == 1
        assert system.matrix.entry(2, 2) == 0

    @pytest.mark.parametrize(
        "factory",
        [
            doubling,
            lambda: example_O_infinity(6),
            lambda: example_quadratic(4),
            lambda: build_standard(ExplicitBlockMatrix.of([[1, 1], [1, 0]])),
        ],
        ids=["doubling", "o-infinity", "quadratic", "standard"],
    )
    def test_rebuild_from_dict(self, factory):
        system = factory()
        rebuilt = system_from_dict(system.to_dict())
        assert rebuilt.to_dict() == system.to_dict()
        assert rebuilt.n_max == system.n_max

    def test_declared_domain_mismatch(self):
        data = doubling().to_dict()
        data["branches"][0]["domain"] = [[0, 1, 1, 2]]
        with pytest.raises(ConfigError) as exc_info:
            system_from_dict(data)
        assert exc_info.value.key == "branches.0.domain"

    def test_branches_out_of_order(self):
        data = doubling().to_dict()
        data["branches"].reverse()
        with pytest.raises(ConfigError) as exc_info:
            system_from_dict(data)
        assert exc_info.value.key == "branches"

    def test_bad_piece(self):
        data = doubling().to_dict()
        data["branches"][0]["pieces"][0]["slope"] = "0"
        with pytest.raises(ConfigError) as exc_info:
            system_from_dict(data)
        assert exc_info.value.key.startswith("branches.0")

    def test_matrix_rows_mismatch_warns(self, mocker):
        mock_logger = mocker.patch("branchsys.services.system_io.logger")
        data = doubling().to_dict()
        data["matrix"]["n_max"] = 3
        data["matrix"]["rows"] = [[1, 1], [1, 1], [1, 0]]
        system_from_dict(data)
        mock_logger.warning.assert_called_once()


class TestReadDensity:
    def test_round_trip_through_csv(self, tmp_path, doubling_system, linear_density):
        path = linear_density.to_csv(tmp_path / "phi.csv")
        loaded = read_density(path, doubling_system, 4096)
        assert loaded.distance_l1(linear_density) <= 1e-12

    def test_wrong_cell_count(self, tmp_path, doubling_system):
        path = GridFunction.constant(Fraction(1), 64, 1.0).to_csv(tmp_path / "phi.csv")
        with pytest.raises(GridMismatchError):
            read_density(path, doubling_system, 128)

    def test_missing_file(self, tmp_path, doubling_system):
        with pytest.raises(ConfigError):
            read_density(tmp_path / "absent.csv", doubling_system, 64)
