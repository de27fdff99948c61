"""End-to-end tests for the branchsys command line."""

import json
from pathlib import Path

import pytest

from branchsys.core.exceptions import InconsistentSumError
from branchsys.main import build_parser, collect_overrides, main
from branchsys.models.grid import GridFunction

DOUBLING = """\
seed = 7

[system]
builtin = "doubling"

[grid]
cells = 1024

[perron]
initial = "linear"
ns = [1, 2]
max_iters = 40
"""

COUNTEREXAMPLE = '[system]\nbuiltin = "counterexample"\n'


def read_payload(tmp_path, command):
    return json.loads((tmp_path / "reports" / f"{command}.json").read_text(encoding="utf-8"))


class TestParser:
    def test_overrides_from_flags(self):
        args = build_parser().parse_args(
            ["truncation", "run.toml", "--cells", "256", "--ns", "4,1,2", "--seed", "5"]
        )
        assert collect_overrides(args) == {"grid.cells": 256, "perron.ns": [4, 1, 2], "seed": 5}

    def test_monte_carlo_alias(self):
        args = build_parser().parse_args(["pf", "run.toml", "--monte-carlo", "100"])
        assert collect_overrides(args) == {"perron.samples": 100}

    @pytest.mark.parametrize(
        "argv",
        [["explode", "run.toml"], ["pf", "run.toml", "--bogus"], ["truncation", "run.toml", "--ns", "a"], []],
    )
    def test_usage_errors_exit_with_one(self, argv):
        with pytest.raises(SystemExit) as exc_info:
            main(argv)
        assert exc_info.value.code == 1


class TestCommands:
    """Exit codes and report files for each command."""

    @pytest.mark.parametrize(
        "command, report",
        [
            ("validate", "validate"),
            ("lemma", "lemma"),
            ("relations", "relations"),
            ("pf", "pf"),
            ("truncation", "truncation"),
            ("matrix-rep", "matrix_rep"),
            ("invariant", "invariant"),
        ],
    )
    def test_doubling_passes(self, write_config, tmp_path, command, report):
        path = write_config(DOUBLING)
        assert main([command, str(path)]) == 0
        payload = read_payload(tmp_path, report)
        assert payload["passed"] is True
        assert payload["command"] == report
        assert (tmp_path / "reports" / f"{report}.txt").exists()

    def test_pf_writes_result_csv(self, write_config, tmp_path):
        main(["pf", str(write_config(DOUBLING))])
        result = GridFunction.from_csv(tmp_path / "reports" / "pf.csv", 1, 1024)
        assert result.integral() == pytest.approx(1.0)

    def test_pf_with_monte_carlo(self, write_config, tmp_path):
        path = write_config(DOUBLING)
        assert main(["pf", str(path), "--samples", "1000000", "--bins", "64"]) == 0
        payload = read_payload(tmp_path, "pf")
        assert payload["report"]["monte_carlo_l1"] <= 0.02
        assert (tmp_path / "reports" / "pf_monte_carlo.csv").exists()

    @pytest.mark.parametrize("command", ["validate", "relations"])
    def test_counterexample_fails(self, write_config, command):
        assert main([command, str(write_config(COUNTEREXAMPLE))]) == 2

    def test_counterexample_condition(self, write_config, tmp_path):
        main(["validate", str(write_config(COUNTEREXAMPLE))])
        conditions = read_payload(tmp_path, "validate")["report"]["conditions"]
        failed = [c["condition"] for c in conditions if not c["passed"]]
        assert 4 in failed
        assert 1 not in failed

    def test_matrix_rep_on_infinite_rows(self, write_config):
        path = write_config('[system]\nbuiltin = "o-infinity"\nn_max = 4\n')
        assert main(["matrix-rep", str(path)]) == 2

    def test_invariant_without_convergence(self, write_config, tmp_path):
        path = write_config(DOUBLING)
        assert main(["invariant", str(path), "--max-iters", "2"]) == 2
        payload = read_payload(tmp_path, "invariant")
        assert payload["report"]["converged"] is False
        assert payload["report"]["iterations"] == 2

    def test_negative_input(self, write_config, tmp_path):
        values = GridFunction.constant(1, 1024, 1.0).values.copy()
        values[3] = -1.0
        csv_path = GridFunction(1, values).to_csv(tmp_path / "negative.csv")
        assert main(["pf", str(write_config(DOUBLING)), "--input", str(csv_path)]) == 1

    def test_invariant_refuses_zero_density(self, write_config, tmp_path):
        csv_path = GridFunction.zeros(1, 1024).to_csv(tmp_path / "zero.csv")
        assert main(["invariant", str(write_config(DOUBLING)), "--input", str(csv_path)]) == 1
        assert not (tmp_path / "reports" / "invariant.csv").exists()

    def test_pf_with_zero_samples_is_flagged(self, write_config, tmp_path):
        assert main(["pf", str(write_config(DOUBLING)), "--samples", "0"]) == 0
        report = read_payload(tmp_path, "pf")["report"]
        assert report["monte_carlo_samples"] == 0
        assert report["monte_carlo_empty"] is True
        assert report["monte_carlo_l1"] is None
        text = (tmp_path / "reports" / "pf.txt").read_text(encoding="utf-8")
        assert "Monte-Carlo estimate is empty" in text

    def test_pf_without_samples_skips_monte_carlo(self, write_config, tmp_path):
        assert main(["pf", str(write_config(DOUBLING))]) == 0
        report = read_payload(tmp_path, "pf")["report"]
        assert report["monte_carlo_samples"] is None
        assert report["monte_carlo_empty"] is False
        assert not (tmp_path / "reports" / "pf_monte_carlo.csv").exists()

    def test_pf_inconsistent_sum_forms_fail(self, write_config, mocker):
        mocker.patch(
            "branchsys.commands.perron.pf_apply_with_deviation",
            side_effect=InconsistentSumError(1.0),
        )
        mock_logger = mocker.patch("branchsys.commands.perron.logger")
        assert main(["pf", str(write_config(DOUBLING))]) == 2
        mock_logger.error.assert_called_once()

    def test_config_errors(self, write_config, mocker):
        mock_logger = mocker.patch("branchsys.main.logger")
        bad_toml = write_config('[system\nbuiltin = "doubling"\n', name="bad.toml")
        unknown_key = write_config('[system]\nbuiltin = "doubling"\nspeed = 1\n', name="unknown.toml")
        assert main(["validate", str(bad_toml)]) == 1
        assert main(["validate", str(unknown_key)]) == 1
        assert mock_logger.error.call_count == 2
        assert "system.speed" in mock_logger.error.call_args[0][0]

    def test_same_seed_same_bytes(self, write_config, tmp_path):
        path = write_config(DOUBLING)
        reports = tmp_path / "reports"
        assert main(["relations", str(path)]) == 0
        first = {name: (reports / name).read_bytes() for name in ("relations.json", "relations.txt")}
        assert main(["relations", str(path)]) == 0
        for name, content in first.items():
            assert (reports / name).read_bytes() == content


class TestAcceptanceExamples:
    """Command outcomes for the reference systems."""

    def test_standard_validates(self, write_config):
        body = '[system]\nbuiltin = "standard"\n[system.matrix]\nkind = "explicit_block"\nrows = [[1, 1], [1, 0]]\n'
        assert main(["validate", str(write_config(body))]) == 0

    def test_counterexample_description_names_pair(self, write_config, tmp_path):
        repo_root = Path(__file__).resolve().parents[2]
        description = (repo_root / "systems" / "counterexample.toml").as_posix()
        path = write_config(f'[system]\ndescription = "{description}"\n')
        assert main(["validate", str(path)]) == 2
        conditions = read_payload(tmp_path, "validate")["report"]["conditions"]
        condition_4 = next(c for c in conditions if c["condition"] == 4)
        assert condition_4["findings"][0]["pair"] == [1, 2]

    def test_single_cell_grid_is_a_config_error(self, write_config):
        assert main(["validate", str(write_config(DOUBLING)), "--cells", "1"]) == 1

    def test_doubling_matrix_csv(self, write_config, tmp_path):
        assert main(["matrix-rep", str(write_config(DOUBLING))]) == 0
        assert (tmp_path / "reports" / "matrix_rep.csv").read_text(encoding="utf-8") == "0.5,0.5\n0.5,0.5\n"

    def test_zero_input_gives_zero_output(self, write_config, tmp_path):
        csv_path = GridFunction.zeros(1, 1024).to_csv(tmp_path / "zero.csv")
        assert main(["pf", str(write_config(DOUBLING)), "--input", str(csv_path)]) == 0
        result = GridFunction.from_csv(tmp_path / "reports" / "pf.csv", 1, 1024)
        assert result.max_abs == 0.0
