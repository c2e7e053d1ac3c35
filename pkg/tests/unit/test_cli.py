"""Unit tests for the command-line front end."""

import csv
import io
import json
import math
from unittest.mock import patch

import pytest

from two_setting_bell.cli import main, parse_args, run
from two_setting_bell.errors import CapacityError, ValidationError
from two_setting_bell.serialization import validate_report


def invoke(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestViolationCommand:
    """Test cases for the violation subcommand."""

    def test_ghz_three_qubits(self, capsys):
        """Test GHZ violation at canonical settings."""
        code, out, _ = invoke(capsys, "violation", "--state", "ghz", "--n", "3")

        assert code == 0
        report = json.loads(out)
        assert validate_report(report) == []
        assert report["quantum_value"] == pytest.approx(math.sqrt(2), abs=1e-9)
        assert report["lhv_bound"] == 1.0
        assert report["method"] == "closed-form"
        assert len(report["settings"]) == 3

    def test_noisy_ghz(self, capsys):
        """Test the noisy GHZ value scales with visibility."""
        code, out, _ = invoke(
            capsys, "violation", "--state", "noisy-ghz", "--n", "3", "--visibility", "0.8"
        )

        assert code == 0
        assert json.loads(out)["quantum_value"] == pytest.approx(0.8 * math.sqrt(2), abs=1e-9)

    def test_w_state_output_is_reproducible(self, capsys):
        """Test two optimiser runs with the same seed print identical bytes."""
        argv = ("violation", "--state", "w", "--n", "3", "--starts", "2", "--max-iterations", "100")
        _, first, _ = invoke(capsys, *argv)
        _, second, _ = invoke(capsys, *argv)

        assert first == second
        report = json.loads(first)
        assert validate_report(report) == []
        assert report["method"] == "optimized"
        assert report["seed"] == 0

    def test_csv_format(self, capsys):
        """Test CSV output has a header and one row."""
        code, out, _ = invoke(capsys, "violation", "--state", "ghz", "--n", "4", "--format", "csv")

        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 1
        assert float(rows[0]["quantum_value"]) == pytest.approx(2.0, abs=1e-9)
        assert rows[0]["state"] == "ghz"

    def test_gghz_requires_alpha(self, capsys):
        """Test missing --alpha is a validation error."""
        code, out, err = invoke(capsys, "violation", "--state", "gghz", "--n", "3")

        assert code == 2
        assert out == ""
        assert "--alpha" in err

    def test_alpha_out_of_range(self, capsys):
        code, _, _ = invoke(capsys, "violation", "--state", "gghz", "--n", "3", "--alpha", "2")
        assert code == 2

    def test_too_many_qubits(self, capsys):
        """Test the qubit cap maps to exit code 3."""
        code, _, err = invoke(capsys, "violation", "--n", "13")

        assert code == 3
        assert "12" in err

    def test_unparseable_flag(self):
        """Test argparse errors exit with status 2."""
        with pytest.raises(SystemExit) as exc_info:
            main(["violation", "--n", "abc"])

        assert exc_info.value.code == 2


class TestSweepAlphaCommand:
    """Test cases for the sweep-alpha subcommand."""

    def test_endpoints(self, capsys):
        """Test the product-state endpoints reach but do not exceed the bound."""
        code, out, _ = invoke(capsys, "sweep-alpha", "--n", "3", "--steps", "2")

        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert list(rows[0]) == ["alpha", "closed_form", "matrix_value", "violates", "escape_region"]
        assert len(rows) == 2
        assert float(rows[0]["alpha"]) == 0.0
        assert float(rows[1]["alpha"]) == pytest.approx(math.pi / 2)
        for row in rows:
            assert float(row["matrix_value"]) == pytest.approx(1.0, abs=1e-9)
            assert row["violates"] == "false"

    def test_interior_rows_violate(self, capsys):
        code, out, _ = invoke(capsys, "sweep-alpha", "--n", "5", "--steps", "5", "--format", "json")

        assert code == 0
        result = json.loads(out)
        assert result["n"] == 5
        interior = result["rows"][1:-1]
        assert all(row["violates"] for row in interior)
        for row in result["rows"]:
            assert row["matrix_value"] == pytest.approx(row["closed_form"], abs=1e-8)

    def test_sign_file_leaves_closed_form_empty(self, capsys, tmp_path):
        """Test the MABK closed form is not reported for a custom sign table."""
        path = tmp_path / "chsh.txt"
        path.write_text("1 1 1 -1\n")

        code, out, _ = invoke(
            capsys, "sweep-alpha", "--n", "3", "--steps", "2", "--sign-file", str(path)
        )

        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert [row["closed_form"] for row in rows] == ["", ""]
        for row in rows:
            assert float(row["matrix_value"]) == pytest.approx(1.0, abs=1e-9)

    def test_sign_file_closed_form_is_null_in_json(self, capsys, tmp_path):
        path = tmp_path / "chsh.txt"
        path.write_text("1 1 1 -1\n")

        code, out, _ = invoke(
            capsys, "sweep-alpha", "--n", "3", "--steps", "3", "--sign-file", str(path),
            "--format", "json",
        )

        assert code == 0
        assert all(row["closed_form"] is None for row in json.loads(out)["rows"])

    def test_requires_extended_operator(self, capsys):
        code, _, _ = invoke(capsys, "sweep-alpha", "--n", "3", "--operator", "standard")
        assert code == 2

    def test_steps_minimum(self, capsys):
        code, _, _ = invoke(capsys, "sweep-alpha", "--n", "3", "--steps", "1")
        assert code == 2


class TestLhvBoundCommand:
    """Test cases for the lhv-bound subcommand."""

    def test_holds(self, capsys):
        code, out, _ = invoke(capsys, "lhv-bound", "--n", "3")

        assert code == 0
        result = json.loads(out)
        assert list(result) == ["n", "max_value", "holds", "tight", "witness"]
        assert result["holds"] is True
        assert result["tight"] is True
        assert result["max_value"] == pytest.approx(1.0, abs=1e-12)

    def test_standard_operator(self, capsys):
        code, out, _ = invoke(capsys, "lhv-bound", "--n", "2", "--operator", "standard")

        assert code == 0
        assert json.loads(out)["max_value"] == pytest.approx(1.0, abs=1e-12)

    def test_exhaustive_cap_without_sharding(self, capsys):
        """Test nine parties need --sharded."""
        code, out, err = invoke(capsys, "lhv-bound", "--n", "9")

        assert code == 3
        assert out == ""
        assert "--sharded" in err

    def test_unexpected_error(self):
        """Test an unexpected failure maps to exit code 1."""
        config = parse_args(["lhv-bound", "--n", "3"])
        with patch("two_setting_bell.cli.verify_bound") as mock_verify:
            mock_verify.side_effect = RuntimeError("boom")
            result = run(config)

        assert result["exit_code"] == 1
        assert result["body"] == ""
        assert "boom" in result["error"]


class TestOtherCommands:
    """Test cases for max-eig, visibility and terms."""

    def test_max_eig(self, capsys):
        code, out, _ = invoke(capsys, "max-eig", "--n", "5")

        assert code == 0
        result = json.loads(out)
        assert result["max_violation"] == pytest.approx(2 * math.sqrt(2), abs=1e-9)
        assert result["method"] == "eigen"

    def test_visibility(self, capsys):
        code, out, _ = invoke(capsys, "visibility", "--n", "4")

        assert code == 0
        result = json.loads(out)
        assert result["v_thr"] == pytest.approx(0.5)
        assert result["v_thr_mabk"] == pytest.approx(0.35355, abs=1e-5)
        assert result["v_thr_two_party"] == pytest.approx(0.70711, abs=1e-5)

    def test_terms(self, capsys):
        code, out, _ = invoke(capsys, "terms", "--n", "4")

        assert code == 0
        result = json.loads(out)
        assert result["term_count"] == 10
        assert result["standard_term_count"] == 16
        assert len(result["terms"]) == 10

    def test_sign_file_matches_mabk(self, capsys, tmp_path):
        """Test a CHSH sign file reproduces the built-in three-qubit operator."""
        path = tmp_path / "chsh.txt"
        path.write_text("1 1 1 -1\n")

        _, builtin, _ = invoke(capsys, "terms", "--n", "3")
        code, custom, _ = invoke(capsys, "terms", "--n", "3", "--sign-file", str(path))

        assert code == 0
        assert json.loads(custom)["terms"] == json.loads(builtin)["terms"]
        assert "standard_term_count" not in json.loads(custom)

    def test_sign_file_party_mismatch(self, capsys, tmp_path):
        path = tmp_path / "chsh.txt"
        path.write_text("1 1 1 -1\n")

        code, _, err = invoke(capsys, "terms", "--n", "4", "--sign-file", str(path))

        assert code == 2
        assert "needs 3" in err


class TestParseArgs:
    """Test cases for flag parsing and validation."""

    def test_defaults(self, monkeypatch):
        monkeypatch.delenv("BELL_THREADS", raising=False)
        config = parse_args(["violation", "--n", "3"])

        assert config.state == "ghz"
        assert config.operator == "extended"
        assert config.starts == 32
        assert config.n_jobs == 1

    def test_thread_count_from_environment(self, monkeypatch):
        monkeypatch.setenv("BELL_THREADS", "4")
        assert parse_args(["terms", "--n", "3"]).n_jobs == 4

    def test_extended_operator_minimum(self):
        with pytest.raises(ValidationError, match=">= 3"):
            parse_args(["terms", "--n", "2"])

    def test_cluster_state_size(self):
        with pytest.raises(ValidationError, match="cluster4"):
            parse_args(["violation", "--state", "cluster4", "--n", "3"])

    def test_capacity(self):
        with pytest.raises(CapacityError):
            parse_args(["max-eig", "--n", "13"])
