"""
Command-line tests through click's CliRunner.
"""

import json

import pytest
from click.testing import CliRunner

from src.selfnorm.cli import cli, main


@pytest.fixture
def runner(monkeypatch):
    for key in ("SELFNORM_BUDGET", "SELFNORM_PARALLEL", "SELFNORM_SEED", "SELFNORM_MAX_JOINS"):
        monkeypatch.delenv(key, raising=False)
    return CliRunner()


class TestCheck:
    """
    Test the check and witness subcommands.

    Goal: Exit codes 0 / 1 / 2 / 3 and readable reports.
    """

    def test_member(self, runner):
        """
        Test: check D:7 exits 0 and reports agreement.
        Purpose: Members exit with 0.
        """
        result = runner.invoke(cli, ["check", "D:7"])
        assert result.exit_code == 0, result.output
        assert "agreement: yes" in result.output

    def test_non_member(self, runner):
        """
        Test: check S:4 exits 1 and prints the A4 witness.
        Purpose: Non-members exit with 1.
        """
        result = runner.invoke(cli, ["check", "S:4"])
        assert result.exit_code == 1, result.output
        assert "witness: order 12 (Alt(4))" in result.output

    def test_json_format(self, runner):
        """
        Test: --format json emits a schema-1 document.
        Purpose: Machine-readable reports.
        """
        result = runner.invoke(cli, ["check", "SL:2:3", "--format", "json"])
        assert result.exit_code == 0, result.output
        payload = json.loads(result.output)
        assert payload["schema_version"] == 1
        assert payload["spec"] == "SL:2:3"
        assert payload["agreement"] is True

    def test_refusal(self, runner):
        """
        Test: check A:5 --budget 10 exits 2.
        Purpose: Brute-force refusal is its own exit code.
        """
        result = runner.invoke(cli, ["check", "A:5", "--budget", "10"])
        assert result.exit_code == 2, result.output

    def test_parse_error(self, runner):
        """
        Test: check X:1 exits 3 and names the unknown family.
        Purpose: Parse errors are usage errors.
        """
        result = runner.invoke(cli, ["check", "X:1"])
        assert result.exit_code == 3
        assert "unknown family 'X'" in result.output

    def test_witness(self, runner):
        """
        Test: witness S:4 --format json carries the census.
        Purpose: Brute-force-only reports.
        """
        result = runner.invoke(cli, ["witness", "S:4", "--format", "json"])
        assert result.exit_code == 1, result.output
        payload = json.loads(result.output)
        assert payload["census"] == {"1": 1, "2": 9, "3": 4, "4": 7, "6": 4, "8": 3, "12": 1, "24": 1}
        assert payload["witness"]["order"] == 12


class TestStar:
    """
    Test the star subcommand on the fixture files.

    Goal: Trace lines and the violator are printed.
    """

    def test_holds(self, runner, data_dir):
        """
        Test: Inversion on C3 satisfies the star property.
        Purpose: Exit 0 when the property holds.
        """
        result = runner.invoke(cli, ["star", str(data_dir / "sd" / "c3_inversion.txt")])
        assert result.exit_code == 0, result.output
        assert result.output.rstrip().endswith("holds")

    def test_violated(self, runner, data_dir):
        """
        Test: Inversion on C6 fails at K = C6.
        Purpose: The violator is listed by element index.
        """
        result = runner.invoke(cli, ["star", str(data_dir / "sd" / "c6_inversion.txt")])
        assert result.exit_code == 1, result.output
        assert "violated_by K = [0 1 2 3 4 5]" in result.output

    def test_json(self, runner, data_dir):
        """
        Test: The Q8 x| C3 fixture traces 1, Z(Q8) and Q8.
        Purpose: JSON star reports carry every trace.
        """
        result = runner.invoke(cli, ["star", str(data_dir / "sd" / "q8_c3.txt"), "--format", "json"])
        assert result.exit_code == 0, result.output
        evidence = json.loads(result.output)["verdicts"][0]["evidence"]
        assert [t["outcome"] for t in evidence["traces"]] == ["vanishes(1)", "vanishes(1)", "regenerates"]

    def test_missing_file(self, runner, tmp_path):
        """
        Test: A missing spec file exits 3.
        Purpose: File errors are usage errors.
        """
        result = runner.invoke(cli, ["star", str(tmp_path / "absent.txt")])
        assert result.exit_code == 3


class TestSweepAndCrosscheck:
    """
    Test the sweep and crosscheck subcommands.

    Goal: Row tables and aggregate exit codes.
    """

    def test_dihedral_sweep(self, runner):
        """
        Test: sweep D 3..8 exits 0 with 6 rows.
        Purpose: Family sweeps match the closed form.
        """
        result = runner.invoke(cli, ["sweep", "D", "3..8", "--format", "json"])
        assert result.exit_code == 0, result.output
        rows = json.loads(result.output)["rows"]
        assert [r["structural"] for r in rows] == [True, True, True, False, True, True]

    def test_sweep_needs_range(self, runner):
        """
        Test: sweep D without a range is a click usage error.
        Purpose: Family sweeps need a..b.
        """
        result = runner.invoke(cli, ["sweep", "D"])
        assert result.exit_code == 2

    def test_crosscheck(self, runner):
        """
        Test: crosscheck on a few specs agrees everywhere.
        Purpose: Exit 0 when both deciders agree.
        """
        result = runner.invoke(cli, ["crosscheck", "D:6", "Q:8", "A:4", "S:4"])
        assert result.exit_code == 0, result.output
        assert "4 groups, 2 accepted, 0 disagreements" in result.output

    def test_crosscheck_refusal(self, runner):
        """
        Test: A tight budget makes crosscheck exit 2.
        Purpose: Refusals are visible in the aggregate code.
        """
        result = runner.invoke(cli, ["crosscheck", "A:5", "--budget", "10"])
        assert result.exit_code == 2, result.output

    def test_crosscheck_catalog_parallel(self, runner):
        """
        Test: The default catalog gives the same rows with --parallel 4 as with --parallel 1.
        Purpose: Worker count never changes a verdict, route or row order.
        """
        outputs = []
        for workers in ("1", "4"):
            result = runner.invoke(cli, ["crosscheck", "--format", "json", "--parallel", workers])
            assert result.exit_code == 0, result.output
            rows = json.loads(result.stdout)["rows"]
            outputs.append([{k: v for k, v in r.items() if k != "timing_ms"} for r in rows])
        assert outputs[0] == outputs[1]
        assert len(outputs[0]) == 22
        assert not any(r["agreement"] is False for r in outputs[0])


class TestMain:
    """Test the main() entry point's exit mapping."""

    def test_parse_error(self):
        """
        Test: main(['check', 'X:1']) returns 3.
        Purpose: Library errors keep their code outside click's runner.
        """
        assert main(["check", "X:1"]) == 3

    def test_click_usage_maps_to_three(self):
        """
        Test: An unknown subcommand returns 3, not click's 2.
        Purpose: Usage errors share one exit code.
        """
        assert main(["frobnicate"]) == 3

    def test_member(self):
        """
        Test: main(['check', 'C:5']) returns 0.
        Purpose: Subcommand exit codes pass through main().
        """
        assert main(["check", "C:5"]) == 0
