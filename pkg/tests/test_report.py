"""
Unit tests for report documents and row tables.
"""

import json

import pytest

from src.selfnorm.errors import ParseError, UsageError
from src.selfnorm.report import (
    SCHEMA_VERSION,
    build_report,
    describe_subgroup,
    read_report,
    without_timings,
    write_report,
    write_rows,
)
from src.selfnorm.structure import structure_profile
from src.selfnorm.sweep import SweepRow
from src.selfnorm.verdict import bruteforce_verdict, structural_verdict


@pytest.fixture(scope="module")
def sym4_report(group):
    G = group("S:4")
    return build_report("S:4", G, structure_profile(G).summary(), structural_verdict(G),
                        bruteforce_verdict(G), timings_ms={"structural": 1.23456})


@pytest.fixture(scope="module")
def dihedral_report(group):
    G = group("D:7")
    return build_report("D:7", G, structural=structural_verdict(G), bruteforce=bruteforce_verdict(G))


class TestBuildReport:
    """
    Test assembling ReportDocument from decider output.

    Goal: Verdicts, witness and splitting end up in the document.
    """

    def test_sym4_document(self, sym4_report):
        """
        Test: S4 has two rejecting verdicts, agreement and an order-12 witness.
        Purpose: A rejection report carries its evidence.
        """
        assert [v["decider"] for v in sym4_report.verdicts] == ["structural", "bruteforce"]
        assert all(v["member"] is False for v in sym4_report.verdicts)
        assert sym4_report.agreement is True
        assert sym4_report.witness["order"] == 12
        assert sym4_report.witness["normalizer_order"] == 24
        assert "Alt(4)" in sym4_report.witness["description"]
        assert sym4_report.timings_ms == {"structural": 1.235}

    def test_splitting_recorded(self, dihedral_report):
        """
        Test: D:7 records p = 2, |H| = 7 and its passing checks.
        Purpose: Soluble members document their splitting.
        """
        s = dihedral_report.splitting
        assert (s["p"], s["x_order"], s["H"]["order"]) == (2, 2, 7)
        assert dihedral_report.witness is None

    def test_refusal(self, group):
        """
        Test: A refusal becomes a bruteforce entry with member None.
        Purpose: Refusal is never reported as rejection.
        """
        G = group("A:5")
        doc = build_report("A:5", G, structural=structural_verdict(G), refusal="lattice truncated")
        assert doc.verdicts[-1] == {"decider": "bruteforce", "member": None, "route": "refused",
                                    "evidence": {"reason": "lattice truncated"}}
        assert doc.agreement is None

    def test_describe_subgroup(self, sym4_report, group):
        """
        Test: The S4 witness is described by order, name and generators.
        Purpose: Human-readable witnesses.
        """
        witness = bruteforce_verdict(group("S:4")).witness
        assert describe_subgroup(witness).startswith("order 12 (Alt(4)), generated by ")


class TestWriteReport:
    """
    Test JSON and text serialisation.

    Goal: Stable JSON that reads back; readable text.
    """

    def test_json_reads_back(self, sym4_report):
        """
        Test: write_report then read_report gives the same content.
        Purpose: Reports are reloadable.
        """
        data = write_report(sym4_report, "json")
        again = read_report(data)
        assert again.as_dict() == json.loads(data)
        assert again.spec == "S:4"

    def test_schema_version_first(self, sym4_report):
        """
        Test: The first JSON key is schema_version.
        Purpose: Fixed field order.
        """
        payload = json.loads(write_report(sym4_report, "json"))
        assert next(iter(payload)) == "schema_version"
        assert payload["schema_version"] == SCHEMA_VERSION

    def test_deterministic_without_timings(self, group):
        """
        Test: Two S4 reports with different timings agree once timings are dropped.
        Purpose: Byte-for-byte reproducibility of the decision content.
        """
        G = group("S:4")
        first = build_report("S:4", G, structural=structural_verdict(G), bruteforce=bruteforce_verdict(G),
                             timings_ms={"total": 1.0})
        second = build_report("S:4", G, structural=structural_verdict(G), bruteforce=bruteforce_verdict(G),
                              timings_ms={"total": 2.0})
        assert without_timings(first) == without_timings(second)
        assert "timings_ms" not in without_timings(first)

    def test_text_output(self, sym4_report):
        """
        Test: Text output names the group spec and the agreement.
        Purpose: Terminal rendering through rich.
        """
        text = write_report(sym4_report, "text").decode("utf-8")
        assert text.startswith("S:4  (order 24)")
        assert "agreement: yes" in text
        assert "witness: order 12" in text

    def test_unknown_format(self, sym4_report):
        """
        Test: An unknown format raises UsageError.
        Purpose: Only json and text are supported.
        """
        with pytest.raises(UsageError):
            write_report(sym4_report, "yaml")

    @pytest.mark.parametrize("data", [b"not json", b"[1, 2]", b'{"schema_version": 99}',
                                      b'{"schema_version": 1, "spec": "S:4"}'])
    def test_read_rejects(self, data):
        """
        Test: Malformed or foreign documents raise ParseError.
        Purpose: Only supported report schemas are loaded.
        """
        with pytest.raises(ParseError):
            read_report(data)


class TestWriteRows:
    """Test sweep and crosscheck row tables."""

    @pytest.fixture
    def rows(self):
        return [
            SweepRow("D:5", 10, True, True, route="soluble_split", expected=True, timing_ms=1.5),
            SweepRow("D:6", 12, False, False, route="rejected_filter(derived-in-fitting)", expected=False),
            SweepRow("A:5", 60, True, None, route="perfect_psl2", refusal="truncated"),
        ]

    def test_json_rows(self, rows):
        """
        Test: JSON rows carry agreement and refusal per group.
        Purpose: Sweeps are machine-readable.
        """
        payload = json.loads(write_rows(rows, "json", "demo"))
        assert payload["title"] == "demo"
        assert [r["agreement"] for r in payload["rows"]] == [True, True, None]
        assert payload["rows"][2]["refusal"] == "truncated"

    def test_text_rows(self, rows):
        """
        Test: The text table ends with a summary line.
        Purpose: Quick reading of sweep outcomes.
        """
        text = write_rows(rows, "text", "demo").decode("utf-8")
        assert "3 groups, 2 accepted, 0 disagreements" in text

    def test_unknown_format(self, rows):
        """
        Test: write_rows refuses unknown formats.
        Purpose: Same formats as write_report.
        """
        with pytest.raises(UsageError):
            write_rows(rows, "csv")
