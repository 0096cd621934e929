"""
Run reports.

A ReportDocument captures one run: the input spec, the group order, the
structure profile, every verdict produced, the brute-force witness and the
soluble splitting when there are any, and timings. JSON output keeps a fixed
field order so two runs can be compared byte for byte once `timings_ms` is
dropped; text output is rendered with rich for terminals.
"""

import io
import json
from dataclasses import dataclass, field, fields
from typing import Any, Dict, List, Optional, Sequence

from rich.console import Console
from rich.table import Table

from .config import TABLE_LIMIT
from .errors import ParseError, UsageError
from .group import FiniteGroup, SubgroupHandle
from .results import Verdict
from .star import AdTrace, Splitting, StarReport
from .verdict import identify

SCHEMA_VERSION = 1
FORMATS = ("json", "text")


@dataclass
class ReportDocument:
    """Self-contained record of one run; spec plus report reproduce it."""

    spec: str
    order: int
    profile: Dict[str, Any] = field(default_factory=dict)
    verdicts: List[Dict[str, Any]] = field(default_factory=list)
    agreement: Optional[bool] = None
    witness: Optional[Dict[str, Any]] = None
    splitting: Optional[Dict[str, Any]] = None
    census: Optional[Dict[str, int]] = None
    timings_ms: Dict[str, float] = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def as_dict(self) -> Dict[str, Any]:
        out = {"schema_version": self.schema_version}
        for f in fields(self):
            if f.name != "schema_version":
                out[f.name] = getattr(self, f.name)
        return out


# ============================================================================
# Serialising decider output
# ============================================================================

def describe_subgroup(H: SubgroupHandle) -> str:
    """Human-readable description, e.g. 'order 12 (Alt(4)), generated by (0 1 2), (0 1)(2 3)'."""
    G = H.parent
    name = identify(H.as_group()) if H.order <= TABLE_LIMIT else None
    gens = ", ".join(str(G.element(g)) for g in H.gens) or "1"
    label = f"order {H.order}"
    if name:
        label += f" ({name})"
    return f"{label}, generated by {gens}"


def subgroup_record(H: SubgroupHandle) -> Dict[str, Any]:
    return {"order": H.order, "members": [int(m) for m in H.members], "description": describe_subgroup(H)}


def splitting_record(s: Splitting) -> Dict[str, Any]:
    return {
        "p": s.p,
        "x": s.x,
        "x_order": s.x_order,
        "H": {"order": s.H.order, "members": [int(m) for m in s.H.members]},
        "checks": {name: bool(ok) for name, ok in s.checks.items()},
    }


def trace_record(t: AdTrace) -> Dict[str, Any]:
    return {"K": [int(m) for m in t.K.members], "order": t.K.order, "outcome": t.label,
            "image_orders": [len(s) for s in t.image_sets]}


def star_record(report: StarReport) -> Dict[str, Any]:
    return {
        "holds": report.holds,
        "violated_by": [int(m) for m in report.violator.members] if report.violator is not None else None,
        "traces": [trace_record(t) for t in report.traces],
    }


def _plain(value: Any) -> Any:
    if isinstance(value, Splitting):
        return splitting_record(value)
    if isinstance(value, StarReport):
        return star_record(value)
    if isinstance(value, SubgroupHandle):
        return [int(m) for m in value.members]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "item"):
        return value.item()
    return value


def verdict_record(decider: str, v: Verdict) -> Dict[str, Any]:
    return {
        "decider": decider,
        "member": v.member,
        "route": v.route_label,
        "evidence": _plain(v.evidence),
    }


def build_report(spec: str, G: FiniteGroup, profile: Optional[Dict[str, Any]] = None,
                 structural: Optional[Verdict] = None, bruteforce: Optional[Verdict] = None,
                 refusal: Optional[str] = None, census: Optional[Dict[int, int]] = None,
                 timings_ms: Optional[Dict[str, float]] = None) -> ReportDocument:
    """Assemble a ReportDocument from decider output."""
    doc = ReportDocument(spec=spec, order=G.order, profile=dict(profile or {}),
                         timings_ms={k: round(v, 3) for k, v in (timings_ms or {}).items()})
    if structural is not None:
        doc.verdicts.append(verdict_record("structural", structural))
        splitting = structural.evidence.get("splitting")
        if splitting is not None:
            doc.splitting = splitting_record(splitting)
    if bruteforce is not None:
        doc.verdicts.append(verdict_record("bruteforce", bruteforce))
        if bruteforce.witness is not None:
            doc.witness = subgroup_record(bruteforce.witness)
            doc.witness["normalizer_order"] = bruteforce.evidence.get("normalizer_order")
    elif refusal is not None:
        doc.verdicts.append({"decider": "bruteforce", "member": None, "route": "refused",
                             "evidence": {"reason": refusal}})
    if structural is not None and bruteforce is not None:
        doc.agreement = structural.member == bruteforce.member
    if census is not None:
        doc.census = {str(k): int(v) for k, v in census.items()}
    return doc


# ============================================================================
# Writing and reading
# ============================================================================

def _render_text(doc: ReportDocument) -> str:
    buffer = io.StringIO()
    console = Console(file=buffer, width=100, color_system=None, force_terminal=False,
                      markup=False, highlight=False)
    console.print(f"{doc.spec}  (order {doc.order})")
    if doc.profile:
        table = Table(title="structure", show_header=False)
        for key, value in doc.profile.items():
            table.add_row(key, str(value))
        console.print(table)
    if doc.verdicts:
        table = Table(title="verdicts")
        table.add_column("decider")
        table.add_column("member")
        table.add_column("route")
        for v in doc.verdicts:
            member = "refused" if v["member"] is None else ("yes" if v["member"] else "no")
            table.add_row(v["decider"], member, v["route"])
        console.print(table)
    else:
        console.print("no verdicts")
    if doc.agreement is not None:
        console.print(f"agreement: {'yes' if doc.agreement else 'NO'}")
    if doc.witness:
        console.print(f"witness: {doc.witness['description']}; "
                      f"normalizer order {doc.witness.get('normalizer_order')}")
    if doc.splitting:
        s = doc.splitting
        console.print(f"splitting: p={s['p']}, x={s['x']} of order {s['x_order']}, |H|={s['H']['order']}")
    if doc.census:
        console.print("census: " + ", ".join(f"{k}:{v}" for k, v in doc.census.items()))
    if doc.timings_ms:
        console.print("timings (ms): " + ", ".join(f"{k}={v}" for k, v in doc.timings_ms.items()))
    return buffer.getvalue()


def write_report(doc: ReportDocument, format: str = "json") -> bytes:
    """
    Serialise a report.

    Raises:
        UsageError: unknown format
    """
    if format == "json":
        return (json.dumps(doc.as_dict(), indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    if format == "text":
        return _render_text(doc).encode("utf-8")
    raise UsageError(f"unknown report format {format!r}; expected one of {', '.join(FORMATS)}")


def read_report(data: bytes) -> ReportDocument:
    """
    Parse a JSON report.

    Raises:
        ParseError: not JSON, or not a report of the supported schema
    """
    try:
        raw = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"report is not valid JSON: {exc}", getattr(exc, "pos", None))
    if not isinstance(raw, dict) or raw.get("schema_version") != SCHEMA_VERSION:
        raise ParseError(f"unsupported report schema (expected version {SCHEMA_VERSION})")
    known = {f.name for f in fields(ReportDocument)}
    missing = {"spec", "order"} - raw.keys()
    if missing:
        raise ParseError(f"report lacks {', '.join(sorted(missing))}")
    return ReportDocument(**{k: v for k, v in raw.items() if k in known})


def without_timings(doc: ReportDocument) -> Dict[str, Any]:
    """Report content compared for determinism."""
    out = doc.as_dict()
    out.pop("timings_ms", None)
    return out


def write_rows(rows: Sequence[Any], format: str = "json", title: str = "") -> bytes:
    """
    Serialise sweep or crosscheck rows (objects with as_dict()).

    Raises:
        UsageError: unknown format
    """
    records = [r.as_dict() for r in rows]
    if format == "json":
        payload = {"schema_version": SCHEMA_VERSION, "title": title, "rows": records}
        return (json.dumps(payload, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    if format != "text":
        raise UsageError(f"unknown report format {format!r}; expected one of {', '.join(FORMATS)}")
    buffer = io.StringIO()
    console = Console(file=buffer, width=120, color_system=None, force_terminal=False,
                      markup=False, highlight=False)
    table = Table(title=title or None)
    for column in ("group", "order", "structural", "bruteforce", "agree", "route", "ms"):
        table.add_column(column)

    def mark(value: Optional[bool]) -> str:
        return "-" if value is None else ("yes" if value else "no")

    for r in records:
        table.add_row(r["label"], str(r["order"]), mark(r["structural"]), mark(r["bruteforce"]),
                      mark(r["agreement"]), r["route"], f"{r['timing_ms']:.1f}")
    console.print(table)
    accepted = [r["label"] for r in records if r["structural"]]
    console.print(f"{len(records)} groups, {len(accepted)} accepted, "
                  f"{sum(1 for r in records if r['agreement'] is False)} disagreements")
    return buffer.getvalue().encode("utf-8")
