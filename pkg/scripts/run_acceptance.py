#!/usr/bin/env python3
"""
selfnorm acceptance run

Runs the acceptance suites and writes one JSON report per suite:
- dihedral: Dih(n), n = 3..64, against "n odd or a power of 2"
- perfect: the perfect and insoluble catalog groups, both deciders
- semidirect: star property against brute force over C_p x| A, |A| <= 64
- necessary: the soluble filters on every accepted soluble non-nilpotent group
- closure: subgroups and quotients of members are re-accepted
- reduction: simple groups against their maximal subgroups

Usage:
    python scripts/run_acceptance.py --out reports/run1
    python scripts/run_acceptance.py --out reports/quick --quick --suite dihedral --suite closure
    python scripts/run_acceptance.py --out reports/par4 --parallel 4
"""

import argparse
import json
import os
import sys
import time
from pathlib import Path

from dotenv import load_dotenv

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.selfnorm.catalog import build_named
from src.selfnorm.config import load_settings
from src.selfnorm.errors import BudgetRefusal, SelfnormError
from src.selfnorm.logs import configure_logging
from src.selfnorm.report import SCHEMA_VERSION, write_rows
from src.selfnorm.star import soluble_filters
from src.selfnorm.structure import is_nilpotent, is_soluble
from src.selfnorm.sweep import SweepRow, sweep_exit_code, sweep_family, sweep_semidirect
from src.selfnorm.verdict import closure_audit, cross_check, simple_maximal_reduction_check

SUITES = ("dihedral", "perfect", "semidirect", "necessary", "closure", "reduction")

PERFECT_SPECS = ["A:5", "PSL:2:4", "SL:2:5", "PSL:2:7", "SL:2:7", "S:5", "A:6", "PSL:2:8"]
CLOSURE_SPECS = ["SL:2:3", "SL:2:5", "A:5", "D:2", "D:4", "D:8", "D:16", "D:32",
                 *(f"D:{n}" for n in range(3, 16, 2))]
REDUCTION_SPECS = ["A:5", "A:6", "PSL:2:7", "PSL:2:8"]
NECESSARY_EXTRA = ["SL:2:3", "A:4", "Dic:3", "Dic:5", "S:3"]


def _write_json(out_dir: Path, suite: str, payload: dict) -> None:
    path = out_dir / f"{suite}.json"
    path.write_text(json.dumps({"schema_version": SCHEMA_VERSION, "suite": suite, **payload},
                               indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"  wrote {path}")


def _cross_rows(specs, settings):
    rows = []
    for text in specs:
        start = time.perf_counter()
        G = build_named(text)
        result = cross_check(G, settings, strict=False)
        rows.append(SweepRow(
            label=text,
            order=G.order,
            structural=result.structural.member,
            bruteforce=result.bruteforce.member if result.bruteforce is not None else None,
            route=result.structural.route_label,
            refusal=result.refusal,
            timing_ms=(time.perf_counter() - start) * 1000,
        ))
    return rows


def run_dihedral(out_dir, settings, quick):
    rows = sweep_family("D", 3, 16 if quick else 64, settings)
    (out_dir / "dihedral.json").write_bytes(write_rows(rows, "json", "dihedral"))
    return sweep_exit_code(rows) == 0


def run_perfect(out_dir, settings, quick):
    specs = [s for s in PERFECT_SPECS if not quick or s not in ("A:6", "PSL:2:8")]
    rows = _cross_rows(specs, settings)
    (out_dir / "perfect.json").write_bytes(write_rows(rows, "json", "perfect"))
    return sweep_exit_code(rows) == 0


def run_semidirect(out_dir, settings, quick, order_max, actions_cap):
    rows = sweep_semidirect(16 if quick else order_max, actions_cap=actions_cap, settings=settings)
    (out_dir / "semidirect.json").write_bytes(write_rows(rows, "json", "semidirect"))
    return sweep_exit_code(rows) == 0


def run_necessary(out_dir, settings, quick):
    specs = [f"D:{n}" for n in range(3, 17 if quick else 65)] + NECESSARY_EXTRA
    records = []
    for text in specs:
        G = build_named(text)
        if is_nilpotent(G) or not is_soluble(G):
            continue
        if not cross_check(G, settings, strict=False).structural.member:
            continue
        filters = dict(soluble_filters(G))
        records.append({"label": text, "order": G.order, "filters": {k: bool(v) for k, v in filters.items()},
                        "passed": all(filters.values())})
    _write_json(out_dir, "necessary", {"rows": records})
    return all(r["passed"] for r in records)


def run_closure(out_dir, settings, quick):
    specs = [s for s in CLOSURE_SPECS if not quick or s not in ("SL:2:5", "D:32")]
    records = []
    for text in specs:
        G = build_named(text)
        report = closure_audit(G, settings)
        records.append({"label": text, "order": G.order, "subgroups_checked": report.subgroups_checked,
                        "quotients_checked": report.quotients_checked, "failures": report.failures})
    _write_json(out_dir, "closure", {"rows": records})
    return not any(r["failures"] for r in records)


def run_reduction(out_dir, settings, quick):
    specs = [s for s in REDUCTION_SPECS if not quick or s not in ("A:6", "PSL:2:8")]
    records = []
    for text in specs:
        report = simple_maximal_reduction_check(build_named(text), settings)
        records.append({
            "label": text,
            "member": report.group_member,
            "maximal": [{"order": M.order, "member": ok} for M, ok in report.maximal_members],
            "consistent": report.consistent,
        })
    _write_json(out_dir, "reduction", {"rows": records})
    return all(r["consistent"] for r in records)


def main():
    load_dotenv()

    parser = argparse.ArgumentParser(description='Run the selfnorm acceptance suites')
    parser.add_argument('--out', required=True, help='Directory for the per-suite JSON reports')
    parser.add_argument('--suite', action='append', choices=SUITES,
                        help='Suite to run (repeatable; default: all)')
    parser.add_argument('--quick', action='store_true',
                        help='Smaller ranges; skips A6 and PSL2(8)')
    parser.add_argument('--order-max', type=int, default=64,
                        help='Largest |A| in the semidirect suite (default: 64)')
    parser.add_argument('--actions-cap', type=int, default=500,
                        help='Automorphisms sampled per (A, p) (default: 500)')
    parser.add_argument('--parallel', type=int, help='Worker count (default: SELFNORM_PARALLEL or 1)')
    parser.add_argument('--verbose', '-v', action='store_true', help='Debug logging')

    args = parser.parse_args()
    configure_logging(args.verbose)

    try:
        settings = load_settings().with_overrides(parallel=args.parallel)
    except SelfnormError as exc:
        print(f"ERROR: {exc}")
        sys.exit(3)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    runners = {
        "dihedral": lambda: run_dihedral(out_dir, settings, args.quick),
        "perfect": lambda: run_perfect(out_dir, settings, args.quick),
        "semidirect": lambda: run_semidirect(out_dir, settings, args.quick, args.order_max, args.actions_cap),
        "necessary": lambda: run_necessary(out_dir, settings, args.quick),
        "closure": lambda: run_closure(out_dir, settings, args.quick),
        "reduction": lambda: run_reduction(out_dir, settings, args.quick),
    }

    print("selfnorm acceptance")
    print("=" * 80)
    results = {}
    for suite in args.suite or SUITES:
        start = time.perf_counter()
        try:
            results[suite] = runners[suite]()
        except BudgetRefusal as exc:
            print(f"  {suite}: refused ({exc})")
            results[suite] = False
        status = "PASS" if results[suite] else "FAIL"
        print(f"{suite:<12} {status}  ({time.perf_counter() - start:.1f} s)")

    print("=" * 80)
    failed = [s for s, ok in results.items() if not ok]
    if failed:
        print(f"FAILED: {', '.join(failed)}")
        sys.exit(1)
    print("SUCCESS: all suites passed")


if __name__ == "__main__":
    main()
