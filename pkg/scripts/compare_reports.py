#!/usr/bin/env python3
"""
Compare two acceptance report directories, ignoring timing fields.

Two runs of the same suites (at any --parallel) must produce identical
reports once `timings_ms` / `timing_ms` are dropped.

Usage:
    python scripts/compare_reports.py reports/run1 reports/par4
"""

import argparse
import json
import sys
from pathlib import Path

TIMING_KEYS = {"timings_ms", "timing_ms"}


def strip_timings(value):
    """Drop timing keys at every depth."""
    if isinstance(value, dict):
        return {k: strip_timings(v) for k, v in value.items() if k not in TIMING_KEYS}
    if isinstance(value, list):
        return [strip_timings(v) for v in value]
    return value


def load(path: Path):
    with open(path, 'r', encoding='utf-8') as f:
        return strip_timings(json.load(f))


def main():
    parser = argparse.ArgumentParser(description='Compare two selfnorm report directories')
    parser.add_argument('left', help='First report directory')
    parser.add_argument('right', help='Second report directory')
    args = parser.parse_args()

    left, right = Path(args.left), Path(args.right)
    left_files = {p.name for p in left.glob('*.json')}
    right_files = {p.name for p in right.glob('*.json')}

    print(f"Comparing {left} and {right}")
    print("=" * 80)

    differences = 0
    for name in sorted(left_files ^ right_files):
        print(f"  only in one run: {name}")
        differences += 1
    for name in sorted(left_files & right_files):
        same = load(left / name) == load(right / name)
        print(f"  {name:<24} {'same' if same else 'DIFFERENT'}")
        differences += 0 if same else 1

    print("=" * 80)
    if differences:
        print(f"{differences} difference(s)")
        sys.exit(1)
    print("Reports are identical modulo timings")


if __name__ == "__main__":
    main()
