#!/usr/bin/env python3
"""Compare two verification reports, ignoring run-time fields"""

import json
import sys

DYNAMIC_KEYS = ('ms',)


def normalize_for_comparison(obj):
    """Remove timing fields so reports from two runs can be compared"""
    if isinstance(obj, dict):
        return {key: normalize_for_comparison(value) for key, value in obj.items() if key not in DYNAMIC_KEYS}
    elif isinstance(obj, list):
        return [normalize_for_comparison(item) for item in obj]
    else:
        return obj


def _entries(report):
    return {entry['check']: entry for entry in report.get('entries', [])}


def compare_reports(actual_path, expected_path):
    """
    Print a comparison and return True when the normalized reports are identical.

    Residuals are compared exactly: two runs with the same seed must agree bit for bit.
    """
    try:
        with open(actual_path, 'r') as f:
            actual = normalize_for_comparison(json.load(f))
        with open(expected_path, 'r') as f:
            expected = normalize_for_comparison(json.load(f))
    except FileNotFoundError as e:
        print(f"\033[91m✗ Error: {e}\033[0m")
        sys.exit(2)
    except json.JSONDecodeError as e:
        print(f"\033[91m✗ JSON Error: {e}\033[0m")
        sys.exit(2)

    print("\033[94mREPORT COMPARISON\033[0m")
    print("=" * 60)

    actual_entries, expected_entries = _entries(actual), _entries(expected)
    missing = sorted(set(expected_entries) - set(actual_entries))
    extra = sorted(set(actual_entries) - set(expected_entries))
    if missing:
        print(f"\033[91m✗ Missing checks: {', '.join(missing)}\033[0m")
    if extra:
        print(f"\033[91m✗ Extra checks: {', '.join(extra)}\033[0m")

    for check in sorted(set(actual_entries) & set(expected_entries)):
        a, e = actual_entries[check], expected_entries[check]
        if a == e:
            print(f"\033[92m✓ {check}\033[0m")
            continue
        print(f"\033[91m✗ {check}\033[0m")
        for key in sorted(set(a) | set(e)):
            if a.get(key) != e.get(key):
                print(f"    {key}: expected {e.get(key)!r}, got {a.get(key)!r}")

    if actual.get('metadata') != expected.get('metadata'):
        print("\033[93m⚠️  metadata differs\033[0m")

    same = actual == expected
    print("=" * 60)
    if same:
        print("\033[92m✓ REPORTS MATCH (ignoring timings)\033[0m")
    else:
        print("\033[93m⚠️  REPORTS DIFFER - review details above\033[0m")
    return same


if __name__ == "__main__":
    if len(sys.argv) != 3:
        print("usage: compare_output.py ACTUAL.json EXPECTED.json")
        sys.exit(2)
    sys.exit(0 if compare_reports(sys.argv[1], sys.argv[2]) else 1)
