from __future__ import annotations

import sys
from pathlib import Path

# Shared fixture helpers live beside the tests.
sys.path.insert(0, str(Path(__file__).parent))


def pytest_runtest_logreport(report):
    """One visible PASS/FAIL line per acceptance criterion."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.passed:
        print(f"\nACCEPTANCE PASS {name}")
    elif report.failed:
        print(f"\nACCEPTANCE FAIL {name}")
    elif report.skipped:
        print(f"\nACCEPTANCE SKIP {name}")
