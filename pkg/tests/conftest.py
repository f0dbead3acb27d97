import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

_CRITERION_PREFIX = "test_criterion_"


def pytest_terminal_summary(terminalreporter):
    """Print one pass/fail line per acceptance criterion."""
    lines = {}
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            name = report.nodeid.rsplit("::", 1)[-1]
            if name.startswith(_CRITERION_PREFIX):
                label = name[len(_CRITERION_PREFIX):]
                lines[label] = "PASS" if outcome == "passed" else "FAIL"
    if lines:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria:")
        for label in sorted(lines):
            terminalreporter.write_line(f"  criterion {label}: {lines[label]}")
