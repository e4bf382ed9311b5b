from collections import OrderedDict

import pytest

# criterion number -> list of (label, value, tolerance, passed)
ACCEPTANCE = OrderedDict()


@pytest.fixture
def criterion():
    def record(number: int, label: str, value: float, tol: float, *, below: bool = True):
        passed = value < tol if below else value > tol
        ACCEPTANCE.setdefault(number, []).append((label, value, tol, passed, below))
        return passed
    return record


def _tightness(check):
    _, value, tol, passed, below = check
    if not passed:
        return float("inf")
    if below:
        return value / tol if tol else 0.0
    return tol / value if value else float("inf")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[number]
        ok = all(c[3] for c in checks)
        worst = max(checks, key=_tightness)
        label, value, tol, _, below = worst
        rel = "<" if below else ">"
        tr.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  "
                      f"({len(checks)} checks; {label}: {value:.3e} {rel} {tol:g})")
