"""Acceptance gate: every criterion at its pinned tolerance.

Each test runs one criterion from the registry shared with the CLI
``selftest`` command and prints its pass/fail line; the assertion message
carries the failing sub-checks.
"""

import pytest

from lightcone import acceptance


@pytest.mark.parametrize("criterion", acceptance.CRITERIA,
                         ids=[fn.__name__ for fn in acceptance.CRITERIA])
def test_criterion(criterion):
    result = criterion()
    print(result.line())
    failing = [f"{label}: {detail}" for label, ok, detail in result.checks
               if not ok]
    assert result.passed, (
        f"criterion {result.index} ({result.name}) failed:\n  "
        + "\n  ".join(failing))
