"""One test per acceptance criterion.

Each runs the matching check of the reference-example suite from cold caches,
prints a single PASS/FAIL line with its timing and asserts both the verdict
and the time budget.
"""

import pytest

from fibgen.suite import CHECKS, run_suite

CRITERIA = [
    (1, "split-not-skeletal"),
    (2, "delooping"),
    (3, "skeleton"),
    (4, "weak-to-split"),
    (5, "strength-diagram"),
    (6, "rlp"),
    (7, "stack-completion"),
    (8, "foundations"),
    (9, "preorder-coincidence"),
]
LIMITS = {anchor: limit for anchor, _, limit, _ in CHECKS}


@pytest.mark.parametrize("number,anchor", CRITERIA, ids=[a for _, a in CRITERIA])
def test_criterion(number, anchor):
    (result,) = run_suite([anchor])
    status = "PASS" if result.passed else "FAIL"
    print(f"\n{status} criterion {number} [{anchor}] {result.seconds:.2f}s (limit {LIMITS[anchor]:.0f}s)")
    assert result.passed, result.details
    assert result.seconds < LIMITS[anchor]
