"""Acceptance gate: every numbered criterion at its stated tolerance.

One test per criterion; each prints its pass/fail line (visible with -s or
on failure). Criterion 6 checks a refinement property that the underlying
conservation claim does not support for the pinned problem - the measured
drift plateaus at an O(0.5) value confirmed by two independent solvers - so
it fails honestly rather than being weakened; see the analysis notes shipped
with the review materials.
"""

import pytest

from fracvar.acceptance import CRITERIA, run_criterion


@pytest.fixture(scope="module")
def shared_cache():
    return {}


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{f._criterion[0]:02d}" for f in CRITERIA])
def test_acceptance_criterion(criterion, shared_cache):
    result = run_criterion(criterion, shared_cache)
    print(result.line())
    assert result.within_budget, (
        f"criterion {result.index} exceeded its runtime budget: "
        f"{result.seconds:.2f}s > {result.budget:.0f}s"
    )
    assert result.passed, result.line()
