"""Acceptance gate: every shipped criterion must hold, one line each.

Run with -s to see the per-criterion PASS/FAIL lines as they complete;
the same table is available from the command line via `spinlab selftest`.
"""

import pytest

from spinlab.acceptance import CRITERIA


@pytest.mark.parametrize("criterion", CRITERIA, ids=[c.name for c in CRITERIA])
def test_acceptance(criterion):
    ok, detail = criterion.run()
    print(f"{'PASS' if ok else 'FAIL'} {criterion.name}: {detail}")
    assert ok, f"{criterion.name}: {detail}"
