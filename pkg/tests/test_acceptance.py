"""One line per acceptance criterion. Failures are reported as failures, never skipped."""
import pytest

from fusioncert.claims import CLAIMS, claim_ids, reproduce

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("claim", claim_ids(), ids=lambda c: f"criterion-{CLAIMS[c][0]:02d}-{c}")
def test_criterion(claim):
    rep = reproduce(claim)
    ACCEPTANCE_LINES.append(rep.line())
    print()
    print(rep.line())
    for c in rep.checks:
        print(f"    {'ok ' if c.ok else 'BAD'} {c.name} [{c.provenance}] expected {c.expected}; computed {c.computed}")
    if rep.error:
        print(f"    error: {rep.error}")
    assert rep.passed, rep.line()
