import pytest

from manetids.config import ScenarioConfig


def chain(n, spacing=100.0, range_=120.0, **kw):
    """Nodes 0..n-1 on a line, each adjacent only to its direct neighbours."""
    positions = tuple((10.0 + i * spacing, 250.0) for i in range(n))
    kw.setdefault("source", 0)
    kw.setdefault("destination", n - 1)
    return ScenarioConfig(positions=positions, range=range_, **kw)


@pytest.fixture
def fast():
    """Short timeouts so detection happens within a few dozen packets."""
    return dict(baseline_loss=0.0, forward_timeout=1.0, ack_timeout=1.0, segment_timeout=1.0,
                drain=1.0)


# criterion number -> (passed, detail); filled in by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
