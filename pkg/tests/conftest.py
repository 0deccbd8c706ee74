import pytest

_VERDICTS = {}


@pytest.fixture
def verdict():
    """Record a criterion outcome, print it, then assert it.

    ``verdict("C3", ok, "slope 1.998")`` stores one PASS/FAIL line that is
    repeated in the terminal summary.
    """
    def record(cid, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {cid} {detail}"
        _VERDICTS[cid] = line
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_VERDICTS, key=lambda c: int(c[1:])):
        terminalreporter.write_line(_VERDICTS[cid])
