import time
from contextlib import contextmanager

import pytest

_VERDICTS: list[str] = []


class _Criterion:
    def __init__(self, number: int, title: str, limit: float):
        self.number, self.title, self.limit = number, title, limit
        self.note = ""


@contextmanager
def _run(number: int, title: str, limit: float):
    c = _Criterion(number, title, limit)
    start = time.monotonic()
    status = "FAIL"
    try:
        yield c
        status = "PASS"
    except pytest.skip.Exception as e:
        status = "SKIP"
        c.note = c.note or str(e)
        raise
    finally:
        took = time.monotonic() - start
        if status == "PASS" and took > limit:
            status = "FAIL"
            c.note = f"took {took:.1f}s, limit {limit:g}s"
        line = f"{status} criterion {number}: {title} ({took:.1f}s)"
        if c.note:
            line += f" - {c.note}"
        _VERDICTS.append(line)
        print(line)
    if took > limit:
        pytest.fail(f"criterion {number} took {took:.1f}s, limit {limit:g}s")


@pytest.fixture
def criterion():
    return _run


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
