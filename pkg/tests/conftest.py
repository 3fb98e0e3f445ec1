import contextlib

import pytest

_results = {}


class _Criterion:
    """Records PASS/FAIL for one acceptance criterion and prints the line."""

    def __init__(self):
        self.details = []

    def note(self, text):
        self.details.append(str(text))

    @contextlib.contextmanager
    def __call__(self, number, title):
        self.details = []
        ok = False
        try:
            yield self
            ok = True
        finally:
            line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}"
            if self.details:
                line += ": " + "; ".join(self.details)
            _results[number] = line
            print(line)


@pytest.fixture
def criterion():
    return _Criterion()


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        terminalreporter.write_line(_results[n])
