import pytest

_ACCEPTANCE_LINES: list[str] = []


class Verdict:
    """Prints and records one pass/fail line per acceptance criterion."""

    def __call__(self, number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'} | {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        return ok


@pytest.fixture
def verdict():
    return Verdict()


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
