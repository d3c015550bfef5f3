import pytest

_CRITERION_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""

    def check(num: int, text: str, ok: bool, detail: str = ""):
        tail = f"  [{detail}]" if detail else ""
        line = f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {text}{tail}"
        _CRITERION_LINES.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if _CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERION_LINES:
            terminalreporter.write_line(line)
