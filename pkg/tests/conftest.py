import pytest

_VERDICTS: list[str] = []


class Verdict:
    """Records one PASS/FAIL line per acceptance criterion and asserts it."""

    def __call__(self, number: int, title: str, ok: bool, detail: str) -> None:
        line = f"[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        _VERDICTS.append(line)
        print(line)
        assert ok, line


@pytest.fixture(scope="session")
def verdict():
    return Verdict()


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS):
            terminalreporter.write_line(line)
