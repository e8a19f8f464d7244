import pytest

_RESULTS = []


@pytest.fixture
def criterion():
    """Record ``(number, title, passed, detail)`` and print a one-line verdict."""

    def report(number, title, passed, detail=""):
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}: {title}" + (f" ({detail})" if detail else "")
        _RESULTS.append((number, line))
        print(line)
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.write_sep("=", "acceptance criteria")
        for _, line in sorted(_RESULTS):
            terminalreporter.write_line(line)
