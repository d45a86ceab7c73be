import pytest

_LINES = pytest.StashKey[list]()


@pytest.fixture
def ac_line(request):
    """Print an acceptance line and keep it for the end-of-run summary."""
    lines = request.config.stash.setdefault(_LINES, [])

    def emit(text):
        print(text)
        lines.append(text)

    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance")
        for text in lines:
            terminalreporter.write_line(text)
