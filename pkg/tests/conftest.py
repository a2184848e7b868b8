import pytest

_LOG_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LOG_KEY] = []


@pytest.fixture
def acceptance_log(request):
    """Append one result line per acceptance criterion; lines are echoed in the terminal summary."""
    return request.config.stash[_LOG_KEY].append


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LOG_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
