import pytest

from fillscale import WorldConfig


@pytest.fixture
def world():
    return WorldConfig()


@pytest.fixture
def small_world():
    # quarter-scale world for tests that loop a lot
    return WorldConfig(width=8, height=8, vocab_size=8, patch_size=2)


def pytest_terminal_summary(terminalreporter):
    # acceptance tests queue one human-readable verdict line per criterion;
    # emitting them here keeps them visible even though pytest captures
    # stdout of passing tests
    import sys

    module = sys.modules.get("test_acceptance") or sys.modules.get(
        "tests.test_acceptance")
    lines = getattr(module, "VERDICTS", [])
    if lines:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria:")
        for line in lines:
            terminalreporter.write_line("  " + line)
