"""Shared pytest hooks.

The acceptance tests append one summary line each to ``ACCEPTANCE_LINES``;
echoing them in the terminal footer keeps the pass/fail lines visible even
when pytest captures per-test stdout.
"""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance summary")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
