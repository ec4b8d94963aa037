import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import acceptance_report  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if acceptance_report.LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for _, line in sorted(acceptance_report.LINES.items()):
            terminalreporter.write_line(line)
