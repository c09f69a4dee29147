import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the per-criterion verdict lines after output capture ends."""
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "CRITERION_LINES", None) if mod else None
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for text in lines:
        terminalreporter.write_line(text)
