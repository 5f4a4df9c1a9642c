import acceptance_log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = acceptance_log.drain()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
