CRITERION_LINES = []


def record_criterion(cid: str, passed: bool, detail: str) -> None:
    status = "PASS" if passed else "FAIL"
    CRITERION_LINES.append(f"[{status}] {cid}: {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERION_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in sorted(CRITERION_LINES):
        terminalreporter.write_line(line)
