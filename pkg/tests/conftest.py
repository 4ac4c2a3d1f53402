"""Prints a one-line verdict per acceptance criterion after the run."""

_verdicts = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _verdicts[props["criterion"]] = ("PASS" if report.passed else "FAIL", props.get("title", ""))


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_verdicts):
        verdict, title = _verdicts[num]
        terminalreporter.write_line(f"criterion {num}: {verdict}  {title}")
