"""Shared pytest plumbing: the acceptance-criteria summary section.

test_acceptance.py records a one-line detail string per criterion through
record(); the hooks below collect each criterion's outcome and print a
PASS/FAIL line per criterion at the end of the run, so the gate can be
read off the terminal without scrolling through the full test log.
"""

_DETAILS: dict[str, str] = {}
_OUTCOMES: dict[str, str] = {}


def record(name: str, detail: str) -> None:
    """Attach a measured-value detail line to an acceptance criterion."""
    _DETAILS[name] = detail


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _OUTCOMES[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_OUTCOMES):
        name = nodeid.split("::")[-1]
        flag = "PASS" if _OUTCOMES[nodeid] == "passed" else "FAIL"
        detail = _DETAILS.get(name, "")
        line = f"{flag}  {name}"
        if detail:
            line += f"  --  {detail}"
        terminalreporter.write_line(line)
