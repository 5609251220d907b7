import pytest

_ACCEPTANCE = {}


@pytest.fixture
def measured(request):
    """Attach a short measurement string to an acceptance test's summary line."""
    notes = []
    yield notes.append
    _ACCEPTANCE.setdefault(request.node.nodeid, {})["note"] = "; ".join(notes)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    if "test_acceptance.py" not in report.nodeid:
        return
    entry = _ACCEPTANCE.setdefault(report.nodeid, {})
    entry["outcome"] = report.outcome
    entry["seconds"] = report.duration


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance")
    for nodeid, entry in _ACCEPTANCE.items():
        if "outcome" not in entry:
            continue
        name = nodeid.split("::")[-1].removeprefix("test_")
        status = "PASS" if entry["outcome"] == "passed" else "FAIL"
        note = entry.get("note", "")
        terminalreporter.write_line(f"{status}  {name:<34s} {entry['seconds']:6.2f}s  {note}")
