import pytest

CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k): acceptance criterion number k")


@pytest.fixture
def detail(request):
    """Append a line to the summary of the current acceptance criterion."""
    marker = request.node.get_closest_marker("criterion")
    lines = CRITERIA.setdefault(marker.args[0], {"lines": [], "ok": None})["lines"]

    def add(text):
        lines.append(text)
        print(text)
    return add


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    entry = CRITERIA.setdefault(marker.args[0], {"lines": [], "ok": None})
    entry["ok"] = report.passed and entry["ok"] is not False
    if report.failed:
        msg = str(call.excinfo.value).splitlines()[0] if call.excinfo else ""
        entry["lines"].append(f"failure: {msg}")


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        entry = CRITERIA[k]
        status = "PASS" if entry["ok"] else "FAIL"
        info = "; ".join(entry["lines"])
        terminalreporter.write_line(f"criterion {k}: {status}  {info}")
