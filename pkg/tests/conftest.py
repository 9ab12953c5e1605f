import pytest

_OUTCOMES = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion check")
    config.stash[_OUTCOMES] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when == "teardown":
        return
    if report.when == "setup" and report.passed:
        return
    number, title = marker.args
    results = item.config.stash[_OUTCOMES].setdefault(number, {"title": title, "tests": []})
    results["tests"].append((item.name, report.passed))


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash[_OUTCOMES]
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        entry = results[number]
        ok = all(passed for _, passed in entry["tests"])
        failed = [name for name, passed in entry["tests"] if not passed]
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {entry['title']}"
        if failed:
            line += f"  (failing: {', '.join(failed)})"
        terminalreporter.write_line(line)
