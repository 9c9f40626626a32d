import pytest

_RESULTS = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    props = dict(rep.user_properties)
    if "criterion" in props and (rep.when == "call" or rep.outcome != "passed"):
        if rep.when == "call" or rep.failed:
            _RESULTS.append((props["criterion"], rep.outcome, props.get("measured", "")))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, measured in _RESULTS:
        status = {"passed": "PASS", "failed": "FAIL"}.get(outcome, outcome.upper())
        line = f"{status:5s} {name}"
        if measured:
            line += f"  [{measured}]"
        terminalreporter.write_line(line)
