import pytest

_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the verdict follows the test outcome."""
    state = {}

    def record(number, text):
        state["number"], state["text"] = number, text

    yield record
    if "number" in state:
        rep = getattr(request.node, "rep_call", None)
        ok = rep is not None and rep.passed
        line = f"{'PASS' if ok else 'FAIL'} criterion {state['number']:>2}: {state['text']}"
        _ACCEPTANCE[state["number"]] = line
        print("\n" + line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[k])
