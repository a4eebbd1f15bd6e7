import re

import pytest

_RESULTS = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    crit = item.get_closest_marker("criterion")
    if crit is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    label = crit.args[0]
    detail = getattr(item, "criterion_detail", "")
    _RESULTS[label] = ("PASS" if rep.passed else "FAIL", detail)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion id")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_RESULTS, key=lambda s: (int(re.match(r"\d+", s).group()), s)):
        status, detail = _RESULTS[label]
        terminalreporter.write_line(f"criterion {label}: {status}  {detail}")


@pytest.fixture
def detail(request):
    """Attach a one-line measurement summary to the criterion report."""

    def _set(text):
        request.node.criterion_detail = text

    return _set
