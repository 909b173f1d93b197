import os

import pytest

# (criterion number, title, outcome, detail) gathered from tests marked ``acceptance``
_ACCEPTANCE: dict = {}


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run optional large-size rows")


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): one acceptance criterion")
    os.environ.setdefault("XXTRANSFER_CACHE_DIR", str(config.rootpath / ".pytest_cache" / "xxtransfer"))


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="optional large-size row; use --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def measured(request):
    """Attach a one-line summary of what a criterion measured."""

    def record(text: str):
        request.node.user_properties.append(("measured", text))

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    detail = "; ".join(v for k, v in item.user_properties if k == "measured")
    _ACCEPTANCE[number] = (title, "PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, status, detail = _ACCEPTANCE[number]
        line = f"{status}  criterion {number}: {title}"
        terminalreporter.write_line(line + (f" [{detail}]" if detail else ""))
