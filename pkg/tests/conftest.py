import pytest

from slhash.hasher import default_table
from slhash.params import build_generators, default_params


@pytest.fixture(scope="session")
def table():
    return default_table()


@pytest.fixture(scope="session")
def gens3():
    return build_generators(default_params(3))


@pytest.fixture(scope="session")
def gens5():
    return build_generators(default_params(5))


@pytest.fixture(scope="session")
def gens11():
    return build_generators(default_params(11))


# criterion number -> (title, passed), filled in as acceptance tests report
_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    ok = _CRITERIA.get(n, (title, True))[1]
    if report.failed or (report.when == "call" and report.skipped):
        ok = False
    _CRITERIA[n] = (title, ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, ok = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}")
