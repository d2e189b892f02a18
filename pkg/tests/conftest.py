import time

import pytest

RESULTS: dict[int, tuple[str, str, float, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    detail = dict(item.user_properties).get("detail", "")
    RESULTS[number] = ("PASS" if report.passed else "FAIL", title, report.duration, detail)


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        status, title, duration, detail = RESULTS[number]
        line = f"criterion {number:2d}: {status}  {title} ({duration:.1f}s)"
        terminalreporter.write_line(f"{line}  {detail}" if detail else line)


@pytest.fixture
def detail(request):
    """Attach a measured value to the acceptance summary line."""
    def record(text: str) -> None:
        request.node.user_properties.append(("detail", text))
        print(text)
    return record


@pytest.fixture
def clock():
    start = time.perf_counter()
    return lambda: time.perf_counter() - start
