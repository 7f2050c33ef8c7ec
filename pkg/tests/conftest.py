import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_RESULTS: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): numbered acceptance criterion")


def pytest_runtest_setup(item):
    m = item.get_closest_marker("criterion")
    if m is not None:
        item.user_properties.append(("criterion", m.args))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or report.outcome != "passed":
        num, title = props["criterion"]
        status = "PASS" if report.outcome == "passed" else "FAIL"
        if report.when != "call" and report.outcome == "passed":
            return
        _RESULTS[num] = (status, title, props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_RESULTS):
        status, title, detail = _RESULTS[num]
        line = f"CRITERION {num:>2} {status}: {title}"
        terminalreporter.write_line(line + (f" | {detail}" if detail else ""))
