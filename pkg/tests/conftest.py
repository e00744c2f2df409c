import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_results: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    number, title = props["criterion"]
    _results[number] = ("PASS" if report.passed else "FAIL", title, props.get("measured", ""))


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.user_properties.append(("criterion", tuple(m.args)))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        status, title, measured = _results[number]
        line = f"criterion {number}: {status}  {title}"
        terminalreporter.write_line(line + (f" | {measured}" if measured else ""))
