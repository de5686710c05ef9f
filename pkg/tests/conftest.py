import pytest


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(name): acceptance criterion label")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call":
        marker = item.get_closest_marker("criterion")
        if marker:
            status = "PASS" if report.passed else "FAIL"
            line = f"[ACCEPTANCE {status}] {marker.args[0]}"
            try:
                item.config.get_terminal_writer().line("\n" + line)
            except Exception:
                print(line)
