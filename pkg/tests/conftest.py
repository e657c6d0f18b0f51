import sys


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(acceptance.RESULTS):
        terminalreporter.write_line(acceptance.RESULTS[k])
    if 8 not in acceptance.RESULTS:
        terminalreporter.write_line("criterion 8: SKIP  extended run; set RELFRAME_EXTENDED=1")
