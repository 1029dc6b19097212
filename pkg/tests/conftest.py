"""Collects acceptance-criterion outcomes and prints one line per criterion."""

import pytest

_results = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "setup" and rep.passed:
        return
    number, label = marker.args
    entry = _results.setdefault(number, {"label": label, "passed": True, "notes": []})
    ok = rep.passed or rep.skipped
    entry["passed"] &= ok
    detail = dict(item.user_properties).get("detail")
    status = "ok" if ok else "FAILED"
    entry["notes"].append(f"{item.name}: {status}" + (f" ({detail})" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_results):
        e = _results[number]
        tr.write_line(f"criterion {number:>2} {'PASS' if e['passed'] else 'FAIL'}: {e['label']}")
        for note in e["notes"]:
            tr.write_line(f"      {note}")
