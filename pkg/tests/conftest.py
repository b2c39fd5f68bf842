"""Collects acceptance outcomes and prints one verdict line per criterion."""

from collections import defaultdict

_results = defaultdict(lambda: {"title": "", "budget": None, "time": 0.0, "outcomes": []})


def pytest_runtest_logreport(report):
    mark = dict(report.user_properties).get("criterion")
    if mark is None:
        return
    number, title, budget = mark
    rec = _results[number]
    rec["title"], rec["budget"] = title, budget
    if report.when == "call" or report.outcome != "passed":
        rec["time"] += report.duration
        rec["outcomes"].append(report.outcome)


def pytest_runtest_setup(item):
    m = item.get_closest_marker("criterion")
    if m is not None:
        item.user_properties.append(("criterion", tuple(m.args)))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_results, key=lambda k: (int(str(k).rstrip('s')), str(k))):
        rec = _results[number]
        outs = rec["outcomes"]
        if outs and all(o == "skipped" for o in outs):
            verdict = "SKIP"
        elif "failed" in outs or not outs:
            verdict = "FAIL"
        elif rec["budget"] is not None and rec["time"] > rec["budget"]:
            verdict = "FAIL"  # correct but over its time budget
        else:
            verdict = "PASS"
        budget = f" (budget {rec['budget']:g}s)" if rec["budget"] is not None else ""
        tr.write_line(f"criterion {number:>4} {verdict}  {rec['time']:8.2f}s{budget}  {rec['title']}")
