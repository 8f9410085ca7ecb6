import re

CRITERIA = {
    1: "defect projection",
    2: "fundamental pair",
    3: "norm formula for V1 and V2",
    4: "isometry suite",
    5: "dilation property on random monomials",
    6: "commutator obstruction gap",
    7: "adjoint suite",
    8: "Toeplitz form, forward direction",
    9: "Toeplitz form, reverse direction",
    10: "commutant of T_{z^2}",
    11: "Xi = 0 reduction",
    12: "tetrablock membership oracle",
}

_PAT = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter):
    seen: dict = {}
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            m = _PAT.search(getattr(rep, "nodeid", ""))
            if not m or getattr(rep, "when", "call") not in ("call", "setup"):
                continue
            k = int(m.group(1))
            ok = status == "passed"
            seen[k] = seen.get(k, True) and ok
    if not seen:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        if k in seen:
            mark = "PASS" if seen[k] else "FAIL"
        else:
            mark = "NOT RUN"
        terminalreporter.write_line(f"criterion {k:2d}: {mark:7s} {CRITERIA[k]}")
