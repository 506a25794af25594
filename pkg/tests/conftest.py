import re

_CRITERION = re.compile(r"test_acceptance\.py::test_c(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion, whatever the verbosity."""
    lines = {}
    for outcome in ("passed", "failed", "skipped", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = _CRITERION.search(getattr(rep, "nodeid", "") or "")
            if not m:
                continue
            num, name = int(m.group(1)), m.group(2).replace("_", " ")
            # worst outcome wins; the first test name labels the criterion
            prev_name, prev = lines.get(num, (name, None))
            if prev in ("failed", "error") or (prev == "passed" and outcome == "skipped"):
                outcome = prev
            lines[num] = (prev_name, outcome)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(lines):
        name, outcome = lines[num]
        label = {"passed": "PASS", "skipped": "SKIP"}.get(outcome, "FAIL")
        terminalreporter.write_line(f"criterion {num:2d} {label:4s} {name}")
