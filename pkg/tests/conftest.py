"""Shared pytest plumbing: the acceptance-criteria report."""

_ACCEPTANCE_LINES: list[str] = []


def record_criterion(name: str, ok: bool, detail: str) -> None:
    """Collect one pass/fail line per acceptance criterion and enforce it."""
    line = f"{'PASS' if ok else 'FAIL'}  {name}  [{detail}]"
    _ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
