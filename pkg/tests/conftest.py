"""Shared pytest plumbing: the acceptance-criteria summary section."""

_ACCEPTANCE = []


def record_acceptance(num, ok, detail):
    """Stash one criterion outcome for the terminal summary."""
    _ACCEPTANCE.append((num, bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(_ACCEPTANCE):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line("criterion %d: %s  [%s]" % (num, status, detail))
