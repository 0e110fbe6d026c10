import pytest

_ACCEPTANCE: list[tuple[int, bool, str]] = []


def report_criterion(cid: int, ok: bool, detail: str = "") -> None:
    _ACCEPTANCE.append((cid, ok, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid, ok, detail in sorted(_ACCEPTANCE):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {cid:>2}: {status}  {detail}")
