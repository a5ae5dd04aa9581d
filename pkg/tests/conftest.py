import pytest

_ACCEPTANCE = {}


class _Recorder:
    def __call__(self, number: int, title: str, passed: bool, detail: str = ""):
        passed = bool(passed)
        _ACCEPTANCE[number] = (title, passed, detail)
        line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
        print(line)
        return passed


@pytest.fixture(scope="session")
def acceptance():
    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"{number}. {'PASS' if passed else 'FAIL'}  {title}  ({detail})")
