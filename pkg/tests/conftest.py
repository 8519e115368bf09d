import pytest

from cosrays.cosine import CosineMap, disjoint_type_scale

_REPORT: list[str] = []


def record(criterion: int, ok: bool, detail: str) -> None:
    _REPORT.append(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion:2d}: {detail}")


@pytest.fixture(scope="session")
def report():
    return record


@pytest.fixture(scope="session")
def nm_cosh():
    return disjoint_type_scale(CosineMap(0.5, 0.5))


@pytest.fixture(scope="session")
def nm_asym():
    return disjoint_type_scale(CosineMap(2.0, 0.5j))


def pytest_terminal_summary(terminalreporter):
    if not _REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_REPORT, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
        terminalreporter.write_line(line)
