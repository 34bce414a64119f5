import pytest

# criterion number -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}

CRITERIA = {
    1: "oracle equivalence, simple factors",
    2: "oracle equivalence, repeated factor",
    3: "non-existence certificate for plain nodes",
    4: "resolvent identities",
    5: "kernel relation",
    6: "structural suite",
    7: "counting and bounds suite",
    8: "node-choice independence",
    9: "CLI determinism",
}


@pytest.fixture
def record_criterion():
    def record(n: int, passed: bool, detail: str = "") -> None:
        ACCEPTANCE[n] = (bool(passed), detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, name in CRITERIA.items():
        if n in ACCEPTANCE:
            ok, detail = ACCEPTANCE[n]
            status = "PASS" if ok else "FAIL"
        else:
            status, detail = "FAIL", "not run"
        terminalreporter.write_line(f"criterion {n} [{status}] {name}: {detail}")
