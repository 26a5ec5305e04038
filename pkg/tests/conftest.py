import pytest

import tlbench as tb
from tlbench.engine import TaskData

# Criterion labels, printed one per line after an acceptance run.
ACCEPTANCE_PREFIX = "test_criterion_"
_results: dict[str, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    name = item.name
    if item.module.__name__ == "test_acceptance" and name.startswith(ACCEPTANCE_PREFIX):
        _results[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_results, key=_criterion_sort_key):
        terminalreporter.write_line(f"{_results[name]}  {name}")


def _criterion_sort_key(name: str):
    tail = name[len(ACCEPTANCE_PREFIX):]
    digits = ""
    for ch in tail:
        if ch.isdigit():
            digits += ch
        else:
            break
    return (int(digits) if digits else 0, name)


@pytest.fixture(scope="session")
def tiny_pair():
    """Two small synthetic tasks with distinct sizes, shared across tests."""
    spec_a, train_a, dev_a = tb.make_synthetic_task("alpha", 300, 120, noise=0.0, seed=5)
    spec_b, train_b, dev_b = tb.make_synthetic_task("beta", 900, 120, noise=0.0, seed=6)
    return {
        "alpha": TaskData(spec_a, train_a, dev_a),
        "beta": TaskData(spec_b, train_b, dev_b),
    }
