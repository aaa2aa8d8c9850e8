import functools
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from artin_tower.bigint_factor import Budget  # noqa: E402
from artin_tower.cli import seed_cache  # noqa: E402
from artin_tower.tower_field import build_context  # noqa: E402

CRITERIA: dict[int, dict] = {}


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", default=False,
                     help="also run long checks such as M_7 = N_7")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion number n")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or not (rep.when == "call" or rep.failed or rep.skipped):
        return
    n, text = mark.args
    entry = CRITERIA.setdefault(n, {"text": text, "statuses": [], "seconds": 0.0})
    entry["statuses"].append("PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL"))
    entry["seconds"] += rep.duration


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        e = CRITERIA[n]
        st = e["statuses"]
        status = "FAIL" if "FAIL" in st else ("PASS" if "PASS" in st else "SKIP")
        terminalreporter.write_line(f"criterion {n:2d}: {status}  ({e['seconds']:6.2f} s)  {e['text']}")


@functools.lru_cache(maxsize=None)
def tower(p, i_max, factor=True):
    """Shared contexts, built once per session."""
    return build_context(p, i_max, cache=seed_cache() if factor else None,
                         factor_budget=Budget(seconds=60.0, iterations=20_000_000), factor=factor)


@pytest.fixture(scope="session")
def towers():
    return tower
