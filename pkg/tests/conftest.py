import pytest

from perturb_repair.corpus import load_seed_programs
from perturb_repair.lang.printer import pretty_print

VERDICTS = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def seeds():
    return load_seed_programs()


@pytest.fixture(scope="session")
def seed_sources(seeds):
    return {k: pretty_print(p) for k, p in seeds.items()}


# Acceptance criteria: tests marked `criterion(n, title)` get one verdict line
# in the terminal summary; `record_property("detail", ...)` adds the numbers.

def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config.stash[VERDICTS] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or not (rep.when == "call" or (rep.when == "setup" and not rep.passed)):
        return
    number, title = marker.args
    verdict = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
    detail = dict(item.user_properties).get("detail")
    line = f"criterion {number:>2} {verdict}  {title}" + (f" ({detail})" if detail else "")
    item.config.stash[VERDICTS].append((number, line))


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
