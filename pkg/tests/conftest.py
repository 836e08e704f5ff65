import numpy as np
import pytest

from pinchlab.frames import SearchConfig

_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(code, title): acceptance criterion, summarized at the end")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        detail = dict(item.user_properties).get("detail", "")
        _ACCEPTANCE.append((mark.args[0], mark.args[1], rep.outcome, rep.duration, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for code, title, outcome, dur, detail in sorted(_ACCEPTANCE, key=lambda r: int(r[0][2:])):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        extra = f" | {detail}" if detail else ""
        terminalreporter.write_line(f"{code} {verdict} ({dur:.1f}s) {title}{extra}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def fast():
    return SearchConfig(restarts=8, samples=1024, max_iters=200)


def unit_tensor(R):
    return R * (1.0 / R.norm())
