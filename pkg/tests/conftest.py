import random
from fractions import Fraction

import pytest

from valsg.poly import MPoly

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _CRITERIA[n] = (title, rep.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, outcome = _CRITERIA[n]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {verdict}  {title}")


def random_xy(rng: random.Random, degree: int, nterms: int) -> MPoly:
    """Nonzero polynomial in x, y with small integer coefficients and total degree <= degree."""
    while True:
        terms = {}
        for _ in range(nterms):
            a = rng.randint(0, degree)
            b = rng.randint(0, degree - a)
            terms[(a, b)] = Fraction(rng.randint(-9, 9))
        f = MPoly(("x", "y"), terms)
        if not f.is_zero():
            return f


@pytest.fixture
def rng():
    return random.Random(12345)
