import numpy as np
import pytest

from projlab.synthetic import gaussian_blobs


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def blobs3():
    """The 3-blob benchmark: n=300, D=10, centers 10 sigma apart."""
    return gaussian_blobs(3, 100, dim=10, separation=10.0, seed=0)


def write_csv(path, header, rows):
    path.write_text("\n".join([",".join(header)] + [",".join(map(str, r)) for r in rows]) + "\n")
    return path


_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion check")


def pytest_runtest_logreport(report):
    marks = getattr(report, "criterion", None)
    if marks is None:
        return
    number, title = marks
    entry = _criteria.setdefault(number, {"title": title, "outcomes": []})
    if report.when == "call" or report.outcome != "passed":
        entry["outcomes"].append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        outcome.get_result().criterion = tuple(mark.args)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        outs = entry["outcomes"]
        if "failed" in outs:
            verdict = "FAIL"
        elif outs and all(o == "skipped" for o in outs):
            verdict = "SKIP"
        else:
            verdict = "PASS"
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {entry['title']}")
