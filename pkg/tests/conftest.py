"""Shared fixtures and the acceptance-criteria terminal summary.

Tests marked @pytest.mark.criterion(n, "label") get one PASS/FAIL line
each at the end of the run, so the acceptance gate is readable at a
glance.
"""

import numpy as np
import pytest

from storyrank import dataset as ds
from storyrank.features import EmbeddingMatrix

from helpers import make_items


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(num, label): acceptance criterion coverage")
    config._criterion_results = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    num, label = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        item.config._criterion_results[num] = (label, report.outcome)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_criterion_results", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(results):
        label, outcome = results[num]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num:>2}: {status}  {label}")


@pytest.fixture
def tiny_project():
    items = (
        make_items([1, 2, 3, 5, 8, 13], split="train")
        + make_items([2, 3], split="validation", prefix="V")
        + make_items([1, 5, 8], split="test", prefix="T")
    )
    return ds.ProjectDataset(name="tiny", items=tuple(items))


@pytest.fixture
def identity_embeddings():
    """Factory: d-dimensional one-hot-ish embeddings for a list of items."""

    def build(items, dim=None, seed=0):
        dim = dim or max(4, len(items))
        rng = np.random.default_rng(seed)
        vectors = {it.id: rng.standard_normal(dim) for it in items}
        return EmbeddingMatrix(dim=dim, vectors=vectors)

    return build
