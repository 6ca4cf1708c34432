"""Shared fixtures plus an acceptance-criteria summary printed after the run."""

from __future__ import annotations

import re
from pathlib import Path

import pytest

from depmetrics.treebank import Sentence, validate_tree

DATA_DIR = Path(__file__).parent / "data"

# Seven-node demo sentence: DD list (1,5,1,1,2,1) -> MDD 11/6; HD list
# (2,1,3,2,1,1) -> MHD 10/6; root out-degree 3.
DEMO7_HEADS = (2, 7, 4, 5, 7, 7, 0)


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def demo7() -> Sentence:
    return validate_tree(Sentence.from_heads(DEMO7_HEADS, id="demo7"))


def make_sentence(heads, id="s", lemmas=None) -> Sentence:
    return validate_tree(Sentence.from_heads(tuple(heads), id=id, lemmas=lemmas))


_acceptance_outcomes: dict[tuple[int, str], str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    match = re.search(r"criterion_(\d+)([a-z]?)", report.nodeid)
    if not match:
        return
    key = (int(match.group(1)), match.group(2))
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance_outcomes[key] = {
            "passed": "PASS",
            "failed": "FAIL",
            "skipped": "SKIP",
        }.get(report.outcome, report.outcome.upper())


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number, suffix in sorted(_acceptance_outcomes):
        outcome = _acceptance_outcomes[(number, suffix)]
        terminalreporter.write_line(f"criterion {number}{suffix}: {outcome}")
