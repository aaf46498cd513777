import pandas as pd
import pytest

from ..reporter import read_series
from ..reporter import read_summary
from ..reporter import Reporter
from ..reporter import SUMMARY_FIELDS
from ..reporter import write_series


def summary_row(split: int, disparity: float, accuracy: float):
    return {
        "dataset": "german.csv",
        "case": "I",
        "split": split,
        "disparity": disparity,
        "accuracy": accuracy,
        "A": disparity,
        "B": 2.0,
        "C": 0.5,
        "D": 0.6,
    }


def eval_row(split: int, cm: float):
    return {
        "dataset": "german.csv",
        "case": "I",
        "split": split,
        "disparity": 0.0,
        "accuracy": 0.0,
        "cm": cm,
        "mean_y_s1": 0.5,
        "mean_y_s0": 0.5,
        "logit_shift": 0.1,
    }


def test_series(tmp_path):
    path = tmp_path / "curve.dat"
    write_series(path, [(1, 0.1), (10, 1 / 3)])
    assert path.read_text().splitlines()[0] == "1.0 0.1"
    assert read_series(path) == [(1.0, 0.1), (10.0, 1 / 3)]


def test_finish(tmp_path):
    reporter = Reporter(tmp_path / "report")
    reporter.add_split(summary_row(0, 0.1, 0.7), eval_row(0, 0.002))
    reporter.add_split(summary_row(2, 0.3, 0.8), eval_row(2, 0.004))
    reporter.add_failure(1, "SplitError: no split kept both groups\nTraceback ...")
    paths = reporter.finish(cm_other=0.2008)

    summary = read_summary(paths["summary"])
    assert tuple(summary.columns) == SUMMARY_FIELDS
    assert list(summary["case"]) == ["I", "I"]
    mean = pd.read_csv(paths["summary_mean"])
    assert mean["splits"][0] == 2
    assert mean["disparity"][0] == pytest.approx(0.2)
    assert mean["accuracy"][0] == pytest.approx(0.75)
    assert mean["cm"][0] == pytest.approx(0.003)
    assert mean["cr"][0] == pytest.approx(0.2008 / 0.003)
    assert paths["failures"].read_text() == "split 1: SplitError: no split kept both groups\n"
    assert len(pd.read_csv(paths["eval"])) == 2


def test_finish_without_splits(tmp_path):
    reporter = Reporter(tmp_path / "empty")
    reporter.add_failure(None, "")
    paths = reporter.finish()
    assert paths["failures"].read_text() == "dataset: error\n"
    assert read_summary(paths["summary"]).empty
