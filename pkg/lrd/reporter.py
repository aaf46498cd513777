"""
The report directory of one experiment run.

Everything an experiment emits goes through one ``Reporter``:

    config.txt          effective configuration
    summary.csv         one row per finished split
    summary_mean.csv    means over the finished splits
    eval.csv            evaluation row per finished split
    failures.log        one line per failed split
    split_<k>/          fit logs, parameter files and plot data
"""
import logging
from pathlib import Path
from typing import Dict
from typing import Iterable
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
import pandas as pd

from .metrics import consistency_ratio
from .metrics import EVAL_FIELDS
from .network import dump_params
from .network import ModelParams
from .objectives import LOSS_FIELDS
from .training import FitResult
from .utils import format_float
from .utils import mean_rows

logger = logging.getLogger(__name__)

SUMMARY_FIELDS = ("dataset", "case", "split", "disparity", "accuracy", "A", "B", "C", "D")
MEAN_FIELDS = ("disparity", "accuracy", "A", "B", "C", "D")


def write_series(path: Path, rows: Iterable[Tuple[float, float]]) -> None:
    """Two whitespace separated columns, one point per line."""
    lines = [f"{format_float(x)} {format_float(y)}" for x, y in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def read_series(path: Path) -> List[Tuple[float, float]]:
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            x, y = line.split()
            rows.append((float(x), float(y)))
    return rows


def read_summary(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, dtype={"case": str}, keep_default_na=False)


class Reporter:
    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.summary: List[Dict[str, object]] = []
        self.evaluations: List[Dict[str, object]] = []
        self.failures: List[str] = []
        self.cm_splits: List[float] = []

    def __repr__(self) -> str:
        return f"<Reporter {self.root}>"

    def split_dir(self, split: int) -> Path:
        path = self.root / f"split_{split}"
        path.mkdir(parents=True, exist_ok=True)
        return path

    def write_config(self, text: str) -> Path:
        path = self.root / "config.txt"
        path.write_text(text)
        return path

    def write_fit_log(self, split: int, phase: str, fits: Sequence[FitResult]) -> Path:
        rows = [row for fit in fits for row in fit.log_rows()]
        path = self.split_dir(split) / f"{phase}_log.csv"
        pd.DataFrame(rows, columns=LOSS_FIELDS).to_csv(path, index=False)
        return path

    def write_params(self, split: int, name: str, params: ModelParams) -> Path:
        path = self.split_dir(split) / f"{name}.txt"
        dump_params(params, path)
        return path

    def write_series(
        self,
        split: int,
        name: str,
        rows: Iterable[Tuple[float, float]],
    ) -> Path:
        path = self.split_dir(split) / f"{name}.dat"
        write_series(path, rows)
        return path

    def write_lines(self, split: int, name: str, lines: Iterable[str]) -> Path:
        path = self.split_dir(split) / name
        path.write_text("".join(f"{line}\n" for line in lines))
        return path

    def add_split(self, summary: Dict[str, object], evaluation: Dict[str, object]) -> None:
        self.summary.append({key: summary[key] for key in SUMMARY_FIELDS})
        self.evaluations.append({key: evaluation[key] for key in EVAL_FIELDS})
        self.cm_splits.append(float(evaluation["cm"]))

    def add_failure(self, split: Optional[int], message: str) -> None:
        where = "dataset" if split is None else f"split {split}"
        first_line = message.strip().splitlines()[0] if message.strip() else "error"
        self.failures.append(f"{where}: {first_line}")
        logger.warning(f"{where} failed: {first_line}")

    def mean_row(self, cm_other: Optional[float] = None) -> Dict[str, object]:
        if not self.summary:
            return {}
        row = {
            "dataset": self.summary[0]["dataset"],
            "case": self.summary[0]["case"],
            "splits": len(self.summary),
        }
        row.update(mean_rows(self.summary, MEAN_FIELDS))
        row["cm"] = float(np.mean(self.cm_splits))
        if cm_other is not None and row["cm"] > 0:
            row["cr"] = consistency_ratio(cm_other, row["cm"])
        return row

    def finish(self, cm_other: Optional[float] = None) -> Dict[str, Path]:
        paths = {
            "summary": self.root / "summary.csv",
            "summary_mean": self.root / "summary_mean.csv",
            "eval": self.root / "eval.csv",
            "failures": self.root / "failures.log",
        }
        pd.DataFrame(self.summary, columns=SUMMARY_FIELDS).to_csv(
            paths["summary"],
            index=False,
        )
        mean = self.mean_row(cm_other)
        pd.DataFrame([mean] if mean else []).to_csv(paths["summary_mean"], index=False)
        pd.DataFrame(self.evaluations, columns=EVAL_FIELDS).to_csv(
            paths["eval"],
            index=False,
        )
        paths["failures"].write_text("".join(f"{line}\n" for line in self.failures))
        logger.info(
            f"report written to {self.root}: {len(self.summary)} splits, "
            f"{len(self.failures)} failures",
        )
        return paths
