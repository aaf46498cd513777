import logging
import os
import traceback
from pathlib import Path
from typing import Generator
from typing import List
from typing import Sequence
from typing import Tuple

import numpy as np

logger = logging.getLogger(__name__)

# independent random streams derived from one seed
STREAM_GENERATE = 0
STREAM_SPLIT = 1
STREAM_OUTCOME = 2
STREAM_INIT = 3
STREAM_FOLDS = 4


def handle_exception(exc: Exception) -> str:
    message = f"{exc}"
    logger.error(message)
    tb = traceback.format_exc()
    logger.error(tb)
    return message


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """
    PCG64 generator for ``seed`` split into an independent ``stream``.

    >>> a = make_rng(7, STREAM_SPLIT).random()
    >>> b = make_rng(7, STREAM_SPLIT).random()
    >>> a == b
    True
    >>> a == make_rng(7, STREAM_OUTCOME).random()
    False
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *stream])))


def derive_seed(seed: int, *keys: int) -> int:
    """
    A 63-bit seed derived from ``seed`` and ``keys``.

    >>> derive_seed(0, 1) == derive_seed(0, 1)
    True
    >>> derive_seed(0, 1) == derive_seed(0, 2)
    False
    """
    state = np.random.SeedSequence([seed, *keys]).generate_state(1, dtype=np.uint64)
    return int(state[0] >> np.uint64(1))


def parse_number_list(text: str) -> List[int]:
    """
    >>> parse_number_list("1, 2,4")
    [1, 2, 4]
    >>> parse_number_list("")
    []
    """
    return [int(i) for i in text.replace(" ", "").split(",") if i]


def format_float(value: float) -> str:
    """
    Shortest round-tripping text for a float.

    >>> format_float(0.1)
    '0.1'
    >>> format_float(np.float64(2.0))
    '2.0'
    """
    return repr(float(value))


def mean_rows(rows: Sequence[dict], keys: Sequence[str]) -> dict:
    """
    >>> mean_rows([{"a": 1.0}, {"a": 2.0}], ["a"])
    {'a': 1.5}
    """
    return {key: float(np.mean([row[key] for row in rows])) for key in keys}


def walk_dir(path: Path) -> Generator[Tuple[Path, List[os.DirEntry]], None, None]:
    """
    Breadth-first walk yielding each directory with its entries.

    >>> import tempfile
    >>> with tempfile.TemporaryDirectory() as temp_dir:
    ...     root = Path(temp_dir)
    ...     (root / "split_0").mkdir()
    ...     (root / "summary.csv").touch()
    ...     (root / "split_0" / "params.txt").touch()
    ...     entries = list(walk_dir(root))
    ...     len(entries)
    2
    >>> sorted([i.name for i in entries[0][1]])
    ['split_0', 'summary.csv']
    """
    paths = [path]
    while paths:
        path = paths.pop(0)
        with os.scandir(path) as scandir_it:
            entries = sorted(scandir_it, key=lambda e: e.name)
        yield path, entries
        for entry in entries:
            if entry.is_dir():
                paths.append(path / entry.name)


def walk_files(path: Path) -> Generator[Path, None, None]:
    for root, entries in walk_dir(path):
        for p in entries:
            if not p.is_dir():
                yield root / p.name
