"""
Datasets: synthetic generators, outcome injection, raw-table preprocessing
and the canonical ``S,X_1..X_n,H,Y`` CSV format.
"""
import logging
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from enum import Enum
from itertools import product
from pathlib import Path
from typing import Dict
from typing import Iterator
from typing import List
from typing import Optional
from typing import Tuple

import numpy as np
import pandas as pd

from .utils import make_rng
from .utils import STREAM_GENERATE
from .utils import STREAM_OUTCOME
from .utils import STREAM_SPLIT

logger = logging.getLogger(__name__)

SPLIT_REDRAWS = 10
MISSING_VALUES = ["?", ""]


class SchemaError(ValueError):
    pass


class OutcomeRangeError(ValueError):
    pass


class SplitError(ValueError):
    pass


def _binary(name: str, values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if np.any((values != 0) & (values != 1)):
        raise ValueError(f"column {name} must only contain 0 and 1")
    return values


@dataclass
class Dataset:
    s: np.ndarray
    x: np.ndarray
    h: np.ndarray
    y: np.ndarray
    feature_names: List[str] = field(default_factory=list)
    sensitive_name: str = "S"
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        self.s = _binary("S", self.s)
        self.h = _binary("H", self.h)
        self.y = _binary("Y", self.y)
        self.x = np.asarray(self.x, dtype=np.float64)
        if self.x.ndim != 2:
            self.x = self.x.reshape(len(self.s), -1)
        _binary("X", self.x)
        n = len(self.s)
        if not len(self.h) == len(self.y) == self.x.shape[0] == n:
            raise ValueError("S, X, H and Y must have the same number of rows")
        if not self.feature_names:
            self.feature_names = [f"X_{i + 1}" for i in range(self.x.shape[1])]
        if len(self.feature_names) != self.x.shape[1]:
            raise ValueError(
                f"{len(self.feature_names)} feature names for "
                f"{self.x.shape[1]} feature columns",
            )
        if self.weights is None:
            self.weights = np.ones(n)
        self.weights = np.asarray(self.weights, dtype=np.float64)

    def __repr__(self) -> str:
        return (
            f"<Dataset rows={self.n_rows} features={self.n_features} "
            f"weight={self.weights.sum():g}>"
        )

    @property
    def n_rows(self) -> int:
        return len(self.s)

    @property
    def n_features(self) -> int:
        return self.x.shape[1]

    def design(self) -> np.ndarray:
        return np.column_stack([self.s, self.x])

    def has_both_groups(self) -> bool:
        present = self.s[self.weights > 0]
        return bool(np.any(present == 0) and np.any(present == 1))

    def group_rate(self, values: np.ndarray, group: int) -> float:
        """Weighted mean of ``values`` over the rows with ``S == group``."""
        weights = self.weights * (self.s == group)
        if weights.sum() <= 0:
            raise ValueError(f"dataset has no rows with S={group}")
        return float((values * weights).sum() / weights.sum())

    def decision_gap(self) -> float:
        """``Pr(H=1 | S=1) - Pr(H=1 | S=0)``."""
        return self.group_rate(self.h, 1) - self.group_rate(self.h, 0)

    def outcome_gap(self) -> float:
        return self.group_rate(self.y, 1) - self.group_rate(self.y, 0)

    def subset(self, index: np.ndarray) -> "Dataset":
        return replace(
            self,
            s=self.s[index],
            x=self.x[index],
            h=self.h[index],
            y=self.y[index],
            weights=self.weights[index],
        )

    def with_outcome(self, y: np.ndarray) -> "Dataset":
        return replace(self, y=y)

    def compress(self) -> "Dataset":
        """Merge identical rows, carrying their multiplicity as weights."""
        table = np.column_stack([self.s, self.x, self.h, self.y])
        unique, inverse = np.unique(table, axis=0, return_inverse=True)
        weights = np.bincount(inverse.ravel(), weights=self.weights)
        k = self.n_features
        return replace(
            self,
            s=unique[:, 0],
            x=unique[:, 1 : 1 + k],
            h=unique[:, 1 + k],
            y=unique[:, 2 + k],
            weights=weights,
        )

    def to_frame(self) -> pd.DataFrame:
        if np.any(self.weights != 1):
            raise ValueError("weighted datasets have no row-level table")
        columns = {"S": self.s}
        for i in range(self.n_features):
            columns[f"X_{i + 1}"] = self.x[:, i]
        columns["H"] = self.h
        columns["Y"] = self.y
        return pd.DataFrame(columns).astype(np.int8)


def write_canonical_csv(dataset: Dataset, path: Path) -> None:
    path = Path(path)
    dataset.to_frame().to_csv(path, index=False)
    features_path(path).write_text("\n".join(dataset.feature_names) + "\n")


def features_path(path: Path) -> Path:
    return path.with_name(f"{path.stem}.features.txt")


def read_canonical_csv(path: Path) -> Dataset:
    path = Path(path)
    frame = pd.read_csv(path)
    columns = list(frame.columns)
    n_features = len(columns) - 3
    expected = ["S"] + [f"X_{i + 1}" for i in range(n_features)] + ["H", "Y"]
    if columns != expected:
        raise SchemaError(f"{path} is not a canonical dataset, header: {columns}")
    names = None
    if features_path(path).exists():
        names = features_path(path).read_text().splitlines()
        if len(names) != n_features:
            logger.warning(f"ignoring {features_path(path)}: wrong number of names")
            names = None
    return Dataset(
        s=frame["S"].to_numpy(),
        x=frame[expected[1:-2]].to_numpy().reshape(len(frame), n_features),
        h=frame["H"].to_numpy(),
        y=frame["Y"].to_numpy(),
        feature_names=names or [],
    )


@dataclass(frozen=True)
class GeneratorSpec:
    """
    Bernoulli tables of a synthetic population.

    ``decision_rates`` maps ``(s, x)`` to ``Pr(H=1)``; ``outcome_rates`` maps
    ``(s, x, h)`` to ``Pr(Y=1)``. ``x`` is a tuple of 0/1 features drawn
    independently with ``p_features``.
    """

    name: str
    p_sensitive: float
    p_features: Tuple[float, ...]
    decision_rates: Dict[Tuple[int, Tuple[int, ...]], float]
    outcome_rates: Dict[Tuple[int, Tuple[int, ...], int], float]

    def lattice(self) -> Iterator[Tuple[int, Tuple[int, ...], float]]:
        """Every ``(s, x)`` cell with its probability."""
        for s in (0, 1):
            p_s = self.p_sensitive if s else 1 - self.p_sensitive
            for x in product((0, 1), repeat=len(self.p_features)):
                p_x = np.prod([p if v else 1 - p for v, p in zip(x, self.p_features)])
                yield s, x, float(p_s * p_x)


THM42_OUTCOME = {(0, 0): 0.3, (0, 1): 0.8, (1, 0): 0.2, (1, 1): 0.6}

THM42_SPEC = GeneratorSpec(
    name="thm42",
    p_sensitive=0.5,
    p_features=(0.5,),
    decision_rates={(s, (x,)): (0.6, 0.3)[s] for s in (0, 1) for x in (0, 1)},
    outcome_rates={
        (s, (x,), h): THM42_OUTCOME[(x, h)]
        for s in (0, 1)
        for x in (0, 1)
        for h in (0, 1)
    },
)

THM43_SPEC = GeneratorSpec(
    name="thm43",
    p_sensitive=0.5,
    p_features=(),
    decision_rates={(0, ()): 0.01, (1, ()): 0.6},
    outcome_rates={(s, (), h): float(h) for s in (0, 1) for h in (0, 1)},
)

GENERATORS = {spec.name: spec for spec in (THM42_SPEC, THM43_SPEC)}


def generate(spec: GeneratorSpec, n: int, seed: int) -> Dataset:
    if n < 1:
        raise ValueError(f"need at least one row, got n={n}")
    rng = make_rng(seed, STREAM_GENERATE)
    k = len(spec.p_features)
    s = (rng.random(n) < spec.p_sensitive).astype(np.float64)
    x = (rng.random((n, k)) < np.asarray(spec.p_features)).astype(np.float64)
    p_h = np.zeros(n)
    for (cell_s, cell_x), rate in spec.decision_rates.items():
        p_h[_cell(s, x, cell_s, cell_x)] = rate
    h = (rng.random(n) < p_h).astype(np.float64)
    p_y = np.zeros(n)
    for (cell_s, cell_x, cell_h), rate in spec.outcome_rates.items():
        p_y[_cell(s, x, cell_s, cell_x) & (h == cell_h)] = rate
    y = (rng.random(n) < p_y).astype(np.float64)
    logger.info(f"generated {n} rows from {spec.name} with seed {seed}")
    return Dataset(s=s, x=x, h=h, y=y)


def _cell(s: np.ndarray, x: np.ndarray, cell_s: int, cell_x: Tuple[int, ...]):
    return (s == cell_s) & np.all(x == np.asarray(cell_x, dtype=np.float64), axis=1)


def gen_thm42_data(n: int, seed: int) -> Dataset:
    return generate(THM42_SPEC, n, seed)


def gen_thm43_data(n: int, seed: int) -> Dataset:
    return generate(THM43_SPEC, n, seed)


class Case(str, Enum):
    I = "I"  # noqa: E741
    II = "II"
    III = "III"
    IV = "IV"
    V = "V"


# b as a multiple of a·c
CASE_FACTORS = {Case.I: 1.0, Case.II: -0.5, Case.III: -1.0, Case.IV: -1.5}
BASE_OUTCOME_RATE = 0.3


@dataclass(frozen=True)
class OutcomeCaseConfig:
    case: Case
    a_param: float = 0.6
    b_param: Optional[float] = None
    c_param: Optional[float] = None
    clip: Optional[float] = None

    @property
    def resolved(self) -> bool:
        return self.b_param is not None and self.c_param is not None

    def resolve(self, dataset: Dataset) -> "OutcomeCaseConfig":
        """Measure ``c`` on ``dataset`` and derive ``b`` for the case."""
        c = dataset.decision_gap()
        if self.case == Case.V:
            return replace(self, a_param=1.0, b_param=0.0, c_param=c)
        b = CASE_FACTORS[self.case] * self.a_param * c
        low, high = self._offset_bounds()
        sign = 1.0 if c >= 0 else -1.0
        offset = sign * b
        if not low <= offset <= high:
            if self.clip is None:
                raise OutcomeRangeError(
                    f"case {self.case.value}: b={b:.4f} pushes outcome rates "
                    "outside [0, 1]; configure clip to bound it",
                )
            offset = min(max(offset, low), high)
            logger.warning(
                f"case {self.case.value}: b clipped from {b:.4f} to {sign * offset:.4f}",
            )
            b = sign * offset
        return replace(self, b_param=b, c_param=c)

    def _offset_bounds(self) -> Tuple[float, float]:
        high_rate = BASE_OUTCOME_RATE + self.a_param
        upper = 1.0 if self.clip is None else self.clip
        return -BASE_OUTCOME_RATE, upper - high_rate

    def table(self) -> Dict[Tuple[int, int], float]:
        """
        ``Pr(Y=1 | S=s, H=h)`` keyed by ``(s, h)``.

        >>> OutcomeCaseConfig(Case.I, b_param=0.05, c_param=0.1).table()
        {(0, 0): 0.3, (0, 1): 0.9, (1, 0): 0.35, (1, 1): 0.95}
        """
        if not self.resolved:
            raise ValueError("resolve the outcome case against a dataset first")
        if self.case == Case.V:
            return {(s, h): float(h) for s in (0, 1) for h in (0, 1)}
        base = (BASE_OUTCOME_RATE, round(BASE_OUTCOME_RATE + self.a_param, 12))
        if self.c_param >= 0:
            shifted = {0: 0.0, 1: self.b_param}
        else:
            shifted = {0: -self.b_param, 1: 0.0}
        table = {
            (s, h): round(base[h] + shifted[s], 12) for s in (0, 1) for h in (0, 1)
        }
        for key, rate in table.items():
            if not 0.0 <= rate <= 1.0:
                raise OutcomeRangeError(f"outcome rate {rate} for (s, h)={key}")
        return table


def inject_outcome(
    dataset: Dataset,
    config: OutcomeCaseConfig,
    seed: int,
) -> Dataset:
    """Redraw ``Y`` from the case's outcome table; ``S``, ``X``, ``H`` are kept."""
    if not config.resolved:
        config = config.resolve(dataset)
    table = config.table()
    p_y = np.zeros(dataset.n_rows)
    for (s, h), rate in table.items():
        p_y[(dataset.s == s) & (dataset.h == h)] = rate
    rng = make_rng(seed, STREAM_OUTCOME)
    y = (rng.random(dataset.n_rows) < p_y).astype(np.float64)
    logger.info(
        f"case {config.case.value}: a={config.a_param} b={config.b_param:.4f} "
        f"c={config.c_param:.4f}",
    )
    return dataset.with_outcome(y)


def split(dataset: Dataset, train_fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
    if not 0 < train_fraction < 1:
        raise SplitError(f"train fraction must be in (0, 1), got {train_fraction}")
    n = dataset.n_rows
    n_train = int(np.floor(n * train_fraction + 0.5))
    if not 0 < n_train < n:
        raise SplitError(f"cannot split {n} rows with fraction {train_fraction}")
    rng = make_rng(seed, STREAM_SPLIT)
    for attempt in range(SPLIT_REDRAWS):
        order = rng.permutation(n)
        train = dataset.subset(order[:n_train])
        test = dataset.subset(order[n_train:])
        if train.has_both_groups() and test.has_both_groups():
            return train, test
        logger.info(f"split attempt {attempt + 1} lost a group, redrawing")
    raise SplitError(
        f"no split of {n} rows kept both groups in {SPLIT_REDRAWS} attempts",
    )


class ColumnKind(str, Enum):
    CATEGORICAL = "categorical"
    NUMERIC = "numeric"
    BINARY = "binary"
    SENSITIVE = "sensitive"
    TARGET = "target"
    OUTCOME = "outcome"
    DROP = "drop"
    FILTER = "filter"


FEATURE_KINDS = (ColumnKind.CATEGORICAL, ColumnKind.NUMERIC, ColumnKind.BINARY)
DERIVED_RULES = ("none_of:", "any_of:")
# schema line naming every column no other line mentions
WILDCARD = "*"


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: ColumnKind
    rule: str = ""

    @property
    def derived(self) -> bool:
        return self.rule.startswith(DERIVED_RULES)

    def inputs(self) -> List[str]:
        if self.derived:
            return self.rule.split(":", 1)[1].split("|")
        return [self.name]


@dataclass(frozen=True)
class Schema:
    columns: Tuple[ColumnSpec, ...]

    @classmethod
    def parse(cls, text: str) -> "Schema":
        """
        >>> schema = Schema.parse("sex, sensitive, ==Female\\nage, numeric\\n"
        ...                       "income, target, in:>50K|>50K.")
        >>> [c.kind.value for c in schema.columns]
        ['sensitive', 'numeric', 'target']
        """
        columns = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",", 2)]
            if len(parts) < 2:
                raise SchemaError(f"schema line {lineno} needs name and kind: {line}")
            try:
                kind = ColumnKind(parts[1])
            except ValueError:
                raise SchemaError(f"unknown column kind {parts[1]!r} on line {lineno}")
            rule = parts[2] if len(parts) > 2 else ""
            if kind in (ColumnKind.SENSITIVE, ColumnKind.TARGET, ColumnKind.FILTER):
                if not rule:
                    raise SchemaError(f"{kind.value} column {parts[0]} needs a rule")
            if parts[0] == WILDCARD and kind not in FEATURE_KINDS + (ColumnKind.DROP,):
                raise SchemaError(f"wildcard line {lineno} must be a feature or drop column")
            columns.append(ColumnSpec(parts[0], kind, rule))
        schema = cls(tuple(columns))
        schema.validate()
        return schema

    def validate(self) -> None:
        for kind in (ColumnKind.SENSITIVE, ColumnKind.TARGET):
            count = len(self.of_kind(kind))
            if count != 1:
                raise SchemaError(f"schema needs exactly one {kind.value} column")
        if len(self.of_kind(ColumnKind.OUTCOME)) > 1:
            raise SchemaError("schema allows at most one outcome column")
        if sum(c.name == WILDCARD for c in self.columns) > 1:
            raise SchemaError("schema allows at most one wildcard line")

    def of_kind(self, *kinds: ColumnKind) -> List[ColumnSpec]:
        return [c for c in self.columns if c.kind in kinds]

    @property
    def sensitive(self) -> ColumnSpec:
        return self.of_kind(ColumnKind.SENSITIVE)[0]

    @property
    def target(self) -> ColumnSpec:
        return self.of_kind(ColumnKind.TARGET)[0]

    def expand(self, frame: pd.DataFrame) -> "Schema":
        """
        Replace the wildcard line by one line per column of ``frame`` that
        no other line references.

        >>> schema = Schema.parse("S, sensitive, ==1\\nH, target, ==1\\n*, numeric")
        >>> [c.name for c in schema.expand(pd.DataFrame(columns=["S", "a", "H", "b"])).columns]
        ['S', 'H', 'a', 'b']
        """
        wildcard = [c for c in self.columns if c.name == WILDCARD]
        if not wildcard:
            return self
        explicit = Schema(tuple(c for c in self.columns if c.name != WILDCARD))
        known = set(explicit.referenced())
        rest = [
            ColumnSpec(name, wildcard[0].kind)
            for name in frame.columns
            if name not in known
        ]
        return Schema(explicit.columns + tuple(rest))

    def referenced(self) -> List[str]:
        names = []
        for column in self.columns:
            for name in column.inputs():
                if name not in names:
                    names.append(name)
        return names

    def check_covers(self, frame: pd.DataFrame) -> None:
        referenced = set(self.referenced())
        uncovered = [c for c in frame.columns if c not in referenced]
        if uncovered:
            raise SchemaError(f"schema does not cover columns: {uncovered}")
        missing = [c for c in referenced if c not in frame.columns]
        if missing:
            raise SchemaError(f"columns missing from the table: {missing}")


def load_schema(path: Path) -> Schema:
    return Schema.parse(Path(path).read_text())


def canonical_schema(n_features: int) -> Schema:
    lines = ["S, sensitive, ==1"]
    lines += [f"X_{i + 1}, binary" for i in range(n_features)]
    lines += ["H, target, ==1", "Y, outcome"]
    return Schema.parse("\n".join(lines))


def _numeric(series: pd.Series) -> Optional[pd.Series]:
    values = pd.to_numeric(series, errors="coerce")
    if values.notna().all():
        return values
    return None


def apply_rule(frame: pd.DataFrame, column: ColumnSpec) -> np.ndarray:
    """
    Evaluate a schema rule to a 0/1 vector.

    >>> frame = pd.DataFrame({"age": [20, 30], "sex": ["Male", "Female"]})
    >>> apply_rule(frame, ColumnSpec("age", ColumnKind.SENSITIVE, ">25"))
    array([0., 1.])
    >>> apply_rule(frame, ColumnSpec("sex", ColumnKind.SENSITIVE, "==Female"))
    array([0., 1.])
    >>> apply_rule(frame, ColumnSpec("S", ColumnKind.SENSITIVE, "none_of:age"))
    array([1., 1.])
    """
    rule = column.rule
    if column.derived:
        indicators = frame[column.inputs()].apply(pd.to_numeric).to_numpy() == 1
        hits = indicators.any(axis=1)
        result = ~hits if rule.startswith("none_of:") else hits
        return result.astype(np.float64)
    series = frame[column.name]
    for op in (">=", "<=", "==", "!=", ">", "<"):
        if rule.startswith(op):
            target = rule[len(op) :].strip()
            break
    else:
        if rule.startswith("in:"):
            allowed = set(rule[3:].split("|"))
            return series.astype(str).str.strip().isin(allowed).to_numpy(np.float64)
        raise SchemaError(f"cannot parse rule {rule!r} of column {column.name}")
    numbers = _numeric(series)
    try:
        value = float(target)
    except ValueError:
        value = None
    if numbers is not None and value is not None:
        left = numbers
    elif op in ("==", "!="):
        left, value = series.astype(str).str.strip(), target
    else:
        raise SchemaError(f"rule {rule!r} needs numeric column {column.name}")
    result = {
        ">=": lambda: left >= value,
        "<=": lambda: left <= value,
        "==": lambda: left == value,
        "!=": lambda: left != value,
        ">": lambda: left > value,
        "<": lambda: left < value,
    }[op]()
    return result.to_numpy(np.float64)


@dataclass
class Preprocessor:
    """
    Binarizes a raw table: one-hot categoricals, numerics at the median
    learned by ``fit``, 0/1 columns passed through.
    """

    schema: Schema
    medians: Dict[str, float] = field(default_factory=dict)
    categories: Dict[str, List[str]] = field(default_factory=dict)

    @classmethod
    def fit(cls, raw: pd.DataFrame, schema: Schema) -> "Preprocessor":
        preprocessor = cls(schema.expand(raw))
        frame = preprocessor.clean(raw)
        for column in preprocessor.schema.of_kind(ColumnKind.NUMERIC):
            values = pd.to_numeric(frame[column.name], errors="raise")
            preprocessor.medians[column.name] = float(values.median())
        for column in preprocessor.schema.of_kind(ColumnKind.CATEGORICAL):
            values = frame[column.name].astype(str).str.strip()
            preprocessor.categories[column.name] = sorted(values.unique())
        return preprocessor

    def clean(self, raw: pd.DataFrame) -> pd.DataFrame:
        self.schema.check_covers(raw)
        frame = raw.replace(MISSING_VALUES, np.nan)
        used = [
            name
            for column in self.schema.columns
            if column.kind != ColumnKind.DROP
            for name in column.inputs()
        ]
        for name in dict.fromkeys(used):
            if frame[name].isna().all():
                raise SchemaError(f"column {name} is empty")
        before = len(frame)
        frame = frame.dropna(subset=list(dict.fromkeys(used)))
        for column in self.schema.of_kind(ColumnKind.FILTER):
            frame = frame[apply_rule(frame, column) == 0]
        if len(frame) < before:
            logger.info(f"dropped {before - len(frame)} rows with missing or filtered values")
        return frame.reset_index(drop=True)

    def feature_names(self) -> List[str]:
        names = []
        for column in self.schema.of_kind(*FEATURE_KINDS):
            if column.kind == ColumnKind.CATEGORICAL:
                names += [f"{column.name}_{c}" for c in self.categories[column.name]]
            elif column.kind == ColumnKind.NUMERIC:
                names.append(f"{column.name}_ge_median")
            else:
                names.append(column.name)
        return names

    def _encode(self, frame: pd.DataFrame, column: ColumnSpec) -> np.ndarray:
        values = frame[column.name]
        if column.kind == ColumnKind.BINARY:
            return _binary(column.name, pd.to_numeric(values)).reshape(-1, 1)
        if column.kind == ColumnKind.NUMERIC:
            numbers = pd.to_numeric(values)
            if set(numbers.unique()) <= {0, 1}:
                return numbers.to_numpy(np.float64).reshape(-1, 1)
            median = self.medians[column.name]
            return (numbers >= median).to_numpy(np.float64).reshape(-1, 1)
        known = self.categories[column.name]
        values = values.astype(str).str.strip()
        unknown = sorted(set(values) - set(known))
        if unknown:
            logger.warning(
                f"unknown categories in {column.name}: {unknown}, encoded as all zeros",
            )
        return np.column_stack(
            [(values == c).to_numpy(np.float64) for c in known],
        ).reshape(len(frame), len(known))

    def transform(self, raw: pd.DataFrame) -> Dataset:
        frame = self.clean(raw)
        features = [self._encode(frame, c) for c in self.schema.of_kind(*FEATURE_KINDS)]
        x = np.hstack(features) if features else np.zeros((len(frame), 0))
        h = apply_rule(frame, self.schema.target)
        outcome = self.schema.of_kind(ColumnKind.OUTCOME)
        if outcome:
            y = _binary(outcome[0].name, pd.to_numeric(frame[outcome[0].name]))
        else:
            y = h.copy()
        return Dataset(
            s=apply_rule(frame, self.schema.sensitive),
            x=x,
            h=h,
            y=y,
            feature_names=self.feature_names(),
            sensitive_name=self.schema.sensitive.name,
        )


def preprocess(raw: pd.DataFrame, schema: Schema) -> Dataset:
    return Preprocessor.fit(raw, schema).transform(raw)


def read_raw_csv(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, na_values=MISSING_VALUES, skipinitialspace=True)
