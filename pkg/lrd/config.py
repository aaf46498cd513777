"""
Experiment configuration.

A config file is ``key=value`` text, one setting per line; ``#`` starts a
comment. Values are layered: settings defaults, then the file, then the
``DISPARITY_LAB_SEED`` environment seed, then command-line flags.
"""
import logging
from dataclasses import asdict
from dataclasses import dataclass
from dataclasses import field
from dataclasses import fields
from dataclasses import replace
from pathlib import Path
from typing import Any
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional

from django.conf import settings

from .data import Case
from .data import GENERATORS
from .data import OutcomeCaseConfig
from .objectives import LossWeights
from .training import InitScheme
from .training import TrainConfig
from .utils import parse_number_list

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


def parse_bool(text: str) -> bool:
    """
    >>> parse_bool("yes"), parse_bool("0")
    (True, False)
    """
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


SCHEMA_DIR = Path(__file__).resolve().parent / "schemas"


def find_schema(name: str) -> Path:
    """
    Resolve a schema by path, then under ``DATA_DIR``, then among the
    bundled schemas, where the ``.schema`` suffix may be left out.
    """
    path = Path(name)
    if path.exists() or path.is_absolute():
        return path
    candidates = [
        Path(settings.DATA_DIR) / path,
        SCHEMA_DIR / path,
        SCHEMA_DIR / f"{name}.schema",
    ]
    for candidate in candidates:
        if candidate.is_file():
            return candidate
    return path


PARSERS: Dict[str, Callable[[str], Any]] = {
    "name": str,
    "dataset": str,
    "schema": str,
    "case": Case,
    "splits": int,
    "a": float,
    "b": float,
    "c": float,
    "d": float,
    "allow_small_c": parse_bool,
    "epochs": int,
    "fits": int,
    "phase1_fits": int,
    "learning_rate": float,
    "init_scheme": InitScheme,
    "m_obs": int,
    "m_obs_candidates": parse_number_list,
    "folds": int,
    "disparity_nodes": int,
    "train_fraction": float,
    "n": int,
    "clip": float,
    "a_param": float,
    "output_dir": str,
    "master_seed": int,
    "jobs": int,
    "log_every": int,
    "cm_other": float,
}


def parse_config_text(text: str) -> Dict[str, Any]:
    """
    >>> parse_config_text("# German, case I\\ncase = I\\nsplits=2 # quick")
    {'case': <Case.I: 'I'>, 'splits': 2}
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}")
    return values


@dataclass
class ExperimentConfig:
    dataset: str = ""
    name: str = "experiment"
    schema: Optional[str] = None
    case: Optional[Case] = None
    splits: int = 10
    a: float = 0.99
    b: Optional[float] = None
    c: float = 1000.0
    d: Optional[float] = None
    allow_small_c: bool = False
    epochs: int = 1000
    fits: int = 100
    phase1_fits: Optional[int] = None
    learning_rate: float = 0.01
    init_scheme: InitScheme = InitScheme.UNIFORM_SMALL
    m_obs: Optional[int] = None
    m_obs_candidates: List[int] = field(default_factory=list)
    folds: int = 5
    disparity_nodes: int = 1
    train_fraction: float = 0.7
    n: int = 100000
    clip: Optional[float] = None
    a_param: float = 0.6
    output_dir: Optional[str] = None
    master_seed: int = 0
    jobs: int = 1
    log_every: int = 10
    cm_other: Optional[float] = None

    @classmethod
    def defaults(cls) -> "ExperimentConfig":
        return cls(
            splits=settings.LRD_SPLITS,
            epochs=settings.LRD_EPOCHS,
            fits=settings.LRD_FITS,
            learning_rate=settings.LRD_LEARNING_RATE,
            jobs=settings.LRD_JOBS,
            log_every=settings.LRD_LOG_EVERY,
        )

    @classmethod
    def load(
        cls,
        path: Optional[Path] = None,
        overrides: Optional[Dict[str, Any]] = None,
    ) -> "ExperimentConfig":
        config = cls.defaults()
        if path:
            path = Path(path)
            if not path.is_file():
                raise ConfigError(f"config file {path} not found")
            config = replace(config, **parse_config_text(path.read_text()))
        if settings.DISPARITY_LAB_SEED is not None:
            config.master_seed = settings.DISPARITY_LAB_SEED
        unknown = set(overrides or {}) - set(PARSERS)
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}")
        given = {k: v for k, v in (overrides or {}).items() if v is not None}
        config = replace(config, **given)
        config.validate()
        return config

    @property
    def is_generated(self) -> bool:
        return self.dataset in GENERATORS

    def dataset_path(self) -> Path:
        path = Path(self.dataset)
        if not path.is_absolute() and not path.exists():
            path = Path(settings.DATA_DIR) / path
        return path

    def schema_path(self) -> Optional[Path]:
        return find_schema(self.schema) if self.schema else None

    def report_dir(self) -> Path:
        if self.output_dir:
            return Path(self.output_dir)
        return Path(settings.REPORT_DIR) / self.name

    def loss_weights(self) -> LossWeights:
        b = round(1.0 - self.a, 12) if self.b is None else self.b
        d = self.c if self.d is None else self.d
        return LossWeights(self.a, b, self.c, d, allow_small_c=self.allow_small_c)

    def train_config(self, phase1: bool = False) -> TrainConfig:
        fits = self.phase1_fits if phase1 and self.phase1_fits else self.fits
        return TrainConfig(
            epochs=self.epochs,
            fits=fits,
            learning_rate=self.learning_rate,
            master_seed=self.master_seed,
            init_scheme=self.init_scheme,
            jobs=self.jobs,
            log_every=self.log_every,
        )

    def outcome_case(self) -> Optional[OutcomeCaseConfig]:
        if self.case is None:
            return None
        return OutcomeCaseConfig(case=self.case, a_param=self.a_param, clip=self.clip)

    def validate(self) -> None:
        if not self.dataset:
            raise ConfigError("dataset is required")
        if not self.is_generated and not self.dataset_path().is_file():
            raise ConfigError(f"dataset {self.dataset_path()} not found")
        schema = self.schema_path()
        if schema and not schema.is_file():
            raise ConfigError(f"schema {schema} not found")
        if self.splits < 1:
            raise ConfigError(f"splits must be >= 1, got {self.splits}")
        if self.disparity_nodes < 1:
            raise ConfigError(
                f"disparity_nodes must be >= 1, got {self.disparity_nodes}",
            )
        if self.m_obs is not None and self.m_obs < 1:
            raise ConfigError(f"m_obs must be >= 1, got {self.m_obs}")
        if self.m_obs is None and not self.m_obs_candidates:
            raise ConfigError("set m_obs or m_obs_candidates")
        if self.is_generated and self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if not 0 < self.train_fraction < 1:
            raise ConfigError(
                f"train_fraction must be in (0, 1), got {self.train_fraction}",
            )
        try:
            self.loss_weights()
            self.train_config()
            self.train_config(phase1=True)
        except ValueError as exc:
            raise ConfigError(f"{exc}")

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = asdict(self)[f.name]
            if value is None:
                continue
            if isinstance(value, list):
                value = ",".join(str(i) for i in value)
            elif hasattr(value, "value"):
                value = value.value
            lines.append(f"{f.name}={value}")
        return "\n".join(lines) + "\n"
