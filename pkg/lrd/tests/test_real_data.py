from os import getenv
from pathlib import Path

import numpy as np
import pytest

from ..config import ExperimentConfig
from ..config import find_schema
from ..data import Case
from ..data import load_schema
from ..data import preprocess
from ..data import read_raw_csv
from ..experiment import prepare_dataset
from ..experiment import run_experiment

# conftest points settings.DATA_DIR at tmp_path, the raw files stay here
REAL_DATA_DIR = Path(getenv("DATA_DIR", "/tmp/disparitylab/data"))

pytestmark = pytest.mark.slow


def real_dataset(name: str) -> Path:
    path = REAL_DATA_DIR / f"{name}.csv"
    if not path.is_file():
        pytest.skip(f"{path} not found")
    return path


@pytest.mark.parametrize("name", ["german", "adult", "health"])
def test_preprocess_real_dataset(name):
    raw = read_raw_csv(real_dataset(name))
    dataset = preprocess(raw, load_schema(find_schema(name)))
    assert dataset.has_both_groups()
    assert dataset.n_features > 0
    assert len(set(dataset.feature_names)) == dataset.n_features
    if name == "adult":
        assert dataset.n_features == 103


def german_config(case: Case, tmp_path: Path) -> ExperimentConfig:
    config = ExperimentConfig(
        dataset=str(real_dataset("german")),
        schema="german",
        case=case,
        m_obs=1,
        a=0.99,
        c=1000.0,
        splits=10,
        epochs=1000,
        fits=5,
        jobs=4,
        output_dir=str(tmp_path / f"german-{case.value}"),
    )
    config.validate()
    return config


def test_german_case_v(tmp_path):
    outcome = run_experiment(german_config(Case.V, tmp_path))
    assert not outcome.failed
    assert np.mean([s.report.disparity for s in outcome.splits]) <= 0.06
    assert np.mean([s.report.accuracy for s in outcome.splits]) >= 0.60


@pytest.mark.parametrize("case", [Case.I, Case.II, Case.III, Case.IV])
def test_german_semi_synthetic_cases(case, tmp_path):
    config = german_config(case, tmp_path)
    b = config.outcome_case().resolve(prepare_dataset(config)).b_param
    outcome = run_experiment(config)
    assert not outcome.failed
    assert np.mean([s.report.disparity for s in outcome.splits]) < abs(b)
