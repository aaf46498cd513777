from dataclasses import replace
from pathlib import Path

import pytest
from django.conf import settings as django_settings

from ..config import ConfigError
from ..config import ExperimentConfig
from ..config import find_schema
from ..config import parse_bool
from ..config import parse_config_text
from ..data import Case
from ..training import InitScheme


def write_config(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "run.conf"
    path.write_text(text)
    return path


def test_parse_config_text():
    values = parse_config_text(
        "dataset = german.csv\n"
        "case=II  # semi-synthetic\n"
        "\n"
        "m_obs_candidates = 1,2, 4\n"
        "allow_small_c = yes\n"
        "init_scheme = theorem41_region\n",
    )
    assert values == {
        "dataset": "german.csv",
        "case": Case.II,
        "m_obs_candidates": [1, 2, 4],
        "allow_small_c": True,
        "init_scheme": InitScheme.THEOREM41_REGION,
    }


@pytest.mark.parametrize(
    "text",
    ["splits", "bogus = 1", "splits = many", "case = VI", "allow_small_c = maybe"],
)
def test_parse_config_text_errors(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_parse_bool():
    assert parse_bool(" On ") is True
    with pytest.raises(ValueError):
        parse_bool("2")


def test_layering(tmp_path, settings):
    path = write_config(tmp_path, "dataset = thm42\nm_obs = 1\nmaster_seed = 5\nsplits = 3\n")
    config = ExperimentConfig.load(path)
    assert config.master_seed == 5
    assert config.splits == 3
    assert config.epochs == django_settings.LRD_EPOCHS

    settings.DISPARITY_LAB_SEED = 9
    assert ExperimentConfig.load(path).master_seed == 9
    config = ExperimentConfig.load(path, {"master_seed": 11, "splits": None, "epochs": 7})
    assert config.master_seed == 11
    assert config.splits == 3
    assert config.epochs == 7


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig.load(tmp_path / "missing.conf")
    path = write_config(tmp_path, "dataset = thm42\nm_obs = 1\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(path, {"unknown_flag": 1})


@pytest.mark.parametrize(
    "overrides",
    [
        {"dataset": ""},
        {"dataset": "nowhere.csv"},
        {"schema": "nowhere"},
        {"splits": 0},
        {"disparity_nodes": 0},
        {"m_obs": 0},
        {"m_obs": None, "m_obs_candidates": []},
        {"train_fraction": 1.0},
        {"n": 1},
        {"c": 1.0},
        {"a": 1.0},
        {"epochs": 0},
    ],
)
def test_validation(overrides):
    config = replace(ExperimentConfig(dataset="thm42", m_obs=1), **overrides)
    with pytest.raises(ConfigError):
        config.validate()


def test_small_c_needs_opt_in():
    config = ExperimentConfig(dataset="thm42", m_obs=1, c=1.0, allow_small_c=True)
    config.validate()
    weights = config.loss_weights()
    assert (weights.a, weights.b, weights.c, weights.d) == (0.99, 0.01, 1.0, 1.0)


def test_dataset_and_report_paths():
    (django_settings.DATA_DIR / "german.csv").write_text("S,H,Y\n")
    config = ExperimentConfig(dataset="german.csv", m_obs=1, name="g1")
    config.validate()
    assert config.dataset_path() == django_settings.DATA_DIR / "german.csv"
    assert config.report_dir() == Path(django_settings.REPORT_DIR) / "g1"
    assert replace(config, output_dir="/tmp/x").report_dir() == Path("/tmp/x")
    assert not config.is_generated
    assert ExperimentConfig(dataset="thm43").is_generated


def test_train_configs():
    config = ExperimentConfig(dataset="thm42", m_obs=1, fits=20, phase1_fits=5, master_seed=3)
    assert config.train_config().fits == 20
    assert config.train_config(phase1=True).fits == 5
    assert config.train_config().master_seed == 3
    assert replace(config, phase1_fits=None).train_config(phase1=True).fits == 20


def test_outcome_case():
    assert ExperimentConfig(dataset="thm42").outcome_case() is None
    outcome = ExperimentConfig(dataset="thm42", case=Case.I, clip=1.0).outcome_case()
    assert outcome.case == Case.I
    assert outcome.clip == 1.0
    assert outcome.a_param == 0.6


def test_to_text_round_trip():
    config = ExperimentConfig(
        dataset="thm42",
        case=Case.IV,
        m_obs_candidates=[1, 3],
        init_scheme=InitScheme.THEOREM41_REGION,
        a=0.999,
    )
    text = config.to_text()
    assert "case=IV\n" in text
    assert "m_obs_candidates=1,3\n" in text
    assert "m_obs=" not in text
    assert replace(ExperimentConfig(), **parse_config_text(text)) == config


def test_find_schema():
    assert find_schema("german").name == "german.schema"
    assert find_schema("adult.schema").is_file()
    custom = django_settings.DATA_DIR / "mine.schema"
    custom.write_text("S, sensitive\n")
    assert find_schema("mine.schema") == custom
    assert not find_schema("nothing").exists()
