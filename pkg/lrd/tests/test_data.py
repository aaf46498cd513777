import numpy as np
import pandas as pd
import pytest

from ..config import find_schema
from ..data import canonical_schema
from ..data import Case
from ..data import ColumnKind
from ..data import Dataset
from ..data import features_path
from ..data import gen_thm42_data
from ..data import gen_thm43_data
from ..data import inject_outcome
from ..data import load_schema
from ..data import OutcomeCaseConfig
from ..data import OutcomeRangeError
from ..data import preprocess
from ..data import read_canonical_csv
from ..data import read_raw_csv
from ..data import Schema
from ..data import SchemaError
from ..data import split
from ..data import SplitError
from ..data import write_canonical_csv
from ..metrics import decomposition


@pytest.fixture(scope="module")
def thm42():
    return gen_thm42_data(100000, seed=0)


def test_thm42_generator_rates(thm42):
    assert thm42.n_rows == 100000
    assert thm42.n_features == 1
    assert thm42.group_rate(thm42.h, 0) == pytest.approx(0.6, abs=0.01)
    assert thm42.group_rate(thm42.h, 1) == pytest.approx(0.3, abs=0.01)
    x1 = thm42.x[:, 0] == 1
    rate = thm42.y[x1 & (thm42.h == 1)].mean()
    assert rate == pytest.approx(0.6, abs=0.02)


def test_thm43_generator_has_no_features():
    dataset = gen_thm43_data(20000, seed=4)
    assert dataset.n_features == 0
    np.testing.assert_array_equal(dataset.y, dataset.h)
    assert dataset.group_rate(dataset.h, 0) == pytest.approx(0.01, abs=0.005)


def test_generated_file_is_reproducible(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    write_canonical_csv(gen_thm42_data(1000, seed=9), first)
    write_canonical_csv(gen_thm42_data(1000, seed=9), second)
    assert first.read_bytes() == second.read_bytes()
    assert first.read_text().splitlines()[0] == "S,X_1,H,Y"
    write_canonical_csv(gen_thm42_data(1000, seed=10), second)
    assert first.read_bytes() != second.read_bytes()


def test_canonical_csv_keeps_feature_names(tmp_path):
    dataset = Dataset(
        s=[0, 1, 1],
        x=[[1, 0], [0, 1], [1, 1]],
        h=[1, 0, 1],
        y=[0, 0, 1],
        feature_names=["age_ge_median", "job_skilled"],
    )
    path = tmp_path / "german.csv"
    write_canonical_csv(dataset, path)
    assert features_path(path).name == "german.features.txt"
    loaded = read_canonical_csv(path)
    assert loaded.feature_names == ["age_ge_median", "job_skilled"]
    np.testing.assert_array_equal(loaded.x, dataset.x)


def test_read_canonical_csv_rejects_other_headers(tmp_path):
    path = tmp_path / "raw.csv"
    path.write_text("sex,H,Y\n1,0,1\n")
    with pytest.raises(SchemaError):
        read_canonical_csv(path)


def test_dataset_rejects_non_binary_values():
    with pytest.raises(ValueError):
        Dataset(s=[0, 2], x=[[0], [1]], h=[0, 1], y=[0, 1])
    with pytest.raises(ValueError):
        Dataset(s=[0, 1], x=[[0], [1]], h=[0, 1, 1], y=[0, 1])


def test_compress_keeps_total_weight(thm42):
    compressed = thm42.compress()
    assert compressed.n_rows <= 16
    assert compressed.weights.sum() == thm42.n_rows
    assert compressed.decision_gap() == pytest.approx(thm42.decision_gap())


def test_outcome_case_v_copies_decision(thm42):
    dataset = inject_outcome(thm42, OutcomeCaseConfig(Case.V), seed=1)
    np.testing.assert_array_equal(dataset.y, dataset.h)
    np.testing.assert_array_equal(dataset.s, thm42.s)


def expected_outcome_gap(dataset, config):
    table = config.table()
    p_y = np.zeros(dataset.n_rows)
    for (s, h), rate in table.items():
        p_y[(dataset.s == s) & (dataset.h == h)] = rate
    gap, variance = 0.0, 0.0
    for group, sign in ((1, 1.0), (0, -1.0)):
        p = p_y[dataset.s == group]
        gap += sign * p.mean()
        variance += (p * (1 - p)).sum() / len(p) ** 2
    return gap, np.sqrt(variance)


@pytest.mark.parametrize(
    "case,clip,expected_gap",
    [
        (Case.I, 1.0, -0.28),
        (Case.II, None, -0.09),
        (Case.III, None, 0.0),
        (Case.IV, None, 0.09),
    ],
)
def test_outcome_cases_set_disparity(thm42, case, clip, expected_gap):
    config = OutcomeCaseConfig(case, clip=clip).resolve(thm42)
    gap, sigma = expected_outcome_gap(thm42, config)
    assert gap == pytest.approx(config.a_param * config.c_param + config.b_param, abs=1e-9)
    assert decomposition(config.a_param, config.b_param, config.c_param) == pytest.approx(
        abs(gap),
        abs=1e-9,
    )
    assert gap == pytest.approx(expected_gap, abs=0.01)
    dataset = inject_outcome(thm42, config, seed=2)
    assert abs(dataset.outcome_gap() - gap) <= 3 * sigma
    np.testing.assert_array_equal(dataset.h, thm42.h)


def test_outcome_case_out_of_range_needs_clip(thm42):
    with pytest.raises(OutcomeRangeError):
        OutcomeCaseConfig(Case.I).resolve(thm42)
    config = OutcomeCaseConfig(Case.I, clip=1.0).resolve(thm42)
    assert config.b_param == pytest.approx(-0.1)
    assert config.table()[(0, 1)] == pytest.approx(1.0)


def test_outcome_table_needs_resolving():
    with pytest.raises(ValueError):
        OutcomeCaseConfig(Case.II).table()


def test_split_sizes_and_reproducibility(thm42):
    dataset = thm42.subset(np.arange(1000))
    train, test = split(dataset, 0.7, seed=5)
    assert (train.n_rows, test.n_rows) == (700, 300)
    again, _ = split(dataset, 0.7, seed=5)
    np.testing.assert_array_equal(train.s, again.s)
    np.testing.assert_array_equal(train.x, again.x)


def test_split_errors():
    one_group = Dataset(s=np.ones(10), x=np.zeros((10, 1)), h=np.zeros(10), y=np.zeros(10))
    with pytest.raises(SplitError):
        split(one_group, 0.7, seed=0)
    with pytest.raises(SplitError):
        split(one_group, 1.0, seed=0)


def test_schema_errors():
    with pytest.raises(SchemaError):
        Schema.parse("age, numeric")
    with pytest.raises(SchemaError):
        Schema.parse("age, sensitive, >25\nage, weird\nH, target, ==1")
    with pytest.raises(SchemaError):
        Schema.parse("age, sensitive\nH, target, ==1")


def credit_frame() -> pd.DataFrame:
    return pd.DataFrame(
        {
            "age": [20, 30, 40, 50],
            "job": ["skilled", "unskilled", "skilled", "manager"],
            "credit_risk": [1, 2, 1, 1],
        },
    )


CREDIT_SCHEMA = """
# toy credit table
age, sensitive, >25
credit_risk, target, ==1
age, numeric
job, categorical
"""


def test_preprocess_binarizes_columns():
    dataset = preprocess(credit_frame(), Schema.parse(CREDIT_SCHEMA))
    assert dataset.feature_names == [
        "age_ge_median",
        "job_manager",
        "job_skilled",
        "job_unskilled",
    ]
    np.testing.assert_array_equal(dataset.s, [0, 1, 1, 1])
    np.testing.assert_array_equal(dataset.h, [1, 0, 1, 1])
    np.testing.assert_array_equal(dataset.y, dataset.h)
    np.testing.assert_array_equal(dataset.x[:, 0], [0, 0, 1, 1])
    np.testing.assert_array_equal(dataset.x[:, 1:].sum(axis=1), [1, 1, 1, 1])


def test_preprocess_needs_schema_to_cover_columns():
    frame = credit_frame().assign(extra=[1, 2, 3, 4])
    with pytest.raises(SchemaError):
        preprocess(frame, Schema.parse(CREDIT_SCHEMA))
    with pytest.raises(SchemaError):
        preprocess(credit_frame().drop(columns=["job"]), Schema.parse(CREDIT_SCHEMA))


def test_wildcard_covers_remaining_columns():
    frame = credit_frame().assign(claims=[0, 5, 2, 9], visits=[1, 0, 1, 1])
    dataset = preprocess(frame, Schema.parse(CREDIT_SCHEMA + "*, numeric\n"))
    assert dataset.feature_names[-2:] == ["claims_ge_median", "visits_ge_median"]
    np.testing.assert_array_equal(dataset.x[:, -2], [0, 1, 0, 1])
    with pytest.raises(SchemaError):
        Schema.parse(CREDIT_SCHEMA + "*, target, ==1\n")
    with pytest.raises(SchemaError):
        Schema.parse(CREDIT_SCHEMA + "*, numeric\n*, drop\n")


def health_frame() -> pd.DataFrame:
    ages = [f"age_{decade}5" for decade in range(9)]
    frame = pd.DataFrame({"MemberID": [1, 2, 3, 4], "Year": ["Y1", "Y1", "Y2", "Y2"]})
    for name in ages + ["sexMALE", "sexFEMALE", "sexMISS", "ageMISS"]:
        frame[name] = 0
    frame.loc[0, "age_05"] = 1
    frame.loc[1, "age_75"] = 1
    frame.loc[2, "ageMISS"] = 1
    frame.loc[3, "age_35"] = 1
    frame["sexMALE"] = [1, 0, 1, 0]
    frame["sexFEMALE"] = [0, 1, 0, 1]
    frame["claims_total"] = [1, 7, 3, 4]
    frame["pay_delay_max"] = [10, 30, 20, 5]
    frame["DaysInHospital"] = [0, 2, 1, 0]
    return frame


def test_bundled_health_schema_expands_claim_columns():
    dataset = preprocess(health_frame(), load_schema(find_schema("health")))
    assert dataset.n_rows == 3
    assert dataset.n_features == 14
    assert dataset.feature_names[-2:] == [
        "claims_total_ge_median",
        "pay_delay_max_ge_median",
    ]
    np.testing.assert_array_equal(dataset.s, [0, 1, 0])
    np.testing.assert_array_equal(dataset.h, [0, 1, 0])
    np.testing.assert_array_equal(dataset.x[:, -2], [0, 1, 1])
    np.testing.assert_array_equal(dataset.x[:, -1], [1, 1, 0])


def test_preprocess_drops_missing_rows(tmp_path):
    path = tmp_path / "adult.csv"
    path.write_text(
        "age,workclass,sex,income\n"
        "39, State-gov, Male, <=50K\n"
        "50, ?, Female, >50K\n"
        "38, Private, Female, >50K.\n",
    )
    schema = Schema.parse(
        "sex, sensitive, ==Female\nincome, target, in:>50K|>50K.\n"
        "age, numeric\nworkclass, categorical\nsex, categorical",
    )
    dataset = preprocess(read_raw_csv(path), schema)
    assert dataset.n_rows == 2
    np.testing.assert_array_equal(dataset.s, [0, 1])
    np.testing.assert_array_equal(dataset.h, [0, 1])


def test_health_rules_filter_and_derive_sensitive():
    frame = pd.DataFrame(
        {
            "age_05": [1, 0, 0, 0],
            "age_75": [0, 1, 0, 0],
            "ageMISS": [0, 0, 1, 0],
            "DaysInHospital": [0, 2, 1, 0],
        },
    )
    schema = Schema.parse(
        "S, sensitive, none_of:age_05\nDaysInHospital, target, >0\n"
        "ageMISS, filter, ==1\nage_05, binary\nage_75, binary",
    )
    dataset = preprocess(frame, schema)
    assert dataset.n_rows == 3
    np.testing.assert_array_equal(dataset.s, [0, 1, 1])
    np.testing.assert_array_equal(dataset.h, [0, 1, 0])
    assert dataset.feature_names == ["age_05", "age_75"]


def test_preprocess_is_idempotent_on_canonical_input(thm42, tmp_path):
    dataset = thm42.subset(np.arange(200))
    path = tmp_path / "canonical.csv"
    write_canonical_csv(dataset, path)
    again = preprocess(read_raw_csv(path), canonical_schema(dataset.n_features))
    for name in ("s", "x", "h", "y"):
        np.testing.assert_array_equal(getattr(again, name), getattr(dataset, name))


def test_bundled_german_schema_has_sixty_one_features():
    schema = load_schema(find_schema("german"))
    assert schema.sensitive.rule == ">25"
    categorical = schema.of_kind(ColumnKind.CATEGORICAL)
    numeric = schema.of_kind(ColumnKind.NUMERIC)
    assert (len(categorical), len(numeric)) == (13, 7)


def test_bundled_adult_schema_encodes_sex_only_as_sensitive():
    schema = load_schema(find_schema("adult"))
    assert schema.sensitive.name == "sex"
    categorical = schema.of_kind(ColumnKind.CATEGORICAL)
    numeric = schema.of_kind(ColumnKind.NUMERIC)
    assert "sex" not in [c.name for c in categorical]
    assert (len(categorical), len(numeric)) == (7, 6)
