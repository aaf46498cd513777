from unittest import mock

import numpy as np
import pytest

from ..data import Dataset
from ..data import generate
from ..data import THM42_OUTCOME
from ..data import THM42_SPEC
from ..diffcore import grad_check
from ..diffcore import Tape
from ..network import ArchitectureConfig
from ..network import ModelParams
from ..network import ParamGroup
from ..objectives import bce_loss_C
from ..objectives import disparity_loss_A
from ..objectives import EmptyGroupError
from ..objectives import interpretability_loss_B
from ..objectives import InvalidLossWeights
from ..objectives import loss_components
from ..objectives import LossBreakdown
from ..objectives import LossWeights
from ..objectives import outcome_group_means
from ..objectives import total_loss


def small_dataset(n: int = 50, seed: int = 1) -> Dataset:
    rng = np.random.default_rng(seed)
    s = np.tile([0, 1], n // 2)
    x = rng.integers(0, 2, size=(n, 3))
    h = rng.integers(0, 2, size=n)
    y = rng.integers(0, 2, size=n)
    return Dataset(s=s, x=x, h=h, y=y)


def test_loss_weights_validation():
    weights = LossWeights(a=0.99, b=0.01, c=1000, d=1000)
    assert weights.combine(1, 1, 1, 1) == pytest.approx(2001.0)
    with pytest.raises(InvalidLossWeights):
        LossWeights(a=0.9, b=0.2, c=1000, d=1000)
    with pytest.raises(InvalidLossWeights):
        LossWeights(a=0.9, b=0.1, c=1000, d=999)
    with pytest.raises(InvalidLossWeights):
        LossWeights(a=1.0, b=0.0, c=1000, d=1000)
    with pytest.raises(InvalidLossWeights):
        LossWeights.from_a(0.9, c=10)
    assert LossWeights.from_a(0.9, c=10, allow_small_c=True).c == 10


def test_disparity_loss_is_zero_with_identical_groups():
    n = 40
    x = np.tile([[0, 1], [1, 0]], (n // 2, 1))
    dataset = Dataset(
        s=np.repeat([0, 1], n // 2),
        x=np.concatenate([x[: n // 2], x[: n // 2]]),
        h=np.tile([0, 1], n // 2),
        y=np.tile([1, 0], n // 2),
    )
    arch = ArchitectureConfig(n_features=2, m=2, m_obs=1)
    params = ModelParams.zeros(arch)
    params.outcome_weights[:] = [0.0, 0.5, -0.5, 1.0]
    assert float(disparity_loss_A(params, dataset)) == pytest.approx(0.0)


def test_disparity_loss_needs_both_groups():
    dataset = Dataset(s=[1, 1], x=[[0], [1]], h=[0, 1], y=[1, 1])
    arch = ArchitectureConfig(n_features=1, m=2, m_obs=1)
    with pytest.raises(EmptyGroupError):
        disparity_loss_A(ModelParams.zeros(arch), dataset)


def test_interpretability_loss_counts_disparity_nodes_only():
    arch = ArchitectureConfig(n_features=1, m=3, m_obs=1)
    params = ModelParams.zeros(arch)
    params.rep_weights[:, 0] = 7.0
    params.head_weights[0] = 7.0
    params.rep_weights[0, 1] = -1.0
    params.rep_bias[2] = 0.5
    params.head_weights[1] = 2.0
    assert float(interpretability_loss_B(params)) == pytest.approx(3.5)


def test_bce_of_uninformed_model():
    arch = ArchitectureConfig(n_features=3, m=2, m_obs=1)
    loss = bce_loss_C(ModelParams.zeros(arch), small_dataset())
    assert float(loss) == pytest.approx(np.log(2))


def test_compressed_dataset_gives_same_losses():
    dataset = generate(THM42_SPEC, 500, seed=3)
    arch = ArchitectureConfig(n_features=1, m=3, m_obs=1)
    rng = np.random.default_rng(2)
    size = ModelParams.zeros(arch).to_vector().size
    params = ModelParams.from_vector(arch, rng.uniform(-1, 1, size))
    weights = LossWeights.from_a(0.99)
    full = total_loss(params, dataset, weights)
    compressed = total_loss(params, dataset.compress(), weights)
    for field in ("A", "B", "C", "D", "total"):
        assert getattr(compressed, field) == pytest.approx(getattr(full, field))


def test_total_loss_gradient_matches_finite_differences():
    dataset = small_dataset()
    arch = ArchitectureConfig(n_features=3, m=3, m_obs=1)
    # unit c and d keep the rounding noise of central differences below 1e-4
    weights = LossWeights.from_a(0.99, c=1.0, allow_small_c=True)
    size = ModelParams.zeros(arch).to_vector().size
    rng = np.random.default_rng(10)

    def total(theta):
        return weights.combine(*loss_components(ModelParams.from_vector(arch, theta), dataset))

    for _ in range(10):
        report = grad_check(total, rng.uniform(-1, 1, size))
        assert len(report.skipped) < size
        assert report.max_rel_error < 1e-4


def test_loss_breakdown_rows():
    weights = LossWeights.from_a(0.9)
    breakdown = LossBreakdown.from_components((0.1, 2.0, 0.5, 0.25), weights)
    assert breakdown.total == pytest.approx(0.09 + 0.2 + 500 + 250)
    assert breakdown.tradeoff(weights) == pytest.approx(0.29)
    row = breakdown.as_row(fit_id=3, epoch=10)
    assert list(row) == ["fit_id", "epoch", "A", "B", "C", "D", "total"]


def test_components_on_tape_have_gradients():
    dataset = small_dataset()
    arch = ArchitectureConfig(n_features=3, m=2, m_obs=1)
    params = ModelParams.zeros(arch)
    params.head_weights[1] = 0.5
    params.rep_weights[0, 1] = 0.5
    bound = params.on_tape(Tape())
    A, B, C, D = loss_components(bound, dataset)
    (A + B + C + D).backward()
    grads = bound.grads()
    assert np.any(grads.outcome_weights != 0)
    assert grads.head_weights[1] != 0


def random_params(arch: ArchitectureConfig, seed: int) -> ModelParams:
    size = ModelParams.zeros(arch).to_vector().size
    return ModelParams.from_vector(arch, np.random.default_rng(seed).uniform(-1, 1, size))


def lattice_dataset(spec) -> Dataset:
    cells = list(spec.lattice())
    n = len(cells)
    return Dataset(
        s=[s for s, _, _ in cells],
        x=[x for _, x, _ in cells],
        h=np.zeros(n),
        y=np.zeros(n),
        weights=[p for _, _, p in cells],
    )


def table_outcome_logit(params, x, s, h):
    rate = np.array([THM42_OUTCOME[(int(v), int(h))] for v in np.asarray(x)[:, 0]])
    return np.log(rate / (1 - rate))


@mock.patch("lrd.objectives.outcome_logit", side_effect=table_outcome_logit)
def test_disparity_loss_on_generator_tables(mock_outcome_logit):
    arch = ArchitectureConfig(n_features=1, m=2, m_obs=1)
    params = ModelParams.zeros(arch)
    # the observed node passes S through, desired equals observed
    params.rep_weights[0, 0] = 1.0
    params.head_bias[...] = np.log(0.6 / 0.4)
    params.head_weights[0] = np.log(0.3 / 0.7) - np.log(0.6 / 0.4)
    dataset = lattice_dataset(THM42_SPEC)
    mean1, mean0 = outcome_group_means(params, dataset)
    assert float(mean0) == pytest.approx(0.52)
    assert float(mean1) == pytest.approx(0.385)
    assert float(disparity_loss_A(params, dataset)) == pytest.approx(0.135)
    assert mock_outcome_logit.call_count == 2


def test_case_1_breakdown_total():
    weights = LossWeights.from_a(0.9)
    breakdown = LossBreakdown.from_components((0.0471, 3.5722, 0.360084, 3.3e-9), weights)
    assert breakdown.tradeoff(weights) == pytest.approx(0.3996, abs=1e-4)
    assert breakdown.total == pytest.approx(360.4836, abs=1e-3)


def perturbed(params: ModelParams, groups, seed: int) -> ModelParams:
    mask = params.group_mask(groups).to_vector()
    noise = np.random.default_rng(seed).normal(size=mask.size)
    return ModelParams.from_vector(params.arch, params.to_vector() + noise * mask)


def test_components_depend_on_their_own_groups():
    dataset = small_dataset()
    params = random_params(ArchitectureConfig(n_features=3, m=3, m_obs=1), seed=4)
    base = total_loss(params, dataset, LossWeights.from_a(0.9))
    cases = [
        ("B", [ParamGroup.OBSERVED, ParamGroup.OUTCOME], [ParamGroup.DISPARITY]),
        ("C", [ParamGroup.DISPARITY, ParamGroup.OUTCOME], [ParamGroup.OBSERVED]),
        ("D", [ParamGroup.OBSERVED, ParamGroup.DISPARITY], [ParamGroup.OUTCOME]),
    ]
    for name, others, own in cases:
        unchanged = total_loss(perturbed(params, others, 1), dataset, LossWeights.from_a(0.9))
        changed = total_loss(perturbed(params, own, 2), dataset, LossWeights.from_a(0.9))
        assert getattr(unchanged, name) == pytest.approx(getattr(base, name), abs=1e-12), name
        assert getattr(changed, name) != pytest.approx(getattr(base, name)), name


def test_disparity_loss_ignores_row_order_within_groups():
    dataset = small_dataset()
    params = random_params(ArchitectureConfig(n_features=3, m=3, m_obs=1), seed=5)
    order = np.concatenate(
        [np.random.default_rng(6).permutation(np.flatnonzero(dataset.s == g)) for g in (0, 1)],
    )
    shuffled = dataset.subset(order)
    assert float(disparity_loss_A(params, shuffled)) == pytest.approx(
        float(disparity_loss_A(params, dataset)),
        abs=1e-12,
    )


def test_disparity_loss_ignores_desired_head_without_decision_effect():
    dataset = small_dataset()
    params = random_params(ArchitectureConfig(n_features=3, m=3, m_obs=1), seed=7)
    params.outcome_weights[-1] = 0.0
    before = float(disparity_loss_A(params, dataset))
    changed = perturbed(params, [ParamGroup.OBSERVED, ParamGroup.DISPARITY], 8)
    assert float(disparity_loss_A(changed, dataset)) == pytest.approx(before, abs=1e-12)
    params.outcome_weights[-1] = 2.0
    moved = perturbed(params, [ParamGroup.DISPARITY], 8)
    assert float(disparity_loss_A(moved, dataset)) != pytest.approx(
        float(disparity_loss_A(params, dataset)),
    )
