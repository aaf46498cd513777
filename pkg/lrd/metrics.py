import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np

from .data import Dataset
from .data import GeneratorSpec
from .diffcore import sigmoid
from .diffcore import value_of
from .network import decision_logits
from .network import logit_shift
from .network import ModelParams
from .objectives import disparity_loss_A
from .objectives import EmptyGroupError
from .objectives import outcome_group_means

logger = logging.getLogger(__name__)

EVAL_FIELDS = (
    "dataset",
    "case",
    "split",
    "disparity",
    "accuracy",
    "cm",
    "mean_y_s1",
    "mean_y_s0",
    "logit_shift",
)


class Target(str, Enum):
    H = "H"
    Y = "Y"


@dataclass
class EvalReport:
    disparity: float
    accuracy: float
    group_means: Tuple[float, float]
    corrections: np.ndarray
    groups: np.ndarray
    cm: float = 0.0
    logit_shift: float = 0.0

    def as_row(self, dataset: str, case: str, split: int) -> Dict[str, object]:
        return {
            "dataset": dataset,
            "case": case,
            "split": split,
            "disparity": self.disparity,
            "accuracy": self.accuracy,
            "cm": self.cm,
            "mean_y_s1": self.group_means[0],
            "mean_y_s0": self.group_means[1],
            "logit_shift": self.logit_shift,
        }


def outcome_disparity(params: ModelParams, dataset: Dataset) -> float:
    return float(value_of(disparity_loss_A(params, dataset)))


def _probabilities(params: ModelParams, dataset: Dataset) -> Tuple[np.ndarray, np.ndarray]:
    observed, desired = decision_logits(params, dataset.design())
    return np.asarray(sigmoid(observed)), np.asarray(sigmoid(desired))


def decision_accuracy(params: ModelParams, dataset: Dataset) -> float:
    """Share of rows where the thresholded desired decision equals ``H``."""
    _, desired = _probabilities(params, dataset)
    predicted = (desired >= 0.5).astype(np.float64)
    hits = (predicted == dataset.h).astype(np.float64)
    return float(np.average(hits, weights=dataset.weights))


def corrections(params: ModelParams, dataset: Dataset) -> np.ndarray:
    """Per-row desired minus observed decision probability."""
    observed, desired = _probabilities(params, dataset)
    return desired - observed


def group_variance(
    values: np.ndarray,
    groups: np.ndarray,
    weights: Optional[np.ndarray] = None,
) -> float:
    """
    Within-group variance averaged over groups by group size.

    >>> group_variance(np.array([0.1, 0.1, -0.2, -0.2]), np.array([1, 1, 0, 0]))
    0.0
    >>> group_variance(np.array([0.0, 1.0, 0.5, 0.5]), np.array([1, 1, 0, 0]))
    0.125
    """
    values = np.asarray(values, dtype=np.float64)
    groups = np.asarray(groups)
    weights = np.ones_like(values) if weights is None else np.asarray(weights, dtype=np.float64)
    total = weights.sum()
    result = 0.0
    for group in (0, 1):
        member = groups == group
        if not member.any():
            raise EmptyGroupError(f"no rows with S={group}")
        if weights[member].sum() <= 1:
            logger.warning(f"group S={group} has a single row, its variance counts as 0")
            continue
        mean = np.average(values[member], weights=weights[member])
        variance = np.average((values[member] - mean) ** 2, weights=weights[member])
        result += weights[member].sum() / total * variance
    return float(result)


def consistency_measure(splits: Sequence[Tuple[np.ndarray, np.ndarray]]) -> float:
    """
    Mean over splits of the group-size weighted within-group variance of
    the corrections; each split is ``(corrections, groups)``.
    """
    if not splits:
        raise ValueError("consistency measure needs at least one split")
    return float(np.mean([group_variance(values, groups) for values, groups in splits]))


def consistency_ratio(cm_other: float, cm_lrd: float) -> float:
    """
    >>> round(consistency_ratio(0.2008, 0.0031), 2)
    64.77
    """
    if cm_lrd == 0:
        raise ZeroDivisionError("consistency measure of the model is 0")
    return cm_other / cm_lrd


def _entropy(p: float) -> float:
    return -sum(q * np.log(q) for q in (p, 1.0 - p) if q > 0)


def optimal_bce(spec: GeneratorSpec, target: Target) -> float:
    """
    Cross-entropy of the true conditional probabilities, computed exactly
    over every cell of the generator.
    """
    target = Target(target)
    total = 0.0
    for s, x, weight in spec.lattice():
        rate = spec.decision_rates[(s, x)]
        if target == Target.H:
            total += weight * _entropy(rate)
            continue
        for h, p_h in ((1, rate), (0, 1.0 - rate)):
            total += weight * p_h * _entropy(spec.outcome_rates[(s, x, h)])
    return float(total)


def decomposition(a_param: float, b_param: float, c_param: float) -> float:
    """
    >>> round(decomposition(0.6, 0.0572, 0.0953), 4)
    0.1144
    """
    return abs(a_param * c_param + b_param)


def group_logit_shift(params: ModelParams, dataset: Dataset) -> float:
    """Largest absolute mean logit shift over the two groups."""
    shift = np.asarray(logit_shift(params, dataset.x, dataset.s))
    means = []
    for group in (0, 1):
        member = dataset.s == group
        if member.any():
            means.append(abs(np.average(shift[member], weights=dataset.weights[member])))
    return float(max(means, default=0.0))


def top_features(
    params: ModelParams,
    feature_names: List[str],
    tol: float = 1e-3,
) -> List[Tuple[str, float]]:
    """
    Features feeding the disparity nodes, largest absolute weight first,
    ignoring weights below ``tol``.
    """
    arch = params.arch
    if len(feature_names) != arch.n_features:
        raise ValueError(
            f"{len(feature_names)} feature names for {arch.n_features} features",
        )
    columns = arch.disparity_columns() > 0
    weights = np.asarray(params.arrays()["rep_weights"])[1:, columns]
    strength = np.abs(weights).max(axis=1) if weights.size else np.zeros(arch.n_features)
    order = np.argsort(-strength, kind="stable")
    return [(feature_names[i], float(strength[i])) for i in order if strength[i] >= tol]


def evaluate(params: ModelParams, dataset: Dataset) -> EvalReport:
    mean1, mean0 = outcome_group_means(params, dataset)
    values = corrections(params, dataset)
    return EvalReport(
        disparity=outcome_disparity(params, dataset),
        accuracy=decision_accuracy(params, dataset),
        group_means=(float(value_of(mean1)), float(value_of(mean0))),
        corrections=values,
        groups=dataset.s.copy(),
        cm=group_variance(values, dataset.s, dataset.weights),
        logit_shift=group_logit_shift(params, dataset),
    )
