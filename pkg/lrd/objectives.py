import logging
from dataclasses import dataclass
from dataclasses import field
from typing import Dict
from typing import Tuple
from typing import TYPE_CHECKING
from typing import Union

import numpy as np

from .diffcore import clip
from .diffcore import log
from .diffcore import sigmoid
from .diffcore import value_of
from .network import decision_logits
from .network import ModelParams
from .network import outcome_logit
from .network import Tensor

if TYPE_CHECKING:
    from .data import Dataset

logger = logging.getLogger(__name__)

BCE_EPSILON = 1e-7
LOSS_FIELDS = ("fit_id", "epoch", "A", "B", "C", "D", "total")


class InvalidLossWeights(ValueError):
    pass


class EmptyGroupError(ValueError):
    pass


@dataclass(frozen=True)
class LossWeights:
    a: float
    b: float
    c: float
    d: float
    allow_small_c: bool = False
    checked: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if self.checked:
            self.validate()

    def validate(self) -> None:
        if min(self.a, self.b, self.c, self.d) < 0:
            raise InvalidLossWeights(f"loss weights must be nonnegative: {self}")
        if not 0 < self.a < 1:
            raise InvalidLossWeights(f"a must be in (0, 1), got {self.a}")
        if abs(self.b - (1 - self.a)) > 1e-9:
            raise InvalidLossWeights(f"b must equal 1 - a, got a={self.a} b={self.b}")
        if self.c != self.d:
            raise InvalidLossWeights(f"c must equal d, got c={self.c} d={self.d}")
        if self.c < 100 * self.a and not self.allow_small_c:
            raise InvalidLossWeights(
                f"c={self.c} is not much larger than a={self.a}; "
                "set allow_small_c to override",
            )

    @classmethod
    def from_a(cls, a: float, c: float = 1000.0, allow_small_c: bool = False):
        """
        >>> LossWeights.from_a(0.99).b
        0.01
        """
        return cls(a=a, b=round(1.0 - a, 12), c=c, d=c, allow_small_c=allow_small_c)

    @classmethod
    def unchecked(cls, a: float, b: float, c: float, d: float) -> "LossWeights":
        return cls(a=a, b=b, c=c, d=d, checked=False)

    def combine(self, A, B, C, D):
        return self.a * A + self.b * B + self.c * C + self.d * D


@dataclass(frozen=True)
class LossBreakdown:
    A: float
    B: float
    C: float
    D: float
    total: float

    @classmethod
    def from_components(
        cls,
        components: Tuple[Tensor, Tensor, Tensor, Tensor],
        weights: LossWeights,
    ) -> "LossBreakdown":
        A, B, C, D = (float(value_of(c)) for c in components)
        return cls(A=A, B=B, C=C, D=D, total=weights.combine(A, B, C, D))

    def tradeoff(self, weights: LossWeights) -> float:
        """``a·A + b·B``, the part the theorem oracles minimize."""
        return weights.a * self.A + weights.b * self.B

    def as_row(self, fit_id: int, epoch: int) -> Dict[str, Union[int, float]]:
        return {
            "fit_id": fit_id,
            "epoch": epoch,
            "A": self.A,
            "B": self.B,
            "C": self.C,
            "D": self.D,
            "total": self.total,
        }


def group_weights(dataset: "Dataset", group: int) -> np.ndarray:
    """Row weights normalized to sum to one inside ``S == group``."""
    weights = dataset.weights * (dataset.s == group)
    total = weights.sum()
    if total <= 0:
        raise EmptyGroupError(f"dataset has no rows with S={group}")
    return weights / total


def outcome_group_means(
    params: ModelParams,
    dataset: "Dataset",
    desired_logit: Tensor = None,
) -> Tuple[Tensor, Tensor]:
    """
    ``Pr(Y=1 | S=1)`` and ``Pr(Y=1 | S=0)`` under the desired decision,
    marginalizing the outcome head over both decision values.
    """
    if desired_logit is None:
        _, desired_logit = decision_logits(params, dataset.design())
    p = sigmoid(desired_logit)
    accept = sigmoid(outcome_logit(params, dataset.x, dataset.s, 1))
    reject = sigmoid(outcome_logit(params, dataset.x, dataset.s, 0))
    expected = accept * p + reject * (1.0 - p)
    mean1 = (expected * group_weights(dataset, 1)).sum()
    mean0 = (expected * group_weights(dataset, 0)).sum()
    return mean1, mean0


def disparity_loss_A(params: ModelParams, dataset: "Dataset") -> Tensor:
    mean1, mean0 = outcome_group_means(params, dataset)
    return abs(mean1 - mean0)


def interpretability_loss_B(params: ModelParams) -> Tensor:
    columns = params.arch.disparity_columns()
    return (
        (abs(params.rep_weights) * columns).sum()
        + (abs(params.rep_bias) * columns).sum()
        + (abs(params.head_weights) * columns).sum()
    )


def bce(p: Tensor, labels: np.ndarray, weights: np.ndarray) -> Tensor:
    """
    Weighted binary cross-entropy with probabilities clipped to
    ``[BCE_EPSILON, 1 - BCE_EPSILON]``.

    >>> round(float(bce(np.full(4, 0.5), np.array([0, 1, 1, 0]), np.ones(4))), 4)
    0.6931
    """
    p = clip(p, BCE_EPSILON, 1.0 - BCE_EPSILON)
    losses = -(labels * log(p) + (1.0 - labels) * log(1.0 - p))
    return (losses * weights).sum() / weights.sum()


def bce_loss_C(params: ModelParams, dataset: "Dataset") -> Tensor:
    observed, _ = decision_logits(params, dataset.design())
    return bce(sigmoid(observed), dataset.h, dataset.weights)


def bce_loss_D(params: ModelParams, dataset: "Dataset") -> Tensor:
    logits = outcome_logit(params, dataset.x, dataset.s, dataset.h)
    return bce(sigmoid(logits), dataset.y, dataset.weights)


def loss_components(
    params: ModelParams,
    dataset: "Dataset",
) -> Tuple[Tensor, Tensor, Tensor, Tensor]:
    observed, desired = decision_logits(params, dataset.design())
    mean1, mean0 = outcome_group_means(params, dataset, desired_logit=desired)
    A = abs(mean1 - mean0)
    B = interpretability_loss_B(params)
    C = bce(sigmoid(observed), dataset.h, dataset.weights)
    D = bce_loss_D(params, dataset)
    return A, B, C, D


def total_loss(
    params: ModelParams,
    dataset: "Dataset",
    weights: LossWeights,
) -> LossBreakdown:
    return LossBreakdown.from_components(loss_components(params, dataset), weights)
