"""
The shallow decision network.

Inputs ``{S, X}`` feed ``m`` ReLU nodes. The observed decision head reads the
first ``m_obs`` nodes, the desired decision head reads all of them, and a
separate logistic outcome head reads ``{S, X, H}``. Nodes with index in
``[m_obs, m)`` are the disparity nodes.

Every forward function works on plain numpy parameters and on parameters
bound to a ``diffcore.Tape``.
"""
import logging
from dataclasses import dataclass
from dataclasses import replace
from enum import Enum
from pathlib import Path
from typing import Dict
from typing import Iterable
from typing import Tuple
from typing import Union

import numpy as np

from .diffcore import Node
from .diffcore import relu
from .diffcore import sigmoid
from .diffcore import Tape

logger = logging.getLogger(__name__)

Tensor = Union[np.ndarray, Node]

PARAM_NAMES = (
    "rep_weights",
    "rep_bias",
    "head_weights",
    "head_bias",
    "outcome_weights",
    "outcome_bias",
)


class DimensionError(ValueError):
    pass


class ParamGroup(str, Enum):
    OBSERVED = "observed"
    DISPARITY = "disparity"
    OUTCOME = "outcome"


@dataclass(frozen=True)
class ArchitectureConfig:
    n_features: int
    m: int
    m_obs: int

    def __post_init__(self):
        if self.n_features < 0:
            raise DimensionError(f"n_features must be >= 0, got {self.n_features}")
        if not 1 <= self.m_obs < self.m:
            raise DimensionError(
                f"need 1 <= m_obs < m, got m_obs={self.m_obs}, m={self.m}",
            )

    @property
    def disparity_nodes(self) -> int:
        return self.m - self.m_obs

    def disparity_columns(self) -> np.ndarray:
        """
        >>> ArchitectureConfig(n_features=2, m=4, m_obs=1).disparity_columns()
        array([0., 1., 1., 1.])
        """
        mask = np.zeros(self.m)
        mask[self.m_obs :] = 1.0
        return mask

    def observed_columns(self) -> np.ndarray:
        return 1.0 - self.disparity_columns()


@dataclass
class ModelParams:
    rep_weights: Tensor
    rep_bias: Tensor
    head_weights: Tensor
    head_bias: Tensor
    outcome_weights: Tensor
    outcome_bias: Tensor
    m_obs: int

    @classmethod
    def zeros(cls, arch: ArchitectureConfig) -> "ModelParams":
        return cls(
            rep_weights=np.zeros((arch.n_features + 1, arch.m)),
            rep_bias=np.zeros(arch.m),
            head_weights=np.zeros(arch.m),
            head_bias=np.zeros(()),
            outcome_weights=np.zeros(arch.n_features + 2),
            outcome_bias=np.zeros(()),
            m_obs=arch.m_obs,
        )

    @property
    def arch(self) -> ArchitectureConfig:
        n_inputs, m = np.shape(_value(self.rep_weights))
        return ArchitectureConfig(n_features=n_inputs - 1, m=m, m_obs=self.m_obs)

    def arrays(self) -> Dict[str, np.ndarray]:
        return {name: np.asarray(_value(getattr(self, name))) for name in PARAM_NAMES}

    def copy(self) -> "ModelParams":
        return replace(self, **{k: v.copy() for k, v in self.arrays().items()})

    def to_vector(self) -> np.ndarray:
        return np.concatenate([v.ravel() for v in self.arrays().values()])

    @classmethod
    def from_vector(cls, arch: ArchitectureConfig, vector: np.ndarray) -> "ModelParams":
        template = cls.zeros(arch).arrays()
        size = sum(v.size for v in template.values())
        if vector.size != size:
            raise DimensionError(f"expected {size} values, got {vector.size}")
        values = {}
        offset = 0
        for name, array in template.items():
            values[name] = vector[offset : offset + array.size].reshape(array.shape)
            offset += array.size
        return cls(m_obs=arch.m_obs, **values)

    def on_tape(self, tape: Tape) -> "ModelParams":
        return replace(self, **{k: tape.input(v) for k, v in self.arrays().items()})

    def grads(self) -> "ModelParams":
        return replace(
            self,
            **{name: getattr(self, name).grad.copy() for name in PARAM_NAMES},
        )

    def group_mask(self, groups: Iterable[ParamGroup]) -> "ModelParams":
        """1.0 on every parameter of the given groups, 0.0 elsewhere."""
        arch = self.arch
        groups = set(groups)
        disparity = arch.disparity_columns()
        observed = arch.observed_columns()
        rep = np.zeros(arch.m)
        head_bias = 0.0
        outcome = 0.0
        if ParamGroup.OBSERVED in groups:
            rep = rep + observed
            head_bias = 1.0
        if ParamGroup.DISPARITY in groups:
            rep = rep + disparity
        if ParamGroup.OUTCOME in groups:
            outcome = 1.0
        return ModelParams(
            rep_weights=np.broadcast_to(rep, (arch.n_features + 1, arch.m)).copy(),
            rep_bias=rep.copy(),
            head_weights=rep.copy(),
            head_bias=np.asarray(head_bias),
            outcome_weights=np.full(arch.n_features + 2, outcome),
            outcome_bias=np.asarray(outcome),
            m_obs=arch.m_obs,
        )

    def zero_disparity(self) -> "ModelParams":
        keep = self.group_mask([ParamGroup.OBSERVED, ParamGroup.OUTCOME])
        return ModelParams.from_vector(self.arch, self.to_vector() * keep.to_vector())

    def disparity_node(self, index: int) -> Dict[str, object]:
        """Weights of the ``index``-th disparity node (0-based)."""
        column = self.m_obs + index
        arrays = self.arrays()
        return {
            "w": float(arrays["head_weights"][column]),
            "w_sr": float(arrays["rep_weights"][0, column]),
            "w_xr": arrays["rep_weights"][1:, column].copy(),
            "bias": float(arrays["rep_bias"][column]),
        }


def _value(x):
    return x.value if isinstance(x, Node) else x


def design_matrix(x, s, n_features: int) -> Tuple[np.ndarray, bool]:
    """
    Stack ``S`` in front of ``X``; a 1-D ``x`` is a single row.

    >>> design_matrix([1, 0], 1, 2)
    (array([[1., 1., 0.]]), True)
    >>> design_matrix(np.zeros((2, 0)), [0, 1], 0)[0].shape
    (2, 1)
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x) if single else x
    if x.ndim != 2:
        raise DimensionError(f"features must be 1-D or 2-D, got {x.ndim}-D")
    s = np.broadcast_to(np.asarray(s, dtype=np.float64), (x.shape[0],))
    if x.shape[1] != n_features:
        raise DimensionError(f"expected {n_features} features, got {x.shape[1]}")
    return np.column_stack([s, x]), single


def _squeeze(value, single: bool):
    if single and not isinstance(value, Node):
        return float(np.asarray(value)[0])
    return value


def hidden_layer(params: ModelParams, design: np.ndarray) -> Tensor:
    return relu(design @ params.rep_weights + params.rep_bias)


def decision_logits(params: ModelParams, design: np.ndarray) -> Tuple[Tensor, Tensor]:
    """Observed and desired decision logits sharing one hidden layer."""
    arch = params.arch
    hidden = hidden_layer(params, design)
    observed = hidden @ (params.head_weights * arch.observed_columns())
    observed = observed + params.head_bias
    shift = hidden @ (params.head_weights * arch.disparity_columns())
    return observed, observed + shift


def forward_observed(params: ModelParams, x, s) -> Tensor:
    """
    >>> arch = ArchitectureConfig(n_features=1, m=2, m_obs=1)
    >>> forward_observed(ModelParams.zeros(arch), [1], 0)
    0.5
    """
    design, single = design_matrix(x, s, params.arch.n_features)
    observed, _ = decision_logits(params, design)
    return _squeeze(sigmoid(observed), single)


def forward_desired(params: ModelParams, x, s) -> Tensor:
    design, single = design_matrix(x, s, params.arch.n_features)
    _, desired = decision_logits(params, design)
    return _squeeze(sigmoid(desired), single)


def outcome_logit(params: ModelParams, x, s, h) -> Tensor:
    design, _ = design_matrix(x, s, params.arch.n_features)
    h = np.broadcast_to(np.asarray(h, dtype=np.float64), (design.shape[0],))
    if np.any((h != 0) & (h != 1)):
        raise ValueError("decision input of the outcome head must be 0 or 1")
    return np.column_stack([design, h]) @ params.outcome_weights + params.outcome_bias


def forward_outcome(params: ModelParams, x, s, h) -> Tensor:
    """
    >>> arch = ArchitectureConfig(n_features=0, m=2, m_obs=1)
    >>> forward_outcome(ModelParams.zeros(arch), [], 1, 1)
    0.5
    """
    single = np.ndim(x) == 1
    return _squeeze(sigmoid(outcome_logit(params, x, s, h)), single)


def logit_shift(params: ModelParams, x, s) -> Tensor:
    """Desired minus observed decision logit, per row."""
    design, single = design_matrix(x, s, params.arch.n_features)
    hidden = hidden_layer(params, design)
    shift = hidden @ (params.head_weights * params.arch.disparity_columns())
    return _squeeze(shift, single)


def representational_disparity(params: ModelParams, x) -> Tensor:
    """``RD(x, 1) - RD(x, 0)`` summed over the disparity nodes."""
    return logit_shift(params, x, 1) - logit_shift(params, x, 0)


def params_to_text(params: ModelParams) -> str:
    lines = [f"m_obs\tscalar\t{params.m_obs}"]
    for name, array in params.arrays().items():
        shape = "x".join(str(i) for i in array.shape) or "scalar"
        values = " ".join(repr(float(v)) for v in array.ravel())
        lines.append(f"{name}\t{shape}\t{values}")
    return "\n".join(lines) + "\n"


def params_from_text(text: str) -> ModelParams:
    values: Dict[str, np.ndarray] = {}
    m_obs = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            name, shape, raw = line.split("\t")
        except ValueError:
            raise ValueError(f"malformed parameter line {lineno}: {line!r}")
        if name == "m_obs":
            m_obs = int(raw)
            continue
        dims = () if shape == "scalar" else tuple(int(i) for i in shape.split("x"))
        flat = np.array([float(v) for v in raw.split()], dtype=np.float64)
        values[name] = flat.reshape(dims)
    missing = [name for name in PARAM_NAMES if name not in values]
    if m_obs is None or missing:
        raise ValueError(f"parameter text is incomplete, missing {missing or 'm_obs'}")
    params = ModelParams(m_obs=m_obs, **{k: values[k] for k in PARAM_NAMES})
    arch = params.arch
    expected = ModelParams.zeros(arch).arrays()
    for name in PARAM_NAMES:
        if values[name].shape != expected[name].shape:
            raise DimensionError(
                f"{name} has shape {values[name].shape}, "
                f"expected {expected[name].shape}",
            )
    return params


def dump_params(params: ModelParams, path: Path) -> None:
    Path(path).write_text(params_to_text(params))


def load_params(path: Path) -> ModelParams:
    return params_from_text(Path(path).read_text())


