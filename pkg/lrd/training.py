"""
Two-phase training.

Phase 1 fits the observed decision head and the outcome head on C and D
with the disparity nodes held at zero. Phase 2 freezes those parameters and
trains only the disparity nodes on the full weighted loss. Each phase runs
several independently seeded fits and keeps the one with the lowest
selection loss.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from dataclasses import field
from enum import Enum
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np

from .data import Dataset
from .diffcore import logit
from .diffcore import Tape
from .network import ArchitectureConfig
from .network import ModelParams
from .network import ParamGroup
from .objectives import bce_loss_C
from .objectives import loss_components
from .objectives import LossBreakdown
from .objectives import LossWeights
from .utils import derive_seed
from .utils import make_rng
from .utils import STREAM_FOLDS
from .utils import STREAM_INIT

logger = logging.getLogger(__name__)

DEFAULT_LOSS_WEIGHTS = LossWeights.from_a(0.99)


class InitError(ValueError):
    pass


class InitScheme(str, Enum):
    UNIFORM_SMALL = "uniform_small"
    THEOREM41_REGION = "theorem41_region"


class Phase(str, Enum):
    OBSERVED_OUTCOME = "observed_outcome"
    DISPARITY = "disparity"


PHASE_KEYS = {Phase.OBSERVED_OUTCOME: 1, Phase.DISPARITY: 2}


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 1000
    fits: int = 100
    learning_rate: float = 0.01
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    master_seed: int = 0
    init_scheme: InitScheme = InitScheme.UNIFORM_SMALL
    jobs: int = 1
    log_every: int = 10

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.fits < 1:
            raise ValueError(f"fits must be >= 1, got {self.fits}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning rate must be > 0, got {self.learning_rate}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")
        if self.log_every < 1:
            raise ValueError(f"log_every must be >= 1, got {self.log_every}")


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, size: int) -> "AdamState":
        return cls(m=np.zeros(size), v=np.zeros(size))


def adam_step(
    params: np.ndarray,
    grads: np.ndarray,
    state: AdamState,
    config: TrainConfig,
    mask: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, AdamState]:
    """
    One bias-corrected Adam update; entries where ``mask`` is 0 stay put.

    >>> config = TrainConfig(learning_rate=0.01)
    >>> theta, state = adam_step(np.array([1.0]), np.array([4.0]),
    ...                          AdamState.zeros(1), config)
    >>> round(float(theta[0]), 6)
    0.99
    """
    if state.m.shape != params.shape or grads.shape != params.shape:
        raise ValueError("Adam state, parameters and gradients differ in shape")
    if mask is None:
        mask = np.ones_like(params)
    g = grads * mask
    t = state.t + 1
    m = config.adam_beta1 * state.m + (1.0 - config.adam_beta1) * g
    v = config.adam_beta2 * state.v + (1.0 - config.adam_beta2) * (g * g)
    m_hat = m / (1.0 - config.adam_beta1**t)
    v_hat = v / (1.0 - config.adam_beta2**t)
    step = config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_eps)
    return params - step * mask, AdamState(m=m, v=v, t=t)


@dataclass(frozen=True)
class DisparityInit:
    """Pinned starting weights for one disparity node."""

    w: float
    w_sr: float
    bias: float
    node: int = 0


CASE_1_INIT = DisparityInit(w=-1.735, w_sr=1.735, bias=0.0)
CASE_2_INIT = DisparityInit(w=5.0, w_sr=0.0, bias=5.0)
CASE_3_INIT = DisparityInit(w=-1.0, w_sr=1.0, bias=-1.0)


def init_params(
    arch: ArchitectureConfig,
    scheme: InitScheme,
    seed: int,
    delta_hint: Optional[float] = None,
) -> ModelParams:
    """
    Draw every parameter from U(-0.5, 0.5). ``theorem41_region`` then
    redraws each disparity node inside the region where gradient descent
    reaches the single-node optimum: ``w_sr > 0``, ``bias >= -w_sr`` and
    ``w`` with the opposite sign of ``delta_hint``.
    """
    scheme = InitScheme(scheme)
    if scheme == InitScheme.THEOREM41_REGION and not delta_hint:
        raise InitError("theorem41_region needs a non-zero delta_hint")
    rng = make_rng(seed, STREAM_INIT)
    size = ModelParams.zeros(arch).to_vector().size
    params = ModelParams.from_vector(arch, rng.uniform(-0.5, 0.5, size))
    if scheme == InitScheme.THEOREM41_REGION:
        sign = -np.sign(delta_hint)
        for column in range(arch.m_obs, arch.m):
            w_sr = rng.uniform(0.1, 1.0)
            params.rep_weights[0, column] = w_sr
            params.rep_weights[1:, column] = 0.0
            params.rep_bias[column] = rng.uniform(-w_sr, 0.5)
            params.head_weights[column] = sign * rng.uniform(0.1, 1.0)
    return params


def pin_disparity_node(params: ModelParams, init: DisparityInit) -> ModelParams:
    params = params.copy()
    column = params.m_obs + init.node
    if column >= params.arch.m:
        raise InitError(f"no disparity node {init.node} in {params.arch}")
    params.rep_weights[0, column] = init.w_sr
    params.rep_weights[1:, column] = 0.0
    params.rep_bias[column] = init.bias
    params.head_weights[column] = init.w
    return params


def observed_delta(dataset: Dataset) -> float:
    """Logit gap of the observed decision rates, ``S=1`` minus ``S=0``."""
    rates = [np.clip(dataset.group_rate(dataset.h, s), 1e-6, 1 - 1e-6) for s in (1, 0)]
    return logit(rates[0]) - logit(rates[1])


@dataclass
class FitResult:
    params: ModelParams
    final_losses: LossBreakdown
    seed: int
    phase: Phase
    fit_index: int = 0
    selection_loss: float = 0.0
    history: List[LossBreakdown] = field(default_factory=list, repr=False)
    epochs_logged: List[int] = field(default_factory=list, repr=False)

    def log_rows(self) -> List[Dict[str, float]]:
        return [
            loss.as_row(self.fit_index, epoch)
            for epoch, loss in zip(self.epochs_logged, self.history)
        ]


def fit_params(
    dataset: Dataset,
    params: ModelParams,
    trainable: np.ndarray,
    objective: Callable[[Tuple], object],
    loss_weights: LossWeights,
    config: TrainConfig,
) -> Tuple[ModelParams, List[int], List[LossBreakdown]]:
    """Full-batch Adam on ``objective(A, B, C, D)``, one step per epoch."""
    arch = params.arch
    theta = params.to_vector()
    state = AdamState.zeros(theta.size)
    epochs, history = [], []
    for epoch in range(1, config.epochs + 1):
        tape = Tape()
        bound = ModelParams.from_vector(arch, theta).on_tape(tape)
        components = loss_components(bound, dataset)
        objective(components).backward()
        if epoch == 1 or epoch % config.log_every == 0 or epoch == config.epochs:
            epochs.append(epoch)
            history.append(LossBreakdown.from_components(components, loss_weights))
        theta, state = adam_step(
            theta,
            bound.grads().to_vector(),
            state,
            config,
            trainable,
        )
    return ModelParams.from_vector(arch, theta), epochs, history


def _run_fits(
    fit: Callable[[int], FitResult],
    fits: int,
    jobs: int,
) -> List[FitResult]:
    if jobs == 1:
        return [fit(i) for i in range(fits)]
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(fit, range(fits)))


def _select(
    results: Sequence[FitResult],
    on_fit: Optional[Callable[[FitResult], None]],
) -> FitResult:
    for result in results:
        if on_fit:
            on_fit(result)
    best = min(results, key=lambda r: (r.selection_loss, r.fit_index))
    logger.info(
        f"{best.phase.value}: fit {best.fit_index} selected of {len(results)}, "
        f"loss={best.selection_loss:.6f}",
    )
    return best


def train_phase1(
    dataset: Dataset,
    arch: ArchitectureConfig,
    config: TrainConfig,
    loss_weights: LossWeights = DEFAULT_LOSS_WEIGHTS,
    on_fit: Optional[Callable[[FitResult], None]] = None,
) -> FitResult:
    """Best of ``config.fits`` restarts on ``c·C + d·D``."""
    data = dataset.compress()
    trainable = ModelParams.zeros(arch).group_mask(
        [ParamGroup.OBSERVED, ParamGroup.OUTCOME],
    )

    def objective(components):
        _, _, C, D = components
        return loss_weights.c * C + loss_weights.d * D

    def fit(index: int) -> FitResult:
        seed = derive_seed(config.master_seed, PHASE_KEYS[Phase.OBSERVED_OUTCOME], index)
        start = init_params(arch, InitScheme.UNIFORM_SMALL, seed).zero_disparity()
        params, epochs, history = fit_params(
            data,
            start,
            trainable.to_vector(),
            objective,
            loss_weights,
            config,
        )
        final = LossBreakdown.from_components(loss_components(params, data), loss_weights)
        return FitResult(
            params=params,
            final_losses=final,
            seed=seed,
            phase=Phase.OBSERVED_OUTCOME,
            fit_index=index,
            selection_loss=loss_weights.c * final.C + loss_weights.d * final.D,
            history=history,
            epochs_logged=epochs,
        )

    return _select(_run_fits(fit, config.fits, config.jobs), on_fit)


def train_phase2(
    dataset: Dataset,
    frozen: FitResult,
    loss_weights: LossWeights,
    config: TrainConfig,
    disparity_init: Optional[DisparityInit] = None,
    on_fit: Optional[Callable[[FitResult], None]] = None,
) -> FitResult:
    """
    Best of ``config.fits`` restarts on the total loss, moving only the
    disparity nodes. A pinned ``disparity_init`` makes every restart
    identical, so a single fit is run.
    """
    data = dataset.compress()
    base = frozen.params.copy()
    arch = base.arch
    trainable = base.group_mask([ParamGroup.DISPARITY]).to_vector()
    delta_hint = None
    if InitScheme(config.init_scheme) == InitScheme.THEOREM41_REGION:
        delta_hint = observed_delta(data)
    fits = 1 if disparity_init else config.fits

    def fit(index: int) -> FitResult:
        seed = derive_seed(config.master_seed, PHASE_KEYS[Phase.DISPARITY], index)
        drawn = init_params(arch, config.init_scheme, seed, delta_hint)
        vector = base.to_vector() * (1 - trainable) + drawn.to_vector() * trainable
        start = ModelParams.from_vector(arch, vector)
        if disparity_init:
            start = pin_disparity_node(start, disparity_init)
        params, epochs, history = fit_params(
            data,
            start,
            trainable,
            _apply_combine(loss_weights),
            loss_weights,
            config,
        )
        final = LossBreakdown.from_components(loss_components(params, data), loss_weights)
        return FitResult(
            params=params,
            final_losses=final,
            seed=seed,
            phase=Phase.DISPARITY,
            fit_index=index,
            selection_loss=final.total,
            history=history,
            epochs_logged=epochs,
        )

    return _select(_run_fits(fit, fits, config.jobs), on_fit)


def _apply_combine(weights: LossWeights):
    return lambda components: weights.combine(*components)


@dataclass(frozen=True)
class CandidateScore:
    m_obs: int
    train_loss: float
    validation_loss: float


@dataclass(frozen=True)
class ModelSelection:
    m_obs: int
    scores: Tuple[CandidateScore, ...]


def kfold_select_m_obs(
    dataset: Dataset,
    candidates: Sequence[int],
    folds: int,
    config: TrainConfig,
) -> ModelSelection:
    """
    Pick the number of observed nodes by k-fold cross-validated C;
    ties go to the smaller candidate.
    """
    if folds < 2:
        raise ValueError(f"need at least 2 folds, got {folds}")
    if not candidates:
        raise ValueError("no m_obs candidates given")
    for candidate in candidates:
        if not 1 <= candidate <= dataset.n_features:
            raise ValueError(
                f"m_obs candidate {candidate} outside [1, {dataset.n_features}] "
                f"for {dataset.n_features} features",
            )
    if len(candidates) == 1:
        return ModelSelection(candidates[0], ())
    order = make_rng(config.master_seed, STREAM_FOLDS).permutation(dataset.n_rows)
    parts = np.array_split(order, folds)

    def objective(components):
        return components[2]

    scores = []
    for candidate in sorted(set(candidates)):
        arch = ArchitectureConfig(dataset.n_features, candidate + 1, candidate)
        trainable = ModelParams.zeros(arch).group_mask([ParamGroup.OBSERVED]).to_vector()
        train_losses, validation_losses = [], []
        for k, held_out in enumerate(parts):
            rest = np.concatenate([p for j, p in enumerate(parts) if j != k])
            train = dataset.subset(rest).compress()
            validation = dataset.subset(held_out).compress()

            def fit(index: int) -> Tuple[float, float]:
                seed = derive_seed(config.master_seed, candidate, k, index)
                start = init_params(arch, InitScheme.UNIFORM_SMALL, seed).zero_disparity()
                params, _, _ = fit_params(
                    train,
                    start,
                    trainable,
                    objective,
                    DEFAULT_LOSS_WEIGHTS,
                    config,
                )
                return float(bce_loss_C(params, train)), float(
                    bce_loss_C(params, validation),
                )

            if config.jobs == 1:
                results = [fit(i) for i in range(config.fits)]
            else:
                with ThreadPoolExecutor(max_workers=config.jobs) as executor:
                    results = list(executor.map(fit, range(config.fits)))
            best_train, best_validation = min(results)
            train_losses.append(best_train)
            validation_losses.append(best_validation)
        score = CandidateScore(
            candidate,
            float(np.mean(train_losses)),
            float(np.mean(validation_losses)),
        )
        logger.info(
            f"m_obs={candidate}: train C={score.train_loss:.4f} "
            f"validation C={score.validation_loss:.4f}",
        )
        scores.append(score)
    best = min(scores, key=lambda s: (s.validation_loss, s.m_obs))
    return ModelSelection(best.m_obs, tuple(scores))
