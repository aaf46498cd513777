"""
Optima of the disparity/interpretability trade-off for a single disparity
node, in closed form where one exists and numerically otherwise, plus brute
force grid oracles to cross-check them.

A scenario fixes the observed decision logit ``l`` of group ``S=0``, the gap
``delta`` added for ``S=1``, the outcome gap ``alpha`` and the weight ``a``.
With one disparity node ``(w, w_sr, bias)`` the desired decision of group
``s`` is ``sigmoid(l + delta*s + w*relu(w_sr*s + bias))`` and the loss is
``a*|alpha|*|D(1) - D(0)| + (1 - a)*(|w| + |w_sr| + |bias|)``.
"""
import logging
import math
from dataclasses import dataclass
from dataclasses import replace
from enum import Enum
from typing import Callable
from typing import Dict
from typing import Iterable
from typing import List
from typing import Optional
from typing import Tuple

import numpy as np

from .diffcore import logit
from .diffcore import sigmoid

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2
SEARCH_POINTS = 4000
SEARCH_TOL = 1e-8


class InvalidScenario(ValueError):
    pass


class BranchKind(str, Enum):
    SD = "SD"
    EI = "EI"
    SI = "SI"
    ED = "ED"


class Branch(str, Enum):
    L1 = "L1"
    L2 = "L2"
    L3 = "L3"
    L4 = "L4"
    THM41 = "thm41"
    THM42 = "thm42"


# branch -> (gap function, (w, w_sr, bias) as multiples of B/2)
BRANCHES = {
    Branch.L1: (BranchKind.SD, (-1.0, 1.0, 0.0)),
    Branch.L2: (BranchKind.EI, (1.0, 0.0, 1.0)),
    Branch.L3: (BranchKind.SI, (1.0, 1.0, 0.0)),
    Branch.L4: (BranchKind.ED, (-1.0, 0.0, 1.0)),
}


@dataclass(frozen=True)
class TheoremScenario:
    delta: float
    alpha: float
    logit_o0: float
    a: float

    def __post_init__(self):
        values = (self.delta, self.alpha, self.logit_o0, self.a)
        if not all(math.isfinite(v) for v in values):
            raise InvalidScenario(f"scenario values must be finite: {self}")
        if self.delta == 0:
            raise InvalidScenario("delta must be non-zero")
        if self.alpha == 0:
            raise InvalidScenario("alpha must be non-zero")
        if not 0 < self.a < 1:
            raise InvalidScenario(f"a must be in (0, 1), got {self.a}")

    @classmethod
    def from_rates(
        cls,
        rate_s0: float,
        rate_s1: float,
        alpha: float,
        a: float,
    ) -> "TheoremScenario":
        """
        Scenario from the observed acceptance rates of both groups.

        >>> s = TheoremScenario.from_rates(0.01, 0.6, alpha=1.0, a=0.9)
        >>> round(s.logit_o0, 2), round(s.delta, 2)
        (-4.6, 5.0)
        """
        l0 = logit(rate_s0)
        return cls(delta=logit(rate_s1) - l0, alpha=alpha, logit_o0=l0, a=a)

    @property
    def feasible_bound(self) -> float:
        """Largest useful ``B``; beyond it the zero-disparity optimum is cheaper."""
        return 2.0 * math.sqrt(abs(self.delta))

    @property
    def branches(self) -> Tuple[Branch, Branch]:
        return (Branch.L1, Branch.L2) if self.delta > 0 else (Branch.L3, Branch.L4)

    def mirrored(self) -> "TheoremScenario":
        return replace(self, delta=-self.delta, logit_o0=-self.logit_o0)


@dataclass(frozen=True)
class OptimumReport:
    l_min: float
    weights: Tuple[float, float, float]
    branch: Branch
    b_opti: Optional[float] = None
    node: int = 0
    nodes: int = 1
    resolution: Optional[float] = None

    @property
    def w(self) -> float:
        return self.weights[0]

    @property
    def w_sr(self) -> float:
        return self.weights[1]

    @property
    def bias(self) -> float:
        return self.weights[2]

    def node_weights(self) -> np.ndarray:
        """``(nodes, 3)`` array of ``(w, w_sr, bias)``, zero off the active node."""
        table = np.zeros((self.nodes, 3))
        table[self.node] = self.weights
        return table

    def as_row(self) -> Dict[str, object]:
        return {
            "branch": self.branch.value,
            "l_min": self.l_min,
            "w": self.w,
            "w_sr": self.w_sr,
            "bias": self.bias,
            "b_opti": "" if self.b_opti is None else self.b_opti,
            "node": self.node,
            "nodes": self.nodes,
            "resolution": "" if self.resolution is None else self.resolution,
        }

    def describe(self) -> str:
        text = (
            f"branch {self.branch.value}: L_min={self.l_min:.6f} "
            f"w={self.w:.6f} w_SR={self.w_sr:.6f} bias={self.bias:.6f}"
        )
        if self.b_opti is not None:
            text += f" B_opti={self.b_opti:.6f}"
        if self.nodes > 1:
            text += f" (node {self.node + 1} of {self.nodes})"
        if self.resolution is not None:
            text += f" +/- {self.resolution:.4f}"
        return text


REPORT_FIELDS = tuple(OptimumReport(0.0, (0.0, 0.0, 0.0), Branch.L1).as_row())


def _check_delta(delta: float) -> None:
    if delta == 0 or not math.isfinite(delta):
        raise InvalidScenario(f"delta must be finite and non-zero, got {delta}")


def thm41_optimum(delta: float) -> OptimumReport:
    """
    Cheapest single node that removes the gap entirely.

    >>> report = thm41_optimum(-1.2528)
    >>> round(report.l_min, 4), round(report.w, 4), round(report.w_sr, 4)
    (2.2386, 1.1193, 1.1193)
    """
    _check_delta(delta)
    root = math.sqrt(abs(delta))
    return OptimumReport(
        l_min=2.0 * root,
        weights=(-math.copysign(root, delta), root, 0.0),
        branch=Branch.THM41,
        b_opti=2.0 * root,
    )


def thm42_optimum(delta: float, k: int) -> List[OptimumReport]:
    """One equivalent optimum per choice of the single active node."""
    if k < 1:
        raise InvalidScenario(f"need at least one disparity node, got {k}")
    single = thm41_optimum(delta)
    branch = Branch.THM41 if k == 1 else Branch.THM42
    return [replace(single, branch=branch, node=i, nodes=k) for i in range(k)]


def branch_fn(kind: BranchKind, x, scenario: TheoremScenario):
    """
    Remaining decision gap after shifting logits by ``x >= 0``.

    >>> s = TheoremScenario(delta=5.0, alpha=1.0, logit_o0=-4.595, a=0.9)
    >>> abs(branch_fn(BranchKind.SD, 5.0, s)) < 1e-12
    True
    """
    if np.any(np.asarray(x) < 0):
        raise ValueError("logit shift must be nonnegative")
    low = scenario.logit_o0
    high = scenario.logit_o0 + scenario.delta
    kind = BranchKind(kind)
    if kind == BranchKind.SD:
        return sigmoid(high - x) - sigmoid(low)
    if kind == BranchKind.EI:
        return sigmoid(high + x) - sigmoid(low + x)
    if kind == BranchKind.SI:
        return sigmoid(low) - sigmoid(high + x)
    return sigmoid(low - x) - sigmoid(high - x)


def branch_loss(branch: Branch, b, scenario: TheoremScenario):
    """``(1 - a)*B + a*|alpha|*|gap(B^2/4)|`` along one weight pattern."""
    kind, _ = BRANCHES[Branch(branch)]
    b = np.asarray(b, dtype=np.float64)
    gap = branch_fn(kind, b * b / 4.0, scenario)
    return (1 - scenario.a) * b + scenario.a * abs(scenario.alpha) * np.abs(gap)


def branch_weights(branch: Branch, b: float) -> Tuple[float, float, float]:
    _, pattern = BRANCHES[Branch(branch)]
    return tuple(float(p * b / 2.0) + 0.0 for p in pattern)


def scenario_loss(scenario: TheoremScenario, w, w_sr, bias):
    """Trade-off loss of one disparity node; broadcasts over arrays."""
    w, w_sr, bias = np.broadcast_arrays(
        *(np.asarray(v, dtype=np.float64) for v in (w, w_sr, bias)),
    )
    desired1 = sigmoid(
        scenario.logit_o0 + scenario.delta + w * np.maximum(w_sr + bias, 0.0),
    )
    desired0 = sigmoid(scenario.logit_o0 + w * np.maximum(bias, 0.0))
    gap = np.abs(np.asarray(desired1) - np.asarray(desired0))
    size = np.abs(w) + np.abs(w_sr) + np.abs(bias)
    loss = scenario.a * abs(scenario.alpha) * gap + (1 - scenario.a) * size
    return float(loss) if loss.ndim == 0 else loss


def no_change_loss(scenario: TheoremScenario) -> float:
    return scenario.a * abs(scenario.alpha) * abs(
        sigmoid(scenario.logit_o0 + scenario.delta) - sigmoid(scenario.logit_o0),
    )


def golden_section(
    f: Callable[[float], float],
    low: float,
    high: float,
    tol: float = SEARCH_TOL,
) -> Tuple[float, float]:
    """
    Golden-section search for the minimum of a unimodal ``f`` on
    ``[low, high]``; the endpoints are kept when they are lower.

    >>> x, fx = golden_section(lambda x: (x - 1.0) ** 2, 0.0, 3.0)
    >>> round(x, 6), round(fx, 9)
    (1.0, 0.0)
    """
    low, high = min(low, high), max(low, high)
    candidates = [(f(low), low), (f(high), high)]
    h = high - low
    if h > tol:
        steps = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
        c = low + INV_PHI_SQUARE * h
        d = low + INV_PHI * h
        yc = f(c)
        yd = f(d)
        for _ in range(steps - 1):
            if yc < yd:
                high = d
                d = c
                yd = yc
                h = INV_PHI * h
                c = low + INV_PHI_SQUARE * h
                yc = f(c)
            else:
                low = c
                c = d
                yc = yd
                h = INV_PHI * h
                d = low + INV_PHI * h
                yd = f(d)
        middle = (c + d) / 2.0
        candidates += [(yc, c), (yd, d), (f(middle), middle)]
    fx, x = min(candidates)
    return x, fx


def _refine(f, grid: np.ndarray, index: int) -> Tuple[float, float]:
    low = grid[max(index - 1, 0)]
    high = grid[min(index + 1, grid.size - 1)]
    x, fx = golden_section(f, low, high)
    return (x, fx) if fx <= f(grid[index]) else (grid[index], f(grid[index]))


def minimize_branch(
    branch: Branch,
    scenario: TheoremScenario,
    high: Optional[float] = None,
    points: int = SEARCH_POINTS,
) -> Tuple[float, float]:
    """Global minimum ``(B, loss)`` of one branch on ``[0, high]``."""
    high = scenario.feasible_bound if high is None else high
    grid = np.linspace(0.0, high, points)
    values = branch_loss(branch, grid, scenario)
    f = lambda b: float(branch_loss(branch, b, scenario))  # noqa: E731
    return _refine(f, grid, int(np.argmin(values)))


def thm43_optimum(scenario: TheoremScenario) -> OptimumReport:
    """
    Minimize the two branches that apply to the sign of ``delta`` over the
    feasible window and keep the lower one.
    """
    best = None
    for branch in scenario.branches:
        b, loss = minimize_branch(branch, scenario)
        logger.debug(f"{branch.value}: B={b:.6f} L={loss:.6f}")
        if best is None or loss < best[2]:
            best = (branch, b, loss)
    branch, b, loss = best
    return OptimumReport(
        l_min=float(loss),
        weights=branch_weights(branch, b),
        branch=branch,
        b_opti=float(b),
    )


@dataclass(frozen=True)
class BranchMinimum:
    branch: Branch
    feasible_b: float
    feasible_loss: float
    local_b: Optional[float] = None
    local_loss: Optional[float] = None


def branch_minima(
    scenario: TheoremScenario,
    points: int = SEARCH_POINTS,
) -> Dict[Branch, BranchMinimum]:
    """
    Per applicable branch, the minimum on the feasible window and the lowest
    interior local minimum on the window twice as wide. An interior minimum
    may lie beyond the feasible window, where plain gradient descent can
    still settle.
    """
    result = {}
    for branch in scenario.branches:
        feasible_b, feasible_loss = minimize_branch(branch, scenario, points=points)
        grid = np.linspace(0.0, 2.0 * scenario.feasible_bound, points)
        values = branch_loss(branch, grid, scenario)
        interior = np.flatnonzero(
            (values[1:-1] < values[:-2]) & (values[1:-1] <= values[2:]),
        )
        local = None
        f = lambda b: float(branch_loss(branch, b, scenario))  # noqa: E731
        for index in interior + 1:
            x, fx = _refine(f, grid, int(index))
            if local is None or fx < local[1]:
                local = (float(x), float(fx))
        result[branch] = BranchMinimum(
            branch=branch,
            feasible_b=float(feasible_b),
            feasible_loss=float(feasible_loss),
            local_b=local[0] if local else None,
            local_loss=local[1] if local else None,
        )
    return result


@dataclass(frozen=True)
class GridSpec:
    points: int = 151
    bound: Optional[float] = None

    def __post_init__(self):
        if self.points < 2:
            raise ValueError(f"grid needs at least 2 points per axis, got {self.points}")

    def axis(self, delta: float) -> np.ndarray:
        bound = self.bound if self.bound else 2.0 * math.sqrt(abs(delta)) + 1.0
        return np.linspace(-bound, bound, self.points)


def grid_resolution(scenario: TheoremScenario, axis: np.ndarray) -> float:
    """
    Bound on how far the grid minimum can sit above the true minimum in the
    box, from a per-coordinate bound on the loss gradient.
    """
    step = float(axis[1] - axis[0])
    radius = float(np.max(np.abs(axis)))
    slope = 3 * (1 - scenario.a) + 1.5 * scenario.a * abs(scenario.alpha) * radius
    return slope * step / 2.0


def grid_oracle(
    scenario: TheoremScenario,
    grid_spec: GridSpec = GridSpec(),
) -> OptimumReport:
    """Brute-force minimum of ``scenario_loss`` over a cubic grid."""
    axis = grid_spec.axis(scenario.delta)
    w_sr, bias = np.meshgrid(axis, axis, indexing="ij")
    best = (math.inf, None)
    for w in axis:
        values = scenario_loss(scenario, w, w_sr, bias)
        index = np.unravel_index(np.argmin(values), values.shape)
        if values[index] < best[0]:
            best = (float(values[index]), (float(w), float(w_sr[index]), float(bias[index])))
    loss, weights = best
    return OptimumReport(
        l_min=loss,
        weights=weights,
        branch=classify(weights, scenario.delta),
        resolution=grid_resolution(scenario, axis),
    )


def feasible_grid_oracle(delta: float, points: int = 401, bound: Optional[float] = None) -> OptimumReport:
    """
    Smallest ``|w| + |w_sr| + |bias|`` that closes the gap exactly, searched
    over ``(w_sr, bias)`` with ``w`` solved from
    ``w * (relu(w_sr + bias) - relu(bias)) = -delta``.
    """
    _check_delta(delta)
    axis = GridSpec(points, bound).axis(delta)
    w_sr, bias = np.meshgrid(axis, axis, indexing="ij")
    lift = np.maximum(w_sr + bias, 0.0) - np.maximum(bias, 0.0)
    usable = np.abs(lift) > 1e-12
    w = np.where(usable, -delta / np.where(usable, lift, 1.0), np.inf)
    size = np.where(usable, np.abs(w) + np.abs(w_sr) + np.abs(bias), np.inf)
    index = np.unravel_index(np.argmin(size), size.shape)
    step = float(axis[1] - axis[0])
    return OptimumReport(
        l_min=float(size[index]),
        weights=(float(w[index]), float(w_sr[index]), float(bias[index])),
        branch=Branch.THM41,
        b_opti=float(size[index]),
        resolution=step,
    )


def classify(weights: Tuple[float, float, float], delta: float) -> Branch:
    """Name the branch whose weight pattern ``weights`` resembles."""
    _, w_sr, bias = weights
    if delta > 0:
        return Branch.L1 if abs(w_sr) >= abs(bias) else Branch.L2
    return Branch.L3 if abs(w_sr) >= abs(bias) else Branch.L4


@dataclass(frozen=True)
class SweepRow:
    a: float
    l_min: float
    b_opti: float
    branch: Branch


def sweep_a(scenario: TheoremScenario, values: Iterable[float]) -> List[SweepRow]:
    rows = []
    for a in values:
        report = thm43_optimum(replace(scenario, a=a))
        rows.append(SweepRow(a, report.l_min, report.b_opti, report.branch))
    return rows
