"""
Reverse-mode differentiation over small numpy graphs.

A ``Tape`` records ``Node`` objects in creation order, so walking it backwards
is a valid reverse topological order. Values are numpy arrays, which lets a
single graph evaluate a whole dataset at once. The same helper functions
(``relu``, ``sigmoid``, ``log``, ``clip``) accept plain numbers and arrays,
so model code can be written once and evaluated with or without a tape.

>>> tape = Tape()
>>> x = tape.input(3.0)
>>> y = x * x + x
>>> y.backward()
>>> float(x.grad)
7.0
"""
import logging
from dataclasses import dataclass
from dataclasses import field
from enum import Enum
from typing import Callable
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple
from typing import Union

import numpy as np

logger = logging.getLogger(__name__)

Number = Union[int, float, np.ndarray]

_SIGMOID_LOW = np.finfo(np.float64).tiny
_SIGMOID_HIGH = np.nextafter(1.0, 0.0)


class DomainError(ValueError):
    pass


class Op(str, Enum):
    INPUT = "input"
    ADD = "add"
    NEG = "neg"
    MUL = "mul"
    MATMUL = "matmul"
    RELU = "relu"
    SIGMOID = "sigmoid"
    ABS = "abs"
    LOG = "log"
    CLIP = "clip"
    SUM = "sum"
    MEAN = "mean"
    INDEX = "index"
    RESHAPE = "reshape"


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Node:
    # numpy defers binary operators to Node's reflected methods
    __array_ufunc__ = None

    def __init__(
        self,
        tape: "Tape",
        value: Number,
        op: Op,
        parents: Sequence["Node"] = (),
        requires_grad: bool = False,
    ):
        self.tape = tape
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)
        self.op = op
        self.parents = tuple(parents)
        self.requires_grad = requires_grad
        self._backward: Optional[Callable[[], None]] = None

    def __repr__(self) -> str:
        return f"<Node {self.op.value} shape={self.value.shape}>"

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @property
    def size(self) -> int:
        return self.value.size

    def backward(self) -> None:
        self.tape.backward(self)

    def __add__(self, other) -> "Node":
        return add(self, other)

    def __radd__(self, other) -> "Node":
        return add(other, self)

    def __sub__(self, other) -> "Node":
        return add(self, neg(other))

    def __rsub__(self, other) -> "Node":
        return add(other, neg(self))

    def __neg__(self) -> "Node":
        return neg(self)

    def __mul__(self, other) -> "Node":
        return mul(self, other)

    def __rmul__(self, other) -> "Node":
        return mul(other, self)

    def __truediv__(self, other) -> "Node":
        if isinstance(other, Node):
            raise TypeError("division by a node is not supported")
        return mul(self, 1.0 / np.asarray(other, dtype=np.float64))

    def __matmul__(self, other) -> "Node":
        return matmul(self, other)

    def __rmatmul__(self, other) -> "Node":
        return matmul(other, self)

    def __abs__(self) -> "Node":
        return _abs(self)

    def sum(self) -> "Node":
        return _sum(self)

    def mean(self) -> "Node":
        return _mean(self)

    def __getitem__(self, index) -> "Node":
        return take(self, index)

    def reshape(self, shape) -> "Node":
        return reshape(self, shape)


@dataclass
class Tape:
    nodes: List[Node] = field(default_factory=list)
    kinks: List[np.ndarray] = field(default_factory=list)

    def input(self, value: Number, requires_grad: bool = True) -> Node:
        node = Node(self, value, Op.INPUT, requires_grad=requires_grad)
        self.nodes.append(node)
        return node

    def constant(self, value: Number) -> Node:
        return self.input(value, requires_grad=False)

    def lift(self, value: Union[Node, Number]) -> Node:
        if isinstance(value, Node):
            if value.tape is not self:
                raise ValueError("node belongs to another tape")
            return value
        return self.constant(value)

    def record(
        self,
        value: np.ndarray,
        op: Op,
        parents: Sequence[Node],
        backward: Callable[[Node], None],
    ) -> Node:
        node = Node(
            self,
            value,
            op,
            parents,
            requires_grad=any(p.requires_grad for p in parents),
        )
        if node.requires_grad:
            node._backward = lambda: backward(node)
        self.nodes.append(node)
        return node

    def mark_kink(self, distance: np.ndarray) -> None:
        self.kinks.append(np.sign(distance).astype(np.int8))

    def kink_signature(self) -> bytes:
        return b"|".join(k.tobytes() for k in self.kinks)

    def backward(self, output: Node) -> None:
        if output.value.size != 1:
            raise ValueError(
                f"backward needs a scalar output, got shape {output.value.shape}",
            )
        output.grad = np.ones_like(output.value)
        for node in reversed(self.nodes):
            if node._backward is not None:
                node._backward()


def _tape_of(*values) -> Optional[Tape]:
    for value in values:
        if isinstance(value, Node):
            return value.tape
    return None


def value_of(x: Union[Node, Number]) -> Number:
    """
    >>> value_of(2.5)
    2.5
    """
    if isinstance(x, Node):
        return x.value
    return x


def add(a, b):
    tape = _tape_of(a, b)
    if tape is None:
        return np.add(a, b)
    a, b = tape.lift(a), tape.lift(b)

    def backward(node: Node) -> None:
        if a.requires_grad:
            a.grad = a.grad + _unbroadcast(node.grad, a.shape)
        if b.requires_grad:
            b.grad = b.grad + _unbroadcast(node.grad, b.shape)

    return tape.record(a.value + b.value, Op.ADD, (a, b), backward)


def neg(a):
    if not isinstance(a, Node):
        return np.negative(a)

    def backward(node: Node) -> None:
        a.grad = a.grad - node.grad

    return a.tape.record(-a.value, Op.NEG, (a,), backward)


def mul(a, b):
    tape = _tape_of(a, b)
    if tape is None:
        return np.multiply(a, b)
    a, b = tape.lift(a), tape.lift(b)

    def backward(node: Node) -> None:
        if a.requires_grad:
            a.grad = a.grad + _unbroadcast(node.grad * b.value, a.shape)
        if b.requires_grad:
            b.grad = b.grad + _unbroadcast(node.grad * a.value, b.shape)

    return tape.record(a.value * b.value, Op.MUL, (a, b), backward)


def matmul(a, b):
    tape = _tape_of(a, b)
    if tape is None:
        return np.matmul(a, b)
    a, b = tape.lift(a), tape.lift(b)
    if a.value.ndim != 2 or b.value.ndim not in (1, 2):
        raise ValueError(
            f"matmul supports matrix @ matrix or matrix @ vector, "
            f"got {a.shape} @ {b.shape}",
        )

    def backward(node: Node) -> None:
        if b.value.ndim == 1:
            if a.requires_grad:
                a.grad = a.grad + np.outer(node.grad, b.value)
            if b.requires_grad:
                b.grad = b.grad + a.value.T @ node.grad
        else:
            if a.requires_grad:
                a.grad = a.grad + node.grad @ b.value.T
            if b.requires_grad:
                b.grad = b.grad + a.value.T @ node.grad

    return tape.record(a.value @ b.value, Op.MATMUL, (a, b), backward)


def relu(x):
    """
    >>> float(relu(-1.0)), float(relu(2.0)), float(relu(0.0))
    (0.0, 2.0, 0.0)
    """
    if not isinstance(x, Node):
        return np.maximum(x, 0.0)
    x.tape.mark_kink(x.value)

    def backward(node: Node) -> None:
        # adjoint at exactly 0 is 0
        x.grad = x.grad + node.grad * (x.value > 0)

    return x.tape.record(np.maximum(x.value, 0.0), Op.RELU, (x,), backward)


def _sigmoid(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    z = np.exp(-np.abs(x))
    out = np.where(x >= 0, 1.0 / (1.0 + z), z / (1.0 + z))
    return np.clip(out, _SIGMOID_LOW, _SIGMOID_HIGH)


def sigmoid(x):
    """
    Branch-stable logistic function, strictly inside (0, 1).

    >>> float(sigmoid(0.0))
    0.5
    >>> round(float(sigmoid(-4.595)), 4)
    0.01
    >>> 0.0 < float(sigmoid(-500.0)) < float(sigmoid(500.0)) < 1.0
    True
    """
    if not isinstance(x, Node):
        out = _sigmoid(x)
        return float(out) if out.ndim == 0 else out
    p = _sigmoid(x.value)

    def backward(node: Node) -> None:
        x.grad = x.grad + node.grad * p * (1.0 - p)

    return x.tape.record(p, Op.SIGMOID, (x,), backward)


def logit(p):
    """
    >>> logit(0.5)
    0.0
    >>> round(logit(0.6) - logit(0.3), 4)
    1.2528
    >>> logit(1.0)  # doctest: +IGNORE_EXCEPTION_DETAIL
    Traceback (most recent call last):
      ...
    lrd.diffcore.DomainError: logit is defined on (0, 1), got 1.0
    """
    arr = np.asarray(p, dtype=np.float64)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise DomainError(f"logit is defined on (0, 1), got {p}")
    out = np.log(arr) - np.log1p(-arr)
    return float(out) if out.ndim == 0 else out


def _abs(x: Node) -> Node:
    x.tape.mark_kink(x.value)

    def backward(node: Node) -> None:
        # np.sign(0) == 0 keeps zero weights stationary
        x.grad = x.grad + node.grad * np.sign(x.value)

    return x.tape.record(np.abs(x.value), Op.ABS, (x,), backward)


def log(x):
    if not isinstance(x, Node):
        return np.log(x)

    def backward(node: Node) -> None:
        x.grad = x.grad + node.grad / x.value

    return x.tape.record(np.log(x.value), Op.LOG, (x,), backward)


def clip(x, low: float, high: float):
    if not isinstance(x, Node):
        return np.clip(x, low, high)
    x.tape.mark_kink(x.value - low)
    x.tape.mark_kink(x.value - high)
    inside = (x.value >= low) & (x.value <= high)

    def backward(node: Node) -> None:
        x.grad = x.grad + node.grad * inside

    return x.tape.record(np.clip(x.value, low, high), Op.CLIP, (x,), backward)


def _sum(x: Node) -> Node:
    def backward(node: Node) -> None:
        x.grad = x.grad + np.broadcast_to(node.grad, x.shape)

    return x.tape.record(np.sum(x.value), Op.SUM, (x,), backward)


def _mean(x: Node) -> Node:
    size = max(x.value.size, 1)

    def backward(node: Node) -> None:
        x.grad = x.grad + np.broadcast_to(node.grad / size, x.shape)

    return x.tape.record(np.mean(x.value), Op.MEAN, (x,), backward)


def take(x: Node, index) -> Node:
    """
    ``x[index]`` on the tape; gradients scatter back to the taken entries.

    >>> tape = Tape()
    >>> v = tape.input([1.0, 2.0, 3.0])
    >>> (v[1:] * v[1:]).sum().backward()
    >>> v.grad.tolist()
    [0.0, 4.0, 6.0]
    """

    def backward(node: Node) -> None:
        grad = np.zeros_like(x.value)
        np.add.at(grad, index, node.grad)
        x.grad = x.grad + grad

    return x.tape.record(x.value[index], Op.INDEX, (x,), backward)


def reshape(x: Node, shape) -> Node:
    def backward(node: Node) -> None:
        x.grad = x.grad + node.grad.reshape(x.shape)

    return x.tape.record(x.value.reshape(shape), Op.RESHAPE, (x,), backward)


@dataclass
class GradCheckReport:
    max_rel_error: float
    autodiff: np.ndarray
    numeric: np.ndarray
    skipped: List[Tuple[int, ...]]


def _evaluate(
    f: Callable[[Node], Node],
    theta: np.ndarray,
    with_grad: bool,
) -> Tuple[float, Optional[np.ndarray], bytes]:
    tape = Tape()
    param = tape.input(theta)
    out = f(param)
    if not isinstance(out, Node):
        out = tape.constant(out)
    if with_grad:
        out.backward()
        return float(out.value), param.grad.copy(), tape.kink_signature()
    return float(out.value), None, tape.kink_signature()


def grad_check(
    f: Callable[[Node], Node],
    theta: Number,
    h: float = 1e-5,
) -> GradCheckReport:
    """
    Compare the tape gradient of ``f`` with central differences.

    A coordinate whose ``±h`` steps change the sign pattern of any ReLU,
    abs or clip input crosses a kink and is reported in ``skipped``.
    Coordinates where both estimates are below the rounding noise of
    ``f`` count as agreeing.

    >>> report = grad_check(lambda t: sigmoid(t * 2.0 + 1.0).sum(), [0.3, -0.2])
    >>> report.max_rel_error < 1e-5
    True
    >>> grad_check(lambda t: 3.0, [1.0]).max_rel_error
    0.0
    """
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    theta = np.array(theta, dtype=np.float64)
    value, autodiff, signature = _evaluate(f, theta, with_grad=True)
    noise = 10 * np.finfo(np.float64).eps * max(1.0, abs(value)) / h
    numeric = np.zeros_like(theta)
    skipped = []
    max_error = 0.0
    for index in np.ndindex(theta.shape):
        step = np.zeros_like(theta)
        step[index] = h
        up, _, up_signature = _evaluate(f, theta + step, with_grad=False)
        down, _, down_signature = _evaluate(f, theta - step, with_grad=False)
        if up_signature != signature or down_signature != signature:
            skipped.append(index)
            continue
        numeric[index] = (up - down) / (2 * h)
        if max(abs(autodiff[index]), abs(numeric[index])) <= noise:
            continue
        error = abs(autodiff[index] - numeric[index]) / (abs(numeric[index]) + 1e-8)
        max_error = max(max_error, float(error))
    if skipped:
        logger.info(f"grad check skipped {len(skipped)} coordinates near kinks")
    return GradCheckReport(max_error, autodiff, numeric, skipped)
