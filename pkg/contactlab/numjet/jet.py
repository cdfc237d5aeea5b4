"""
Second-order forward-mode jets.

A Jet2 carries the value, gradient and Hessian of a scalar with respect to
the k variables of an evaluation context. Every operation applies the
second-order chain rule, so Hessians stay symmetric by construction.
"""

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple

import numpy as np

from .expr import ExprKind, ExprNode, render


class JetDomainError(ArithmeticError):
    """Evaluation left the domain of an elementary function"""

    def __init__(self, reason: str, subexpression: str):
        super().__init__(f"{reason} in '{subexpression}'")
        self.reason = reason
        self.subexpression = subexpression


@dataclass(frozen=True, eq=False)
class Jet2:
    value: float
    grad: np.ndarray
    hess: np.ndarray

    @property
    def k(self) -> int:
        return self.grad.shape[0]

    @classmethod
    def constant(cls, value: float, k: int) -> "Jet2":
        return cls(float(value), np.zeros(k), np.zeros((k, k)))

    @classmethod
    def variable(cls, value: float, index: int, k: int) -> "Jet2":
        grad = np.zeros(k)
        grad[index] = 1.0
        return cls(float(value), grad, np.zeros((k, k)))

    def chain(self, f0: float, f1: float, f2: float) -> "Jet2":
        """Compose with a scalar function whose derivatives at self.value are f0, f1, f2"""
        return Jet2(
            f0,
            f1 * self.grad,
            f1 * self.hess + f2 * np.outer(self.grad, self.grad),
        )

    def __add__(self, other: "Jet2") -> "Jet2":
        return Jet2(self.value + other.value, self.grad + other.grad, self.hess + other.hess)

    def __sub__(self, other: "Jet2") -> "Jet2":
        return Jet2(self.value - other.value, self.grad - other.grad, self.hess - other.hess)

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.grad, -self.hess)

    def __mul__(self, other: "Jet2") -> "Jet2":
        cross = np.outer(self.grad, other.grad)
        return Jet2(
            self.value * other.value,
            self.value * other.grad + other.value * self.grad,
            self.value * other.hess + other.value * self.hess + cross + cross.T,
        )

    def reciprocal(self) -> "Jet2":
        x = self.value
        return self.chain(1.0 / x, -1.0 / x ** 2, 2.0 / x ** 3)

    def power(self, n: int) -> "Jet2":
        x = self.value
        if n == 0:
            return Jet2.constant(1.0, self.k)
        f0 = x ** n
        f1 = n * x ** (n - 1)
        f2 = n * (n - 1) * x ** (n - 2) if n * (n - 1) != 0 else 0.0
        return self.chain(f0, f1, f2)


# ========= Evaluation =========

def _exp(x: float, node: ExprNode) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        raise JetDomainError("exp overflow", render(node)) from None


def _unary_derivatives(kind: ExprKind, x: float, node: ExprNode) -> Tuple[float, float, float]:
    if kind == ExprKind.SIN:
        s, c = math.sin(x), math.cos(x)
        return s, c, -s
    if kind == ExprKind.COS:
        s, c = math.sin(x), math.cos(x)
        return c, -s, -c
    if kind == ExprKind.TAN:
        c = math.cos(x)
        if c == 0.0:
            raise JetDomainError("tan at a pole", render(node))
        t = math.tan(x)
        sec2 = 1.0 + t * t
        return t, sec2, 2.0 * t * sec2
    if kind == ExprKind.EXP:
        e = _exp(x, node)
        return e, e, e
    if kind == ExprKind.LOG:
        if x <= 0.0:
            raise JetDomainError("log of non-positive value", render(node))
        return math.log(x), 1.0 / x, -1.0 / (x * x)
    if kind == ExprKind.SQRT:
        if x < 0.0:
            raise JetDomainError("sqrt of negative value", render(node))
        if x == 0.0:
            raise JetDomainError("sqrt is not differentiable at zero", render(node))
        r = math.sqrt(x)
        return r, 0.5 / r, -0.25 / (r * x)
    raise ValueError(f"not a unary function: {kind}")


def _eval(node: ExprNode, point: np.ndarray, k: int) -> Jet2:
    kind = node.kind
    if node.is_constant:
        return Jet2.constant(eval_value(node, point), k)
    if kind == ExprKind.VARIABLE:
        return Jet2.variable(point[node.index], node.index, k)
    if kind == ExprKind.NEG:
        return -_eval(node.children[0], point, k)
    if kind == ExprKind.POW:
        base = _eval(node.children[0], point, k)
        n = int(node.value)
        if base.value == 0.0 and n < 0:
            raise JetDomainError("division by zero", render(node))
        try:
            return base.power(n)
        except OverflowError:
            raise JetDomainError("power overflow", render(node)) from None
    if kind in (ExprKind.ADD, ExprKind.SUB, ExprKind.MUL, ExprKind.DIV):
        left = _eval(node.children[0], point, k)
        right = _eval(node.children[1], point, k)
        if kind == ExprKind.ADD:
            return left + right
        if kind == ExprKind.SUB:
            return left - right
        if kind == ExprKind.MUL:
            return left * right
        if right.value == 0.0:
            raise JetDomainError("division by zero", render(node))
        return left * right.reciprocal()
    argument = _eval(node.children[0], point, k)
    return argument.chain(*_unary_derivatives(kind, argument.value, node))


def _check_arity(expr: ExprNode, k: int):
    if expr.max_index >= k:
        raise ValueError(f"expression uses variable {expr.max_index} but the point has {k} coordinates")


def eval_jet2(expr: ExprNode, point: Sequence[float]) -> Jet2:
    """
    Exact value, gradient and Hessian of an expression at a point.

    Raises:
        JetDomainError: log of a non-positive value, sqrt of a negative value
            (or at zero, where it has no derivative), exp overflow or division
            by zero
    """
    p = np.asarray(point, dtype=float)
    _check_arity(expr, p.shape[0])
    return _eval(expr, p, p.shape[0])


_SCALAR_FUNCTIONS: dict = {
    ExprKind.SIN: math.sin,
    ExprKind.COS: math.cos,
    ExprKind.TAN: math.tan,
}


def eval_value(expr: ExprNode, point: Sequence[float]) -> float:
    """Plain value of an expression (no derivatives)"""
    kind = expr.kind
    if kind == ExprKind.CONSTANT:
        return expr.value
    if kind == ExprKind.VARIABLE:
        return float(point[expr.index])
    if kind == ExprKind.NEG:
        return -eval_value(expr.children[0], point)
    if kind in _SCALAR_FUNCTIONS:
        return _SCALAR_FUNCTIONS[kind](eval_value(expr.children[0], point))
    if kind == ExprKind.EXP:
        return _exp(eval_value(expr.children[0], point), expr)
    if kind == ExprKind.LOG:
        x = eval_value(expr.children[0], point)
        if x <= 0.0:
            raise JetDomainError("log of non-positive value", render(expr))
        return math.log(x)
    if kind == ExprKind.SQRT:
        x = eval_value(expr.children[0], point)
        if x < 0.0:
            raise JetDomainError("sqrt of negative value", render(expr))
        return math.sqrt(x)
    left = eval_value(expr.children[0], point)
    if kind == ExprKind.POW:
        n = int(expr.value)
        if left == 0.0 and n < 0:
            raise JetDomainError("division by zero", render(expr))
        try:
            return left ** n
        except OverflowError:
            raise JetDomainError("power overflow", render(expr)) from None
    right = eval_value(expr.children[1], point)
    if kind == ExprKind.ADD:
        return left + right
    if kind == ExprKind.SUB:
        return left - right
    if kind == ExprKind.MUL:
        return left * right
    if right == 0.0:
        raise JetDomainError("division by zero", render(expr))
    return left / right


def eval_jets(exprs: Sequence[ExprNode], point: Sequence[float]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Stack jets of several expressions.

    Returns:
        values (m,), gradients (m, k), Hessians (m, k, k)
    """
    p = np.asarray(point, dtype=float)
    k = p.shape[0]
    values = np.zeros(len(exprs))
    grads = np.zeros((len(exprs), k))
    hessians = np.zeros((len(exprs), k, k))
    for i, expr in enumerate(exprs):
        if expr.is_constant:
            values[i] = eval_value(expr, p)
            continue
        _check_arity(expr, k)
        jet = _eval(expr, p, k)
        values[i], grads[i], hessians[i] = jet.value, jet.grad, jet.hess
    return values, grads, hessians


def central_difference(fn: Callable[[np.ndarray], object], point: Sequence[float], step: float = 1e-5) -> np.ndarray:
    """
    Central finite-difference derivative of a scalar- or array-valued function.

    Returns:
        Array of shape (k, *shape of fn's output); row i is the derivative along variable i
    """
    p = np.asarray(point, dtype=float)
    rows = []
    for i in range(p.shape[0]):
        offset = np.zeros_like(p)
        offset[i] = step
        rows.append((np.asarray(fn(p + offset), dtype=float) - np.asarray(fn(p - offset), dtype=float)) / (2 * step))
    return np.stack(rows)


__all__ = [
    'Jet2',
    'JetDomainError',
    'eval_jet2',
    'eval_value',
    'eval_jets',
    'central_difference',
]
