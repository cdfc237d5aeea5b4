# numjet/__init__.py
"""
contactlab numerical kernel

- expr: expression grammar and AST (lark)
- jet: second-order forward-mode jets over ExprNode
- linalg: metric inner products, Gram-Schmidt, projections
"""

from .expr import ExprKind, ExprNode, ExpressionSyntaxError, parse_expr, render
from .jet import Jet2, JetDomainError, central_difference, eval_jet2, eval_jets, eval_value
from .linalg import (
    MetricNotPositiveDefiniteError,
    NonOrthonormalBasisError,
    complete_basis,
    metric_project,
    orthonormalize,
)

__all__ = [
    # Expressions
    'ExprKind',
    'ExprNode',
    'ExpressionSyntaxError',
    'parse_expr',
    'render',

    # Jets
    'Jet2',
    'JetDomainError',
    'eval_jet2',
    'eval_jets',
    'eval_value',
    'central_difference',

    # Linear algebra
    'orthonormalize',
    'metric_project',
    'complete_basis',
    'NonOrthonormalBasisError',
    'MetricNotPositiveDefiniteError',
]
