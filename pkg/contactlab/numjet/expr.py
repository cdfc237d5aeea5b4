"""
Expression parsing for immersion components and ambient tensor fields.

Grammar (ASCII, case-sensitive):
    ^ binds tighter than unary minus, which binds tighter than * and /,
    which bind tighter than + and -. Function calls use f(e) for
    sin, cos, tan, exp, log, sqrt; `pi` is the only named constant.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, Optional, Sequence, Tuple

from lark import Lark, Transformer, v_args
from lark.exceptions import (
    UnexpectedCharacters,
    UnexpectedEOF,
    UnexpectedToken,
    VisitError,
)

logger = logging.getLogger(__name__)


class ExprKind(str, Enum):
    """Node kinds of the expression AST"""
    CONSTANT = "constant"
    VARIABLE = "variable"
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV = "div"
    POW = "pow"
    NEG = "neg"
    SIN = "sin"
    COS = "cos"
    TAN = "tan"
    EXP = "exp"
    LOG = "log"
    SQRT = "sqrt"


BINARY_KINDS = frozenset({ExprKind.ADD, ExprKind.SUB, ExprKind.MUL, ExprKind.DIV, ExprKind.POW})
FUNCTION_KINDS = {
    "sin": ExprKind.SIN,
    "cos": ExprKind.COS,
    "tan": ExprKind.TAN,
    "exp": ExprKind.EXP,
    "log": ExprKind.LOG,
    "sqrt": ExprKind.SQRT,
}
UNARY_KINDS = frozenset(FUNCTION_KINDS.values()) | {ExprKind.NEG}
NAMED_CONSTANTS = {"pi": 3.141592653589793}

_OPERATOR_TOKENS = frozenset({"PLUS", "MINUS", "STAR", "SLASH", "CIRCUMFLEX", "RPAR", "$END"})


class ExpressionSyntaxError(ValueError):
    """Malformed expression text; offset is a byte offset into the source"""

    def __init__(self, reason: str, offset: int):
        super().__init__(f"{reason} at offset {offset}")
        self.reason = reason
        self.offset = offset


@dataclass(frozen=True)
class ExprNode:
    """Immutable AST node. Leaves carry `value` (constants) or `index` (variables)."""
    kind: ExprKind
    children: Tuple["ExprNode", ...] = ()
    value: Optional[float] = None
    index: Optional[int] = None
    name: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind in BINARY_KINDS:
            expected = 2
        elif self.kind in UNARY_KINDS:
            expected = 1
        else:
            expected = 0
        if len(self.children) != expected:
            raise ValueError(f"{self.kind.value} node needs {expected} children, got {len(self.children)}")
        if self.kind == ExprKind.CONSTANT and self.value is None:
            raise ValueError("constant node without value")
        if self.kind == ExprKind.VARIABLE and (self.index is None or self.index < 0):
            raise ValueError("variable node without a valid index")

    @cached_property
    def is_constant(self) -> bool:
        """True when no variable occurs in the subtree"""
        if self.kind == ExprKind.VARIABLE:
            return False
        return all(child.is_constant for child in self.children)

    @cached_property
    def max_index(self) -> int:
        """Largest variable index in the subtree, -1 if none"""
        if self.kind == ExprKind.VARIABLE:
            return self.index
        return max((child.max_index for child in self.children), default=-1)

    def __str__(self) -> str:
        return render(self)


def constant(value: float) -> ExprNode:
    return ExprNode(ExprKind.CONSTANT, value=float(value))


def variable(index: int, name: Optional[str] = None) -> ExprNode:
    return ExprNode(ExprKind.VARIABLE, index=index, name=name)


def render(node: ExprNode) -> str:
    """Fully parenthesized text of a subtree, used in error messages"""
    kind = node.kind
    if kind == ExprKind.CONSTANT:
        return format(node.value, "g")
    if kind == ExprKind.VARIABLE:
        return node.name or f"x{node.index}"
    if kind == ExprKind.NEG:
        return f"-({render(node.children[0])})"
    if kind in UNARY_KINDS:
        return f"{kind.value}({render(node.children[0])})"
    symbol = {ExprKind.ADD: "+", ExprKind.SUB: "-", ExprKind.MUL: "*",
              ExprKind.DIV: "/", ExprKind.POW: "^"}[kind]
    left, right = node.children
    return f"({render(left)} {symbol} {render(right)})"


def constant_value(node: ExprNode) -> float:
    """Evaluate a variable-free subtree"""
    from .jet import eval_value
    if not node.is_constant:
        raise ValueError(f"expression depends on variables: {render(node)}")
    return eval_value(node, ())


# ========= Grammar =========

GRAMMAR = r"""
?start: sum

?sum: product
    | sum "+" product      -> add
    | sum "-" product      -> sub

?product: unary
    | product "*" unary    -> mul
    | product "/" unary    -> div

?unary: power
    | "-" unary            -> neg

?power: atom
    | atom "^" unary       -> pow

?atom: NUMBER              -> number
    | NAME "(" sum ")"     -> call
    | NAME                 -> name
    | "(" sum ")"

%import common.NUMBER
%import common.CNAME -> NAME
%import common.WS
%ignore WS
"""

_PARSER = Lark(GRAMMAR, parser="lalr", propagate_positions=True, maybe_placeholders=False)


@v_args(meta=True)
class _AstBuilder(Transformer):
    """Bottom-up conversion of the lark parse tree into ExprNode"""

    def __init__(self, variables: Dict[str, int]):
        super().__init__()
        self.variables = variables

    def number(self, meta, children):
        return constant(float(children[0]))

    def name(self, meta, children):
        token = children[0]
        text = str(token)
        if text in self.variables:
            return variable(self.variables[text], text)
        if text in NAMED_CONSTANTS:
            return constant(NAMED_CONSTANTS[text])
        raise ExpressionSyntaxError(f"unknown identifier '{text}'", token.start_pos)

    def call(self, meta, children):
        token, argument = children
        text = str(token)
        if text not in FUNCTION_KINDS:
            raise ExpressionSyntaxError(f"unknown identifier '{text}'", token.start_pos)
        return ExprNode(FUNCTION_KINDS[text], (argument,))

    def neg(self, meta, children):
        return ExprNode(ExprKind.NEG, (children[0],))

    def add(self, meta, children):
        return ExprNode(ExprKind.ADD, tuple(children))

    def sub(self, meta, children):
        return ExprNode(ExprKind.SUB, tuple(children))

    def mul(self, meta, children):
        return ExprNode(ExprKind.MUL, tuple(children))

    def div(self, meta, children):
        return ExprNode(ExprKind.DIV, tuple(children))

    def pow(self, meta, children):
        base, exponent = children
        if not exponent.is_constant:
            raise ExpressionSyntaxError("exponent must be a constant integer", meta.start_pos)
        value = constant_value(exponent)
        if abs(value - round(value)) > 1e-12:
            raise ExpressionSyntaxError("exponent must be a constant integer", meta.start_pos)
        return ExprNode(ExprKind.POW, (base, exponent), value=float(round(value)))


def _check_parentheses(text: str):
    depth = 0
    for offset, char in enumerate(text):
        if char == "(":
            depth += 1
        elif char == ")":
            depth -= 1
            if depth < 0:
                raise ExpressionSyntaxError("unbalanced parentheses", offset)
    if depth:
        raise ExpressionSyntaxError("unbalanced parentheses", len(text))


def parse_expr(text: str, variables: Sequence[str]) -> ExprNode:
    """
    Parse infix text into an ExprNode over the ordered variable names.

    Args:
        text: Expression source
        variables: Variable names; position in the list is the variable index

    Returns:
        Root ExprNode

    Raises:
        ExpressionSyntaxError: unknown identifier, unbalanced parentheses or
            empty operand, with the byte offset of the problem
    """
    try:
        return _parse(text, variables)
    except ExpressionSyntaxError as e:
        raise ExpressionSyntaxError(e.reason, _byte_offset(text, e.offset)) from None


def _byte_offset(text: str, char_offset: int) -> int:
    return len(text[:char_offset].encode("utf-8"))


def _parse(text: str, variables: Sequence[str]) -> ExprNode:
    """Parse with character offsets in every raised error"""
    if not text or not text.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    _check_parentheses(text)

    try:
        tree = _PARSER.parse(text)
    except UnexpectedCharacters as e:
        raise ExpressionSyntaxError(f"unexpected character '{text[e.pos_in_stream]}'", e.pos_in_stream) from None
    except UnexpectedToken as e:
        if e.token.type == "$END":
            raise ExpressionSyntaxError("empty operand", len(text)) from None
        offset = e.token.start_pos if e.token.start_pos is not None else len(text)
        if e.token.type in _OPERATOR_TOKENS:
            raise ExpressionSyntaxError("empty operand", offset) from None
        raise ExpressionSyntaxError(f"unexpected token '{e.token}'", offset) from None
    except UnexpectedEOF:
        raise ExpressionSyntaxError("empty operand", len(text)) from None

    lookup = {name: i for i, name in enumerate(variables)}
    try:
        return _AstBuilder(lookup).transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, ExpressionSyntaxError):
            raise e.orig_exc from None
        raise


__all__ = [
    'ExprKind',
    'ExprNode',
    'ExpressionSyntaxError',
    'parse_expr',
    'render',
    'constant',
    'variable',
    'constant_value',
]
