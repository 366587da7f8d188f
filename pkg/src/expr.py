"""
Expression Module

Recursive-descent parser and evaluator for the arithmetic expressions that
appear in curve, section and implicit-surface specs.

Grammar (lowest to highest precedence):

    expression := term (('+' | '-') term)*
    term       := unary (('*' | '/') unary)*
    unary      := '-' unary | power
    power      := atom ('^' unary)?
    atom       := NUMBER | 'pi' | IDENT | IDENT '(' expression ')' | '(' expression ')'

'^' binds tighter than unary minus and is right-associative. Evaluation is
vectorised: bindings may be floats or numpy arrays.
"""

from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterator, Mapping, NamedTuple, Optional, Sequence, Tuple, Union
import logging
import re

import numpy as np

from .errors import (
    ExpressionDomainError,
    ExpressionSyntaxError,
    UnboundVariableError,
    UnknownFunctionError,
    UnknownVariableError,
)

logger = logging.getLogger(__name__)


FUNCTIONS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sqrt": np.sqrt,
    "exp": np.exp,
    "log": np.log,
    "atan": np.arctan,
}

CONSTANTS: Dict[str, float] = {"pi": float(np.pi)}

BINARY_OPERATORS = ("+", "-", "*", "/", "^")


# ============================================================
# AST
# ============================================================

@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class Constant:
    name: str


@dataclass(frozen=True)
class Negate:
    operand: "Node"


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    function: str
    argument: "Node"


Node = Union[Number, Variable, Constant, Negate, BinaryOp, Call]
Value = Union[float, np.ndarray]


# ============================================================
# Tokenizer
# ============================================================

class Token(NamedTuple):
    kind: str
    text: str
    offset: int


_TOKEN_RE = re.compile(
    r"""
    (?P<NUMBER>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
    |(?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
    |(?P<OP>[-+*/^()])
    |(?P<WS>\s+)
    |(?P<MISMATCH>.)
    """,
    re.VERBOSE,
)


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def _tokenize(text: str) -> Iterator[Token]:
    for match in _TOKEN_RE.finditer(text):
        kind = match.lastgroup
        offset = _byte_offset(text, match.start())
        if kind == "WS":
            continue
        if kind == "MISMATCH":
            raise ExpressionSyntaxError(f"Unexpected character {match.group()!r}", offset, text)
        yield Token(kind, match.group(), offset)
    yield Token("END", "", _byte_offset(text, len(text)))


# ============================================================
# Parser
# ============================================================

class _Parser:
    """Single-use recursive-descent parser over a token list"""

    def __init__(self, text: str, variables: Optional[Sequence[str]]):
        self.text = text
        self.variables = None if variables is None else frozenset(variables)
        self.tokens = list(_tokenize(text))
        self.index = 0

    def _peek(self) -> Token:
        return self.tokens[self.index]

    def _advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _error(self, message: str, token: Token) -> ExpressionSyntaxError:
        return ExpressionSyntaxError(message, token.offset, self.text)

    def _expect_close(self, opening: Token) -> None:
        token = self._peek()
        if token.text != ")":
            raise self._error(f"Unbalanced parentheses: '(' at offset {opening.offset} is not closed", token)
        self._advance()

    def parse(self) -> Node:
        node = self._expression()
        token = self._peek()
        if token.kind != "END":
            if token.text == ")":
                raise self._error("Unbalanced parentheses: unmatched ')'", token)
            raise self._error(f"Unexpected token {token.text!r}", token)
        return node

    def _expression(self) -> Node:
        node = self._term()
        while self._peek().text in ("+", "-"):
            op = self._advance().text
            node = BinaryOp(op, node, self._term())
        return node

    def _term(self) -> Node:
        node = self._unary()
        while self._peek().text in ("*", "/"):
            op = self._advance().text
            node = BinaryOp(op, node, self._unary())
        return node

    def _unary(self) -> Node:
        if self._peek().text == "-":
            self._advance()
            return Negate(self._unary())
        return self._power()

    def _power(self) -> Node:
        base = self._atom()
        if self._peek().text == "^":
            self._advance()
            # right operand re-enters at unary level: 2^3^2 == 2^(3^2), 2^-1 allowed
            return BinaryOp("^", base, self._unary())
        return base

    def _atom(self) -> Node:
        token = self._peek()

        if token.kind == "NUMBER":
            self._advance()
            value = float(token.text)
            if not np.isfinite(value):
                raise self._error(f"Number literal {token.text!r} overflows binary64", token)
            return Number(value)

        if token.kind == "IDENT":
            self._advance()
            name = token.text
            if self._peek().text == "(":
                opening = self._advance()
                if name not in FUNCTIONS:
                    raise UnknownFunctionError(f"Unknown function '{name}'", token.offset, self.text)
                argument = self._expression()
                self._expect_close(opening)
                return Call(name, argument)
            if name in CONSTANTS:
                return Constant(name)
            if name in FUNCTIONS:
                raise self._error(f"Function '{name}' requires a parenthesised argument", token)
            if self.variables is not None and name not in self.variables:
                declared = ", ".join(sorted(self.variables)) or "none"
                raise UnknownVariableError(
                    f"Unknown identifier '{name}' (declared: {declared})", token.offset, self.text
                )
            return Variable(name)

        if token.text == "(":
            opening = self._advance()
            node = self._expression()
            self._expect_close(opening)
            return node

        if token.kind == "END":
            raise self._error("Unexpected end of expression", token)
        if token.text == ")":
            raise self._error("Unbalanced parentheses: unmatched ')'", token)
        raise self._error(f"Unexpected token {token.text!r}", token)


def parse(text: str, variables: Optional[Sequence[str]] = None) -> Node:
    """
    Parse expression text into an AST.

    Args:
        text: Expression string
        variables: Declared variable names; when given, any other identifier
            is rejected at parse time

    Returns:
        Root node of the expression tree
    """
    if not text or not text.strip():
        raise ExpressionSyntaxError("Empty expression", 0, text or "")
    return _Parser(text, variables).parse()


def serialize(node: Node) -> str:
    """Fully parenthesised text that parses back to the same tree"""
    if isinstance(node, Number):
        return repr(node.value)
    if isinstance(node, (Variable, Constant)):
        return node.name
    if isinstance(node, Negate):
        return f"(-{serialize(node.operand)})"
    if isinstance(node, BinaryOp):
        return f"({serialize(node.left)} {node.op} {serialize(node.right)})"
    if isinstance(node, Call):
        return f"{node.function}({serialize(node.argument)})"
    raise TypeError(f"Not an expression node: {node!r}")


def free_variables(node: Node) -> FrozenSet[str]:
    """Names of all variables referenced by the tree"""
    if isinstance(node, Variable):
        return frozenset([node.name])
    if isinstance(node, Negate):
        return free_variables(node.operand)
    if isinstance(node, BinaryOp):
        return free_variables(node.left) | free_variables(node.right)
    if isinstance(node, Call):
        return free_variables(node.argument)
    return frozenset()


# ============================================================
# Evaluator
# ============================================================

def _finite(value: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(value)):
        raise ExpressionDomainError(f"Non-finite result in {what}")
    return value


def _power(base: np.ndarray, exponent: np.ndarray) -> np.ndarray:
    base, exponent = np.broadcast_arrays(base, exponent)
    fractional = exponent != np.floor(exponent)
    if np.any((base < 0) & fractional):
        raise ExpressionDomainError("Negative base raised to a non-integer power")
    if np.any((base == 0) & (exponent < 0)):
        raise ExpressionDomainError("Zero raised to a negative power")
    with np.errstate(over="ignore"):
        return np.power(base, exponent)


def _evaluate(node: Node, bindings: Mapping[str, np.ndarray]) -> np.ndarray:
    if isinstance(node, Number):
        return np.float64(node.value)

    if isinstance(node, Constant):
        return np.float64(CONSTANTS[node.name])

    if isinstance(node, Variable):
        if node.name not in bindings:
            raise UnboundVariableError(node.name)
        return bindings[node.name]

    if isinstance(node, Negate):
        return -_evaluate(node.operand, bindings)

    if isinstance(node, Call):
        argument = _evaluate(node.argument, bindings)
        if node.function == "sqrt" and np.any(argument < 0):
            raise ExpressionDomainError("sqrt of a negative number")
        if node.function == "log" and np.any(argument <= 0):
            raise ExpressionDomainError("log of a non-positive number")
        with np.errstate(over="ignore"):
            result = FUNCTIONS[node.function](argument)
        return _finite(result, f"{node.function}()")

    if isinstance(node, BinaryOp):
        left = _evaluate(node.left, bindings)
        right = _evaluate(node.right, bindings)
        if node.op == "+":
            result = left + right
        elif node.op == "-":
            result = left - right
        elif node.op == "*":
            result = left * right
        elif node.op == "/":
            if np.any(right == 0):
                raise ExpressionDomainError("Division by zero")
            result = left / right
        elif node.op == "^":
            result = _power(left, right)
        else:
            raise ExpressionDomainError(f"Unknown operator {node.op!r}")
        return _finite(result, f"operator '{node.op}'")

    raise TypeError(f"Not an expression node: {node!r}")


def evaluate(node: Node, bindings: Mapping[str, Value]) -> Value:
    """
    Evaluate an AST in binary64.

    Args:
        node: Expression tree
        bindings: Variable name to float or numpy array

    Returns:
        float for scalar bindings, numpy array when any binding is an array
    """
    arrays = {name: np.asarray(value, dtype=float) for name, value in bindings.items()}
    result = np.asarray(_evaluate(node, arrays), dtype=float)
    if result.ndim == 0:
        return float(result)
    return result


@dataclass(frozen=True)
class Expression:
    """Parsed expression together with its source text"""
    text: str
    ast: Node
    variables: Optional[Tuple[str, ...]] = None

    @classmethod
    def parse(cls, text: str, variables: Optional[Sequence[str]] = None) -> "Expression":
        declared = None if variables is None else tuple(variables)
        return cls(text=text, ast=parse(text, declared), variables=declared)

    @property
    def free_variables(self) -> FrozenSet[str]:
        return free_variables(self.ast)

    def __call__(self, **bindings: Value) -> Value:
        return evaluate(self.ast, bindings)

    def __str__(self) -> str:
        return self.text
