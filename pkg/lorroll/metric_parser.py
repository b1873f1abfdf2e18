# lorroll/metric_parser.py
# Parser for user chart metrics given as gij expression strings, built on a lark LALR grammar.

import json
import logging
import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np
from lark import Lark, Transformer
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken, VisitError

logger = logging.getLogger(__name__)

FUNCTIONS: Dict[str, Callable[[float], float]] = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
}

GRAMMAR = r"""
?expr: term
     | expr "+" term    -> add
     | expr "-" term    -> sub

?term: unary
     | term "*" unary   -> mul
     | term "/" unary   -> div

?unary: power
      | "-" unary       -> neg

?power: atom
      | atom "^" unary  -> pow

?atom: NUMBER               -> number
     | NAME "(" expr ")"    -> call
     | NAME                 -> name
     | "(" expr ")"

NUMBER: /(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?/
NAME: /[A-Za-z_][A-Za-z_0-9]*/

%import common.WS
%ignore WS
"""

_PARSER = Lark(GRAMMAR, start="expr", parser="lalr", lexer="basic")
_COORDINATE_RE = re.compile(r"^x([1-9])$")
_KEY_RE = re.compile(r"^g([1-9])([1-9])$")


class MetricParseError(ValueError):
    """Syntax or identifier error at a character offset of the expression."""

    def __init__(self, message: str, position: int = -1, text: str = ""):
        where = f" at position {position}" if position >= 0 else ""
        super().__init__(f"{message}{where} in {text!r}" if text else f"{message}{where}")
        self.position = position
        self.text = text


# --- Expression tree ---

class Expr:
    def evaluate(self, x: np.ndarray) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class Number(Expr):
    value: float

    def evaluate(self, x):
        return self.value


@dataclass(frozen=True)
class Coordinate(Expr):
    index: int

    def evaluate(self, x):
        return float(x[self.index])


@dataclass(frozen=True)
class Negate(Expr):
    operand: Expr

    def evaluate(self, x):
        return -self.operand.evaluate(x)


@dataclass(frozen=True)
class BinaryOp(Expr):
    op: str
    left: Expr
    right: Expr

    def evaluate(self, x):
        a = np.float64(self.left.evaluate(x))
        b = np.float64(self.right.evaluate(x))
        with np.errstate(all="ignore"):
            if self.op == "+":
                return float(a + b)
            if self.op == "-":
                return float(a - b)
            if self.op == "*":
                return float(a * b)
            if self.op == "/":
                return float(a / b)
            return float(np.power(a, b))


@dataclass(frozen=True)
class Call(Expr):
    name: str
    argument: Expr

    def evaluate(self, x):
        with np.errstate(all="ignore"):
            return float(FUNCTIONS[self.name](np.float64(self.argument.evaluate(x))))


class ExpressionBuilder(Transformer):
    """Turns the lark parse tree into evaluable Expr nodes, resolving x1..x<dim> and function names."""

    def __init__(self, text: str, dim: int):
        super().__init__()
        self.text = text
        self.dim = dim

    def number(self, items):
        return Number(float(items[0]))

    def name(self, items):
        token = items[0]
        match = _COORDINATE_RE.match(str(token))
        if match and int(match.group(1)) <= self.dim:
            return Coordinate(int(match.group(1)) - 1)
        raise MetricParseError(f"Unknown identifier {str(token)!r}", token.start_pos, self.text)

    def call(self, items):
        token, argument = items
        if str(token) not in FUNCTIONS:
            raise MetricParseError(f"Unknown function {str(token)!r}", token.start_pos, self.text)
        return Call(str(token), argument)

    def neg(self, items):
        return Negate(items[0])

    def add(self, items):
        return BinaryOp("+", items[0], items[1])

    def sub(self, items):
        return BinaryOp("-", items[0], items[1])

    def mul(self, items):
        return BinaryOp("*", items[0], items[1])

    def div(self, items):
        return BinaryOp("/", items[0], items[1])

    def pow(self, items):
        return BinaryOp("^", items[0], items[1])


def _syntax_error(e: UnexpectedInput, text: str) -> MetricParseError:
    if isinstance(e, UnexpectedCharacters):
        return MetricParseError(f"Unexpected character {text[e.pos_in_stream]!r}", e.pos_in_stream, text)
    if isinstance(e, UnexpectedEOF) or (isinstance(e, UnexpectedToken) and e.token.type == "$END"):
        return MetricParseError("Unexpected end of input", len(text), text)
    return MetricParseError(f"Unexpected {str(e.token)!r}", e.token.start_pos, text)


def parse_expression(text: str, dim: int = 9) -> Expr:
    if not text.strip():
        raise MetricParseError("Empty expression", 0, text)
    try:
        tree = _PARSER.parse(text)
    except UnexpectedInput as e:
        raise _syntax_error(e, text) from None
    try:
        return ExpressionBuilder(text, dim).transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, MetricParseError):
            raise e.orig_exc from None
        raise


# --- Metric fields ---

@dataclass(frozen=True, eq=False)
class MetricField:
    """Symmetric matrix of parsed expressions; entries not given are zero."""
    dim: int
    entries: Tuple[Tuple[Optional[Expr], ...], ...]
    source: Tuple[Tuple[str, str], ...] = ()

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.dim:
            raise ValueError(f"Point has dimension {x.shape[0]}, expected {self.dim}")
        g = np.zeros((self.dim, self.dim))
        for i in range(self.dim):
            for j in range(i, self.dim):
                expr = self.entries[i][j]
                if expr is not None:
                    g[i, j] = g[j, i] = expr.evaluate(x)
        return g

    def to_dict(self) -> Dict[str, str]:
        return dict(self.source)


def _sample_points(dim: int, count: int = 5) -> np.ndarray:
    rng = np.random.default_rng(12345)
    return rng.uniform(0.5, 1.5, size=(count, dim))


def parse_metric_expression(text: Union[str, Mapping[str, str]], dim: Optional[int] = None) -> MetricField:
    """
    Parse a metric given as a JSON object (or mapping) from "gij" keys to expression strings.

    Missing entries are zero and entries are mirrored; explicit gij/gji pairs must agree.
    """
    if isinstance(text, str):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise MetricParseError(f"Metric is not valid JSON: {e.msg}", e.pos, text)
    else:
        data = text
    if not isinstance(data, Mapping) or not data:
        raise MetricParseError("Metric must be a non-empty JSON object of gij expressions")

    indexed: Dict[Tuple[int, int], Tuple[str, str]] = {}
    for key, value in data.items():
        match = _KEY_RE.match(str(key))
        if match is None:
            raise MetricParseError(f"Unknown metric key {key!r}; expected g<i><j> with 1 <= i, j <= 9")
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            value = repr(float(value))
        if not isinstance(value, str):
            raise MetricParseError(f"Metric entry {key!r} must be an expression string")
        indexed[(int(match.group(1)) - 1, int(match.group(2)) - 1)] = (key, value)

    if dim is None:
        dim = 1 + max(max(i, j) for i, j in indexed)

    parsed: Dict[Tuple[int, int], Expr] = {}
    for (i, j), (key, value) in indexed.items():
        if i >= dim or j >= dim:
            raise MetricParseError(f"Metric key {key!r} exceeds dimension {dim}")
        parsed[(i, j)] = parse_expression(value, dim)

    entries: List[List[Optional[Expr]]] = [[None] * dim for _ in range(dim)]
    for (i, j), expr in parsed.items():
        a, b = min(i, j), max(i, j)
        if i != j and (j, i) in parsed and i > j:
            other = parsed[(j, i)]
            for point in _sample_points(dim):
                left, right = expr.evaluate(point), other.evaluate(point)
                if not np.isclose(left, right, rtol=1e-12, atol=1e-12, equal_nan=True):
                    raise MetricParseError(
                        f"Entries {indexed[(i, j)][0]!r} and {indexed[(j, i)][0]!r} disagree at {point.tolist()}"
                    )
            continue
        entries[a][b] = expr

    logger.debug(f"Parsed {len(parsed)} metric entries of a {dim}-dimensional chart")
    source = tuple(sorted((key, value) for key, value in indexed.values()))
    return MetricField(dim, tuple(tuple(row) for row in entries), source)
