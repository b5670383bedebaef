#!/usr/bin/env python3
"""
Expression Parser
Parses one-variable formulas such as "x^3 - 2*x + 2" or "a*log(b*x + c)"
into an immutable AST and evaluates them either as plain floats or as
second-order jets (value, first and second derivative).

Grammar (whitespace is insignificant, '-' may also be written as U+2212):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := unary ('^' factor)?
    unary  := '-' unary | atom
    atom   := number | 'x' | 'pi' | 'e' | ident '(' expr ')' | '(' expr ')'

Unary minus binds tighter than '^', so "-x^2" is (-x)^2. Exponents must be
constant and are folded to a number while parsing.
"""

import logging
import math
import operator
import re
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple, Union

from fuzzywuzzy import fuzz

import config
from kernels import Jet2, NonFiniteJetError, RootFindingError

logger = logging.getLogger(__name__)

FUNCTIONS = ["log", "exp", "sin", "cos", "tanh", "sqrt"]
CONSTANTS = {"pi": math.pi, "e": math.e}
VARIABLE = "x"

# Precedence used when rendering nodes back to text
_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3, "neg": 4}
_ATOM_PRECEDENCE = 5

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()−])"
    r")"
)


class ExprParseError(RootFindingError, ValueError):
    """Malformed expression text, with the 0-based offset of the problem."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.reason = message
        self.position = position

    def pointer(self, text: str) -> str:
        """The offending text with a caret under the error position."""
        return f"{text}\n{' ' * self.position}^"


class UnknownFunctionError(ExprParseError):
    """An identifier that is neither x, a constant nor a known function."""

    def __init__(self, name: str, position: int):
        self.name = name
        self.suggestion = suggest_identifier(name)
        message = f"Unknown function or identifier '{name}'"
        if self.suggestion:
            message += f" (did you mean '{self.suggestion}'?)"
        super().__init__(message, position)


class EvaluationDomainError(RootFindingError, ValueError):
    """A subexpression is undefined at the evaluation point."""

    def __init__(self, message: str, subexpression: str):
        super().__init__(f"{message} in '{subexpression}'")
        self.subexpression = subexpression


def suggest_identifier(name: str) -> Optional[str]:
    """Closest known identifier to name, if any is close enough."""
    candidates = FUNCTIONS + list(CONSTANTS) + [VARIABLE]
    best_score, best = 0, None
    for candidate in candidates:
        score = fuzz.ratio(name.lower(), candidate)
        if score > best_score:
            best_score, best = score, candidate
    if best_score >= config.SUGGESTION_MIN_SCORE:
        return best
    return None


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: float
    name: Optional[str] = None

    @property
    def precedence(self) -> int:
        return _PRECEDENCE["neg"] if self.value < 0 and not self.name else _ATOM_PRECEDENCE

    def __str__(self):
        if self.name:
            return self.name
        text = repr(self.value)
        return text[:-2] if text.endswith(".0") else text


@dataclass(frozen=True)
class Var:
    precedence = _ATOM_PRECEDENCE

    def __str__(self):
        return VARIABLE


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or one of FUNCTIONS
    operand: "ExprAst"

    @property
    def precedence(self) -> int:
        return _PRECEDENCE["neg"] if self.op == "neg" else _ATOM_PRECEDENCE

    def __str__(self):
        if self.op == "neg":
            inner = str(self.operand)
            if self.operand.precedence < _PRECEDENCE["neg"]:
                inner = f"({inner})"
            return f"-{inner}"
        return f"{self.op}({self.operand})"


@dataclass(frozen=True)
class Binary:
    op: str  # one of + - * / ^
    left: "ExprAst"
    right: "ExprAst"

    @property
    def precedence(self) -> int:
        return _PRECEDENCE[self.op]

    def __str__(self):
        if self.op == "^":
            # right-associative: the base needs parentheses at equal precedence
            left, right = str(self.left), str(self.right)
            if self.left.precedence <= _PRECEDENCE["^"]:
                left = f"({left})"
            if self.right.precedence < _PRECEDENCE["^"]:
                right = f"({right})"
            return f"{left} ^ {right}"
        # Flat chains are rendered in a loop; opening parens are counted and prepended
        base, chain = left_chain(self)
        opens, parts, previous = 0, [str(base)], base
        for link in chain:
            mine = link.precedence
            if previous.precedence < mine:
                opens += 1
                parts.append(")")
            right = str(link.right)
            if link.right.precedence <= mine:
                right = f"({right})"
            parts.append(f" {link.op} {right}")
            previous = link
        return "(" * opens + "".join(parts)


ExprAst = Union[Const, Var, Unary, Binary]


def left_chain(node: ExprAst) -> Tuple[ExprAst, List[Binary]]:
    """Split a left-deep run of + - * / nodes into its base and the links above it, innermost first."""
    chain = []
    while isinstance(node, Binary) and node.op != "^":
        chain.append(node)
        node = node.left
    chain.reverse()
    return node, chain


def contains_variable(node: ExprAst) -> bool:
    pending = [node]
    while pending:
        node = pending.pop()
        if isinstance(node, Var):
            return True
        if isinstance(node, Unary):
            pending.append(node.operand)
        elif isinstance(node, Binary):
            pending.extend((node.left, node.right))
    return False


# ---------------------------------------------------------------------------
# Tokenizer and parser
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # number, ident, op, eof
    text: str
    position: int


def tokenize(text: str) -> List[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if not match or match.end() == pos:
            if text[pos:].strip() == "":
                break
            # Point at the first non-blank character that could not be read
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprParseError(f"Unexpected character {text[bad]!r}", bad)
        kind = match.lastgroup
        if kind is None:
            break
        start = match.start(kind)
        token_text = match.group(kind)
        if token_text == "−":
            token_text = "-"
        tokens.append(Token(kind, token_text, start))
        pos = match.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


class Parser:
    """Recursive descent over the token list, one method per grammar rule."""

    def __init__(self, text: str, max_depth: int = config.MAX_EXPR_DEPTH):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0
        self.max_depth = max_depth
        self._level = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def _advance(self) -> Token:
        token = self.current
        if token.kind != "eof":
            self.index += 1
        return token

    def _accept(self, *ops: str) -> Optional[Token]:
        token = self.current
        if token.kind == "op" and token.text in ops:
            return self._advance()
        return None

    def _expect(self, op: str) -> Token:
        token = self._accept(op)
        if token is None:
            raise ExprParseError(f"Expected '{op}' but found {self._describe(self.current)}", self.current.position)
        return token

    @staticmethod
    def _describe(token: Token) -> str:
        return "end of input" if token.kind == "eof" else f"'{token.text}'"

    def _enter(self, position: int):
        self._level += 1
        if self._level > self.max_depth:
            raise ExprParseError(f"Expression nested deeper than {self.max_depth} levels", position)

    def _leave(self):
        self._level -= 1

    def parse(self) -> ExprAst:
        if self.current.kind == "eof":
            raise ExprParseError("Empty expression", self.current.position)
        node = self._expr()
        if self.current.kind != "eof":
            raise ExprParseError(f"Unexpected {self._describe(self.current)}", self.current.position)
        return node

    def _expr(self) -> ExprAst:
        node = self._term()
        while True:
            token = self._accept("+", "-")
            if token is None:
                return node
            right = self._term()
            node = Binary(token.text, node, right)

    def _term(self) -> ExprAst:
        node = self._factor()
        while True:
            token = self._accept("*", "/")
            if token is None:
                return node
            right = self._factor()
            node = Binary(token.text, node, right)

    def _factor(self) -> ExprAst:
        base = self._unary()
        token = self._accept("^")
        if token is None:
            return base
        self._enter(token.position)
        exponent_start = self.current.position
        exponent = self._factor()
        self._leave()
        if contains_variable(exponent):
            raise ExprParseError("Exponent must be a constant", exponent_start)
        try:
            k = evaluate(exponent, 0.0)
        except (EvaluationDomainError, NonFiniteJetError) as e:
            raise ExprParseError(f"Exponent cannot be evaluated: {e}", exponent_start)
        if not math.isfinite(k):
            raise ExprParseError("Exponent is not finite", exponent_start)
        return Binary("^", base, Const(k))

    def _unary(self) -> ExprAst:
        token = self._accept("-")
        if token is None:
            return self._atom()
        self._enter(token.position)
        operand = self._unary()
        self._leave()
        return Unary("neg", operand)

    def _atom(self) -> ExprAst:
        token = self.current
        if token.kind == "number":
            self._advance()
            value = float(token.text)
            if not math.isfinite(value):
                raise ExprParseError(f"Number {token.text} is out of range", token.position)
            return Const(value)

        if token.kind == "ident":
            self._advance()
            if token.text == VARIABLE:
                return Var()
            if token.text in CONSTANTS:
                return Const(CONSTANTS[token.text], name=token.text)
            if token.text not in FUNCTIONS:
                raise UnknownFunctionError(token.text, token.position)
            self._expect("(")
            self._enter(token.position)
            operand = self._expr()
            self._leave()
            self._expect(")")
            return Unary(token.text, operand)

        if self._accept("("):
            self._enter(token.position)
            node = self._expr()
            self._leave()
            self._expect(")")
            return node

        raise ExprParseError(f"Unexpected {self._describe(token)}", token.position)


def parse(text: str) -> ExprAst:
    """Parse expression text into an AST, or raise a positioned ExprParseError."""
    return Parser(text).parse()


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

_FLOAT_BINARY: Dict[str, Callable[[float, float], float]] = {
    "+": operator.add,
    "-": operator.sub,
    "*": operator.mul,
    "/": operator.truediv,
}

_FLOAT_UNARY: Dict[str, Callable[[float], float]] = {
    "neg": operator.neg,
    "log": math.log,
    "exp": math.exp,
    "sin": math.sin,
    "cos": math.cos,
    "tanh": math.tanh,
    "sqrt": math.sqrt,
}

_JET_BINARY: Dict[str, Callable] = {
    "+": operator.add,
    "-": operator.sub,
    "*": operator.mul,
    "/": operator.truediv,
}

_JET_UNARY: Dict[str, Callable[[Jet2], Jet2]] = {
    "neg": operator.neg,
    "log": Jet2.log,
    "exp": Jet2.exp,
    "sin": Jet2.sin,
    "cos": Jet2.cos,
    "tanh": Jet2.tanh,
    "sqrt": Jet2.sqrt,
}


def _check_domain(node, u: float, v: Optional[float] = None, strict_sqrt: bool = False):
    if isinstance(node, Unary):
        if node.op == "log" and u <= 0.0:
            raise EvaluationDomainError(f"log of non-positive value {u!r}", str(node))
        if node.op == "sqrt" and (u < 0.0 or (strict_sqrt and u == 0.0)):
            raise EvaluationDomainError(f"sqrt of {'non-positive' if strict_sqrt else 'negative'} value {u!r}", str(node))
    elif node.op == "/" and v == 0.0:
        raise EvaluationDomainError("Division by zero", str(node))


def _guarded(node, fn, *args):
    try:
        return fn(*args)
    except NonFiniteJetError:
        raise
    except OverflowError:
        raise NonFiniteJetError(f"Overflow evaluating '{node}'")
    except (ValueError, ZeroDivisionError):
        raise EvaluationDomainError("Undefined value", str(node))


def evaluate(node: ExprAst, x: float) -> float:
    """Plain float evaluation, using the same operations as the value part of eval_jet."""
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Unary):
        u = evaluate(node.operand, x)
        _check_domain(node, u)
        return _guarded(node, _FLOAT_UNARY[node.op], u)
    if node.op == "^":
        base = evaluate(node.left, x)
        return _guarded(node, math.pow, base, node.right.value)
    base, chain = left_chain(node)
    acc = evaluate(base, x)
    for link in chain:
        right = evaluate(link.right, x)
        _check_domain(link, acc, right)
        acc = _guarded(link, _FLOAT_BINARY[link.op], acc, right)
    return acc


def eval_jet(node: ExprAst, x: float) -> Jet2:
    """Value, first and second derivative of the expression at x.

    Raises EvaluationDomainError naming the offending subexpression when a
    log/sqrt argument is non-positive or a denominator vanishes, and
    NonFiniteJetError when an intermediate result overflows.
    """
    if isinstance(node, Const):
        return Jet2.constant(node.value)
    if isinstance(node, Var):
        return Jet2.variable(x)
    if isinstance(node, Unary):
        u = eval_jet(node.operand, x)
        _check_domain(node, u.value, strict_sqrt=True)
        return _guarded(node, _JET_UNARY[node.op], u)
    if node.op == "^":
        base = eval_jet(node.left, x)
        return _guarded(node, operator.pow, base, node.right.value)
    base, chain = left_chain(node)
    acc = eval_jet(base, x)
    for link in chain:
        right = eval_jet(link.right, x)
        _check_domain(link, acc.value, right.value)
        acc = _guarded(link, _JET_BINARY[link.op], acc, right)
    return acc


def expression_problem(text: str):
    """Wrap expression text as a ProblemSpec over the whole real line."""
    from problems import Domain, ProblemSpec

    ast = parse(text)
    logger.debug(f"Parsed expression {text!r} as {ast}")
    return ProblemSpec(
        name="expr",
        evaluator=lambda x: eval_jet(ast, x),
        domain=Domain(),
        known_roots=[],
        notes=f"User expression {ast}",
        formula=text,
    )
