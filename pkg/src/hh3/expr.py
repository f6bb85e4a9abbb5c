"""Expression front end: parsing, printing, and third-order jet evaluation.

The accepted language is a small calculator grammar over one variable ``x``.
In EBNF, lowest precedence first:

    expr   = term , { ( "+" | "-" ) , term } ;
    term   = unary , { ( "*" | "/" ) , unary } ;
    unary  = "-" , unary | power ;
    power  = atom , [ "^" , unary ] ;            (* right associative *)
    atom   = NUMBER | "x" | "pi" | "e"
           | FUNC , "(" , expr , ")"
           | "(" , expr , ")" ;
    FUNC   = "exp" | "log" | "sin" | "cos" | "sqrt" ;
    NUMBER = digits [ "." digits ] [ ( "e" | "E" ) [ "+" | "-" ] digits ]
           | "." digits [ exponent ] ;

Unary minus binds looser than ``^``: ``-x^2`` is ``-(x^2)``.  Exponents sit
one level up the chain, so ``x^-2`` and ``x^2^3`` (= ``x^(2^3)``) both parse.
``log`` is the natural logarithm.  There is no ``abs``: every bound in this
package needs three derivatives, and |.| does not supply them.

Evaluation is done on jets: a :class:`Jet3` carries ``(f, f', f'', f''')`` at
a point and the arithmetic below propagates all four components exactly
(Leibniz for products, a triangular back-substitution for quotients, and the
order-3 chain rule for function application).  No finite differencing is done
anywhere.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

from .errors import DomainError, ExprSyntaxError, UnknownIdentifier

__all__ = [
    "Num", "Var", "Const", "Neg", "BinOp", "Func", "Node",
    "Jet3", "parse", "to_text", "evaluate", "eval_jet3",
]

_FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt")
_CONSTANTS = {"pi": math.pi, "e": math.e}


# --------------------------------------------------------------------------
# AST
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    """The integration variable ``x``."""


@dataclass(frozen=True)
class Const:
    name: str  # "pi" or "e"


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of "+", "-", "*", "/", "^"
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Func:
    name: str  # one of _FUNCTIONS
    arg: "Node"


Node = Union[Num, Var, Const, Neg, BinOp, Func]


# --------------------------------------------------------------------------
# Tokenizer
# --------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "num", "ident", "op", "end"
    text: str
    pos: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            # skip leading whitespace before reporting the bad character
            stripped = pos + len(source[pos:]) - len(source[pos:].lstrip())
            if stripped >= len(source):
                break
            raise ExprSyntaxError(stripped, ("a token",),
                                  repr(source[stripped]))
        kind = match.lastgroup
        assert kind is not None
        tokens.append(_Token(kind, match.group(kind),
                             match.start(kind)))
        pos = match.end()
    tokens.append(_Token("end", "", len(source)))
    return tokens


# --------------------------------------------------------------------------
# Parser (recursive descent, one token of lookahead)
# --------------------------------------------------------------------------

_ATOM_EXPECTED = ("a number", "'x'", "'pi'", "'e'", "a function name", "'('")


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        t = self.tok
        self.i += 1
        return t

    def fail(self, expected: tuple[str, ...]):
        t = self.tok
        found = "end of input" if t.kind == "end" else repr(t.text)
        raise ExprSyntaxError(t.pos, expected, found)

    def expect_op(self, op: str):
        if self.tok.kind == "op" and self.tok.text == op:
            return self.advance()
        self.fail((f"'{op}'",))

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            self.fail(("an operator", "end of input"))
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text))
        if t.kind == "ident":
            self.advance()
            if t.text == "x":
                return Var()
            if t.text in _CONSTANTS:
                return Const(t.text)
            if t.text in _FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Func(t.text, arg)
            raise UnknownIdentifier(t.pos, t.text)
        if t.kind == "op" and t.text == "(":
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        self.fail(_ATOM_EXPECTED)
        raise AssertionError("unreachable")


def parse(source: str) -> Node:
    """Parse expression text into an immutable AST.

    Raises :class:`ExprSyntaxError` (with byte offset and the expected-token
    set) on malformed input and :class:`UnknownIdentifier` for names outside
    the vocabulary.
    """
    return _Parser(source).parse()


# --------------------------------------------------------------------------
# Printing.  Minimal parentheses; reparsing the output reproduces the AST.
# --------------------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        if node.op in "+-":
            return _PREC_ADD
        if node.op in "*/":
            return _PREC_MUL
        return _PREC_POW
    if isinstance(node, Neg):
        return _PREC_NEG
    if isinstance(node, Num) and node.value < 0:
        return _PREC_NEG  # a negative literal prints with a leading '-'
    return _PREC_ATOM


def _wrap(node: Node, minimum: int) -> str:
    text = to_text(node)
    if _prec(node) < minimum:
        return f"({text})"
    return text


def to_text(node: Node) -> str:
    """Render an AST back to source text with minimal parentheses."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Neg):
        return "-" + _wrap(node.operand, _PREC_NEG)
    if isinstance(node, Func):
        return f"{node.name}({to_text(node.arg)})"
    if isinstance(node, BinOp):
        if node.op in "+-":
            left = _wrap(node.left, _PREC_ADD)
            right = _wrap(node.right, _PREC_ADD + 1)
            return f"{left} {node.op} {right}"
        if node.op in "*/":
            left = _wrap(node.left, _PREC_MUL)
            right = _wrap(node.right, _PREC_MUL + 1)
            return f"{left}{node.op}{right}"
        # '^' is right associative; its exponent slot admits a unary minus
        base = _wrap(node.left, _PREC_ATOM)
        exponent = _wrap(node.right, _PREC_NEG)
        return f"{base}^{exponent}"
    raise TypeError(f"not an expression node: {node!r}")


# --------------------------------------------------------------------------
# Jets
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Jet3:
    """Value and first three derivatives of a function at one point."""

    d0: float
    d1: float
    d2: float
    d3: float

    def entries(self) -> tuple[float, float, float, float]:
        return (self.d0, self.d1, self.d2, self.d3)


def _const_jet(c: float) -> Jet3:
    return Jet3(c, 0.0, 0.0, 0.0)


def _add(a: Jet3, b: Jet3) -> Jet3:
    return Jet3(a.d0 + b.d0, a.d1 + b.d1, a.d2 + b.d2, a.d3 + b.d3)


def _sub(a: Jet3, b: Jet3) -> Jet3:
    return Jet3(a.d0 - b.d0, a.d1 - b.d1, a.d2 - b.d2, a.d3 - b.d3)


def _neg(a: Jet3) -> Jet3:
    return Jet3(-a.d0, -a.d1, -a.d2, -a.d3)


def _mul(a: Jet3, b: Jet3) -> Jet3:
    # Leibniz: (fg)''' = f'''g + 3 f''g' + 3 f'g'' + f g'''
    return Jet3(
        a.d0 * b.d0,
        a.d1 * b.d0 + a.d0 * b.d1,
        a.d2 * b.d0 + 2.0 * a.d1 * b.d1 + a.d0 * b.d2,
        a.d3 * b.d0 + 3.0 * a.d2 * b.d1 + 3.0 * a.d1 * b.d2 + a.d0 * b.d3,
    )


def _div(a: Jet3, b: Jet3) -> Jet3:
    # Solve q*b = a order by order (b.d0 != 0 is checked by the caller).
    q0 = a.d0 / b.d0
    q1 = (a.d1 - q0 * b.d1) / b.d0
    q2 = (a.d2 - q0 * b.d2 - 2.0 * q1 * b.d1) / b.d0
    q3 = (a.d3 - q0 * b.d3 - 3.0 * q1 * b.d2 - 3.0 * q2 * b.d1) / b.d0
    return Jet3(q0, q1, q2, q3)


def _compose(g: tuple[float, float, float, float], u: Jet3) -> Jet3:
    # Order-3 chain rule with outer derivatives g = (g, g', g'', g''') at u.d0.
    g0, g1, g2, g3 = g
    u1, u2, u3 = u.d1, u.d2, u.d3
    return Jet3(
        g0,
        g1 * u1,
        g2 * u1 * u1 + g1 * u2,
        g3 * u1 ** 3 + 3.0 * g2 * u1 * u2 + g1 * u3,
    )


def _int_pow(u: Jet3, n: int) -> Jet3:
    """u**n for integer n >= 0 by repeated jet multiplication."""
    result = _const_jet(1.0)
    base = u
    k = n
    while k:
        if k & 1:
            result = _mul(result, base)
        base = _mul(base, base)
        k >>= 1
    return result


# --------------------------------------------------------------------------
# Evaluation
# --------------------------------------------------------------------------

def _domain(node: Node, x: float, why: str) -> DomainError:
    return DomainError(why, expr_text=to_text(node), x=x)


def _eval(node: Node, x: float) -> Jet3:
    if isinstance(node, Num):
        return _const_jet(node.value)
    if isinstance(node, Var):
        return Jet3(x, 1.0, 0.0, 0.0)
    if isinstance(node, Const):
        return _const_jet(_CONSTANTS[node.name])
    if isinstance(node, Neg):
        return _neg(_eval(node.operand, x))
    if isinstance(node, Func):
        u = _eval(node.arg, x)
        return _apply_func(node, u, x)
    if isinstance(node, BinOp):
        a = _eval(node.left, x)
        if node.op == "^":
            return _apply_pow(node, a, x)
        b = _eval(node.right, x)
        if node.op == "+":
            return _add(a, b)
        if node.op == "-":
            return _sub(a, b)
        if node.op == "*":
            return _mul(a, b)
        if b.d0 == 0.0:
            raise _domain(node, x, "division by zero")
        return _div(a, b)
    raise TypeError(f"not an expression node: {node!r}")


def _apply_func(node: Func, u: Jet3, x: float) -> Jet3:
    v = u.d0
    name = node.name
    if name == "exp":
        try:
            ev = math.exp(v)
        except OverflowError:
            raise _domain(node, x, "exp overflow") from None
        return _compose((ev, ev, ev, ev), u)
    if name == "log":
        if v <= 0.0:
            raise _domain(node, x, "log needs a positive argument")
        iv = 1.0 / v
        return _compose((math.log(v), iv, -iv * iv, 2.0 * iv ** 3), u)
    if name == "sin":
        s, c = math.sin(v), math.cos(v)
        return _compose((s, c, -s, -c), u)
    if name == "cos":
        s, c = math.sin(v), math.cos(v)
        return _compose((c, -s, -c, s), u)
    # sqrt: derivatives blow up at 0, so the open condition v > 0 is required
    if v <= 0.0:
        raise _domain(node, x, "sqrt needs a positive argument")
    r = math.sqrt(v)
    return _compose(
        (r, 0.5 / r, -0.25 / (r * v), 0.375 / (r * v * v)), u
    )


_MAX_INT_EXPONENT = 2 ** 16


def _apply_pow(node: BinOp, base: Jet3, x: float) -> Jet3:
    exponent = _eval(node.right, x)
    if exponent.d1 == 0.0 and exponent.d2 == 0.0 and exponent.d3 == 0.0:
        c = exponent.d0
        if c == int(c) and abs(c) <= _MAX_INT_EXPONENT:
            n = int(c)
            if n >= 0:
                return _int_pow(base, n)
            if base.d0 == 0.0:
                raise _domain(node, x, "zero raised to a negative power")
            return _div(_const_jet(1.0), _int_pow(base, -n))
        if base.d0 <= 0.0:
            raise _domain(
                node, x, "non-integer exponent needs a positive base")
        # u^c = exp(c*log u): compose the closed-form outer derivatives
        v = base.d0
        g0 = v ** c
        g1 = c * g0 / v
        g2 = c * (c - 1.0) * g0 / (v * v)
        g3 = c * (c - 1.0) * (c - 2.0) * g0 / (v ** 3)
        return _compose((g0, g1, g2, g3), base)
    if base.d0 <= 0.0:
        raise _domain(node, x, "variable exponent needs a positive base")
    log_base = _apply_func(Func("log", node.left), base, x)
    product = _mul(exponent, log_base)
    return _apply_func(Func("exp", node), product, x)


def eval_jet3(node: Node, x: float) -> Jet3:
    """Evaluate ``(f(x), f'(x), f''(x), f'''(x))`` exactly via jet arithmetic.

    Raises :class:`DomainError` naming the offending subexpression when the
    point leaves a function's domain or the result is not finite.
    """
    if not math.isfinite(x):
        raise DomainError("evaluation point must be finite", x=x)
    jet = _eval(node, x)
    if not all(map(math.isfinite, jet.entries())):
        raise _domain(node, x, "result is not finite")
    return jet


def evaluate(node: Node, x: float) -> float:
    """The value component of :func:`eval_jet3`; errors are identical."""
    return eval_jet3(node, x).d0
