"""A small expression language for describing topologies as pair predicates.

Example, a 10-node ring::

    abs(n1.id - n2.id) == 1 or abs(n1.id - n2.id) == 9

Grammar (lowest precedence first)::

    expr     := and_expr ("or" and_expr)*
    and_expr := not_expr ("and" not_expr)*
    not_expr := "not" not_expr | compare
    compare  := arith (CMP arith)?
    arith    := term (("+" | "-") term)*
    term     := unary (("*" | "/" | "%") unary)*
    unary    := "-" unary | atom
    atom     := INT | STRING | NODE "." ATTR | "abs" "(" expr ")" | "(" expr ")"
    NODE     := "n1" | "n2"
    ATTR     := "id" | "region"
"""
from __future__ import annotations

import operator
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

__all__ = [
    "EvalError",
    "ParseError",
    "parse_topology_expr",
    "eval_predicate",
    "to_text",
]


class ParseError(ValueError):
    def __init__(self, message: str, position: int, expected: frozenset[str] = frozenset()):
        self.position = position
        self.expected = frozenset(expected)
        detail = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{message} at position {position}{detail}")


class EvalError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Str:
    value: str


@dataclass(frozen=True)
class Attr:
    node: str  # "n1" | "n2"
    name: str  # "id" | "region"


@dataclass(frozen=True)
class Neg:
    operand: "Ast"


@dataclass(frozen=True)
class Abs:
    operand: "Ast"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Ast"
    right: "Ast"


@dataclass(frozen=True)
class Compare:
    op: str
    left: "Ast"
    right: "Ast"


@dataclass(frozen=True)
class BoolOp:
    op: str  # "and" | "or"
    left: "Ast"
    right: "Ast"


@dataclass(frozen=True)
class Not:
    operand: "Ast"


Ast = Union[Num, Str, Attr, Neg, Abs, BinOp, Compare, BoolOp, Not]

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<int>\d+)
  | (?P<str>'[^']*'|"[^"]*")
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>==|!=|<=|>=|<|>|\+|-|\*|/|%|\(|\)|\.)
    """,
    re.VERBOSE,
)

_KEYWORDS = {"and", "or", "not", "abs", "n1", "n2", "id", "region"}
_CMP_OPS = ("==", "!=", "<=", ">=", "<", ">")


@dataclass(frozen=True)
class _Tok:
    kind: str  # int, str, kw, op, end
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind == "name":
            if m.group() not in _KEYWORDS:
                raise ParseError(f"unknown name {m.group()!r}", pos, frozenset(_KEYWORDS))
            kind = "kw"
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), pos))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def _at(self, *texts: str) -> bool:
        return self.tok.kind in ("op", "kw") and self.tok.text in texts

    def _expect(self, *texts: str) -> _Tok:
        if not self._at(*texts):
            self._fail(frozenset(texts))
        tok = self.tok
        self.i += 1
        return tok

    def _fail(self, expected: frozenset[str]):
        tok = self.tok
        what = "end of input" if tok.kind == "end" else f"token {tok.text!r}"
        raise ParseError(f"unexpected {what}", tok.pos, expected)

    def parse(self) -> Ast:
        node = self.expr()
        if self.tok.kind != "end":
            self._fail(frozenset({"and", "or", "<end>"}))
        return node

    def expr(self) -> Ast:
        node = self.and_expr()
        while self._at("or"):
            self.i += 1
            node = BoolOp("or", node, self.and_expr())
        return node

    def and_expr(self) -> Ast:
        node = self.not_expr()
        while self._at("and"):
            self.i += 1
            node = BoolOp("and", node, self.not_expr())
        return node

    def not_expr(self) -> Ast:
        if self._at("not"):
            self.i += 1
            return Not(self.not_expr())
        return self.compare()

    def compare(self) -> Ast:
        left = self.arith()
        if self._at(*_CMP_OPS):
            op = self.tok.text
            self.i += 1
            return Compare(op, left, self.arith())
        return left

    def arith(self) -> Ast:
        node = self.term()
        while self._at("+", "-"):
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Ast:
        node = self.unary()
        while self._at("*", "/", "%"):
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Ast:
        if self._at("-"):
            self.i += 1
            return Neg(self.unary())
        return self.atom()

    def atom(self) -> Ast:
        tok = self.tok
        if tok.kind == "int":
            self.i += 1
            return Num(int(tok.text))
        if tok.kind == "str":
            self.i += 1
            return Str(tok.text[1:-1])
        if self._at("n1", "n2"):
            self.i += 1
            self._expect(".")
            name = self._expect("id", "region").text
            return Attr(tok.text, name)
        if self._at("abs"):
            self.i += 1
            self._expect("(")
            inner = self.expr()
            self._expect(")")
            return Abs(inner)
        if self._at("("):
            self.i += 1
            inner = self.expr()
            self._expect(")")
            return inner
        self._fail(frozenset({"<int>", "<string>", "n1", "n2", "abs", "(", "-"}))


def parse_topology_expr(text: str) -> Ast:
    """Parse a pair predicate. Raises :class:`ParseError` on malformed input."""
    return _Parser(text).parse()


_ARITH = {
    "+": operator.add,
    "-": operator.sub,
    "*": operator.mul,
}
_CMP = {
    "==": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}


def _number(v, ast: Ast):
    if isinstance(v, bool) or not isinstance(v, (int, Fraction)):
        raise EvalError(f"expected a number in {to_text(ast)}, got {v!r}")
    return v


def _eval(ast: Ast, n1, n2):
    if isinstance(ast, Num):
        return ast.value
    if isinstance(ast, Str):
        return ast.value
    if isinstance(ast, Attr):
        node = n1 if ast.node == "n1" else n2
        return int(node.id) if ast.name == "id" else str(node.region)
    if isinstance(ast, Neg):
        return -_number(_eval(ast.operand, n1, n2), ast)
    if isinstance(ast, Abs):
        return abs(_number(_eval(ast.operand, n1, n2), ast))
    if isinstance(ast, BinOp):
        a = _number(_eval(ast.left, n1, n2), ast)
        b = _number(_eval(ast.right, n1, n2), ast)
        if ast.op in ("/", "%"):
            if b == 0:
                raise EvalError(f"{'division' if ast.op == '/' else 'modulo'} by zero in {to_text(ast)}")
            return Fraction(a) / b if ast.op == "/" else a % b
        return _ARITH[ast.op](a, b)
    if isinstance(ast, Compare):
        a = _eval(ast.left, n1, n2)
        b = _eval(ast.right, n1, n2)
        if isinstance(a, str) != isinstance(b, str):
            if ast.op in ("==", "!="):
                return ast.op == "!="
            raise EvalError(f"cannot order a string and a number in {to_text(ast)}")
        return _CMP[ast.op](a, b)
    if isinstance(ast, BoolOp):
        left = bool(_eval(ast.left, n1, n2))
        if ast.op == "and":
            return left and bool(_eval(ast.right, n1, n2))
        return left or bool(_eval(ast.right, n1, n2))
    if isinstance(ast, Not):
        return not _eval(ast.operand, n1, n2)
    raise TypeError(f"not an expression node: {ast!r}")


def eval_predicate(ast: Ast, n1, n2) -> bool:
    """Evaluate ``ast`` for the ordered pair (n1, n2).

    Nodes only need ``id`` and ``region`` attributes.
    """
    return bool(_eval(ast, n1, n2))


def to_text(ast: Ast) -> str:
    """Fully parenthesized source text; parses back to an equivalent tree."""
    if isinstance(ast, Num):
        return str(ast.value)
    if isinstance(ast, Str):
        quote = "'" if "'" not in ast.value else '"'
        return f"{quote}{ast.value}{quote}"
    if isinstance(ast, Attr):
        return f"{ast.node}.{ast.name}"
    if isinstance(ast, Neg):
        return f"(-{to_text(ast.operand)})"
    if isinstance(ast, Abs):
        return f"abs({to_text(ast.operand)})"
    if isinstance(ast, Not):
        return f"(not {to_text(ast.operand)})"
    if isinstance(ast, (BinOp, Compare, BoolOp)):
        return f"({to_text(ast.left)} {ast.op} {to_text(ast.right)})"
    raise TypeError(f"not an expression node: {ast!r}")
