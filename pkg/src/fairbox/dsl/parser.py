"""Recursive-descent parser for the verification input language.

One file carries three sections: the population model, the decision program,
and the spec block.  Blocks are laid out by indentation (offside rule): the
statements of a block share the column of its first statement, nested blocks
indent strictly deeper, and elif/else align with their if.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .nodes import (
    Assign,
    AtomicCondition,
    Bernoulli,
    Cond,
    CondAnd,
    CondAtom,
    CondOr,
    DecisionProgram,
    Draw,
    FairnessSpec,
    Gauss,
    IfChain,
    LinearExpression,
    PopulationModel,
    Pos,
    Relation,
    Statement,
    VerificationTask,
)

KEYWORDS = {
    "define", "return", "if", "elif", "else", "and", "or",
    "gauss", "bernoulli", "spec", "sensitive", "qualified", "epsilon",
    "true", "false",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op><=|>=|==|<-|←|[<>+\-*(),;:{}~])
    """,
    re.VERBOSE,
)


class ParseError(Exception):
    """Syntax error with source position and the tokens that would have
    been accepted."""

    def __init__(self, message: str, pos: Pos, expected: tuple[str, ...] = ()):
        self.message = message
        self.pos = pos
        self.expected = expected
        detail = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"{pos}: {message}{detail}")


@dataclass(frozen=True)
class Token:
    kind: str  # 'num' | 'ident' | keyword text | operator text | 'eof'
    text: str
    pos: Pos


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        i = 0
        n = len(line)
        while i < n:
            ch = line[i]
            if ch == "#":
                break
            if ch in " \t\r":
                i += 1
                continue
            m = _TOKEN_RE.match(line, i)
            if m is None:
                raise ParseError(f"unexpected character {ch!r}", Pos(lineno, i + 1))
            pos = Pos(lineno, i + 1)
            if m.lastgroup == "num":
                tokens.append(Token("num", m.group(), pos))
            elif m.lastgroup == "ident":
                word = m.group()
                kind = word if word in KEYWORDS else "ident"
                tokens.append(Token(kind, word, pos))
            else:
                op = "<-" if m.group() == "←" else m.group()
                tokens.append(Token(op, op, pos))
            i = m.end()
    end = Pos(len(text.split("\n")), 1)
    tokens.append(Token("eof", "", end))
    return tokens


_STMT_START = ("ident", "if")


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(
                f"unexpected {describe(tok)}", tok.pos, expected=(kind,)
            )
        return self.next()

    # ---- numbers -------------------------------------------------------

    def parse_number(self) -> float:
        sign = 1.0
        tok = self.peek()
        if tok.kind in ("+", "-"):
            self.next()
            sign = -1.0 if tok.kind == "-" else 1.0
            tok = self.peek()
        lit = self.expect("num")
        value = sign * float(lit.text)
        if not math.isfinite(value):
            raise ParseError("number out of range", lit.pos)
        return value

    # ---- linear expressions -------------------------------------------

    def parse_linexpr(self) -> LinearExpression:
        acc = LinearExpression.constant(0.0)
        sign = 1.0
        tok = self.peek()
        if tok.kind in ("+", "-"):
            self.next()
            sign = -1.0 if tok.kind == "-" else 1.0
        while True:
            acc = acc.plus(self.parse_term().scaled(sign))
            tok = self.peek()
            if tok.kind == "+":
                self.next()
                sign = 1.0
            elif tok.kind == "-":
                self.next()
                sign = -1.0
            else:
                return acc

    def parse_term(self) -> LinearExpression:
        tok = self.peek()
        if tok.kind == "num":
            self.next()
            value = float(tok.text)
            if not math.isfinite(value):
                raise ParseError("number out of range", tok.pos)
            if self.peek().kind == "*":
                self.next()
                ident = self.expect("ident")
                self.reject_nonlinear()
                return LinearExpression(((ident.text, value),), 0.0)
            return LinearExpression.constant(value)
        if tok.kind == "ident":
            self.next()
            self.reject_nonlinear()
            return LinearExpression.variable(tok.text)
        raise ParseError(
            f"unexpected {describe(tok)}", tok.pos, expected=("number", "identifier")
        )

    def reject_nonlinear(self) -> None:
        if self.peek().kind == "*":
            raise ParseError(
                "nonlinear term: products of variables are not allowed",
                self.peek().pos,
            )

    # ---- conditions ----------------------------------------------------

    def parse_cond(self) -> Cond:
        items = [self.parse_conj()]
        while self.peek().kind == "or":
            self.next()
            items.append(self.parse_conj())
        return items[0] if len(items) == 1 else CondOr(tuple(items))

    def parse_conj(self) -> Cond:
        items = [self.parse_atom()]
        while self.peek().kind == "and":
            self.next()
            items.append(self.parse_atom())
        return items[0] if len(items) == 1 else CondAnd(tuple(items))

    def parse_atom(self) -> Cond:
        tok = self.peek()
        if tok.kind == "(":
            self.next()
            inner = self.parse_cond()
            self.expect(")")
            return inner
        lhs = self.parse_linexpr()
        rel_tok = self.peek()
        if rel_tok.kind not in ("<=", "<", ">=", ">", "=="):
            raise ParseError(
                f"unexpected {describe(rel_tok)}",
                rel_tok.pos,
                expected=("<=", "<", ">=", ">", "=="),
            )
        self.next()
        rhs = self.parse_linexpr()
        return CondAtom(
            AtomicCondition(lhs.minus(rhs), Relation(rel_tok.kind), tok.pos)
        )

    # ---- statements and blocks ----------------------------------------

    def parse_block(self, enclosing_col: int) -> tuple[Statement, ...]:
        first = self.peek()
        if first.kind not in _STMT_START or first.pos.col <= enclosing_col:
            return ()
        col = first.pos.col
        stmts: list[Statement] = []
        while True:
            tok = self.peek()
            if tok.kind not in _STMT_START or tok.pos.col != col:
                return tuple(stmts)
            stmts.append(self.parse_stmt())

    def parse_stmt(self) -> Statement:
        tok = self.peek()
        if tok.kind == "if":
            return self.parse_ifchain()
        target = self.expect("ident")
        op = self.peek()
        if op.kind == "<-":
            self.next()
            if self.peek().kind in ("true", "false"):
                lit = self.next()
                return Assign(target.text, lit.kind == "true", target.pos)
            return Assign(target.text, self.parse_linexpr(), target.pos)
        if op.kind == "~":
            self.next()
            return Draw(target.text, self.parse_dist(), target.pos)
        raise ParseError(
            f"unexpected {describe(op)}", op.pos, expected=("<-", "~")
        )

    def parse_dist(self):
        tok = self.peek()
        if tok.kind == "gauss":
            self.next()
            self.expect("(")
            mean = self.parse_number()
            self.expect(",")
            std = self.parse_number()
            self.expect(")")
            return Gauss(mean, std)
        if tok.kind == "bernoulli":
            self.next()
            self.expect("(")
            p = self.parse_number()
            self.expect(")")
            return Bernoulli(p)
        raise ParseError(
            f"unexpected {describe(tok)}", tok.pos, expected=("gauss", "bernoulli")
        )

    def parse_ifchain(self) -> IfChain:
        if_tok = self.expect("if")
        chain_col = if_tok.pos.col
        branches = []
        self.expect("(")
        guard = self.parse_cond()
        self.expect(")")
        branches.append((guard, self.parse_block(chain_col)))
        else_body: tuple[Statement, ...] = ()
        while True:
            tok = self.peek()
            if tok.kind == "elif" and tok.pos.col == chain_col:
                self.next()
                self.expect("(")
                guard = self.parse_cond()
                self.expect(")")
                branches.append((guard, self.parse_block(chain_col)))
            elif tok.kind == "else" and tok.pos.col == chain_col:
                self.next()
                else_body = self.parse_block(chain_col)
                break
            else:
                break
        return IfChain(tuple(branches), else_body, if_tok.pos)

    # ---- top-level sections -------------------------------------------

    def parse_model(self) -> PopulationModel:
        def_tok = self.expect("define")
        name = self.expect("ident")
        self.expect("(")
        self.expect(")")
        body = self.parse_block(def_tok.pos.col)
        self.expect("return")
        returns = [self.expect("ident").text]
        while self.peek().kind == ",":
            self.next()
            returns.append(self.expect("ident").text)
        return PopulationModel(name.text, body, tuple(returns), def_tok.pos)

    def parse_program(self) -> DecisionProgram:
        def_tok = self.expect("define")
        name = self.expect("ident")
        self.expect("(")
        params = [self.expect("ident").text]
        while self.peek().kind == ",":
            self.next()
            params.append(self.expect("ident").text)
        self.expect(")")
        body = self.parse_block(def_tok.pos.col)
        self.expect("return")
        tok = self.peek()
        if tok.kind in ("true", "false"):
            self.next()
            value: str | bool = tok.kind == "true"
        else:
            value = self.expect("ident").text
        return DecisionProgram(name.text, tuple(params), body, value, def_tok.pos)

    def parse_spec(self) -> FairnessSpec:
        spec_tok = self.expect("spec")
        self.expect("{")
        self.expect("sensitive")
        self.expect(":")
        sensitive = self.parse_cond()
        self.expect(";")
        self.expect("qualified")
        self.expect(":")
        qualified = self.expect("ident").text
        self.expect(";")
        self.expect("epsilon")
        self.expect(":")
        eps_pos = self.peek().pos
        epsilon = self.parse_number()
        self.expect(";")
        self.expect("}")
        return FairnessSpec(sensitive, qualified, epsilon, eps_pos)


def describe(tok: Token) -> str:
    if tok.kind == "eof":
        return "end of input"
    if tok.kind == "num":
        return f"number {tok.text!r}"
    if tok.kind == "ident":
        return f"identifier {tok.text!r}"
    return f"{tok.text!r}"


def parse_source(text: str) -> VerificationTask:
    """Parse a complete input file: model, program, spec block.

    Raises ParseError (with line/column) on any malformed input; never
    returns a partial task.
    """
    parser = _Parser(tokenize(text))
    model = parser.parse_model()
    program = parser.parse_program()
    spec = parser.parse_spec()
    trailing = parser.peek()
    if trailing.kind != "eof":
        raise ParseError(
            f"unexpected {describe(trailing)} after spec block", trailing.pos
        )
    return VerificationTask(model, program, spec, source=text)
