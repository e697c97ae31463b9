"""Terms over an operation signature, in prefix notation ``(op t1 t2)``."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Union


class TermSyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class Var:
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("variables are numbered from 1")

    def __str__(self):
        return f"v{self.index}"


@dataclass(frozen=True)
class App:
    op: str
    args: tuple["Term", ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    def __str__(self):
        if not self.args:
            return f"({self.op})"
        return "(" + " ".join([self.op, *map(str, self.args)]) + ")"


Term = Union[Var, App]


def max_var(t: Term) -> int:
    if isinstance(t, Var):
        return t.index
    return max((max_var(a) for a in t.args), default=0)


def depth(t: Term) -> int:
    if isinstance(t, Var):
        return 0
    return 1 + max((depth(a) for a in t.args), default=0)


def substitute(t: Term, mapping: Mapping[int, Term]) -> Term:
    """Replace variable ``v_i`` by ``mapping[i]`` (unmapped variables stay)."""
    if isinstance(t, Var):
        return mapping.get(t.index, t)
    return App(t.op, tuple(substitute(a, mapping) for a in t.args))


_TOKEN = re.compile(r"\s*(\(|\)|[^\s()]+)")
_VAR = re.compile(r"v(\d+)$")


def parse_term(text: str) -> Term:
    tokens = _TOKEN.findall(text)
    if "".join(tokens) != re.sub(r"\s+", "", text):
        raise TermSyntaxError(f"cannot tokenize {text!r}")
    pos = 0

    def parse() -> Term:
        nonlocal pos
        if pos >= len(tokens):
            raise TermSyntaxError("unexpected end of term")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            if pos >= len(tokens) or tokens[pos] in "()":
                raise TermSyntaxError("expected an operation symbol after '('")
            op = tokens[pos]
            if _VAR.match(op):
                raise TermSyntaxError(f"variable {op} used as an operation symbol")
            pos += 1
            args = []
            while pos < len(tokens) and tokens[pos] != ")":
                args.append(parse())
            if pos >= len(tokens):
                raise TermSyntaxError("missing ')'")
            pos += 1
            return App(op, tuple(args))
        if tok == ")":
            raise TermSyntaxError("unexpected ')'")
        m = _VAR.match(tok)
        if m:
            return Var(int(m.group(1)))
        # bare symbol: nullary operation
        return App(tok)

    term = parse()
    if pos != len(tokens):
        raise TermSyntaxError(f"trailing input after term in {text!r}")
    return term
