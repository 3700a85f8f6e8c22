"""S-expression language for level-set functions u(x, y, t).

Grammar::

    expr    := number | symbol | "(" op expr* ")"
    symbol  := x1..xn | y1..yn | t
    op      := + | - | * | / | pow | sin | cos | sqrt | exp | log | atan2
             | profile NAME number*  expr

``(- a)`` is negation, ``+`` and ``*`` are n-ary, ``pow`` takes a numeric
exponent.  ``profile`` nodes wrap one-dimensional functions known by value and
by closed-form derivative (see :mod:`heisenberg_simons.surface_defs`).
Printing uses ``repr`` for numbers, so ``parse(to_text(e)) == e``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Mapping, Union

import numpy as np

from . import jets
from .jets import Jet

Expr = Union[float, str, "Node"]

UNARY = {"sin": jets.sin, "cos": jets.cos, "sqrt": jets.sqrt, "exp": jets.exp, "log": jets.log}


class DSLError(ValueError):
    pass


@dataclass(frozen=True)
class Node:
    op: str
    args: tuple
    params: tuple = ()


_TOKEN = re.compile(r"\s*(\(|\)|[^\s()]+)")


def tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DSLError(f"cannot tokenize near {text[pos:pos + 10]!r}")
        out.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


def _atom(tok: str) -> Expr:
    try:
        return float(tok)
    except ValueError:
        return tok


def parse(text: str) -> Expr:
    tokens = tokenize(text)
    if not tokens:
        raise DSLError("empty expression")
    expr, pos = _parse(tokens, 0)
    if pos != len(tokens):
        raise DSLError(f"trailing tokens: {' '.join(tokens[pos:])}")
    return expr


def _parse(tokens: list[str], pos: int) -> tuple[Expr, int]:
    if pos >= len(tokens):
        raise DSLError("unexpected end of expression")
    tok = tokens[pos]
    if tok == ")":
        raise DSLError("unexpected ')'")
    if tok != "(":
        return _atom(tok), pos + 1
    pos += 1
    if pos >= len(tokens) or tokens[pos] in "()":
        raise DSLError("missing operator after '('")
    op = tokens[pos]
    pos += 1
    if op == "profile":
        name = tokens[pos]
        pos += 1
        params = []
        while tokens[pos] not in "()" and isinstance(_atom(tokens[pos]), float):
            params.append(float(tokens[pos]))
            pos += 1
        arg, pos = _parse(tokens, pos)
        if tokens[pos] != ")":
            raise DSLError("profile takes exactly one argument expression")
        return Node("profile", (arg,), (name, *params)), pos + 1
    args = []
    while True:
        if pos >= len(tokens):
            raise DSLError("unbalanced parentheses")
        if tokens[pos] == ")":
            pos += 1
            break
        arg, pos = _parse(tokens, pos)
        args.append(arg)
    node = Node(op, tuple(args))
    _validate(node)
    return node, pos


_ARITY = {"/": 2, "pow": 2, "atan2": 2, **{k: 1 for k in UNARY}}


def _validate(node: Node) -> None:
    op, k = node.op, len(node.args)
    if op in ("+", "*"):
        if k < 1:
            raise DSLError(f"'{op}' needs at least one argument")
    elif op == "-":
        if k not in (1, 2):
            raise DSLError("'-' takes one or two arguments")
    elif op in _ARITY:
        if k != _ARITY[op]:
            raise DSLError(f"'{op}' takes {_ARITY[op]} arguments, got {k}")
        if op == "pow" and not isinstance(node.args[1], float):
            raise DSLError("'pow' exponent must be a number")
    else:
        raise DSLError(f"unknown operator '{op}'")


def to_text(expr: Expr) -> str:
    if isinstance(expr, float):
        return repr(expr)
    if isinstance(expr, str):
        return expr
    if expr.op == "profile":
        name, *params = expr.params
        head = " ".join([name, *(repr(float(p)) for p in params)])
        return f"(profile {head} {to_text(expr.args[0])})"
    return "(" + " ".join([expr.op, *(to_text(a) for a in expr.args)]) + ")"


def symbols(expr: Expr) -> set[str]:
    if isinstance(expr, str):
        return {expr}
    if isinstance(expr, Node):
        return set().union(*(symbols(a) for a in expr.args))
    return set()


def coordinate_names(n: int) -> list[str]:
    return [f"x{j + 1}" for j in range(n)] + [f"y{j + 1}" for j in range(n)] + ["t"]


def evaluate(expr: Expr, env: Mapping[str, object], profiles: Mapping[str, Callable]) -> object:
    """Evaluate on arrays or jets; ``profiles`` maps a name to ``f(params, arg)``."""
    if isinstance(expr, float):
        return expr
    if isinstance(expr, str):
        try:
            return env[expr]
        except KeyError:
            raise DSLError(f"unknown symbol '{expr}'") from None
    op, args = expr.op, expr.args
    if op == "profile":
        name, *params = expr.params
        if name not in profiles:
            raise DSLError(f"unknown profile '{name}'")
        return profiles[name](tuple(params), evaluate(args[0], env, profiles))
    vals = [evaluate(a, env, profiles) for a in args]
    if op == "+":
        out = vals[0]
        for v in vals[1:]:
            out = out + v
        return out
    if op == "*":
        out = vals[0]
        for v in vals[1:]:
            out = out * v
        return out
    if op == "-":
        return -vals[0] if len(vals) == 1 else vals[0] - vals[1]
    if op == "/":
        return vals[0] / vals[1]
    if op == "pow":
        base, p = vals
        if isinstance(base, Jet):
            return base ** int(p) if float(p).is_integer() and 0 <= p <= 4 else base.power(p)
        return np.power(base, p)
    if op == "atan2":
        return jets.arctan2(vals[0], vals[1])
    return UNARY[op](vals[0])
