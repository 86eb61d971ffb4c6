"""Arithmetic parameter rules in the index n, parsed from scene files.

Rules are plain arithmetic expressions ("1-2**(-n)", "(z+3)/4" is not one:
only `n` is available), evaluated on a whitelisted AST so scene files cannot
run code.
"""

from __future__ import annotations

import ast
import math
import operator
from typing import Callable, Union

from .errors import SceneError

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.Mod: operator.mod,
    ast.FloorDiv: operator.floordiv,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_NAMES = {"pi": math.pi, "e": math.e}


def _eval_node(node, n):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body, n)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, (int, float, complex)):
            return node.value
        raise SceneError(f"non-numeric constant {node.value!r} in rule")
    if isinstance(node, ast.Name):
        if node.id == "n":
            return n
        if node.id in _NAMES:
            return _NAMES[node.id]
        raise SceneError(f"unknown name {node.id!r} in rule")
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left, n),
                                      _eval_node(node.right, n))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        return _UNARY[type(node.op)](_eval_node(node.operand, n))
    raise SceneError(f"disallowed syntax {type(node).__name__} in rule")


class Rule:
    """A pure function of the integer index n, from an expression or constant."""

    def __init__(self, spec: Union[str, int, float, complex, Callable]):
        self.spec = spec
        if callable(spec):
            self._fn = spec
        elif isinstance(spec, (int, float, complex)):
            self._fn = lambda n: spec
        elif isinstance(spec, str):
            tree = ast.parse(spec, mode="eval")
            self._fn = lambda n: _eval_node(tree, n)
        else:
            raise SceneError(f"cannot build a rule from {type(spec).__name__}")

    def __call__(self, n: int):
        return self._fn(n)

    def __repr__(self):
        return f"Rule({self.spec!r})"
