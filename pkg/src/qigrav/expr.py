"""Small, safe expression language for command-line values.

Scalars: ``2pi``, ``pi/4``, ``-3e-2``, ``sqrt(2)``. Grids: ``start:end:count``
(end inclusive) or a comma-separated list. Operators: ``(I + X)/sqrt(2)``,
``Z``, ``X @ H``, ``exp(i*pi/4)*Z``.
"""

from __future__ import annotations

import ast
import math
import operator
import re

import numpy as np

from .core import I2, SIGMA_X, SIGMA_Y, SIGMA_Z, Operator, StateVector, SPIN_STATES
from .gates import H_MATRIX

SCALARS = {"pi": math.pi, "e": math.e, "i": 1j, "j": 1j}
MATRICES = {
    "I": I2.matrix,
    "X": SIGMA_X.matrix,
    "Y": SIGMA_Y.matrix,
    "Z": SIGMA_Z.matrix,
    "H": np.asarray(H_MATRIX),
}
FUNCTIONS = {"sqrt": np.sqrt, "exp": np.exp, "cos": np.cos, "sin": np.sin}
_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.MatMult: operator.matmul,
}
_IMPLICIT_MUL = re.compile(r"(\d|\))\s*(pi|[a-zA-Z(])")


class ExpressionError(ValueError):
    pass


def _prepare(text: str) -> str:
    # "2pi" -> "2*pi", "2(…)" -> "2*(…)"; leave exponents like 1e-3 alone
    return _IMPLICIT_MUL.sub(lambda m: m.group(1) + "*" + m.group(2) if m.group(2) != "e" else m.group(0), text)


def _eval(node, names: dict):
    if isinstance(node, ast.Expression):
        return _eval(node.body, names)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)) and not isinstance(
        node.value, bool
    ):
        return node.value
    if isinstance(node, ast.Name):
        if node.id in names:
            return names[node.id]
        raise ExpressionError(f"unknown name {node.id!r}")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand, names)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left, names), _eval(node.right, names))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in FUNCTIONS:
        if len(node.args) != 1 or node.keywords:
            raise ExpressionError(f"{node.func.id}() takes one argument")
        return FUNCTIONS[node.func.id](_eval(node.args[0], names))
    raise ExpressionError(f"unsupported syntax: {ast.dump(node)[:60]}")


def evaluate(text: str, names: dict | None = None):
    try:
        tree = ast.parse(_prepare(text.strip()), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}") from exc
    env = dict(SCALARS)
    env.update(names or {})
    try:
        return _eval(tree, env)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, ExpressionError):
            raise
        raise ExpressionError(f"cannot evaluate {text!r}: {exc}") from exc


def parse_scalar(text: str) -> float:
    v = evaluate(text)
    if isinstance(v, np.ndarray) or complex(v).imag != 0:
        raise ExpressionError(f"{text!r} is not a real number")
    v = float(complex(v).real)
    if not math.isfinite(v):
        raise ExpressionError(f"{text!r} is not finite")
    return v


def parse_grid(text: str) -> np.ndarray:
    """``start:end:count`` with both ends included, or ``a,b,c``."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ExpressionError(f"grid {text!r} must look like start:end:count")
        start, end = parse_scalar(parts[0]), parse_scalar(parts[1])
        try:
            count = int(parts[2])
        except ValueError as exc:
            raise ExpressionError(f"grid count {parts[2]!r} is not an integer") from exc
        if count < 1:
            raise ExpressionError("grid count must be at least 1")
        return np.linspace(start, end, count)
    values = [parse_scalar(p) for p in text.split(",") if p.strip()]
    if not values:
        raise ExpressionError("empty grid")
    return np.asarray(values)


def parse_operator(text: str) -> Operator:
    """Single-qubit operator from an expression over I, X, Y, Z, H."""
    v = evaluate(text, MATRICES)
    mat = np.asarray(v, dtype=complex)
    if mat.shape == ():
        mat = mat * np.eye(2)
    if mat.shape != (2, 2):
        raise ExpressionError(f"{text!r} is not a 2x2 operator")
    op = Operator(mat)
    return Operator(mat, certify="unitary") if op.is_unitary() else op


_STATE_ALIASES = {"0": "up-z", "1": "down-z", "+": "up-x", "-": "down-x", "up": "up-z", "down": "down-z"}


def parse_state(text: str) -> StateVector:
    """Product qubit state: names joined by ``,`` (``up-z``, ``down-x``, ``0``, ``+``) or a bit string."""
    text = text.strip()
    if text and set(text) <= {"0", "1"}:
        parts = list(text)
    else:
        parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ExpressionError("empty state")
    amps = np.array([1.0 + 0j])
    for p in parts:
        key = _STATE_ALIASES.get(p, p)
        if key not in SPIN_STATES:
            raise ExpressionError(f"unknown state {p!r}; choose from {sorted(SPIN_STATES)} or 0, 1, +, -")
        amps = np.kron(amps, SPIN_STATES[key].amplitudes)
    return StateVector(amps, (2,) * len(parts))
