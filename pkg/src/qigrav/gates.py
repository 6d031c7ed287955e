"""Named qubit gates and a strictly sequential circuit composer.

Circuits are read left to right: the first step acts first, so the composed
matrix is ``U_last @ ... @ U_first``. Two-qubit controlled gates take their
wires in ``(control, target)`` order.

Text format (one step per line, ``#`` starts a comment)::

    qubits 2          # optional; otherwise inferred from the largest wire
    H 0
    CNOT 0,1
    CZ(X) 1,0         # controlled gate with an explicit single-qubit body
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import Operator, embed_operator
from .errors import ContractError, ShapeError

_SQRT1_2 = 1 / np.sqrt(2)

X_MATRIX = np.array([[0, 1], [1, 0]], dtype=complex)
H_MATRIX = _SQRT1_2 * np.array([[1, 1], [1, -1]], dtype=complex)
Z_MATRIX = np.array([[1, 0], [0, -1]], dtype=complex)
CNOT_MATRIX = np.array(
    [[1, 0, 0, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1],
     [0, 0, 1, 0]],
    dtype=complex,
)


@dataclass(frozen=True)
class Gate:
    name: str
    matrix: Operator = field(repr=False)
    arity: int

    def __post_init__(self):
        if self.arity not in (1, 2):
            raise ShapeError(f"gate arity must be 1 or 2, got {self.arity}")
        if self.matrix.dim != 2**self.arity:
            raise ShapeError(f"{self.name} matrix has dimension {self.matrix.dim}, expected {2**self.arity}")

    @property
    def unitary(self) -> bool:
        return self.matrix.certified == "unitary"


def _single(name: str, matrix) -> Gate:
    op = Operator(matrix)
    op = Operator(matrix, certify="unitary") if op.is_unitary() else op
    return Gate(name, op, 1)


def x_gate() -> Gate:
    return Gate("X", Operator.unitary(X_MATRIX), 1)


def h_gate() -> Gate:
    return Gate("H", Operator.unitary(H_MATRIX), 1)


def z_gate() -> Gate:
    return Gate("Z", Operator.unitary(Z_MATRIX), 1)


def single_qubit_gate(name: str, matrix) -> Gate:
    """Arbitrary 2x2 gate; certified unitary only if the matrix is unitary."""
    if np.asarray(matrix).shape != (2, 2):
        raise ShapeError("single-qubit gate matrix must be 2x2")
    return _single(name, matrix)


def identity_gate(n_qubits: int = 1) -> Gate:
    return Gate("I", Operator.identity(2**n_qubits), n_qubits)


def cnot_gate() -> Gate:
    return Gate("CNOT", Operator.unitary(CNOT_MATRIX), 2)


def cz_gate(body=None) -> Gate:
    """Controlled gate ``diag(1, 1, body)``; ``body`` defaults to Pauli Z.

    ``body`` may be any 2x2 matrix, an :class:`Operator` or a single-qubit
    :class:`Gate`. The result is certified unitary exactly when ``body`` is
    unitary.
    """
    if body is None:
        body, label = Z_MATRIX, "Z"
    elif isinstance(body, Gate):
        if body.arity != 1:
            raise ShapeError("controlled body must be a single-qubit gate")
        body, label = body.matrix.matrix, body.name
    elif isinstance(body, Operator):
        body, label = body.matrix, "U"
    else:
        label = "U"
    body = np.asarray(body, dtype=complex)
    if body.shape != (2, 2):
        raise ShapeError(f"controlled body must be 2x2, got shape {body.shape}")
    mat = np.eye(4, dtype=complex)
    mat[2:, 2:] = body
    op = Operator(mat)
    if op.is_unitary():
        op = Operator(mat, certify="unitary")
    return Gate(f"CZ({label})", op, 2)


def gate_matrix(g: Gate) -> Operator:
    return g.matrix


_NAMED = {"X": x_gate, "H": h_gate, "Z": z_gate, "I": identity_gate, "CNOT": cnot_gate}


def named_gate(name: str) -> Gate:
    """Look up a gate by its text-format name (``X``, ``H``, ``Z``, ``I``, ``CNOT``, ``CZ``, ``CZ(X)``...)."""
    key = name.strip()
    upper = key.upper()
    if upper in ("CNOT", "CX"):
        return cnot_gate()
    if upper == "CZ":
        return cz_gate()
    m = re.fullmatch(r"C(?:Z|-)?\((\w+)\)", key, flags=re.IGNORECASE)
    if m:
        return cz_gate(named_gate(m.group(1)))
    if upper in _NAMED:
        return _NAMED[upper]()
    raise ValueError(f"unknown gate {name!r}")


@dataclass(frozen=True)
class Circuit:
    """Ordered list of ``(gate, wires)`` steps on ``n_qubits`` wires.

    With ``certified=True`` (the default) every gate must be unitary, so the
    composed operator carries a unitary certificate.
    """

    n_qubits: int
    steps: tuple[tuple[Gate, tuple[int, ...]], ...] = ()
    certified: bool = True

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ShapeError("a circuit needs at least one wire")
        steps = tuple((g, tuple(int(w) for w in wires)) for g, wires in self.steps)
        object.__setattr__(self, "steps", steps)
        for g, wires in steps:
            if len(wires) != g.arity:
                raise ContractError(f"{g.name} acts on {g.arity} wire(s), got {wires}")
            if len(set(wires)) != len(wires):
                raise ContractError(f"{g.name} references the same wire twice: {wires}")
            if any(not 0 <= w < self.n_qubits for w in wires):
                raise ContractError(f"wire index out of range in {g.name} {wires}")
            if self.certified and not g.unitary:
                raise ContractError(f"{g.name} is not unitary; build the circuit with certified=False")

    def then(self, gate: Gate, *wires: int) -> Circuit:
        return Circuit(self.n_qubits, self.steps + ((gate, wires),), self.certified)

    def adjoint(self) -> Circuit:
        """Reversed circuit of daggered gates."""
        steps = tuple(
            (Gate(g.name + "^dag", g.matrix.dagger(), g.arity), wires) for g, wires in reversed(self.steps)
        )
        return Circuit(self.n_qubits, steps, self.certified)


def compose(c: Circuit) -> Operator:
    dims = (2,) * c.n_qubits
    dim = 2**c.n_qubits
    total = np.eye(dim, dtype=complex)
    for g, wires in c.steps:
        total = embed_operator(g.matrix, wires, dims).matrix @ total
    if c.certified:
        return Operator(total, dims, certify="unitary")
    return Operator(total, dims)


def parse_circuit(text: str, certified: bool = True) -> Circuit:
    steps = []
    n_qubits = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0].lower() == "qubits":
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected 'qubits N'")
            n_qubits = int(parts[1])
            continue
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'GATE wire[,wire]', got {raw!r}")
        try:
            gate = named_gate(parts[0])
            wires = tuple(int(w) for w in parts[1].split(","))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        steps.append((gate, wires))
    if n_qubits is None:
        n_qubits = 1 + max((w for _, ws in steps for w in ws), default=0)
    return Circuit(n_qubits, tuple(steps), certified)


def circuit_to_text(c: Circuit) -> str:
    lines = [f"qubits {c.n_qubits}"]
    for g, wires in c.steps:
        lines.append(f"{g.name} {','.join(str(w) for w in wires)}")
    return "\n".join(lines) + "\n"


def circuit_from_steps(n_qubits: int, steps: Iterable[tuple[str | Gate, Sequence[int]]], certified: bool = True) -> Circuit:
    built = tuple((named_gate(g) if isinstance(g, str) else g, tuple(w)) for g, w in steps)
    return Circuit(n_qubits, built, certified)
