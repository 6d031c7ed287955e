"""Quantum switch and its clock-conditioned variant.

The operations need not be unitary: the generalized operations used in the
literature (for instance ``(1 + X) / sqrt(2)``) are accepted as long as the
resulting joint state is normalized for the given inputs. Pass
``renormalize=True`` to rescale instead of rejecting a norm change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core import ATOL, PLUS, UP_Z, Operator, StateVector
from ..errors import ContractError, PostSelectionError, ShapeError

_P0 = np.diag([1.0, 0.0])
_P1 = np.diag([0.0, 1.0])
_SQRT1_2 = 1 / math.sqrt(2)
PM_BASIS = {"+": np.array([_SQRT1_2, _SQRT1_2]), "-": np.array([_SQRT1_2, -_SQRT1_2])}
ZERO_PROBABILITY = ATOL**2


def _qubit_op(op, name: str) -> Operator:
    op = op if isinstance(op, Operator) else Operator(op)
    if op.dim != 2:
        raise ShapeError(f"{name} must act on a qubit, got dimension {op.dim}")
    return op


def _qubit_state(s: StateVector, name: str) -> StateVector:
    if s.dim != 2:
        raise ShapeError(f"{name} must be a qubit state, got dimension {s.dim}")
    return s


def _controlled_orders(first_branch: np.ndarray, second_branch: np.ndarray) -> Operator:
    """``|0><0| (x) first_branch + |1><1| (x) second_branch``."""
    mat = np.kron(_P0, first_branch) + np.kron(_P1, second_branch)
    op = Operator(mat, (2, 2))
    return Operator(mat, (2, 2), "unitary") if op.is_unitary() else op


def switch_operator(op_a: Operator, op_b: Operator) -> Operator:
    """Control ``|0>``: A then B (matrix ``B A``); control ``|1>``: B then A."""
    a, b = op_a.matrix, op_b.matrix
    return _controlled_orders(b @ a, a @ b)


@dataclass(frozen=True)
class ClockBrokenOps:
    """Operations chosen by each agent's clock: ``early`` before ``threshold``, ``late`` after.

    The agent acting first reads an early time and the one acting second a
    late time, so control ``|0>`` yields ``b_late @ a_early`` and control
    ``|1>`` yields ``a_late @ b_early``.
    """

    a_early: Operator
    a_late: Operator
    b_early: Operator
    b_late: Operator
    threshold: float = 0.0

    def __post_init__(self):
        for name in ("a_early", "a_late", "b_early", "b_late"):
            object.__setattr__(self, name, _qubit_op(getattr(self, name), name))

    def operation(self, agent: str, clock: float) -> Operator:
        """Operation agent ``'A'`` or ``'B'`` applies when its clock reads ``clock``."""
        late = clock >= self.threshold
        if agent == "A":
            return self.a_late if late else self.a_early
        if agent == "B":
            return self.b_late if late else self.b_early
        raise ValueError(f"agent must be 'A' or 'B', got {agent!r}")


def clock_broken_operator(ops: ClockBrokenOps) -> Operator:
    return _controlled_orders(
        ops.b_late.matrix @ ops.a_early.matrix,
        ops.a_late.matrix @ ops.b_early.matrix,
    )


@dataclass(frozen=True)
class SwitchSpec:
    op_a: Operator
    op_b: Operator
    control_init: StateVector = PLUS
    target_init: StateVector = UP_Z
    clock_broken: ClockBrokenOps | None = None

    def __post_init__(self):
        object.__setattr__(self, "op_a", _qubit_op(self.op_a, "op_a"))
        object.__setattr__(self, "op_b", _qubit_op(self.op_b, "op_b"))
        _qubit_state(self.control_init, "control_init")
        _qubit_state(self.target_init, "target_init")


@dataclass(frozen=True)
class Branch:
    label: str
    probability: float
    state: StateVector | None = field(default=None, repr=False)


@dataclass(frozen=True)
class SwitchResult:
    joint: StateVector
    branches: dict

    def branch(self, label: str) -> StateVector:
        """Post-selected target state; raises if the branch has probability zero."""
        br = self.branches[label]
        if br.state is None:
            raise PostSelectionError(f"branch {label!r} has probability {br.probability:.3e}", br.probability)
        return br.state

    def probability(self, label: str) -> float:
        return self.branches[label].probability


def project_first_qubit(joint: StateVector, basis: dict) -> dict:
    """Measure the leading qubit in ``basis`` (label -> vector) and keep the rest."""
    amps = joint.amplitudes.reshape(2, -1)
    rest_dims = joint.dims[1:] if len(joint.dims) > 1 else (amps.shape[1],)
    out = {}
    for label, vec in basis.items():
        vec = np.asarray(vec, dtype=complex)
        rest = vec.conj() @ amps
        prob = float(np.vdot(rest, rest).real)
        state = StateVector(rest / math.sqrt(prob), rest_dims) if prob > ZERO_PROBABILITY else None
        out[label] = Branch(label, prob, state)
    return out


def run_controlled(op: Operator, control: StateVector, target: StateVector, renormalize: bool = False) -> StateVector:
    vec = op.matrix @ np.kron(control.amplitudes, target.amplitudes)
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > ATOL and not renormalize:
        raise ContractError(
            f"the operations change the norm of this input to {norm:.6g}; pass renormalize=True to rescale"
        )
    if norm < ATOL:
        raise ContractError("the operations annihilate this input")
    return StateVector(vec / norm, (2,) + target.dims)


def quantum_switch(spec: SwitchSpec, renormalize: bool = False) -> SwitchResult:
    """Joint control-target state and the ``+``/``-`` post-selected target branches."""
    if spec.clock_broken is not None:
        raise ContractError("this switch has clock-dependent operations; use quantum_switch_clock_broken")
    op = switch_operator(spec.op_a, spec.op_b)
    joint = run_controlled(op, spec.control_init, spec.target_init, renormalize)
    return SwitchResult(joint, project_first_qubit(joint, PM_BASIS))


def quantum_switch_clock_broken(spec: SwitchSpec, renormalize: bool = False) -> SwitchResult:
    if spec.clock_broken is None:
        raise ContractError("this switch has no clock-dependent operations")
    op = clock_broken_operator(spec.clock_broken)
    joint = run_controlled(op, spec.control_init, spec.target_init, renormalize)
    return SwitchResult(joint, project_first_qubit(joint, PM_BASIS))
