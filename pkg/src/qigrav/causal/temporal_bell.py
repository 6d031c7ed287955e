"""Bell test for temporal order.

Two pairs of agents act on one qubit each. Both pairs see the same order,
set by a mass in a superposition of configurations ``|K_{A<B}>`` and
``|K_{B<A}>``. Measuring the mass in the ``+``/``-`` basis leaves the two
target qubits in a state whose CHSH value certifies that no definite order
accounts for the statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..core import ATOL, SIGMA_X, SIGMA_Z, DensityMatrix, Operator, StateVector
from ..errors import ContractError, ShapeError
from ..nonlocality import (
    CHSHQuantumStrategy,
    QuantumCHSHResult,
    max_chsh_value,
    optimal_chsh_settings,
    quantum_chsh,
)
from .switch import PM_BASIS, _qubit_op, project_first_qubit

_SQ2 = math.sqrt(2)
# conjugate of the default settings under H: Z <-> X
XBASIS_SETTINGS_A = (SIGMA_X, SIGMA_Z)
XBASIS_SETTINGS_B = (
    Operator((SIGMA_X.matrix + SIGMA_Z.matrix) / _SQ2, certify="hermitian"),
    Operator((SIGMA_X.matrix - SIGMA_Z.matrix) / _SQ2, certify="hermitian"),
)


@dataclass(frozen=True)
class TemporalBellBranch:
    label: str
    probability: float
    state: StateVector | None = field(default=None, repr=False)
    chsh: QuantumCHSHResult | None = None
    strategy: CHSHQuantumStrategy | None = field(default=None, repr=False)

    @property
    def skipped(self) -> bool:
        return self.state is None


@dataclass(frozen=True)
class TemporalBellResult:
    joint: StateVector  # dims (mass, target 1, target 2)
    branches: dict

    def branch(self, label: str) -> TemporalBellBranch:
        return self.branches[label]


def _pair_ops(op_a: Operator, op_b: Operator) -> tuple[np.ndarray, np.ndarray]:
    a, b = op_a.matrix, op_b.matrix
    ba, ab = b @ a, a @ b
    return np.kron(ba, ba), np.kron(ab, ab)


def temporal_bell_joint(op_a, op_b, init: StateVector, renormalize: bool = False) -> StateVector:
    """``(|K_{A<B}> (BA (x) BA)|init> + |K_{B<A}> (AB (x) AB)|init>) / sqrt 2``."""
    op_a, op_b = _qubit_op(op_a, "op_a"), _qubit_op(op_b, "op_b")
    if init.dim != 4:
        raise ShapeError(f"init must be a two-qubit state, got dimension {init.dim}")
    first, second = _pair_ops(op_a, op_b)
    vec = np.concatenate([first @ init.amplitudes, second @ init.amplitudes]) / _SQ2
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > ATOL and not renormalize:
        raise ContractError(
            f"the operations change the norm of this input to {norm:.6g}; pass renormalize=True to rescale"
        )
    if norm < ATOL:
        raise ContractError("the operations annihilate this input")
    return StateVector(vec / norm, (2, 2, 2))


def _strategy(state: StateVector, settings) -> CHSHQuantumStrategy:
    if settings == "optimal":
        return optimal_chsh_settings(state)
    if settings == "x-basis":
        return CHSHQuantumStrategy(state, XBASIS_SETTINGS_A, XBASIS_SETTINGS_B)
    if isinstance(settings, str):
        raise ValueError(f"settings must be 'optimal', 'x-basis' or a pair of setting tuples, got {settings!r}")
    settings_a, settings_b = settings
    return CHSHQuantumStrategy(state, tuple(settings_a), tuple(settings_b))


def temporal_bell_protocol(
    op_a,
    op_b,
    init: StateVector,
    settings: str | tuple[Sequence[Operator], Sequence[Operator]] = "optimal",
    renormalize: bool = False,
) -> TemporalBellResult:
    """Project the mass onto ``+``/``-`` and run CHSH on each target branch.

    ``settings='optimal'`` picks, per branch, the settings that reach the
    branch state's largest CHSH value. ``'x-basis'`` uses one fixed set (the
    standard settings with X and Z exchanged) for both branches. A branch of
    probability zero is reported with its probability and no state.
    """
    joint = temporal_bell_joint(op_a, op_b, init, renormalize)
    branches = {}
    for label, br in project_first_qubit(joint, PM_BASIS).items():
        if br.state is None:
            branches[label] = TemporalBellBranch(label, br.probability)
            continue
        strat = _strategy(br.state, settings)
        branches[label] = TemporalBellBranch(label, br.probability, br.state, quantum_chsh(strat), strat)
    return TemporalBellResult(joint, branches)


def classical_order_state(op_a, op_b, init: StateVector, p_a_first: float = 0.5) -> DensityMatrix:
    """Target state when the order is a classical mixture (mass measured in its configuration basis)."""
    op_a, op_b = _qubit_op(op_a, "op_a"), _qubit_op(op_b, "op_b")
    if not 0.0 <= p_a_first <= 1.0:
        raise ContractError("p_a_first must be a probability")
    first, second = _pair_ops(op_a, op_b)
    rho = np.zeros((4, 4), dtype=complex)
    for weight, op in ((p_a_first, first), (1 - p_a_first, second)):
        if weight == 0:
            continue
        v = op @ init.amplitudes
        n = float(np.linalg.norm(v))
        if n < ATOL:
            raise ContractError("the operations annihilate this input")
        v = v / n
        rho += weight * np.outer(v, v.conj())
    return DensityMatrix(rho, (2, 2))


def classical_order_chsh(op_a, op_b, init: StateVector, p_a_first: float = 0.5) -> float:
    """Best CHSH value reachable when each round has a definite order."""
    return max_chsh_value(classical_order_state(op_a, op_b, init, p_a_first))
