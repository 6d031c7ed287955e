import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_state, random_unitary
from qigrav.causal.switch import (
    ClockBrokenOps,
    SwitchSpec,
    clock_broken_operator,
    quantum_switch,
    quantum_switch_clock_broken,
    switch_operator,
)
from qigrav.core import DOWN_Z, I2, PLUS, SIGMA_X, SIGMA_Y, SIGMA_Z, UP_Z, ZERO, Operator, StateVector
from qigrav.errors import ContractError, PostSelectionError, ShapeError

SQ2 = math.sqrt(2)
A_OP = Operator((I2.matrix + SIGMA_X.matrix) / SQ2)


def oracle_branches(a, b, psi):
    """(BA +- AB)|psi> / 2 and their squared norms."""
    out = {}
    for label, sign in (("+", 1), ("-", -1)):
        v = (b @ a + sign * a @ b) @ psi / 2
        out[label] = (float(np.vdot(v, v).real), v)
    return out


def test_matrix_identities():
    a, b = A_OP.matrix, SIGMA_Z.matrix
    assert np.allclose(b @ a + a @ b, SQ2 * SIGMA_Z.matrix)
    assert np.allclose(b @ a - a @ b, SQ2 * 1j * SIGMA_Y.matrix)


def test_worked_example():
    r = quantum_switch(SwitchSpec(A_OP, SIGMA_Z))
    assert abs(r.probability("+") - 0.5) < 1e-9 and abs(r.probability("-") - 0.5) < 1e-9
    assert r.branch("+").equals_up_to_phase(StateVector(SIGMA_Z.matrix @ UP_Z.amplitudes))
    assert r.branch("-").equals_up_to_phase(StateVector(SIGMA_Y.matrix @ UP_Z.amplitudes))
    assert r.branch("-").equals_up_to_phase(DOWN_Z)


def test_joint_state_closed_form():
    r = quantum_switch(SwitchSpec(A_OP, SIGMA_Z))
    a, b, psi = A_OP.matrix, SIGMA_Z.matrix, UP_Z.amplitudes
    expected = np.concatenate([b @ a @ psi, a @ b @ psi]) / SQ2
    assert np.allclose(r.joint.amplitudes, expected, atol=1e-15)
    assert r.joint.dims == (2, 2)


def test_commuting_operations():
    r = quantum_switch(SwitchSpec(I2, I2))
    assert r.probability("-") < 1e-12
    assert r.branch("+").allclose(UP_Z)
    with pytest.raises(PostSelectionError) as exc:
        r.branch("-")
    assert exc.value.probability < 1e-12


def test_classical_control_equals_composition(rng):
    a, b = random_unitary(rng, 2), random_unitary(rng, 2)
    psi = StateVector(random_state(rng, 2))
    r0 = quantum_switch(SwitchSpec(Operator.unitary(a), Operator.unitary(b), ZERO, psi))
    assert np.allclose(r0.joint.amplitudes, np.concatenate([b @ a @ psi.amplitudes, [0, 0]]), rtol=0, atol=1e-15)
    one = StateVector([0, 1])
    r1 = quantum_switch(SwitchSpec(Operator.unitary(a), Operator.unitary(b), one, psi))
    assert np.allclose(r1.joint.amplitudes, np.concatenate([[0, 0], a @ b @ psi.amplitudes]), rtol=0, atol=1e-15)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_unitaries_match_oracle(seed):
    rng = np.random.default_rng(seed)
    a, b = random_unitary(rng, 2), random_unitary(rng, 2)
    psi = random_state(rng, 2)
    r = quantum_switch(SwitchSpec(Operator.unitary(a), Operator.unitary(b), PLUS, StateVector(psi)))
    oracle = oracle_branches(a, b, psi)
    assert abs(r.probability("+") + r.probability("-") - 1) < 1e-9
    for label, (p, v) in oracle.items():
        assert abs(r.probability(label) - p) < 1e-12
        if p > 1e-9:
            assert r.branch(label).equals_up_to_phase(StateVector(v, normalize=True), atol=1e-9)


def test_switch_operator_unitarity_follows_inputs():
    assert switch_operator(SIGMA_X, SIGMA_Z).certified == "unitary"
    assert switch_operator(A_OP, SIGMA_Z).certified is None


def test_norm_changing_input_rejected():
    proj = Operator([[1, 0], [0, 0]])
    with pytest.raises(ContractError):
        quantum_switch(SwitchSpec(proj, I2, PLUS, PLUS))
    r = quantum_switch(SwitchSpec(proj, I2, PLUS, PLUS), renormalize=True)
    assert abs(r.joint.norm - 1) < 1e-12


def test_shape_checks():
    with pytest.raises(ShapeError):
        SwitchSpec(Operator(np.eye(4)), I2)
    with pytest.raises(ShapeError):
        SwitchSpec(I2, I2, target_init=StateVector([1, 0, 0, 0]))


def test_clock_broken_degenerate_equals_switch(rng):
    a, b = Operator.unitary(random_unitary(rng, 2)), Operator.unitary(random_unitary(rng, 2))
    psi = StateVector(random_state(rng, 2))
    ops = ClockBrokenOps(a, a, b, b)
    r1 = quantum_switch_clock_broken(SwitchSpec(a, b, PLUS, psi, ops))
    r2 = quantum_switch(SwitchSpec(a, b, PLUS, psi))
    assert np.allclose(r1.joint.amplitudes, r2.joint.amplitudes, rtol=0, atol=1e-15)


def test_clock_broken_entangles():
    ops = ClockBrokenOps(I2, SIGMA_X, I2, I2)
    r = quantum_switch_clock_broken(SwitchSpec(I2, I2, PLUS, ZERO, ops))
    # oracle: built directly in the 4-dim space
    expected = (np.kron([1, 0], [1, 0]) + np.kron([0, 1], [0, 1])) / SQ2
    assert np.allclose(r.joint.amplitudes, expected, atol=1e-15)
    # a true switch with A = 1 leaves control and target unentangled
    plain = quantum_switch(SwitchSpec(I2, I2, PLUS, ZERO))
    assert np.allclose(plain.joint.amplitudes, np.kron(PLUS.amplitudes, ZERO.amplitudes))


def test_clock_broken_classical_control(rng):
    us = [Operator.unitary(random_unitary(rng, 2)) for _ in range(4)]
    ops = ClockBrokenOps(*us)
    psi = StateVector(random_state(rng, 2))
    r = quantum_switch_clock_broken(SwitchSpec(I2, I2, ZERO, psi, ops))
    target = ops.b_late.matrix @ ops.a_early.matrix @ psi.amplitudes
    assert np.allclose(r.joint.amplitudes[:2], target, atol=1e-15)
    assert np.allclose(clock_broken_operator(ops).matrix[2:, 2:], ops.a_late.matrix @ ops.b_early.matrix)


def test_clock_operation_lookup():
    ops = ClockBrokenOps(I2, SIGMA_X, SIGMA_Y, SIGMA_Z, threshold=1.0)
    assert ops.operation("A", 0.5) is ops.a_early
    assert ops.operation("B", 1.0) is ops.b_late
    with pytest.raises(ValueError):
        ops.operation("C", 0)


def test_variant_mismatch():
    ops = ClockBrokenOps(I2, I2, I2, I2)
    with pytest.raises(ContractError):
        quantum_switch(SwitchSpec(I2, I2, clock_broken=ops))
    with pytest.raises(ContractError):
        quantum_switch_clock_broken(SwitchSpec(I2, I2))
