import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_unitary
from qigrav.core import Operator, ket
from qigrav.errors import ContractError, ShapeError
from qigrav.gates import (
    CNOT_MATRIX,
    Circuit,
    circuit_from_steps,
    circuit_to_text,
    cnot_gate,
    compose,
    cz_gate,
    h_gate,
    named_gate,
    parse_circuit,
    single_qubit_gate,
    x_gate,
)

# hand-entered reference matrices
HH_CNOT_HH = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]])


def abcd_block(a, b, c, d):
    return np.array([[a, b, 0, 0], [c, d, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])


def test_basic_matrices():
    assert np.array_equal(x_gate().matrix.matrix, [[0, 1], [1, 0]])
    assert np.allclose(h_gate().matrix.matrix, np.array([[1, 1], [1, -1]]) / math.sqrt(2), atol=0)
    assert np.array_equal(cnot_gate().matrix.matrix, CNOT_MATRIX)
    assert np.array_equal(cz_gate().matrix.matrix, np.diag([1, 1, 1, -1]))


def test_hadamard_conjugated_cnot():
    c = circuit_from_steps(2, [("H", [0]), ("H", [1]), ("CNOT", [0, 1]), ("H", [0]), ("H", [1])])
    assert np.allclose(compose(c).matrix, HH_CNOT_HH, rtol=0, atol=1e-12)


def test_x_conjugated_controlled_body(rng):
    a, b, c, d = rng.normal(size=4) + 1j * rng.normal(size=4)
    body = single_qubit_gate("U", [[a, b], [c, d]])
    circ = Circuit(2, ((x_gate(), (0,)), (cz_gate(body), (0, 1)), (x_gate(), (0,))), certified=False)
    assert np.allclose(compose(circ).matrix, abcd_block(a, b, c, d), rtol=0, atol=1e-12)


def test_x_conjugated_unitary_body(rng):
    u = random_unitary(rng, 2)
    circ = parse_circuit("X 0\nCZ(H) 0,1\nX 0")
    h = h_gate().matrix.matrix
    assert np.allclose(compose(circ).matrix, abcd_block(*h.ravel()), atol=1e-12)
    g = cz_gate(Operator.unitary(u))
    assert g.unitary


def test_composition_order():
    # X then H on |0> gives |->; H then X gives |+>
    c1 = circuit_from_steps(1, [("X", [0]), ("H", [0])])
    assert np.allclose(compose(c1).matrix @ [1, 0], np.array([1, -1]) / math.sqrt(2))
    c2 = circuit_from_steps(1, [("H", [0]), ("X", [0])])
    assert np.allclose(compose(c2).matrix @ [1, 0], np.array([1, 1]) / math.sqrt(2))


def test_bell_circuit():
    c = parse_circuit("H 0\nCNOT 0,1")
    out = compose(c).matrix @ ket("00").amplitudes
    assert np.allclose(out, np.array([1, 0, 0, 1]) / math.sqrt(2))


def test_cnot_reversed_wires():
    c = parse_circuit("qubits 2\nCNOT 1,0")
    assert np.allclose(compose(c).matrix @ ket("01").amplitudes, ket("11").amplitudes)


def test_non_unitary_gate_rejected_in_certified_circuit():
    g = single_qubit_gate("P", [[1, 0], [0, 0]])
    assert not g.unitary
    with pytest.raises(ContractError):
        Circuit(1, ((g, (0,)),))
    assert compose(Circuit(1, ((g, (0,)),), certified=False)).certified is None


def test_wire_validation():
    with pytest.raises(ContractError):
        Circuit(2, ((cnot_gate(), (0, 0)),))
    with pytest.raises(ContractError):
        Circuit(2, ((x_gate(), (2,)),))
    with pytest.raises(ContractError):
        Circuit(2, ((cnot_gate(), (0,)),))
    with pytest.raises(ShapeError):
        single_qubit_gate("bad", np.eye(4))


def test_parser_errors_and_comments():
    c = parse_circuit("# bell\nqubits 3  # three wires\nH 0\n\nCX 0,2\n")
    assert c.n_qubits == 3 and len(c.steps) == 2
    with pytest.raises(ValueError):
        parse_circuit("FOO 0")
    with pytest.raises(ValueError):
        parse_circuit("H")


def test_named_gate_aliases():
    assert named_gate("cx").name == "CNOT"
    assert named_gate("CZ(X)").name == "CZ(X)"
    with pytest.raises(ValueError):
        named_gate("Q")


def test_text_round_trip():
    c = parse_circuit("qubits 3\nH 0\nCNOT 0,1\nCZ(X) 2,1\nZ 2")
    again = parse_circuit(circuit_to_text(c))
    assert np.allclose(compose(c).matrix, compose(again).matrix)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["X", "H", "Z", "CNOT", "CZ"]), st.integers(0, 2), st.integers(1, 2)), max_size=8))
def test_adjoint_inverts(spec):
    steps = []
    for name, w, off in spec:
        wires = [w] if name in ("X", "H", "Z") else [w, (w + off) % 3]
        steps.append((name, wires))
    c = circuit_from_steps(3, steps)
    u = compose(c).matrix
    assert np.allclose(compose(c.adjoint()).matrix @ u, np.eye(8), atol=1e-12)
    assert compose(c).is_unitary()
