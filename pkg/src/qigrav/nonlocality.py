"""Local hidden-variable models and the CHSH inequality.

Outcomes are ``+1``/``-1``; settings are ``0``/``1``. The hidden variable
takes finitely many values, so the LHV integral becomes a weighted sum.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .core import (
    ATOL,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DensityMatrix,
    Operator,
    StateVector,
    expectation,
    tensor,
)
from .errors import ContractError, ShapeError

OUTCOMES = (1, -1)
SETTINGS = (0, 1)
TSIRELSON = 2 * math.sqrt(2)


@dataclass(frozen=True)
class LHVModel:
    """Finite-support LHV model.

    ``p_alice[k, i]`` is the probability that Alice outputs ``+1`` for setting
    ``i`` given hidden value ``lambdas[k]``; likewise ``p_bob``. Deterministic
    models use entries in ``{0, 1}``.
    """

    weights: np.ndarray
    p_alice: np.ndarray
    p_bob: np.ndarray
    lambdas: tuple = ()

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        pa = np.asarray(self.p_alice, dtype=float)
        pb = np.asarray(self.p_bob, dtype=float)
        if w.ndim != 1 or pa.shape != (w.size, 2) or pb.shape != (w.size, 2):
            raise ShapeError("expected weights (L,) and response tables (L, 2)")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ContractError("hidden-variable weights must be a probability vector")
        if np.any((pa < 0) | (pa > 1)) or np.any((pb < 0) | (pb > 1)):
            raise ContractError("response probabilities must lie in [0, 1]")
        lambdas = tuple(self.lambdas) or tuple(range(w.size))
        if len(lambdas) != w.size:
            raise ShapeError("one label per hidden value is required")
        for name, arr in (("weights", w), ("p_alice", pa), ("p_bob", pb)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "lambdas", lambdas)

    @classmethod
    def deterministic(cls, alice: Sequence[Sequence[int]], bob: Sequence[Sequence[int]], weights=None) -> LHVModel:
        """Model whose hidden value ``k`` fixes outputs ``alice[k][i]`` and ``bob[k][j]`` (each +-1)."""
        alice = np.asarray(alice)
        bob = np.asarray(bob)
        if weights is None:
            weights = np.full(len(alice), 1 / len(alice))
        return cls(np.asarray(weights, dtype=float), (alice == 1).astype(float), (bob == 1).astype(float))


def _outcome_prob(p_plus, outcome: int):
    if outcome == 1:
        return p_plus
    if outcome == -1:
        return 1.0 - p_plus
    raise ValueError(f"outcome must be +1 or -1, got {outcome}")


def lhv_joint_probability(model: LHVModel, a: int, b: int, i: int, j: int) -> float:
    if i not in SETTINGS or j not in SETTINGS:
        raise ValueError(f"settings must be 0 or 1, got {(i, j)}")
    pa = _outcome_prob(model.p_alice[:, i], a)
    pb = _outcome_prob(model.p_bob[:, j], b)
    return float(np.sum(model.weights * pa * pb))


def lhv_correlators(model: LHVModel) -> dict[tuple[int, int], float]:
    out = {}
    for i, j in itertools.product(SETTINGS, SETTINGS):
        out[(i, j)] = sum(a * b * lhv_joint_probability(model, a, b, i, j) for a in OUTCOMES for b in OUTCOMES)
    return out


def chsh_value(corr: Mapping[tuple[int, int], float]) -> float:
    """``|E00 + E01 + E10 - E11|``."""
    vals = {}
    for key in itertools.product(SETTINGS, SETTINGS):
        v = float(corr[key])
        if not -1.0 - ATOL <= v <= 1.0 + ATOL:
            raise ContractError(f"correlator {key} = {v} lies outside [-1, 1]")
        vals[key] = v
    return abs(vals[0, 0] + vals[0, 1] + vals[1, 0] - vals[1, 1])


@dataclass(frozen=True)
class ClassicalCHSHResult:
    value: float
    argmax: tuple[tuple[tuple[int, int], tuple[int, int]], ...]
    n_strategies: int


def classical_chsh_max() -> ClassicalCHSHResult:
    """Exhaust the 16 deterministic strategies ``a(i), b(j) in {+-1}``.

    Any probabilistic LHV model is a convex mixture of these, and the CHSH
    expression is linear in the correlators, so the maximum over this set is
    the LHV maximum.
    """
    best = -math.inf
    argmax = []
    strategies = list(itertools.product(itertools.product(OUTCOMES, OUTCOMES), repeat=2))
    for a, b in strategies:
        corr = {(i, j): a[i] * b[j] for i in SETTINGS for j in SETTINGS}
        value = chsh_value(corr)
        if value > best:
            best, argmax = value, [(a, b)]
        elif value == best:
            argmax.append((a, b))
    return ClassicalCHSHResult(best, tuple(argmax), len(strategies))


def random_lhv_model(rng: np.random.Generator, n_lambda: int = 4) -> LHVModel:
    w = rng.dirichlet(np.ones(n_lambda))
    return LHVModel(w, rng.random((n_lambda, 2)), rng.random((n_lambda, 2)))


def lhv_chsh_values(weights: np.ndarray, p_alice: np.ndarray, p_bob: np.ndarray) -> np.ndarray:
    """Vectorized CHSH values for a batch of models with shapes (M, L), (M, L, 2), (M, L, 2)."""
    ea = 2 * np.asarray(p_alice) - 1  # E[a | i, lambda]
    eb = 2 * np.asarray(p_bob) - 1
    corr = np.einsum("ml,mli,mlj->mij", weights, ea, eb)
    return np.abs(corr[:, 0, 0] + corr[:, 0, 1] + corr[:, 1, 0] - corr[:, 1, 1])


# ---------------------------------------------------------------------------
# quantum side

_BELL = {
    "phi+": [1, 0, 0, 1],
    "phi-": [1, 0, 0, -1],
    "psi+": [0, 1, 1, 0],
    "psi-": [0, 1, -1, 0],
}
_BELL_ALIASES = {"Φ+": "phi+", "Φ-": "phi-", "Ψ+": "psi+", "Ψ-": "psi-", "Φ−": "phi-", "Ψ−": "psi-"}


def bell_state(kind: str = "phi+") -> StateVector:
    key = _BELL_ALIASES.get(kind, kind.lower())
    if key not in _BELL:
        raise ValueError(f"unknown Bell state {kind!r}; choose from {sorted(_BELL)}")
    return StateVector(np.array(_BELL[key]) / math.sqrt(2), (2, 2))


def _check_pm1(obs: Operator, name: str):
    if obs.dim != 2:
        raise ShapeError(f"{name} must be a single-qubit observable")
    if not obs.is_hermitian():
        raise ContractError(f"{name} is not Hermitian")
    vals = np.linalg.eigvalsh(obs.matrix)
    if not all(min(abs(v - 1), abs(v + 1)) <= ATOL for v in vals):
        raise ContractError(f"{name} has eigenvalues {vals}, expected +-1")


@dataclass(frozen=True)
class CHSHQuantumStrategy:
    shared_state: StateVector
    settings_a: tuple[Operator, Operator]
    settings_b: tuple[Operator, Operator]

    def __post_init__(self):
        if self.shared_state.dim != 4:
            raise ShapeError("the shared state must be a two-qubit state")
        for side, ops in (("A", self.settings_a), ("B", self.settings_b)):
            if len(ops) != 2:
                raise ShapeError(f"{side} needs exactly two settings")
            for k, op in enumerate(ops):
                _check_pm1(op, f"{side}{k}")


def _hermitian(matrix) -> Operator:
    return Operator(matrix, certify="hermitian")


# A0 = Z, A1 = X, B0 = (Z + X)/sqrt2, B1 = (Z - X)/sqrt2
DEFAULT_SETTINGS_A = (SIGMA_Z, SIGMA_X)
DEFAULT_SETTINGS_B = (
    _hermitian((SIGMA_Z.matrix + SIGMA_X.matrix) / math.sqrt(2)),
    _hermitian((SIGMA_Z.matrix - SIGMA_X.matrix) / math.sqrt(2)),
)


def default_strategy(state: StateVector) -> CHSHQuantumStrategy:
    return CHSHQuantumStrategy(state, DEFAULT_SETTINGS_A, DEFAULT_SETTINGS_B)


@dataclass(frozen=True)
class QuantumCHSHResult:
    correlators: dict
    value: float


def quantum_chsh(strategy: CHSHQuantumStrategy) -> QuantumCHSHResult:
    corr = {}
    for i, j in itertools.product(SETTINGS, SETTINGS):
        joint = tensor(strategy.settings_a[i], strategy.settings_b[j])
        corr[(i, j)] = expectation(strategy.shared_state, joint)
    return QuantumCHSHResult(corr, chsh_value(corr))


_PAULIS = (SIGMA_X.matrix, SIGMA_Y.matrix, SIGMA_Z.matrix)


def spin_observable(direction: Sequence[float]) -> Operator:
    """``n . sigma`` for a unit vector ``n`` (eigenvalues +-1)."""
    n = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(n)
    if norm < ATOL:
        raise ContractError("direction must be non-zero")
    n = n / norm
    return _hermitian(sum(c * p for c, p in zip(n, _PAULIS)))


def correlation_tensor(state: StateVector | DensityMatrix) -> np.ndarray:
    """``T[i, j] = <sigma_i (x) sigma_j>`` for a two-qubit pure or mixed state."""
    if state.dim != 4:
        raise ShapeError("correlation tensor needs a two-qubit state")
    if isinstance(state, DensityMatrix):
        rho = np.asarray(state.matrix)
    else:
        a = state.amplitudes
        rho = np.outer(a, a.conj())
    t = np.empty((3, 3))
    for i, p in enumerate(_PAULIS):
        for j, q in enumerate(_PAULIS):
            t[i, j] = np.real(np.trace(rho @ np.kron(p, q)))
    return t


def max_chsh_value(state: StateVector | DensityMatrix) -> float:
    """Largest CHSH value over all projective qubit settings, ``2 sqrt(s1^2 + s2^2)``."""
    s = np.linalg.svd(correlation_tensor(state), compute_uv=False)
    return 2 * math.sqrt(s[0] ** 2 + s[1] ** 2)


def optimal_chsh_settings(state: StateVector) -> CHSHQuantumStrategy:
    """Settings reaching the state's maximal CHSH value ``2 sqrt(s1^2 + s2^2)``.

    ``s1 >= s2`` are the two largest singular values of the correlation
    tensor. Bob measures along ``cos(t) v1 +- sin(t) v2`` with
    ``tan(t) = s2 / s1`` and Alice along the matching left singular vectors.
    """
    u, s, vt = np.linalg.svd(correlation_tensor(state))
    if s[0] < ATOL:
        # no correlations at all; any settings give zero
        return default_strategy(state)
    theta = math.atan2(s[1], s[0])
    v1, v2 = vt[0], vt[1]
    b0 = math.cos(theta) * v1 + math.sin(theta) * v2
    b1 = math.cos(theta) * v1 - math.sin(theta) * v2
    a0, a1 = u[:, 0], u[:, 1]
    if s[1] < ATOL:
        a1 = a0
    return CHSHQuantumStrategy(
        state,
        (spin_observable(a0), spin_observable(a1)),
        (spin_observable(b0), spin_observable(b1)),
    )


def random_local_observable(rng: np.random.Generator) -> Operator:
    return spin_observable(rng.normal(size=3))


# ---------------------------------------------------------------------------
# LHV model file format


def load_lhv_model(path: str | Path) -> LHVModel:
    """Read an LHV model from JSON.

    Schema::

        {"lambdas": [
            {"label": "l0", "weight": 0.5, "alice": [pA0, pA1], "bob": [pB0, pB1]},
            ...
        ]}

    ``alice[i]`` is the probability of outcome ``+1`` for setting ``i``;
    ``label`` is optional.
    """
    data = json.loads(Path(path).read_text())
    return lhv_model_from_dict(data)


def lhv_model_from_dict(data: dict) -> LHVModel:
    if set(data) - {"lambdas"}:
        raise ContractError(f"unknown keys in LHV model: {sorted(set(data) - {'lambdas'})}")
    entries = data.get("lambdas")
    if not entries:
        raise ContractError("LHV model needs a non-empty 'lambdas' list")
    allowed = {"label", "weight", "alice", "bob"}
    for e in entries:
        extra = set(e) - allowed
        if extra:
            raise ContractError(f"unknown keys in LHV entry: {sorted(extra)}")
    return LHVModel(
        np.array([e["weight"] for e in entries], dtype=float),
        np.array([e["alice"] for e in entries], dtype=float),
        np.array([e["bob"] for e in entries], dtype=float),
        tuple(e.get("label", k) for k, e in enumerate(entries)),
    )


def lhv_model_to_dict(model: LHVModel) -> dict:
    return {
        "lambdas": [
            {
                "label": label,
                "weight": float(w),
                "alice": [float(p) for p in pa],
                "bob": [float(p) for p in pb],
            }
            for label, w, pa, pb in zip(model.lambdas, model.weights, model.p_alice, model.p_bob)
        ]
    }
