"""Dense state-vector primitives.

Conventions
-----------
* Tensor products put the left factor in the most significant position, so
  ``tensor(ket('0'), ket('1'))`` is ``(0, 1, 0, 0)``. This is the ordering in
  which the controlled-NOT matrix reads ``diag(1, 1, X)``.
* Structural invariants are checked at ``ATOL`` (1e-9); the norm drift allowed
  after applying a unitary is ``DRIFT_TOL`` (1e-6).
* Entropies are in bits.

All value types are immutable after construction: their numpy buffers are
flagged read-only, so they can be shared between threads freely.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import (
    CapacityError,
    ContractError,
    NumericalHealthError,
    PostSelectionError,
    ShapeError,
)

ATOL = 1e-9
DRIFT_TOL = 1e-6
MAX_DIM = 2**20

_CERTIFICATIONS = (None, "unitary", "hermitian")


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex, copy=True)
    array.setflags(write=False)
    return array


def _check_dims(dim: int, dims: Sequence[int] | None) -> tuple[int, ...]:
    if dims is None:
        return (dim,)
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise ShapeError(f"subsystem dimensions must be positive, got {dims}")
    if math.prod(dims) != dim:
        raise ShapeError(f"subsystem dims {dims} do not multiply to {dim}")
    return dims


class StateVector:
    """Normalized pure state on a tensor-product space.

    Parameters
    ----------
    amplitudes
        Complex amplitudes in the computational basis.
    dims
        Subsystem dimensions, most significant first. Defaults to a single
        subsystem of dimension ``len(amplitudes)``.
    normalize
        Rescale the amplitudes to unit norm instead of rejecting them.
    """

    __slots__ = ("amplitudes", "dims")

    def __init__(
        self,
        amplitudes: Iterable[complex],
        dims: Sequence[int] | None = None,
        *,
        normalize: bool = False,
    ):
        amps = np.asarray(list(amplitudes) if not isinstance(amplitudes, np.ndarray) else amplitudes,
                          dtype=complex).ravel()
        if amps.size == 0:
            raise ShapeError("a state needs at least one amplitude")
        norm = float(np.linalg.norm(amps))
        if normalize:
            if norm < ATOL:
                raise ContractError("cannot normalize the zero vector")
            amps = amps / norm
        elif abs(norm - 1.0) > ATOL:
            raise ContractError(f"state is not normalized (norm {norm!r})")
        self.amplitudes = _frozen(amps)
        self.dims = _check_dims(amps.size, dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: StateVector) -> complex:
        """Return ``<self|other>``."""
        if other.dim != self.dim:
            raise ShapeError(f"dimension mismatch {self.dim} vs {other.dim}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: StateVector) -> float:
        return abs(self.inner(other)) ** 2

    def equals_up_to_phase(self, other: StateVector, atol: float = ATOL) -> bool:
        return other.dim == self.dim and abs(1.0 - abs(self.inner(other))) <= atol

    def allclose(self, other: StateVector, atol: float = ATOL) -> bool:
        return other.dim == self.dim and np.allclose(self.amplitudes, other.amplitudes, rtol=0, atol=atol)

    def with_dims(self, dims: Sequence[int]) -> StateVector:
        return StateVector(self.amplitudes, dims)

    def __repr__(self) -> str:
        return f"StateVector({np.array2string(self.amplitudes, precision=6)}, dims={self.dims})"


class Operator:
    """Square complex matrix, optionally certified unitary or Hermitian.

    Certification is verified on construction; a failed check raises
    :class:`ContractError`.
    """

    __slots__ = ("matrix", "dims", "certified")

    def __init__(
        self,
        matrix,
        dims: Sequence[int] | None = None,
        certify: str | None = None,
    ):
        mat = np.asarray(matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ShapeError(f"operator must be a square matrix, got shape {mat.shape}")
        if certify not in _CERTIFICATIONS:
            raise ValueError(f"unknown certification {certify!r}")
        self.matrix = _frozen(mat)
        self.dims = _check_dims(mat.shape[0], dims)
        if certify == "unitary" and not self.is_unitary():
            raise ContractError("matrix is not unitary within tolerance")
        if certify == "hermitian" and not self.is_hermitian():
            raise ContractError("matrix is not Hermitian within tolerance")
        self.certified = certify

    @classmethod
    def unitary(cls, matrix, dims: Sequence[int] | None = None) -> Operator:
        return cls(matrix, dims, certify="unitary")

    @classmethod
    def hermitian(cls, matrix, dims: Sequence[int] | None = None) -> Operator:
        return cls(matrix, dims, certify="hermitian")

    @classmethod
    def identity(cls, dim: int) -> Operator:
        return cls(np.eye(dim), certify="unitary")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def is_unitary(self, atol: float = ATOL) -> bool:
        m = self.matrix
        return np.allclose(m.conj().T @ m, np.eye(self.dim), rtol=0, atol=atol)

    def is_hermitian(self, atol: float = ATOL) -> bool:
        return np.allclose(self.matrix, self.matrix.conj().T, rtol=0, atol=atol)

    def dagger(self) -> Operator:
        return Operator(self.matrix.conj().T, self.dims, self.certified)

    def __matmul__(self, other: Operator) -> Operator:
        if not isinstance(other, Operator):
            return NotImplemented
        if other.dim != self.dim:
            raise ShapeError(f"dimension mismatch {self.dim} vs {other.dim}")
        cert = "unitary" if self.certified == other.certified == "unitary" else None
        return Operator(self.matrix @ other.matrix, self.dims, cert)

    def allclose(self, other, atol: float = ATOL) -> bool:
        mat = other.matrix if isinstance(other, Operator) else np.asarray(other)
        return mat.shape == self.matrix.shape and np.allclose(self.matrix, mat, rtol=0, atol=atol)

    def __repr__(self) -> str:
        return f"Operator(dim={self.dim}, dims={self.dims}, certified={self.certified})"


class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix."""

    __slots__ = ("matrix", "dims")

    def __init__(self, matrix, dims: Sequence[int] | None = None):
        mat = np.asarray(matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ShapeError(f"density matrix must be square, got shape {mat.shape}")
        if not np.allclose(mat, mat.conj().T, rtol=0, atol=ATOL):
            raise ContractError("density matrix is not Hermitian")
        tr = np.trace(mat)
        if abs(tr - 1.0) > ATOL:
            raise ContractError(f"density matrix trace is {tr.real!r}, expected 1")
        if np.linalg.eigvalsh(mat).min() < -ATOL:
            raise ContractError("density matrix has a negative eigenvalue")
        self.matrix = _frozen(mat)
        self.dims = _check_dims(mat.shape[0], dims)

    @classmethod
    def from_state(cls, state: StateVector) -> DensityMatrix:
        a = state.amplitudes
        return cls(np.outer(a, a.conj()), state.dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def allclose(self, other, atol: float = ATOL) -> bool:
        mat = other.matrix if isinstance(other, DensityMatrix) else np.asarray(other)
        return mat.shape == self.matrix.shape and np.allclose(self.matrix, mat, rtol=0, atol=atol)

    def __repr__(self) -> str:
        return f"DensityMatrix(dim={self.dim}, dims={self.dims})"


class ProjectiveMeasurement:
    """Complete set of orthogonal projectors with one label per outcome."""

    __slots__ = ("projectors", "labels", "dims")

    def __init__(self, projectors: Sequence, labels: Sequence[Hashable]):
        projs = [p if isinstance(p, Operator) else Operator(p) for p in projectors]
        labels = tuple(labels)
        if not projs:
            raise ShapeError("a measurement needs at least one projector")
        if len(labels) != len(projs):
            raise ShapeError("one label per projector is required")
        if len(set(labels)) != len(labels):
            raise ContractError("measurement labels must be distinct")
        dim = projs[0].dim
        if any(p.dim != dim for p in projs):
            raise ShapeError("projectors have different dimensions")
        total = np.zeros((dim, dim), dtype=complex)
        for i, p in enumerate(projs):
            m = p.matrix
            if not np.allclose(m, m.conj().T, rtol=0, atol=ATOL):
                raise ContractError(f"projector {labels[i]!r} is not Hermitian")
            if not np.allclose(m @ m, m, rtol=0, atol=ATOL):
                raise ContractError(f"projector {labels[i]!r} is not idempotent")
            for j in range(i):
                if not np.allclose(m @ projs[j].matrix, 0, atol=ATOL):
                    raise ContractError(f"projectors {labels[j]!r} and {labels[i]!r} overlap")
            total += m
        if not np.allclose(total, np.eye(dim), rtol=0, atol=ATOL):
            raise ContractError("projectors do not sum to the identity")
        self.projectors = tuple(projs)
        self.labels = labels
        self.dims = projs[0].dims

    @property
    def dim(self) -> int:
        return self.projectors[0].dim

    def projector(self, label: Hashable) -> Operator:
        try:
            return self.projectors[self.labels.index(label)]
        except ValueError:
            raise KeyError(f"no outcome labelled {label!r}") from None


# ---------------------------------------------------------------------------
# constructors

def basis_state(index: int, dims: Sequence[int] | int = 2) -> StateVector:
    dims = (dims,) if isinstance(dims, int) else tuple(dims)
    dim = math.prod(dims)
    if not 0 <= index < dim:
        raise ShapeError(f"basis index {index} out of range for dimension {dim}")
    amps = np.zeros(dim, dtype=complex)
    amps[index] = 1.0
    return StateVector(amps, dims)


def ket(bits: str) -> StateVector:
    """Computational-basis qubit state from a bit string, e.g. ``ket('01')``."""
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"expected a non-empty bit string, got {bits!r}")
    return basis_state(int(bits, 2), (2,) * len(bits))


def basis_measurement(dims: Sequence[int] | int = 2, labels: Sequence[Hashable] | None = None) -> ProjectiveMeasurement:
    dims = (dims,) if isinstance(dims, int) else tuple(dims)
    dim = math.prod(dims)
    labels = tuple(range(dim)) if labels is None else tuple(labels)
    projs = []
    for k in range(dim):
        p = np.zeros((dim, dim), dtype=complex)
        p[k, k] = 1.0
        projs.append(Operator(p, dims, "hermitian"))
    return ProjectiveMeasurement(projs, labels)


def observable_measurement(obs: Operator, decimals: int = 9) -> ProjectiveMeasurement:
    """Spectral measurement of a Hermitian observable, labelled by eigenvalue.

    Eigenvalues that round to integers are labelled with ``int`` (so a Pauli
    measurement has labels ``+1`` and ``-1``), largest first.
    """
    if not obs.is_hermitian():
        raise ContractError("observable is not Hermitian")
    vals, vecs = np.linalg.eigh(obs.matrix)
    groups: dict[float, list[int]] = {}
    for k, v in enumerate(np.round(vals, decimals)):
        groups.setdefault(float(v) + 0.0, []).append(k)
    projs, labels = [], []
    for value in sorted(groups, reverse=True):
        cols = vecs[:, groups[value]]
        projs.append(Operator(cols @ cols.conj().T, obs.dims))
        labels.append(int(round(value)) if abs(value - round(value)) < 10.0**-decimals else value)
    return ProjectiveMeasurement(projs, labels)


def embed_operator(op: Operator, targets: Sequence[int], dims: Sequence[int]) -> Operator:
    """Lift ``op`` acting on subsystems ``targets`` (in that order) to the full space."""
    dims = tuple(dims)
    targets = tuple(targets)
    n = len(dims)
    if len(set(targets)) != len(targets) or any(not 0 <= t < n for t in targets):
        raise ShapeError(f"invalid target subsystems {targets} for {n} subsystems")
    sub_dims = tuple(dims[t] for t in targets)
    if op.dim != math.prod(sub_dims):
        raise ShapeError(f"operator dimension {op.dim} does not match subsystems {sub_dims}")
    rest = [k for k in range(n) if k not in targets]
    order = list(targets) + rest
    rest_dim = math.prod(dims[k] for k in rest)
    full = np.kron(op.matrix, np.eye(rest_dim))
    perm_dims = [dims[k] for k in order]
    full = full.reshape(perm_dims + perm_dims)
    inverse = np.argsort(order)
    full = full.transpose(list(inverse) + [n + k for k in inverse])
    dim = math.prod(dims)
    return Operator(full.reshape(dim, dim), dims, op.certified)


def local_measurement(m: ProjectiveMeasurement, subsystem: int, dims: Sequence[int]) -> ProjectiveMeasurement:
    projs = [embed_operator(p, (subsystem,), dims) for p in m.projectors]
    return ProjectiveMeasurement(projs, m.labels)


# ---------------------------------------------------------------------------
# operations

def tensor(a, b, *, max_dim: int = MAX_DIM):
    """Kronecker product of two states or two operators (left factor most significant)."""
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        dim = a.dim * b.dim
        if dim > max_dim:
            raise CapacityError(f"tensor product dimension {dim} exceeds maximum {max_dim}")
        return StateVector(np.kron(a.amplitudes, b.amplitudes), a.dims + b.dims)
    if isinstance(a, Operator) and isinstance(b, Operator):
        dim = a.dim * b.dim
        if dim > max_dim:
            raise CapacityError(f"tensor product dimension {dim} exceeds maximum {max_dim}")
        cert = a.certified if a.certified == b.certified else None
        return Operator(np.kron(a.matrix, b.matrix), a.dims + b.dims, cert)
    raise TypeError(f"cannot tensor {type(a).__name__} with {type(b).__name__}")


def tensor_all(*factors, max_dim: int = MAX_DIM):
    out = factors[0]
    for f in factors[1:]:
        out = tensor(out, f, max_dim=max_dim)
    return out


def unnormalized_apply(op: Operator, state: StateVector | np.ndarray) -> np.ndarray:
    """Matrix-vector product without any unitarity requirement or renormalization."""
    vec = state.amplitudes if isinstance(state, StateVector) else np.asarray(state, dtype=complex)
    if op.dim != vec.size:
        raise ShapeError(f"operator dimension {op.dim} does not match state dimension {vec.size}")
    return op.matrix @ vec


def apply(op: Operator, state: StateVector) -> StateVector:
    if op.certified != "unitary":
        raise ContractError("apply() needs a certified-unitary operator; use unnormalized_apply()")
    out = unnormalized_apply(op, state)
    drift = abs(float(np.linalg.norm(out)) - 1.0)
    if drift > DRIFT_TOL:
        raise NumericalHealthError(f"norm drifted by {drift:.3e} after unitary application")
    # the drift may exceed ATOL at large dims; rescale silently below DRIFT_TOL
    if drift > ATOL:
        return StateVector(out, state.dims, normalize=True)
    return StateVector(out, state.dims)


def born_probabilities(state: StateVector, m: ProjectiveMeasurement) -> dict[Hashable, float]:
    if m.dim != state.dim:
        raise ShapeError(f"measurement dimension {m.dim} does not match state dimension {state.dim}")
    a = state.amplitudes
    out = {}
    for label, p in zip(m.labels, m.projectors):
        prob = float(np.real(np.vdot(a, p.matrix @ a)))
        out[label] = min(max(prob, 0.0), 1.0)
    return out


def expectation(state: StateVector, obs: Operator) -> float:
    if obs.dim != state.dim:
        raise ShapeError(f"observable dimension {obs.dim} does not match state dimension {state.dim}")
    if not obs.is_hermitian():
        raise ContractError("expectation() requires a Hermitian observable")
    a = state.amplitudes
    return float(np.real(np.vdot(a, obs.matrix @ a)))


def post_measurement_state(state: StateVector, m: ProjectiveMeasurement, label: Hashable) -> StateVector:
    """Projected and renormalized state for outcome ``label``."""
    vec = unnormalized_apply(m.projector(label), state)
    prob = float(np.real(np.vdot(vec, vec)))
    if prob <= ATOL**2:
        raise PostSelectionError(f"outcome {label!r} has probability {prob:.3e}", prob)
    return StateVector(vec / math.sqrt(prob), state.dims)


def make_rng(seed: int, worker: int = 0) -> np.random.Generator:
    """Counter-based (Philox) generator keyed on ``(seed, worker)``."""
    seq = np.random.SeedSequence([int(seed) % 2**64, int(worker)])
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class SampleResult:
    counts: dict
    n: int
    probabilities: dict
    state: StateVector = field(repr=False)
    measurement: ProjectiveMeasurement = field(repr=False)

    def frequency(self, label: Hashable) -> float:
        return self.counts[label] / self.n

    def post_state(self, label: Hashable) -> StateVector:
        return post_measurement_state(self.state, self.measurement, label)


def _draw_counts(probs: dict, n: int, rng: np.random.Generator) -> dict:
    p = np.array(list(probs.values()), dtype=float)
    total = p.sum()
    if abs(total - 1.0) > ATOL:
        raise NumericalHealthError(f"outcome probabilities sum to {total!r}")
    draws = rng.multinomial(n, p / total)
    return {label: int(c) for label, c in zip(probs, draws)}


def sample(state: StateVector, m: ProjectiveMeasurement, rng: np.random.Generator, n: int) -> SampleResult:
    """Draw ``n`` i.i.d. outcomes; the histogram depends only on the generator state."""
    if n < 1:
        raise ValueError("n must be at least 1")
    probs = born_probabilities(state, m)
    return SampleResult(_draw_counts(probs, n, rng), n, probs, state, m)


def sample_parallel(
    state: StateVector,
    m: ProjectiveMeasurement,
    seed: int,
    n: int,
    workers: int = 4,
) -> SampleResult:
    """Split ``n`` shots over ``workers`` private streams and add the histograms.

    The result depends on ``(seed, workers)`` only, never on thread scheduling.
    """
    if n < 1 or workers < 1:
        raise ValueError("n and workers must be positive")
    probs = born_probabilities(state, m)
    shares = [n // workers + (1 if k < n % workers else 0) for k in range(workers)]

    def run(k: int) -> dict:
        if shares[k] == 0:
            return {label: 0 for label in probs}
        return _draw_counts(probs, shares[k], make_rng(seed, k))

    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(run, range(workers)))
    counts = {label: sum(part[label] for part in parts) for label in probs}
    return SampleResult(counts, n, probs, state, m)


def _as_density_tensor(x) -> tuple[np.ndarray, tuple[int, ...]]:
    if isinstance(x, StateVector):
        a = x.amplitudes
        return np.outer(a, a.conj()), x.dims
    if isinstance(x, DensityMatrix):
        return np.asarray(x.matrix), x.dims
    raise TypeError(f"expected StateVector or DensityMatrix, got {type(x).__name__}")


def _validate_keep(keep: Iterable[int], n: int) -> tuple[int, ...]:
    keep = tuple(int(k) for k in keep)
    if not keep:
        raise ShapeError("keep must name at least one subsystem")
    if len(set(keep)) != len(keep) or any(not 0 <= k < n for k in keep):
        raise ShapeError(f"invalid subsystem indices {keep} for {n} subsystems")
    return keep


def partial_trace(x: StateVector | DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on subsystems ``keep`` (output ordered as given)."""
    dims = x.dims
    keep = _validate_keep(keep, len(dims))
    drop = [k for k in range(len(dims)) if k not in keep]
    dk = math.prod(dims[k] for k in keep)
    dd = math.prod(dims[k] for k in drop)
    if isinstance(x, StateVector):
        psi = x.amplitudes.reshape(dims).transpose(list(keep) + drop).reshape(dk, dd)
        rho = psi @ psi.conj().T
    else:
        n = len(dims)
        t = np.asarray(x.matrix).reshape(dims + dims)
        order = list(keep) + drop
        t = t.transpose(order + [n + k for k in order]).reshape(dk, dd, dk, dd)
        rho = np.einsum("ijkj->ik", t)
    return DensityMatrix(rho, tuple(dims[k] for k in keep))


def _von_neumann_bits(eigenvalues: np.ndarray) -> float:
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.min() < -ATOL:
        raise NumericalHealthError(f"reduced state has eigenvalue {lam.min():.3e}")
    lam = lam[lam > 0.0]
    return max(float(-np.sum(lam * np.log2(lam))), 0.0) + 0.0  # no -0.0


def _resolve_cut(state: StateVector, cut: Iterable[int] | None) -> tuple[int, ...]:
    if cut is None:
        if len(state.dims) != 2:
            raise ContractError(f"state has {len(state.dims)} subsystems; specify the cut explicitly")
        return (0,)
    cut = _validate_keep(cut, len(state.dims))
    if len(cut) == len(state.dims):
        raise ShapeError("the cut must leave at least one subsystem on the other side")
    return cut


def entanglement_entropy(state: StateVector, cut: Iterable[int] | None = None) -> float:
    """Entropy (bits) of the reduced state on the subsystems listed in ``cut``."""
    cut = _resolve_cut(state, cut)
    return _von_neumann_bits(partial_trace(state, cut).eigenvalues())


@dataclass(frozen=True)
class SchmidtDecomposition:
    separable: bool
    coefficients: tuple[float, ...]
    singular_values: tuple[float, ...]

    @property
    def rank(self) -> int:
        return len(self.coefficients)


def _bipartite_matrix(state: StateVector, cut: tuple[int, ...]) -> np.ndarray:
    dims = state.dims
    rest = [k for k in range(len(dims)) if k not in cut]
    da = math.prod(dims[k] for k in cut)
    return state.amplitudes.reshape(dims).transpose(list(cut) + rest).reshape(da, -1)


def schmidt_separability(state: StateVector, cut: Iterable[int] | None = None) -> SchmidtDecomposition:
    """Schmidt coefficients across ``cut``; separable iff exactly one exceeds ATOL."""
    cut = _resolve_cut(state, cut)
    sv = np.linalg.svd(_bipartite_matrix(state, cut), compute_uv=False)
    nonzero = tuple(float(s) for s in sv if s > ATOL)
    return SchmidtDecomposition(len(nonzero) == 1, nonzero, tuple(float(s) for s in sv))


def negativity(state: StateVector, cut: Iterable[int] | None = None) -> float:
    """Sum of the magnitudes of the negative eigenvalues of the partial transpose."""
    cut = _resolve_cut(state, cut)
    psi = _bipartite_matrix(state, cut)
    da, db = psi.shape
    rho = np.einsum("ij,kl->ijkl", psi, psi.conj())  # rho[a, b, a', b']
    pt = rho.transpose(0, 3, 2, 1).reshape(da * db, da * db)
    lam = np.linalg.eigvalsh(pt)
    return float(-lam[lam < 0].sum()) + 0.0


# ---------------------------------------------------------------------------
# standard single-qubit objects

I2 = Operator(np.eye(2), certify="unitary")
SIGMA_X = Operator([[0, 1], [1, 0]], certify="unitary")
SIGMA_Y = Operator([[0, -1j], [1j, 0]], certify="unitary")
SIGMA_Z = Operator([[1, 0], [0, -1]], certify="unitary")

ZERO = ket("0")
ONE = ket("1")
PLUS = StateVector([1, 1], normalize=True)
MINUS = StateVector([1, -1], normalize=True)
UP_Z, DOWN_Z, UP_X, DOWN_X = ZERO, ONE, PLUS, MINUS

SPIN_STATES = {"up-z": UP_Z, "down-z": DOWN_Z, "up-x": UP_X, "down-x": DOWN_X}
