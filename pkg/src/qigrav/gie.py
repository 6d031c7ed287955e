"""Gravitationally induced entanglement between two interferometers.

Only the pair of arms at the inner separation ``d2`` accrues a phase, the
Newtonian value ``-G m^2 t / (d2 hbar)`` on the ``|11>`` branch. The spin
variant carries the phase on ``|down, up>`` once the paths recombine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Literal

import numpy as np

from .core import (
    StateVector,
    apply,
    embed_operator,
    entanglement_entropy,
    negativity,
    schmidt_separability,
)
from .errors import ContractError, PhaseOverflowError
from .gates import cnot_gate

G_SI = 6.674e-11
HBAR_SI = 1.0546e-34

Variant = Literal["path", "spin"]


@dataclass(frozen=True)
class GIEParams:
    m: float
    d2: float
    t: float
    G: float = G_SI
    hbar: float = HBAR_SI

    def __post_init__(self):
        for name in ("m", "d2", "t", "G", "hbar"):
            value = getattr(self, name)
            if not value > 0:
                raise ContractError(f"{name} must be strictly positive, got {value!r}")

    @classmethod
    def natural(cls, m: float = 1.0, d2: float = 1.0, t: float = 1.0) -> GIEParams:
        return cls(m, d2, t, G=1.0, hbar=1.0)


@dataclass(frozen=True)
class GIEPhase:
    raw: float
    wrapped: float  # in [0, 2 pi)


def gie_phase(p: GIEParams) -> GIEPhase:
    try:
        phi = -p.G * p.m * p.m * p.t / (p.d2 * p.hbar)
    except (OverflowError, ZeroDivisionError):
        phi = math.inf
    if not math.isfinite(phi):
        raise PhaseOverflowError(f"phase is not finite for {p}")
    return GIEPhase(phi, float(np.mod(phi, 2 * math.pi)))


def interaction_time_for_phase(phi: float, m: float, d2: float, G: float = G_SI, hbar: float = HBAR_SI) -> float:
    """Time ``t`` at which the accumulated phase reaches ``-|phi|``."""
    return abs(phi) * d2 * hbar / (G * m**2)


def _check_variant(variant: str) -> str:
    if variant not in ("path", "spin"):
        raise ValueError(f"variant must be 'path' or 'spin', got {variant!r}")
    return variant


def gie_state(phi: float, variant: Variant = "path") -> StateVector:
    """Two-qubit state after the interaction stage.

    path: ``(|00> + |01> + |10> + e^{i phi}|11>) / 2`` over the two paths.
    spin: ``(|uu> + |ud> + e^{i phi}|du> + |dd>) / 2`` over the two spins.
    """
    amps = np.full(4, 0.5, dtype=complex)
    amps[3 if _check_variant(variant) == "path" else 2] = 0.5 * np.exp(1j * phi)
    return StateVector(amps, (2, 2))


# (path_A, spin_A, path_B, spin_B), up = 0, down = 1
SPIN_PATH_DIMS = (2, 2, 2, 2)


def gie_spin_path_state(phi: float) -> StateVector:
    """Path-spin state of both particles before recombination."""
    amps = np.zeros(16, dtype=complex)
    branches = {(0, 0, 0, 0): 1, (0, 0, 1, 1): 1, (1, 1, 0, 0): np.exp(1j * phi), (1, 1, 1, 1): 1}
    for (pa, sa, pb, sb), c in branches.items():
        amps[pa * 8 + sa * 4 + pb * 2 + sb] = 0.5 * c
    return StateVector(amps, SPIN_PATH_DIMS)


def recombine_paths(state: StateVector) -> StateVector:
    """Close both interferometers and return the remaining two-spin state.

    Recombination is modelled as a spin-controlled flip of each path, which
    sends ``|1, down>`` to ``|0, down>``; the paths then factor out as
    ``|0>|0>`` and all correlations are carried by the spins.
    """
    cx = cnot_gate().matrix
    for spin, path in ((1, 0), (3, 2)):
        state = apply(embed_operator(cx, (spin, path), SPIN_PATH_DIMS), state)
    amps = state.amplitudes.reshape(SPIN_PATH_DIMS)
    spins = amps[0, :, 0, :].ravel()
    leak = 1.0 - float(np.vdot(spins, spins).real)
    if leak > 1e-9:
        raise ContractError(f"paths did not recombine (residual weight {leak:.3e})")
    return StateVector(spins, (2, 2))


@dataclass(frozen=True)
class GIESweepRow:
    m: float | None
    d2: float | None
    t: float | None
    phi: float
    entropy: float
    negativity: float
    separable: bool


def _row(phi: float, variant: Variant, p: GIEParams | None = None) -> GIESweepRow:
    state = gie_state(phi, variant)
    return GIESweepRow(
        None if p is None else p.m,
        None if p is None else p.d2,
        None if p is None else p.t,
        phi,
        entanglement_entropy(state, (0,)),
        negativity(state, (0,)),
        schmidt_separability(state, (0,)).separable,
    )


def gie_entanglement_sweep(params: Iterable[GIEParams], variant: Variant = "path") -> list[GIESweepRow]:
    rows = [_row(gie_phase(p).raw, variant, p) for p in params]
    if not rows:
        raise ValueError("parameter grid is empty")
    return rows


def gie_phi_sweep(phis: Iterable[float], variant: Variant = "path") -> list[GIESweepRow]:
    """Entanglement table over raw phases, with the physical columns left empty."""
    rows = [_row(float(phi), variant) for phi in phis]
    if not rows:
        raise ValueError("phase grid is empty")
    return rows


def param_grid(base: GIEParams, m=None, d2=None, t=None) -> list[GIEParams]:
    """Cartesian grid over any of ``m``, ``d2``, ``t``; unspecified axes keep ``base``."""
    ms = [base.m] if m is None else list(m)
    ds = [base.d2] if d2 is None else list(d2)
    ts = [base.t] if t is None else list(t)
    return [replace(base, m=a, d2=b, t=c) for a in ms for b in ds for c in ts]
