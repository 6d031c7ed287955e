"""Mach-Zehnder phase sweeps and sequential Stern-Gerlach measurements.

Path encoding: ``|0>`` is the upper arm ending at detector D1, ``|1>`` the
lower arm ending at D2. The beam-splitter is the real symmetric matrix
``[[1, 1], [1, -1]] / sqrt(2)`` rather than the common ``i``-phase
convention; mirrors add no relative phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    SIGMA_X,
    SIGMA_Z,
    UP_Z,
    Operator,
    StateVector,
    apply,
    basis_measurement,
    born_probabilities,
    make_rng,
    observable_measurement,
    post_measurement_state,
    sample,
)

BEAM_SPLITTER = Operator.unitary(np.array([[1, 1], [1, -1]]) / math.sqrt(2))
DETECTORS = basis_measurement(2, labels=("D1", "D2"))
SPIN_MEASUREMENTS = {
    "z": observable_measurement(SIGMA_Z),
    "x": observable_measurement(SIGMA_X),
}


def phase_shifter(phi: float) -> Operator:
    return Operator.unitary(np.diag([1.0, np.exp(1j * phi)]))


_UNSCALED_SPLITTER = np.array([[1, 1], [1, -1]], dtype=complex)


def mz_final_state(phi: float) -> StateVector:
    """Photon state at the detectors after ``S R(phi) S |0>``.

    The two ``1/sqrt(2)`` factors are merged into one exact ``1/2`` so that
    ``phi = 0`` yields ``|0>`` without rounding.
    """
    r = np.diag([1.0, np.exp(1j * phi)])
    vec = 0.5 * (_UNSCALED_SPLITTER @ (r @ (_UNSCALED_SPLITTER @ np.array([1.0, 0.0]))))
    return StateVector(vec)


def mz_final_state_stepwise(phi: float) -> StateVector:
    """Same state, applying the three unitaries one after another."""
    state = StateVector([1, 0])
    for op in (BEAM_SPLITTER, phase_shifter(phi), BEAM_SPLITTER):
        state = apply(op, state)
    return state


@dataclass(frozen=True)
class MachZehnderConfig:
    n_shots: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n_shots is not None and self.n_shots < 1:
            raise ValueError("n_shots must be at least 1 for Monte Carlo runs")


@dataclass(frozen=True)
class SweepRow:
    phi: float
    p_d1: float
    p_d2: float
    n_d1: int | None = None
    n_d2: int | None = None


def mz_sweep(phis: Sequence[float], config: MachZehnderConfig | None = None) -> list[SweepRow]:
    """Detection probabilities over a phase grid, plus shot counts when requested.

    Grid point ``k`` draws from its own stream ``make_rng(seed, k)``, so rows
    do not depend on the grid length.
    """
    config = config or MachZehnderConfig()
    phis = [float(p) for p in phis]
    if not phis:
        raise ValueError("phase grid is empty")
    rows = []
    for k, phi in enumerate(phis):
        if not math.isfinite(phi):
            raise ValueError(f"phase must be finite, got {phi}")
        state = mz_final_state(phi)
        probs = born_probabilities(state, DETECTORS)
        if config.n_shots is None:
            rows.append(SweepRow(phi, probs["D1"], probs["D2"]))
        else:
            counts = sample(state, DETECTORS, make_rng(config.seed, k), config.n_shots).counts
            rows.append(SweepRow(phi, probs["D1"], probs["D2"], counts["D1"], counts["D2"]))
    return rows


@dataclass(frozen=True)
class SternGerlachChain:
    axes: tuple[str, ...]
    n_shots: int = 100_000
    seed: int = 0
    initial: StateVector = UP_Z

    def __post_init__(self):
        axes = tuple(a.lower() for a in self.axes)
        if not axes:
            raise ValueError("a Stern-Gerlach chain needs at least one axis")
        bad = [a for a in axes if a not in SPIN_MEASUREMENTS]
        if bad:
            raise ValueError(f"unsupported axes {bad}; choose from z, x")
        if self.n_shots < 1:
            raise ValueError("n_shots must be at least 1")
        object.__setattr__(self, "axes", axes)


@dataclass(frozen=True)
class StageRow:
    stage: int
    axis: str
    outcome: int
    count: int


@dataclass(frozen=True)
class SternGerlachResult:
    chain: SternGerlachChain
    rows: tuple[StageRow, ...]
    histories: dict  # tuple of outcomes -> count

    def stage_counts(self, stage: int) -> dict[int, int]:
        return {r.outcome: r.count for r in self.rows if r.stage == stage}

    def up_fraction(self, stage: int) -> float:
        counts = self.stage_counts(stage)
        return counts.get(1, 0) / self.chain.n_shots

    def conditional_counts(self, prefix: tuple[int, ...]) -> dict[int, int]:
        """Outcome counts at stage ``len(prefix)`` among shots whose earlier outcomes equal ``prefix``."""
        depth = len(prefix)
        out: dict[int, int] = {1: 0, -1: 0}
        for hist, count in self.histories.items():
            if hist[:depth] == prefix and len(hist) > depth:
                out[hist[depth]] += count
        return out


def stern_gerlach_chain(chain: SternGerlachChain) -> SternGerlachResult:
    """Run shots through successive spin measurements, propagating post-states.

    Shots sharing an outcome history share a post-measurement state, so each
    stage draws one multinomial per surviving history instead of looping over
    shots; stage ``s`` uses the stream ``make_rng(seed, s)``.
    """
    populations = {(): (chain.initial, chain.n_shots)}
    rows = []
    for stage, axis in enumerate(chain.axes):
        m = SPIN_MEASUREMENTS[axis]
        rng = make_rng(chain.seed, stage)
        nxt = {}
        totals = {label: 0 for label in m.labels}
        for hist in sorted(populations):
            state, n = populations[hist]
            counts = sample(state, m, rng, n).counts
            for label, c in counts.items():
                if c == 0:
                    continue
                totals[label] += c
                nxt[hist + (label,)] = (post_measurement_state(state, m, label), c)
        rows.extend(StageRow(stage, axis, label, totals[label]) for label in m.labels)
        populations = nxt
    histories = {h: n for h, (_, n) in populations.items()}
    return SternGerlachResult(chain, tuple(rows), histories)
