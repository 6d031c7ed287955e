"""Gravitational time dilation, signal ordering and the gravitational switch.

Two agents at radial distances ``R_A`` and ``R_B`` from a mass ``M`` each
send a signal when their own clock reads ``tau_star``. The agent closer to
the mass ticks slower, so for a late enough ``tau_star`` it receives the
other's signal before sending its own. A mass placed in a superposition of
two such configurations with opposite orders controls the order of the
agents' operations.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from ..core import PLUS, UP_Z, Operator, StateVector
from ..errors import ContractError, DegenerateConfigurationError, DomainError, PostSelectionError, ProtocolInfeasibleError
from ..gie import G_SI
from .switch import PM_BASIS, Branch, _qubit_op, _qubit_state, project_first_qubit, run_controlled, switch_operator

C_SI = 299_792_458.0
CONVENTIONS = ("sqrt", "linear")


def _compactness(M: float, R: float, G: float, c: float) -> float:
    """``2 G M / (c^2 R)``, validated to lie in ``[0, 1)``."""
    if not M >= 0:
        raise DomainError(f"mass must be non-negative, got {M!r}")
    if not R > 0:
        raise DomainError(f"radius must be positive, got {R!r}")
    x = 2 * G * M / (c * c * R)
    if not x < 1:
        raise DomainError(f"R = {R!r} m lies inside the Schwarzschild radius {2 * G * M / c**2!r} m")
    return x


def schwarzschild_radius(M: float, G: float = G_SI, c: float = C_SI) -> float:
    return 2 * G * M / c**2


def metric_factor(M: float, R: float, G: float = G_SI, c: float = C_SI) -> float:
    """Clock-rate factor ``sqrt(1 - 2GM / (c^2 R))`` in ``(0, 1]``."""
    return math.sqrt(1.0 - _compactness(M, R, G, c))


def proper_time(M: float, R: float, t: float, G: float = G_SI, c: float = C_SI) -> float:
    """Time elapsed on a clock at ``R`` while a distant clock advances by ``t``."""
    return metric_factor(M, R, G, c) * t


def time_deficit(M: float, R: float, t: float, G: float = G_SI, c: float = C_SI) -> float:
    """``t - proper_time``, computed without cancellation for weak fields."""
    x = _compactness(M, R, G, c)
    return t * x / (1.0 + math.sqrt(1.0 - x))


class SignalOrder(str, enum.Enum):
    A_BEFORE_B = "A<B"
    B_BEFORE_A = "B<A"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class GravitationalScenario:
    M: float
    R_A: float
    R_B: float
    T_c: float
    tau_star: float
    G: float = G_SI
    c: float = C_SI

    def __post_init__(self):
        for name in ("M", "R_A", "R_B", "T_c", "tau_star", "G", "c"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not self.G > 0 or not self.c > 0:
            raise DomainError("G and c must be positive")
        _compactness(self.M, self.R_A, self.G, self.c)
        _compactness(self.M, self.R_B, self.G, self.c)
        if not self.T_c > 0:
            raise DomainError(f"T_c must be positive, got {self.T_c!r}")
        if self.tau_star < 0:
            raise DomainError(f"tau_star must be non-negative, got {self.tau_star!r}")

    @property
    def g_A(self) -> float:
        return metric_factor(self.M, self.R_A, self.G, self.c)

    @property
    def g_B(self) -> float:
        return metric_factor(self.M, self.R_B, self.G, self.c)

    def mirrored(self) -> GravitationalScenario:
        """Same scenario with the agents' radii exchanged."""
        return replace(self, R_A=self.R_B, R_B=self.R_A)


def _near_far(s: GravitationalScenario) -> tuple[str, float, float, float, float]:
    if s.R_A == s.R_B:
        raise DegenerateConfigurationError("R_A == R_B: both clocks tick alike and no order is singled out")
    if s.R_B < s.R_A:
        return "B", s.R_B, s.R_A, s.g_B, s.g_A
    return "A", s.R_A, s.R_B, s.g_A, s.g_B


def signal_threshold(s: GravitationalScenario, convention: str = "sqrt") -> float:
    """Smallest ``tau_star`` at which the nearer agent hears the other before sending.

    ``sqrt``: ``T_c sqrt(g_n) / (1 - sqrt(g_n / g_f))`` with ``g`` the clock-rate
    factor of the nearer (n) and farther (f) agent.
    ``linear``: ``T_c g_n / (1 - g_n / g_f)``, obtained by converting both
    sending times to coordinate time and adding the light travel time ``T_c``.
    Returns ``inf`` when the clocks tick at the same rate.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}, got {convention!r}")
    _, r_n, r_f, g_n, g_f = _near_far(s)
    # g_f - g_n = (x_n - x_f) / (g_f + g_n), free of cancellation
    k = 2 * s.G * s.M / s.c**2
    gap = (k / r_n - k / r_f) / (g_f + g_n)
    if gap <= 0:
        return math.inf
    if convention == "linear":
        return s.T_c * g_n * g_f / gap
    # 1 - sqrt(g_n / g_f) = (g_f - g_n) / (g_f (1 + sqrt(g_n / g_f)))
    denom = gap / (g_f * (1.0 + math.sqrt(g_n / g_f)))
    return s.T_c * math.sqrt(g_n) / denom


def signal_order(s: GravitationalScenario, convention: str = "sqrt") -> SignalOrder:
    """Order forced by the signals at ``tau_star``.

    When the threshold is met the farther agent's signal reaches the nearer
    agent first, so the farther agent's operation precedes.
    """
    nearer = _near_far(s)[0]
    if s.tau_star < signal_threshold(s, convention):
        return SignalOrder.INDETERMINATE
    return SignalOrder.A_BEFORE_B if nearer == "B" else SignalOrder.B_BEFORE_A


# mass basis: |0> = K_{A<B}, |1> = K_{B<A}
MASS_LABELS = (SignalOrder.A_BEFORE_B.value, SignalOrder.B_BEFORE_A.value)


@dataclass(frozen=True)
class GravitationalSwitchResult:
    joint: StateVector  # dims (mass, target)
    configurations: dict  # order label -> scenario realizing it
    branches: dict  # "+"/"-" mass outcomes
    order_branches: dict  # mass measured in the configuration basis

    def branch(self, label: str) -> StateVector:
        br = self.branches.get(label) or self.order_branches[label]
        if br.state is None:
            raise PostSelectionError(f"branch {label!r} has probability {br.probability:.3e}", br.probability)
        return br.state


def gravitational_switch(
    scenario: GravitationalScenario,
    op_a: Operator,
    op_b: Operator,
    target_init: StateVector = UP_Z,
    convention: str = "sqrt",
    renormalize: bool = False,
) -> GravitationalSwitchResult:
    """Superpose ``scenario`` and its mirror image through the mass state.

    Both configurations must force definite, opposite orders at ``tau_star``.
    """
    op_a, op_b = _qubit_op(op_a, "op_a"), _qubit_op(op_b, "op_b")
    _qubit_state(target_init, "target_init")
    configs = {}
    for conf in (scenario, scenario.mirrored()):
        order = signal_order(conf, convention)
        if order is SignalOrder.INDETERMINATE:
            thr = signal_threshold(conf, convention)
            raise ProtocolInfeasibleError(
                f"configuration R_A={conf.R_A!r}, R_B={conf.R_B!r} has no definite order at "
                f"tau_star={conf.tau_star!r} (threshold {thr!r})"
            )
        configs[order.value] = conf
    if len(configs) != 2:
        raise ContractError("the two configurations do not yield opposite orders")
    joint = run_controlled(switch_operator(op_a, op_b), PLUS, target_init, renormalize)
    order_basis = {MASS_LABELS[0]: [1.0, 0.0], MASS_LABELS[1]: [0.0, 1.0]}
    return GravitationalSwitchResult(
        joint,
        {k: configs[k] for k in MASS_LABELS},
        project_first_qubit(joint, PM_BASIS),
        project_first_qubit(joint, order_basis),
    )


__all__ = [
    "Branch",
    "C_SI",
    "CONVENTIONS",
    "GravitationalScenario",
    "GravitationalSwitchResult",
    "MASS_LABELS",
    "SignalOrder",
    "gravitational_switch",
    "metric_factor",
    "proper_time",
    "schwarzschild_radius",
    "signal_order",
    "signal_threshold",
    "time_deficit",
]
