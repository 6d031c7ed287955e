"""Indefinite causal order: the causal-inequality game, the quantum switch,
gravitational ordering and the temporal Bell test."""

from .game import (
    A_BEFORE_B,
    B_BEFORE_A,
    CausalGameMax,
    CausalGameStrategy,
    GameSimulation,
    causal_game_classical_max,
    causal_game_simulate,
    optimal_strategy,
    random_guess_strategy,
    random_strategy,
    standard_error,
    success_components,
    success_probability,
)
from .gravity import (
    GravitationalScenario,
    GravitationalSwitchResult,
    SignalOrder,
    gravitational_switch,
    metric_factor,
    proper_time,
    signal_order,
    signal_threshold,
    time_deficit,
)
from .switch import (
    Branch,
    ClockBrokenOps,
    SwitchResult,
    SwitchSpec,
    clock_broken_operator,
    quantum_switch,
    quantum_switch_clock_broken,
    switch_operator,
)
from .temporal_bell import (
    TemporalBellBranch,
    TemporalBellResult,
    classical_order_chsh,
    classical_order_state,
    temporal_bell_joint,
    temporal_bell_protocol,
)
