import math
from dataclasses import replace

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qigrav.causal.gravity import (
    C_SI,
    GravitationalScenario,
    SignalOrder,
    gravitational_switch,
    metric_factor,
    proper_time,
    schwarzschild_radius,
    signal_order,
    signal_threshold,
    time_deficit,
)
from qigrav.causal.switch import SwitchSpec, quantum_switch
from qigrav.core import I2, PLUS, SIGMA_X, SIGMA_Z, UP_Z, Operator, schmidt_separability
from qigrav.errors import DegenerateConfigurationError, DomainError, ProtocolInfeasibleError
from qigrav.gie import G_SI

EARTH_M, EARTH_R = 5.972e24, 6.371e6
A_OP = Operator((I2.matrix + SIGMA_X.matrix) / math.sqrt(2))
mpmath.mp.dps = 50


def g_oracle(M, R):
    return mpmath.sqrt(1 - 2 * mpmath.mpf(G_SI) * M / (mpmath.mpf(C_SI) ** 2 * R))


def threshold_oracle(M, r_near, r_far, t_c, convention):
    gn, gf = g_oracle(M, r_near), g_oracle(M, r_far)
    if convention == "sqrt":
        return t_c * mpmath.sqrt(gn) / (1 - mpmath.sqrt(gn / gf))
    return t_c * gn / (1 - gn / gf)


def scenario(tau_factor=2.0, **kw):
    s = GravitationalScenario(M=2e30, R_A=1e9, R_B=1e7, T_c=1.0, tau_star=0.0, **kw)
    return replace(s, tau_star=tau_factor * signal_threshold(s))


def test_flat_space_factor_is_one():
    assert metric_factor(0.0, 1.0) == 1.0
    assert metric_factor(0.0, 1e-30) == 1.0


def test_earth_deficit_against_oracle():
    oracle = 1 - g_oracle(EARTH_M, EARTH_R)
    assert abs(time_deficit(EARTH_M, EARTH_R, 1.0) - float(oracle)) / float(oracle) < 1e-9
    assert abs(1 - metric_factor(EARTH_M, EARTH_R) - float(oracle)) / float(oracle) < 1e-2
    assert 0.69e-9 < time_deficit(EARTH_M, EARTH_R, 1.0) < 0.71e-9
    assert proper_time(EARTH_M, EARTH_R, 2.0) == pytest.approx(2 * float(g_oracle(EARTH_M, EARTH_R)), rel=1e-15)


def test_inside_horizon_rejected():
    rs = schwarzschild_radius(2e30)
    with pytest.raises(DomainError):
        metric_factor(2e30, rs)
    with pytest.raises(DomainError):
        metric_factor(2e30, rs / 2)
    with pytest.raises(DomainError):
        metric_factor(-1.0, 1.0)
    with pytest.raises(DomainError):
        GravitationalScenario(2e30, rs * 0.9, 1e9, 1.0, 1.0)
    with pytest.raises(DomainError):
        GravitationalScenario(2e30, 1e8, 1e9, 0.0, 1.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e20, 1e31), st.floats(1e4, 1e9), st.floats(1.01, 100))
def test_metric_factor_monotone(M, R, scale):
    if 2 * G_SI * M / C_SI**2 >= R:
        return
    g = metric_factor(M, R)
    assert 0 < g <= 1
    assert metric_factor(M, R * scale) >= g
    if 2 * G_SI * M * scale / C_SI**2 < R:
        assert metric_factor(M * scale, R) <= g


@pytest.mark.parametrize("convention", ["sqrt", "linear"])
def test_threshold_against_oracle(convention):
    s = GravitationalScenario(M=2e30, R_A=1e9, R_B=1e7, T_c=3.3, tau_star=0.0)
    expected = threshold_oracle(2e30, 1e7, 1e9, 3.3, convention)
    assert abs(signal_threshold(s, convention) / float(expected) - 1) < 1e-12


def test_threshold_stable_for_weak_fields():
    s = GravitationalScenario(M=1e10, R_A=1e9, R_B=1e7, T_c=1.0, tau_star=0.0)
    expected = threshold_oracle(1e10, 1e7, 1e9, 1.0, "sqrt")
    assert abs(signal_threshold(s) / float(expected) - 1) < 1e-9


def test_flat_space_always_indeterminate():
    s = GravitationalScenario(M=0.0, R_A=1e9, R_B=1e7, T_c=1.0, tau_star=1e30)
    assert signal_threshold(s) == math.inf
    assert signal_order(s) is SignalOrder.INDETERMINATE


def test_order_when_bob_is_nearer():
    s = scenario()
    assert signal_order(s) is SignalOrder.A_BEFORE_B
    assert signal_order(s.mirrored()) is SignalOrder.B_BEFORE_A
    assert signal_order(scenario(0.5)) is SignalOrder.INDETERMINATE


def test_equal_radii_rejected():
    with pytest.raises(DegenerateConfigurationError):
        signal_order(GravitationalScenario(2e30, 1e8, 1e8, 1.0, 1.0))


def test_mirror_swaps_verdict_randomized():
    rng = np.random.default_rng(42)
    definite = 0
    for _ in range(1000):
        M = 10 ** rng.uniform(20, 31)
        rs = 2 * G_SI * M / C_SI**2
        r1, r2 = sorted(rs * 10 ** rng.uniform(0.1, 6, size=2))
        if r1 == r2:
            continue
        s = GravitationalScenario(M, r1, r2, rng.uniform(0.1, 10), 0.0)
        if rng.random() < 0.5:
            s = s.mirrored()
        thr = signal_threshold(s)
        s = replace(s, tau_star=thr * rng.uniform(0.5, 3))
        o, m = signal_order(s), signal_order(s.mirrored())
        swap = {SignalOrder.A_BEFORE_B: SignalOrder.B_BEFORE_A, SignalOrder.B_BEFORE_A: SignalOrder.A_BEFORE_B}
        assert m is swap.get(o, o)
        definite += o is not SignalOrder.INDETERMINATE
    assert definite > 300


def test_gravitational_switch_identity_ops_separable():
    r = gravitational_switch(scenario(), I2, I2, UP_Z)
    assert np.allclose(r.joint.amplitudes, np.kron(PLUS.amplitudes, UP_Z.amplitudes))
    assert schmidt_separability(r.joint).separable


def test_gravitational_switch_paper_ops():
    r = gravitational_switch(scenario(), A_OP, SIGMA_Z, UP_Z)
    assert not schmidt_separability(r.joint).separable
    q = quantum_switch(SwitchSpec(A_OP, SIGMA_Z))
    assert np.allclose(r.joint.amplitudes, q.joint.amplitudes, rtol=0, atol=0)
    for label in "+-":
        assert abs(r.branches[label].probability - q.probability(label)) < 1e-15
        assert r.branch(label).allclose(q.branch(label))
    ba = SIGMA_Z.matrix @ A_OP.matrix @ UP_Z.amplitudes
    ab = A_OP.matrix @ SIGMA_Z.matrix @ UP_Z.amplitudes
    assert abs(r.order_branches["A<B"].probability - 0.5) < 1e-12
    assert np.allclose(r.branch("A<B").amplitudes, ba)
    assert np.allclose(r.branch("B<A").amplitudes, ab)
    assert signal_order(r.configurations["A<B"]) is SignalOrder.A_BEFORE_B


def test_gravitational_switch_infeasible():
    with pytest.raises(ProtocolInfeasibleError):
        gravitational_switch(scenario(0.5), I2, I2)
    flat = GravitationalScenario(0.0, 1e9, 1e7, 1.0, 1.0)
    with pytest.raises(ProtocolInfeasibleError):
        gravitational_switch(flat, I2, I2)


def test_convention_validation():
    with pytest.raises(ValueError):
        signal_threshold(scenario(), "other")
    s = scenario()
    assert signal_threshold(s, "linear") < signal_threshold(s, "sqrt")
