import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from clickhomodyne.clicks import DetectorConfig, pi_moment
from clickhomodyne.homodyne import (
    BALANCED,
    EIGHT_PORT_UNITARY,
    BeamSplitter,
    LocalOscillator,
    balanced_arms,
    difference_moment,
    eight_port_arms,
    four_port_arms,
    port_network_arms,
    sum_moment,
    two_mode_arms,
    unbalanced_arm,
)
from clickhomodyne.clicks import joint_click_statistics
from clickhomodyne.states import coherent, make_cat, make_two_mode_cat
from clickhomodyne.witnesses import nonlinear_squeezing, variance_criterion

from conftest import FIG_BS, FIG_DET, FIG_LO, superpositions

D = DetectorConfig(8, 0.5)


def test_balanced_arms():
    arms = balanced_arms(LocalOscillator(2.0 + 1j), D)
    assert [a.scale for a in arms] == pytest.approx([0.5, 0.5])
    assert arms.arms[0].gamma == pytest.approx(-(2.0 + 1j))
    assert arms.arms[1].gamma == pytest.approx(2.0 + 1j)
    assert arms.kind == "balanced4"


def test_unbalanced_four_port_displacements():
    arms = four_port_arms(FIG_BS, FIG_LO, D, D)
    assert arms.arms[0].gamma == pytest.approx(-3.0)
    assert arms.arms[1].gamma == pytest.approx(16 / 3)
    assert sum(a.scale for a in arms) == pytest.approx(1.0)
    zero = four_port_arms(FIG_BS, LocalOscillator(0.0), D, D)
    assert all(a.gamma == 0 for a in zero)


def test_unbalanced_arm():
    arm = unbalanced_arm(FIG_BS, FIG_LO, D)
    assert arm.scale * arm.detector.eta == pytest.approx(0.32)
    assert abs(arm.gamma) == pytest.approx(3.0)
    direct = unbalanced_arm(BeamSplitter(1.0, 0.0), FIG_LO, D)
    assert direct.gamma == 0 and direct.scale == 1.0


def test_eight_port_arms():
    arms = eight_port_arms(LocalOscillator(4.0), D)
    got = {a.tag: a.gamma for a in arms}
    assert got["plus"] == pytest.approx(-4.0) and got["minus"] == pytest.approx(4.0)
    assert sorted(round(g.imag) for g in got.values()) == [-4, 0, 0, 4]
    assert sorted(np.round([a.gamma for a in arms], 12), key=lambda z: (z.real, z.imag)) == sorted(
        [4, -4, -4j, 4j], key=lambda z: (z.real, z.imag))
    assert all(a.scale == pytest.approx(0.25) for a in arms)
    assert all(a.gamma == 0 for a in eight_port_arms(LocalOscillator(0.0), D))
    assert np.allclose(EIGHT_PORT_UNITARY.conj().T @ EIGHT_PORT_UNITARY, np.eye(4))


def test_two_mode_arms():
    arms = two_mode_arms(LocalOscillator(4.0), LocalOscillator(4.0), D)
    assert [(a.mode, a.gamma) for a in arms] == [(0, -4), (0, 4), (1, -4), (1, 4)]
    split = two_mode_arms(LocalOscillator(4.0), LocalOscillator(0.0), D)
    assert all(a.gamma == 0 for a in split if a.mode == 1)


def test_two_mode_marginal_matches_reduced_state():
    # tracing out mode 2 leaves a mixture of the even and odd single-mode cats
    from clickhomodyne.states import Mixture

    cat = make_two_mode_cat(1.0, "even")
    arms = two_mode_arms(LocalOscillator(4.0), LocalOscillator(4.0), D)
    joint = joint_click_statistics(cat, arms.arms).probabilities.sum(axis=(2, 3))
    x = math.exp(-2.0)
    reduced = Mixture([(1 + x) ** 2, (1 - x) ** 2], [make_cat(1.0, "even"), make_cat(1.0, "odd")])
    single = joint_click_statistics(reduced, balanced_arms(LocalOscillator(4.0), D).arms).probabilities
    assert np.max(np.abs(joint - single)) < 1e-10


def test_energy_bookkeeping():
    for scheme in (four_port_arms(FIG_BS, FIG_LO, D, D), eight_port_arms(FIG_LO, D)):
        assert scheme.signal_fraction() == pytest.approx(1.0)
    tm = two_mode_arms(FIG_LO, FIG_LO, D)
    assert tm.signal_fraction(0) == pytest.approx(1.0) and tm.signal_fraction(1) == pytest.approx(1.0)


def test_generic_network_validation():
    with pytest.raises(ValueError):
        port_network_arms(np.array([[1, 1], [0, 1]]), [D, D], {1: 1.0})
    with pytest.raises(ValueError):
        BeamSplitter(0.8, 0.8)
    # a six-port (3x3 DFT) network is accepted
    w = np.exp(2j * np.pi / 3)
    U = np.array([[1, 1, 1], [1, w, w**2], [1, w**2, w]]) / math.sqrt(3)
    arms = port_network_arms(U, [D] * 3, {1: 2.0})
    assert sum(a.scale for a in arms) == pytest.approx(1.0)


@given(st.floats(-math.pi, math.pi))
def test_phase_covariance(delta):
    # rotating the LO by delta is the same as moving phi by delta
    cat = make_cat(1.0 + 0.3j)
    base = unbalanced_arm(FIG_BS, FIG_LO, D)
    rotated = unbalanced_arm(FIG_BS, LocalOscillator(4.0 * cmath.exp(1j * delta)), D)
    a = variance_criterion(cat, rotated).value
    b = variance_criterion(cat, base, base.phase + delta).value
    assert abs(a - b) < 1e-9
    s0 = balanced_arms(FIG_LO, D)
    s1 = balanced_arms(LocalOscillator(4.0 * cmath.exp(1j * delta)), D)
    assert abs(nonlinear_squeezing(cat, s1).value - nonlinear_squeezing(cat, s0, s0.phases[0] + delta).value) < 1e-9


@given(superpositions())
def test_difference_sum_identity(state):
    arms = balanced_arms(LocalOscillator(1.5 - 0.5j), DetectorConfig(6, 0.8, 0.1))
    p, m = arms.arms
    lhs = difference_moment(state, arms, 2) + sum_moment(state, arms, 2)
    rhs = 2 * (pi_moment(state, [p], [2]) + pi_moment(state, [m], [2]))
    assert abs(lhs - rhs) < 1e-10 * max(1, abs(rhs))
    assert difference_moment(state, arms, 0) == pytest.approx(1.0)


def test_coherent_balanced_variance_zero():
    arms = balanced_arms(FIG_LO, D)
    st = coherent(0.4 + 0.9j)
    var = difference_moment(st, arms, 2) - difference_moment(st, arms, 1) ** 2
    assert abs(var) < 1e-10


def test_even_cat_nonlinear_squeezing(even_cat):
    assert nonlinear_squeezing(even_cat, balanced_arms(FIG_LO, D), math.pi / 2).value < 0


@given(superpositions(), st.floats(0, 2 * math.pi))
def test_eight_port_conjugate_pair(state, phi):
    scheme = eight_port_arms(FIG_LO, D)
    x_shift = difference_moment(state, scheme.at_phase(phi + math.pi / 2), 1, "x")
    p_here = difference_moment(state, scheme.at_phase(phi), 1, "p")
    assert abs(x_shift - p_here) < 1e-10
    x2 = difference_moment(state, scheme.at_phase(phi + math.pi / 2), 2, "x")
    p2 = difference_moment(state, scheme.at_phase(phi), 2, "p")
    assert abs(x2 - p2) < 1e-10 * max(1, abs(p2))


def test_pair_tags_checked(even_cat):
    arms = balanced_arms(FIG_LO, D).arms
    with pytest.raises(ValueError):
        difference_moment(even_cat, arms[::-1], 2)
