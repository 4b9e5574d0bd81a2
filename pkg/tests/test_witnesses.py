import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from clickhomodyne.clicks import ClickDistribution, DetectorConfig, EmpiricalMoments, ExactMoments, joint_click_statistics
from clickhomodyne.homodyne import LocalOscillator, balanced_arms, eight_port_arms, two_mode_arms
from clickhomodyne.states import coherent, make_cat, make_two_mode_cat
from clickhomodyne.witnesses import (
    CriterionResult,
    congruence_transform,
    cross_correlation_criterion,
    determinant,
    fourth_order_criterion,
    is_psd,
    moment_matrix,
    nonlinear_squeezing,
    principal_minors,
    sum_variance,
    two_mode_criteria,
    variance,
    variance_criterion,
    xp_covariance_criterion,
)

from conftest import FIG_DET, FIG_LO, amplitudes, coherent_mixtures

PHI64 = np.linspace(0, 2 * math.pi, 64, endpoint=False)


def test_congruence_examples():
    np.testing.assert_array_equal(congruence_transform(2.5, -1.5, 2), [[1, 0], [2.5, -1.5]])
    np.testing.assert_array_equal(congruence_transform(0, 1, 4), np.eye(4))
    with pytest.raises(ValueError):
        congruence_transform(1.0, 0.0, 3)


@given(st.floats(-5, 5), st.floats(0.1, 5), st.integers(0, 2**31))
def test_congruence_preserves_psd(x, y, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(3, 3))
    M = A @ A.T
    T = congruence_transform(x, y, 3)
    assert np.linalg.eigvalsh(T @ M @ T.T).min() > -1e-9 * max(1, np.abs(T @ M @ T.T).max())


def test_moment_matrix_variants(even_cat, fig4_arm):
    arm = fig4_arm.at_phase(math.pi / 2)
    prov = ExactMoments(even_cat, [arm])
    base = moment_matrix(prov, 4)
    for x, y in [(8.0, -1.0), (-prov([1]), 1.0), (0.3, 2.0)]:
        M = moment_matrix(prov, 4, x, y).entries
        T = congruence_transform(x, y, 3)
        assert np.max(np.abs(M - T @ base.entries @ T.T)) < 1e-9 * max(1, np.abs(M).max())


def test_moment_matrix_needs_enough_diodes(even_cat, fig4_arm):
    prov = ExactMoments(even_cat, [fig4_arm.with_detector(DetectorConfig(2, 0.5))])
    with pytest.raises(ValueError):
        moment_matrix(prov, 4)
    with pytest.raises(ValueError):
        moment_matrix(prov, 3)


def test_coherent_boundary(fig4_arm):
    prov = ExactMoments(coherent(0.7 + 0.2j), [fig4_arm])
    assert abs(moment_matrix(prov, 2).determinant()) < 1e-10
    assert abs(fourth_order_criterion(coherent(0.7), fig4_arm).value) < 1e-9
    for phi in PHI64[::8]:
        assert abs(variance_criterion(coherent(0.3 - 1j), fig4_arm, phi).value) < 1e-10


def test_saturated_distribution():
    p = np.zeros(9)
    p[-1] = 1.0
    M = moment_matrix(EmpiricalMoments(ClickDistribution((8,), p)), 4)
    np.testing.assert_allclose(M.entries, [[8.0 ** (i + j) for j in range(3)] for i in range(3)])
    assert is_psd(M.entries / M.entries.max())


def test_determinant_routes():
    rng = np.random.default_rng(3)
    for n in (1, 2, 3, 4, 5):
        A = rng.normal(size=(n, n))
        S = A + A.T
        assert determinant(S) == pytest.approx(np.linalg.det(S), rel=1e-10, abs=1e-12)
    assert principal_minors(np.diag([1.0, 2.0, 3.0])) == pytest.approx([1, 2, 6])


def test_fig4_signs(even_cat, odd_cat, fig4_arm):
    for phi in (math.pi / 2, 3 * math.pi / 2):
        res = variance_criterion(even_cat, fig4_arm, phi)
        assert res.value < -1e-6 and res.verdict == "nonclassical"
    assert all(variance_criterion(odd_cat, fig4_arm, phi).value >= -1e-9 for phi in PHI64)


def test_fig5_point(even_cat, fig4_arm):
    det4 = fourth_order_criterion(even_cat, fig4_arm, math.pi / 2).value
    assert det4 < 0
    with pytest.raises(ValueError):
        fourth_order_criterion(even_cat, fig4_arm.with_detector(DetectorConfig(3, 0.5)))


def test_cross_correlation():
    arms = balanced_arms(FIG_LO, FIG_DET).arms
    assert abs(cross_correlation_criterion(coherent(0.5j), arms).value) < 1e-10
    tm = two_mode_arms(FIG_LO, FIG_LO, FIG_DET).arms
    pair = (tm[0], tm[2])
    assert abs(cross_correlation_criterion(coherent(0.3, -0.8j), pair).value) < 1e-10


def test_balanced_criteria(even_cat, odd_cat):
    scheme = balanced_arms(FIG_LO, FIG_DET)
    assert nonlinear_squeezing(even_cat, scheme, math.pi / 2).value < 0
    assert min(sum_variance(odd_cat, scheme, phi).value for phi in PHI64) < 0
    for phi in PHI64[::8]:
        assert abs(nonlinear_squeezing(coherent(1.0), scheme, phi).value) < 1e-10
        assert abs(sum_variance(coherent(1.0), scheme, phi).value) < 1e-10


def test_eight_port_criteria(even_cat):
    scheme = eight_port_arms(FIG_LO, FIG_DET)
    assert all(xp_covariance_criterion(even_cat, scheme, phi).value < 0 for phi in PHI64)
    assert abs(xp_covariance_criterion(coherent(0.2 + 0.5j), scheme, 0.4).value) < 1e-10
    for phi in PHI64[::4]:
        x = nonlinear_squeezing(even_cat, scheme, phi + math.pi / 2, which="x").value
        p = nonlinear_squeezing(even_cat, scheme, phi, which="p").value
        assert abs(x - p) < 1e-10


def test_two_mode_criteria():
    scheme = two_mode_arms(FIG_LO, FIG_LO, FIG_DET)
    cat = make_two_mode_cat(1.0, "even")
    v1, v2, cov = two_mode_criteria(cat, scheme, math.pi / 2, math.pi / 2)
    assert v1.value < 0 and v2.value < 0
    assert two_mode_criteria(cat, scheme, 0.3, 1.1)[2].value < 0
    for r in two_mode_criteria(coherent(0.4, -0.2j), scheme, 0.7, 2.0):
        assert abs(r.value) < 1e-10


def test_empirical_equals_exact(even_cat):
    scheme = eight_port_arms(FIG_LO, FIG_DET).at_phase(0.7)
    exact = xp_covariance_criterion(even_cat, scheme).value
    emp = xp_covariance_criterion(None, scheme, provider=EmpiricalMoments(joint_click_statistics(even_cat, scheme.arms)))
    assert abs(exact - emp.value) < 1e-8


@given(coherent_mixtures(max_amp=2.5), st.floats(0, 2 * math.pi))
def test_classical_mixtures_never_flagged(state, phi):
    from conftest import FIG_BS
    from clickhomodyne.homodyne import unbalanced_arm

    arm = unbalanced_arm(FIG_BS, FIG_LO, FIG_DET)
    assert variance_criterion(state, arm, phi).value >= -1e-9
    assert fourth_order_criterion(state, arm, phi).value >= -1e-9
    prov = ExactMoments(state, [arm.at_phase(phi)])
    for x, y in [(0.0, 1.0), (8.0, -1.0), (-prov([1]), 1.0)]:
        M = moment_matrix(prov, 4, x, y).entries
        assert np.linalg.eigvalsh(M).min() >= -1e-9 * max(1.0, np.abs(M).max())
    scheme = balanced_arms(FIG_LO, FIG_DET)
    assert nonlinear_squeezing(state, scheme, phi).value >= -1e-9
    assert sum_variance(state, scheme, phi).value >= -1e-9


def test_verdict_tolerance():
    assert CriterionResult(-1e-13, "x").verdict == "inconclusive"
    assert CriterionResult(-1e-11, "x").nonclassical


def test_variance_of_linear_form(even_cat):
    scheme = balanced_arms(FIG_LO, FIG_DET)
    prov = ExactMoments(even_cat, scheme.arms)
    assert variance(prov, [1.0, -1.0]) == pytest.approx(nonlinear_squeezing(even_cat, scheme).value, abs=1e-12)
