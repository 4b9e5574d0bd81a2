"""Nonclassicality witnesses built from normally ordered click moments.

Classical light (a nonnegative P function) keeps every matrix of normally
ordered moments positive semidefinite, so a negative minor certifies quantum
light.  All criteria here are evaluated on a *moment provider*: an object
mapping a tuple of per-arm powers to ``<: prod pi_a^{m_a} :>``.  Exact
providers come from states (:class:`~clickhomodyne.clicks.ExactMoments`),
empirical ones from click statistics or histograms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import ldl

from .clicks import ArmDescriptor, ExactMoments, form_moment
from .homodyne import SchemeArms

__all__ = [
    "VERDICT_TOL",
    "MomentMatrix",
    "CriterionResult",
    "congruence_transform",
    "moment_matrix",
    "determinant",
    "principal_minors",
    "min_eigenvalue",
    "is_psd",
    "variance",
    "covariance_minor",
    "variance_criterion",
    "fourth_order_criterion",
    "cross_correlation_criterion",
    "nonlinear_squeezing",
    "sum_variance",
    "xp_covariance_criterion",
    "two_mode_criteria",
    "scheme_forms",
]

VERDICT_TOL = 1e-12


@dataclass(frozen=True)
class CriterionResult:
    value: float
    criterion: str
    params: dict = field(default_factory=dict)
    tol: float = VERDICT_TOL

    @property
    def verdict(self) -> str:
        return "nonclassical" if self.value < -self.tol else "inconclusive"

    @property
    def nonclassical(self) -> bool:
        return self.verdict == "nonclassical"


@dataclass(frozen=True)
class MomentMatrix:
    """``(<:(x + y L)^{m+m'}:>)`` for ``m, m' = 0..K/2``, ``L`` a linear click observable."""

    order: int
    x: float
    y: float
    entries: np.ndarray
    provenance: str = ""

    @property
    def size(self) -> int:
        return self.order // 2 + 1

    def determinant(self) -> float:
        return determinant(self.entries)

    def min_eigenvalue(self) -> float:
        return min_eigenvalue(self.entries)


def congruence_transform(x: float, y: float, size: int) -> np.ndarray:
    """Lower-triangular ``T`` with ``t[m, k] = C(m, k) x^(m-k) y^k`` so that ``M(x, y) = T M(0, 1) T^T``."""
    if y == 0:
        raise ValueError("y must be nonzero")
    T = np.zeros((size, size))
    for m in range(size):
        for k in range(m + 1):
            T[m, k] = math.comb(m, k) * x ** (m - k) * y**k
    return T


def _check_order(K: int):
    if K < 0 or K % 2:
        raise ValueError(f"moment order K must be an even nonnegative integer, got {K}")


def moment_matrix(provider, K: int, x: float = 0.0, y: float = 1.0, weights: Sequence[float] | None = None,
                  provenance: str = "") -> MomentMatrix:
    """Matrix of moments of ``L = sum_a w_a pi_a`` (default: the single arm's ``pi``).

    Requires ``K <= N`` for the click counts involved; higher orders are not
    accessible from ``N`` diodes.
    """
    _check_order(K)
    if y == 0:
        raise ValueError("y must be nonzero")
    sizes = provider.sizes
    if weights is None:
        if len(sizes) != 1:
            raise ValueError("multi-arm provider needs explicit observable weights")
        weights = [1.0]
    reach = sum(n for n, w in zip(sizes, weights) if w)
    if K > reach:
        raise ValueError(f"order K = {K} exceeds the {reach} diodes contributing to the observable")
    form = (float(x), [float(y) * w for w in weights])
    n = K // 2 + 1
    mom = [form_moment(provider, [form], [k]) for k in range(2 * n - 1)]
    entries = np.array([[mom[i + j] for j in range(n)] for i in range(n)])
    return MomentMatrix(K, float(x), float(y), entries, provenance)


def determinant(M: np.ndarray) -> float:
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if n == 1:
        return float(M[0, 0])
    if n == 2:
        return float(M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0])
    if n == 3:
        return float(
            M[0, 0] * (M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1])
            - M[0, 1] * (M[1, 0] * M[2, 2] - M[1, 2] * M[2, 0])
            + M[0, 2] * (M[1, 0] * M[2, 1] - M[1, 1] * M[2, 0])
        )
    _, d, _ = ldl(M)
    det = 1.0
    i = 0
    while i < n:
        if i + 1 < n and d[i + 1, i] != 0:
            det *= d[i, i] * d[i + 1, i + 1] - d[i, i + 1] * d[i + 1, i]
            i += 2
        else:
            det *= d[i, i]
            i += 1
    return float(det)


def principal_minors(M: np.ndarray) -> list:
    """Leading principal minors of a moment matrix."""
    M = np.asarray(M, dtype=float)
    return [determinant(M[: k + 1, : k + 1]) for k in range(M.shape[0])]


def min_eigenvalue(M: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(np.asarray(M, dtype=float)).min())


def is_psd(M: np.ndarray, tol: float = 1e-9) -> bool:
    return min_eigenvalue(M) >= -tol


def variance(provider, weights: Sequence[float]) -> float:
    """Normally ordered variance ``<:(Delta L)^2:>`` of ``L = sum_a w_a pi_a``."""
    form = (0.0, list(weights))
    return form_moment(provider, [form], [2]) - form_moment(provider, [form], [1]) ** 2


def covariance_minor(provider, w1: Sequence[float], w2: Sequence[float]) -> float:
    """``<:(Delta L1)^2:><:(Delta L2)^2:> - <:Delta L1 Delta L2:>^2``."""
    f1, f2 = (0.0, list(w1)), (0.0, list(w2))
    cov = form_moment(provider, [f1, f2], [1, 1]) - form_moment(provider, [f1], [1]) * form_moment(provider, [f2], [1])
    return variance(provider, w1) * variance(provider, w2) - cov**2


def _single_arm(arm, phi):
    if isinstance(arm, SchemeArms):
        arm = arm if phi is None else arm.at_phase(phi)
        if len(arm) != 1:
            raise ValueError("expected a single-arm (unbalanced) scheme")
        return arm.arms[0]
    return arm if phi is None else arm.at_phase(phi)


def _params(phi=None, **kw):
    out = {k: v for k, v in kw.items() if v is not None}
    if phi is not None:
        out["phi"] = float(phi)
    return out


def variance_criterion(state, arm, phi: float | None = None, provider=None) -> CriterionResult:
    """``<:[Delta pi(phi)]^2:>`` of one (unbalanced) arm; negative means nonclassical."""
    arm = _single_arm(arm, phi)
    provider = provider or ExactMoments(state, [arm])
    return CriterionResult(variance(provider, [1.0]), "variance", _params(phi, N=arm.N))


def fourth_order_criterion(state, arm, phi: float | None = None, provider=None) -> CriterionResult:
    """``det M^(4)`` of the single-arm click moments (needs ``N >= 4``)."""
    arm = _single_arm(arm, phi)
    if arm.N < 4:
        raise ValueError("fourth-order criterion needs N >= 4 diodes")
    provider = provider or ExactMoments(state, [arm])
    M = moment_matrix(provider, 4)
    return CriterionResult(M.determinant(), "fourth_order", _params(phi, N=arm.N))


def cross_correlation_criterion(state, arms: Sequence[ArmDescriptor], provider=None) -> CriterionResult:
    """Second-order cross-correlation minor of two click detectors."""
    arms = tuple(arms)
    if len(arms) != 2:
        raise ValueError("cross-correlation needs exactly two arms")
    provider = provider or ExactMoments(state, arms)
    return CriterionResult(covariance_minor(provider, [1.0, 0.0], [0.0, 1.0]), "cross_correlation")


def scheme_forms(scheme: SchemeArms, which: str = "x", mode: int | None = None, sign: float = -1.0) -> list:
    """Weights of ``pi_plus + sign * pi_minus`` over all arms of ``scheme``."""
    plus, minus = scheme.pair(which, mode)
    return [1.0 if a is plus else sign if a is minus else 0.0 for a in scheme.arms]


def _scheme_at(scheme: SchemeArms, phi):
    if not isinstance(scheme, SchemeArms):
        raise TypeError("expected SchemeArms with tagged arms")
    return scheme if phi is None else scheme.at_phase(phi)


def nonlinear_squeezing(state, scheme: SchemeArms, phi: float | None = None, which: str = "x",
                        provider=None) -> CriterionResult:
    """``<:[Delta X(phi)]^2:>`` of the click difference ``X = pi_plus - pi_minus``."""
    scheme = _scheme_at(scheme, phi)
    provider = provider or ExactMoments(state, scheme.arms)
    name = "nonlinear_squeezing" if which == "x" else "nonlinear_squeezing_p"
    return CriterionResult(variance(provider, scheme_forms(scheme, which)), name, _params(phi))


def sum_variance(state, scheme: SchemeArms, phi: float | None = None, which: str = "x",
                 provider=None) -> CriterionResult:
    """``<:[Delta(pi_plus + pi_minus)]^2:>``; negative values are sub-shot-noise click sums."""
    scheme = _scheme_at(scheme, phi)
    provider = provider or ExactMoments(state, scheme.arms)
    return CriterionResult(variance(provider, scheme_forms(scheme, which, sign=1.0)), "sum_variance", _params(phi))


def xp_covariance_criterion(state, scheme: SchemeArms, phi: float | None = None, provider=None) -> CriterionResult:
    """Normally ordered Schroedinger-Robertson minor of the eight-port click quadratures X and P."""
    scheme = _scheme_at(scheme, phi)
    provider = provider or ExactMoments(state, scheme.arms)
    value = covariance_minor(provider, scheme_forms(scheme, "x"), scheme_forms(scheme, "p"))
    return CriterionResult(value, "xp_covariance", _params(phi))


def two_mode_criteria(state, scheme: SchemeArms, phi1: float | None = None, phi2: float | None = None,
                      provider=None) -> tuple:
    """Variances of ``X_1(phi1)``, ``X_2(phi2)`` and their covariance minor."""
    if phi1 is not None:
        scheme = scheme.at_phase(phi1, mode=0)
    if phi2 is not None:
        scheme = scheme.at_phase(phi2, mode=1)
    provider = provider or ExactMoments(state, scheme.arms)
    w1 = scheme_forms(scheme, "x", mode=0)
    w2 = scheme_forms(scheme, "x", mode=1)
    params = {"phi1": scheme.phases[0], "phi2": scheme.phases[1]}
    return (
        CriterionResult(variance(provider, w1), "two_mode_variance_1", params),
        CriterionResult(variance(provider, w2), "two_mode_variance_2", params),
        CriterionResult(covariance_minor(provider, w1, w2), "two_mode_covariance", params),
    )
