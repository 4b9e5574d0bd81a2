"""Detector and local-oscillator imperfections for unbalanced click homodyning."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import trapezoid

from .clicks import ArmDescriptor, DetectorConfig, ExactMoments, click_statistics, form_moment
from .states import CoherentSuperposition, ExpFactor, FactorProduct, Mixture, evaluate_pairs, expectation, pair_table
from .witnesses import CriterionResult, is_psd, min_eigenvalue, moment_matrix, variance, variance_criterion

__all__ = [
    "ThermalLO",
    "thermal_lo_expectation",
    "thermal_lo_expectation_numeric",
    "ThermalMoments",
    "thermal_variance_criterion",
    "DarkCountReport",
    "dark_count_decomposition_check",
    "SpectralSetup",
    "MismatchParameters",
    "mode_mismatch_parameters",
    "mismatched_arm",
    "gaussian_profile",
    "SaturationPoint",
    "saturation_probe",
    "efficiency_sweep",
]


@dataclass(frozen=True)
class ThermalLO:
    """Displaced thermal local oscillator: mean ``gamma``, thermal occupation ``nbar``."""

    gamma: complex
    nbar: float = 0.0

    def __post_init__(self):
        if not (self.nbar >= 0 and math.isfinite(self.nbar)):
            raise ValueError("thermal occupation must be finite and >= 0")
        object.__setattr__(self, "gamma", complex(self.gamma))


def thermal_lo_expectation(state, lam: float, gamma: complex, nbar: float) -> float:
    """``<:exp(-lam n(gamma')):>`` averaged over a thermal spread of ``gamma'`` around ``gamma``.

    Closed form ``<:exp(-lam/(1 + nbar lam) n(gamma)):> / (1 + lam nbar)``.
    """
    if not 0 <= lam <= 1:
        raise ValueError(f"lam must lie in [0, 1], got {lam}")
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    shrink = 1.0 + lam * nbar
    return expectation(state, FactorProduct((ExpFactor(0, lam / shrink, gamma),))) / shrink


def thermal_lo_expectation_numeric(state, lam: float, gamma: complex, nbar: float, order: int = 64) -> float:
    """Same average by tensor Gauss-Hermite quadrature over the thermal P function."""
    if nbar == 0:
        return expectation(state, FactorProduct((ExpFactor(0, lam, gamma),)))
    x, w = np.polynomial.hermite.hermgauss(order)
    # P(g) = exp(-|g - gamma|^2 / nbar) / (pi nbar).  With g = gamma + sqrt(nbar / s) y the
    # Hermite weight exp(-|y|^2) matches the integrand's width for s = 1 + lam nbar.
    s = 1.0 + lam * nbar
    y = (x[:, None] + 1j * x[None, :]).ravel()
    nodes = complex(gamma) + math.sqrt(nbar / s) * y
    weights = (w[:, None] * w[None, :]).ravel() * np.exp((1 - 1 / s) * np.abs(y) ** 2) / (math.pi * s)
    table = pair_table(state)
    vals = np.exp(-lam * (table.bra[:, :1] - np.conj(nodes)[None, :]) * (table.ket[:, :1] - nodes[None, :]))
    return float(weights @ evaluate_pairs(table, vals))


class ThermalMoments:
    """Click moments of one unbalanced arm whose LO carries thermal amplitude noise."""

    def __init__(self, state, arm: ArmDescriptor, nbar: float):
        if arm.mode != 0:
            raise ValueError("thermal LO model covers the single-mode unbalanced arm")
        self.state, self.arm, self.nbar = state, arm, float(nbar)
        self._dark: dict[int, float] = {}

    @property
    def sizes(self) -> tuple:
        return (self.arm.N,)

    def no_click(self, j: int) -> float:
        """``<:(N - pi)^j:> / N^j``: ``j`` diodes dark, averaged over the LO noise."""
        if j not in self._dark:
            core = thermal_lo_expectation(self.state, j * self.arm.lam, self.arm.gamma, self.nbar) if j else 1.0
            self._dark[j] = math.exp(-j * self.arm.detector.nu) * core
        return self._dark[j]

    def __call__(self, powers: Sequence[int]) -> float:
        (m,) = powers
        N = self.arm.N
        return sum(math.comb(m, j) * (-1) ** j * N**m * self.no_click(j) for j in range(m + 1))


def thermal_variance_criterion(state, arm: ArmDescriptor, nbar: float, phi: float | None = None) -> CriterionResult:
    """Normally ordered click variance with a thermal LO, as ``N^2 (E_2 - E_1^2)``."""
    if phi is not None:
        arm = arm.at_phase(phi)
    tm = ThermalMoments(state, arm, nbar)
    value = arm.N**2 * (tm.no_click(2) - tm.no_click(1) ** 2)
    return CriterionResult(value, "thermal_variance", {"nbar": float(nbar), "phi": arm.phase, "N": arm.N})


@dataclass(frozen=True)
class DarkCountReport:
    passed: bool
    max_deviation: float
    variance_ratio: float
    expected_ratio: float
    variance_sign_preserved: bool


def _no_click_matrix(state, arm, K):
    prov = ExactMoments(state, [arm])
    return moment_matrix(prov, K, x=arm.N, y=-1.0).entries, variance(prov, [1.0])


def dark_count_decomposition_check(state, arm: ArmDescriptor, nu: float, K: int = 4, tol: float = 1e-10) -> DarkCountReport:
    """Verify ``M|_nu = T_nu M|_0 T_nu`` for the ``(N - pi)`` moment matrix and the ``e^{-2 nu}`` variance scaling."""
    base = arm.with_detector(replace(arm.detector, nu=0.0))
    dark = arm.with_detector(replace(arm.detector, nu=nu))
    M0, v0 = _no_click_matrix(state, base, K)
    Mn, vn = _no_click_matrix(state, dark, K)
    T = np.diag(np.exp(-nu * np.arange(K // 2 + 1)))
    dev = float(np.max(np.abs(Mn - T @ M0 @ T) / np.maximum(1.0, np.abs(Mn))))
    expected = math.exp(-2 * nu)
    ratio = vn / v0 if v0 != 0 else float("nan")
    var_ok = abs(vn - expected * v0) <= tol * max(1.0, abs(v0))
    sign_ok = np.sign(round(vn, 14)) == np.sign(round(v0, 14))
    return DarkCountReport(dev <= tol and var_ok, dev, ratio, expected, bool(sign_ok))


@dataclass(frozen=True)
class SpectralSetup:
    """Spectral description of a mode-mismatched four-port detector arm."""

    omega: np.ndarray
    response: np.ndarray
    f_si: np.ndarray
    f_lo: np.ndarray
    t: np.ndarray
    r: np.ndarray
    beta: complex

    def __post_init__(self):
        om = np.asarray(self.omega, dtype=float)
        arrays = {}
        for name in ("response", "f_si", "f_lo", "t", "r"):
            val = np.asarray(getattr(self, name), dtype=complex if name != "response" else float)
            if val.ndim == 0:
                val = np.full(om.shape, val)
            if val.shape != om.shape:
                raise ValueError(f"{name} must be sampled on the frequency grid")
            arrays[name] = val
        if om.ndim != 1 or om.size < 3:
            raise ValueError("frequency grid must be 1-D with at least 3 points")
        steps = np.diff(om)
        if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * max(1.0, abs(steps[0])):
            raise ValueError("frequency grid must be uniform and increasing")
        if np.any(arrays["response"] < 0):
            raise ValueError("spectral response G must be nonnegative")
        for name in ("f_si", "f_lo"):
            nrm = trapezoid(np.abs(arrays[name]) ** 2, om)
            if abs(nrm - 1) > 1e-8:
                raise ValueError(f"{name} not normalized: integral |f|^2 = {nrm:.10f}")
        if np.max(np.abs(np.abs(arrays["t"]) ** 2 + np.abs(arrays["r"]) ** 2 - 1)) > 1e-12:
            raise ValueError("beam splitter violates |t|^2 + |r|^2 = 1 on the grid")
        object.__setattr__(self, "omega", om)
        for name, val in arrays.items():
            object.__setattr__(self, name, val)
        object.__setattr__(self, "beta", complex(self.beta))

    def inner(self, a: np.ndarray, b: np.ndarray) -> complex:
        """Response-weighted overlap ``(a, b) = int G a^* b dw`` (trapezoidal rule)."""
        return complex(trapezoid(self.response * np.conj(a) * b, self.omega))

    def with_beta(self, beta: complex) -> "SpectralSetup":
        return replace(self, beta=complex(beta))


def gaussian_profile(omega: np.ndarray, center: float, width: float, phase: float = 0.0) -> np.ndarray:
    """Gaussian spectral amplitude normalized by the trapezoidal rule on ``omega``."""
    f = np.exp(-((omega - center) ** 2) / (4 * width**2) + 1j * phase * (omega - center))
    return f / math.sqrt(trapezoid(np.abs(f) ** 2, omega))


@dataclass(frozen=True)
class MismatchParameters:
    eta_t: float
    gamma: complex
    nu_tilde: float


def mode_mismatch_parameters(setup: SpectralSetup) -> MismatchParameters:
    """Effective efficiency, displacement and mismatch noise rate of a spectrally resolved arm."""
    s = setup.t * setup.f_si
    l = setup.r * setup.f_lo
    ss = setup.inner(s, s).real
    if not ss > 0:
        raise ValueError("signal has no overlap with the detector response")
    sl = setup.inner(s, l)
    ll = setup.inner(l, l).real
    gamma = -(sl / ss) * setup.beta
    nu_tilde = (ss * ll - abs(sl) ** 2) / ss * abs(setup.beta) ** 2
    # Cauchy-Schwarz makes nu_tilde >= 0; clear rounding-level negatives only
    if -1e-14 * ss * ll * abs(setup.beta) ** 2 <= nu_tilde < 0:
        nu_tilde = 0.0
    return MismatchParameters(float(ss), complex(gamma), float(nu_tilde))


def mismatched_arm(setup: SpectralSetup, detector: DetectorConfig) -> ArmDescriptor:
    """Arm equivalent to the mismatched detector.

    The mismatch rate adds to the array's dark counts; being defined for the
    whole array it contributes ``nu_tilde / N`` per diode.
    """
    p = mode_mismatch_parameters(setup)
    if p.eta_t > 1 + 1e-12:
        raise ValueError(f"effective efficiency {p.eta_t:.4f} exceeds 1")
    det = DetectorConfig(detector.N, min(p.eta_t, 1.0), detector.nu + p.nu_tilde / detector.N)
    return ArmDescriptor(0, 1.0, p.gamma, det)


@dataclass(frozen=True)
class SaturationPoint:
    scale: float
    total_variation: float
    top_probability: float
    min_eigenvalue: float
    variance: float


def saturation_probe(state, arm: ArmDescriptor, scales: Sequence[float], K: int = 2) -> list:
    """Scale signal and LO intensities by ``s`` and track the approach to ``c_k = delta_{k,N}``.

    Each point reports the total-variation distance to the saturated
    distribution, the smallest eigenvalue of ``M^(K)`` and the click variance.
    """
    out = []
    for s in scales:
        if s < 0:
            raise ValueError("intensity scale must be >= 0")
        amp = math.sqrt(s)
        st = _scale_state(state, amp)
        a = arm.with_gamma(arm.gamma * amp)
        c = click_statistics(st, a).probabilities
        target = np.zeros_like(c)
        target[-1] = 1.0
        prov = ExactMoments(st, [a])
        M = moment_matrix(prov, K)
        out.append(SaturationPoint(float(s), 0.5 * float(np.abs(c - target).sum()), float(c[-1]),
                                   M.min_eigenvalue(), variance(prov, [1.0])))
    return out


def _scale_state(state, amp: float):
    if isinstance(state, CoherentSuperposition):
        return state.scaled(amp)
    if isinstance(state, Mixture):
        return Mixture(state.weights, tuple(c.scaled(amp) for c in state.components))
    raise TypeError("saturation probe needs a coherent superposition or mixture")


def efficiency_sweep(state, arm: ArmDescriptor, etas: Sequence[float], phis: Sequence[float],
                     criterion: Callable = variance_criterion) -> np.ndarray:
    """Criterion value on the ``(eta, phi)`` grid, rows indexed by efficiency."""
    out = np.empty((len(etas), len(phis)))
    for i, eta in enumerate(etas):
        a = arm.with_detector(replace(arm.detector, eta=float(eta)))
        for j, phi in enumerate(phis):
            out[i, j] = criterion(state, a, phi).value
    return out
