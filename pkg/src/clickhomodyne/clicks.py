"""Click-counting statistics and normally ordered click moments.

An arm is one click detector (``N`` diodes, efficiency ``eta``, dark rate
``nu``) behind a port network that leaves it seeing ``scale * n(gamma)`` of a
signal mode.  Each diode then has the normally ordered no-click operator
``:exp(-lam n(gamma) - nu):`` with ``lam = scale * eta / N``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .states import (
    CoherentSuperposition,
    EvaluationError,
    ExpFactor,
    FactorProduct,
    FockVector,
    Mixture,
    TruncationWarning,
    evaluate_pairs,
    expectation,
    pair_table,
)

__all__ = [
    "DetectorConfig",
    "ArmDescriptor",
    "ClickDistribution",
    "click_statistics",
    "joint_click_statistics",
    "photoelectric_statistics",
    "pi_moment",
    "arm_pi_values",
    "moments_from_statistics",
    "binomial_distribution",
    "ExactMoments",
    "EmpiricalMoments",
    "form_moment",
]

NEG_TOL = 1e-9
LARGE_N_WARN = 256


@dataclass(frozen=True)
class DetectorConfig:
    """Array of ``N`` on-off diodes with efficiency ``eta`` and dark-count rate ``nu``."""

    N: int
    eta: float = 1.0
    nu: float = 0.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"detector needs N >= 1 diodes, got {self.N}")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"efficiency must lie in [0, 1], got {self.eta}")
        if not (self.nu >= 0.0 and math.isfinite(self.nu)):
            raise ValueError(f"dark-count rate must be finite and >= 0, got {self.nu}")
        object.__setattr__(self, "N", int(self.N))
        if self.N > LARGE_N_WARN:
            warnings.warn(f"N = {self.N} diodes is above the supported {LARGE_N_WARN}", stacklevel=3)


@dataclass(frozen=True)
class ArmDescriptor:
    """What one detector sees: ``scale * n(gamma)`` of signal mode ``mode``."""

    mode: int
    scale: float
    gamma: complex
    detector: DetectorConfig
    tag: str | None = None

    def __post_init__(self):
        if not 0.0 <= self.scale <= 1.0 + 1e-12:
            raise ValueError(f"intensity scale must lie in [0, 1], got {self.scale}")
        if self.mode < 0:
            raise ValueError("mode index must be nonnegative")
        g = complex(self.gamma)
        if not (math.isfinite(g.real) and math.isfinite(g.imag)):
            raise ValueError("displacement must be finite")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "scale", min(float(self.scale), 1.0))

    @property
    def N(self) -> int:
        return self.detector.N

    @property
    def lam(self) -> float:
        """Exponent of one diode's no-click factor per unit of ``n(gamma)``."""
        return self.scale * self.detector.eta / self.detector.N

    @property
    def phase(self) -> float:
        return math.atan2(self.gamma.imag, self.gamma.real)

    def no_click_factor(self, power: int = 1) -> ExpFactor:
        return ExpFactor(self.mode, power * self.lam, self.gamma)

    def with_detector(self, detector: DetectorConfig) -> "ArmDescriptor":
        return replace(self, detector=detector)

    def with_gamma(self, gamma: complex) -> "ArmDescriptor":
        return replace(self, gamma=complex(gamma))

    def at_phase(self, phi: float) -> "ArmDescriptor":
        """Same ``|gamma|`` with ``arg gamma = phi``."""
        return self.with_gamma(abs(self.gamma) * complex(math.cos(phi), math.sin(phi)))


@dataclass(frozen=True)
class ClickDistribution:
    """Joint click statistics ``c[k_1, k_2, ...]`` of detectors with ``sizes`` diodes."""

    sizes: tuple
    probabilities: np.ndarray

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sizes)
        p = np.array(self.probabilities, dtype=float)
        if p.shape != tuple(n + 1 for n in sizes):
            raise ValueError(f"probability tensor shape {p.shape} does not match sizes {sizes}")
        if np.any(p < -1e-10) or np.any(p > 1 + 1e-10):
            raise ValueError("click probabilities must lie in [0, 1]")
        if abs(p.sum() - 1) > 1e-9:
            raise ValueError(f"click probabilities sum to {p.sum():.12f}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "probabilities", p)

    @property
    def ndim(self) -> int:
        return len(self.sizes)

    def marginal(self, axis: int) -> "ClickDistribution":
        others = tuple(a for a in range(self.ndim) if a != axis)
        return ClickDistribution((self.sizes[axis],), self.probabilities.sum(axis=others))

    def mean(self, axis: int = 0) -> float:
        m = self.marginal(axis).probabilities
        return float(np.arange(m.size) @ m)

    def rows(self):
        """``(k_1, ..., k_A, prob)`` tuples in C order of the tensor."""
        for idx in itertools.product(*(range(n + 1) for n in self.sizes)):
            yield (*idx, float(self.probabilities[idx]))


def binomial_distribution(N: int, p: float) -> np.ndarray:
    """Classical binomial pmf, used as closed-form reference for coherent light."""
    k = np.arange(N + 1)
    log_c = gammaln(N + 1) - gammaln(k + 1) - gammaln(N - k + 1)
    with np.errstate(divide="ignore"):
        out = np.exp(log_c + k * np.log(p) + (N - k) * np.log1p(-p)) if 0 < p < 1 else None
    if out is None:
        out = np.zeros(N + 1)
        out[N if p >= 1 else 0] = 1.0
    return out


@lru_cache(maxsize=None)
def _log_binom_row(N: int) -> np.ndarray:
    k = np.arange(N + 1)
    return gammaln(N + 1) - gammaln(k + 1) - gammaln(N - k + 1)


def _check_arms(arms: Sequence[ArmDescriptor], modes: int):
    if not arms:
        raise ValueError("at least one arm is required")
    per_mode: dict[int, float] = {}
    for arm in arms:
        if arm.mode >= modes:
            raise ValueError(f"arm refers to mode {arm.mode} of a {modes}-mode state")
        per_mode[arm.mode] = per_mode.get(arm.mode, 0.0) + arm.scale * arm.detector.eta
    for mode, total in per_mode.items():
        if total > 1 + 1e-12:
            raise ValueError(f"arms on mode {mode} collect {total:.3f} > 1 of its intensity")


def arm_pi_values(arm: ArmDescriptor, bra: np.ndarray, ket: np.ndarray):
    """Substituted per-diode exponent ``lam n(gamma) + nu`` for every term pair."""
    m = arm.mode
    return arm.lam * (bra[:, m] - np.conj(arm.gamma)) * (ket[:, m] - arm.gamma) + arm.detector.nu


def _finalize(probs: np.ndarray) -> np.ndarray:
    low = probs.min()
    if low < -NEG_TOL:
        raise EvaluationError(f"click probability {low:.3e} is negative beyond tolerance")
    probs = np.where(probs < 0, 0.0, probs)
    return probs / probs.sum()


def _substitution_tensor(state, arms):
    table = pair_table(state)
    tensor = np.ones((table.weights.size,), dtype=complex)
    for arm in arms:
        x = arm_pi_values(arm, table.bra, table.ket)
        q = np.exp(-x)[:, None]
        click = (-np.expm1(-x))[:, None]
        k = np.arange(arm.N + 1)[None, :]
        row = np.exp(_log_binom_row(arm.N))[None, :] * q ** (arm.N - k) * click**k
        tensor = tensor[..., None] * row.reshape((row.shape[0],) + (1,) * (tensor.ndim - 1) + (row.shape[1],))
    return evaluate_pairs(table, tensor)


def _difference_matrix(arm: ArmDescriptor) -> np.ndarray:
    """``B[k, n]`` mapping ``<:E^n:>`` (n diodes dark) to ``c_k`` by inclusion-exclusion."""
    N, nu = arm.N, arm.detector.nu
    B = np.zeros((N + 1, N + 1))
    for k in range(N + 1):
        for j in range(k + 1):
            n = N - k + j
            B[k, n] = math.comb(N, k) * math.comb(k, j) * (-1) ** j * math.exp(-n * nu)
    return B


def _exp_table(state, arms) -> np.ndarray:
    """``G[n_1, ..., n_A] = <: prod_a E_a^{n_a} :>`` with ``E_a`` the no-click factor at nu = 0."""
    G = np.empty(tuple(a.N + 1 for a in arms))
    for idx in np.ndindex(*G.shape):
        prod = FactorProduct(tuple(a.no_click_factor(n) for a, n in zip(arms, idx) if n))
        G[idx] = expectation(state, prod)
    return G


def _inclusion_exclusion_tensor(state, arms):
    tensor = _exp_table(state, arms)
    for axis, arm in enumerate(arms):
        tensor = np.moveaxis(np.tensordot(_difference_matrix(arm), tensor, axes=([1], [axis])), 0, axis)
    return tensor


def joint_click_statistics(state, arms: Sequence[ArmDescriptor], method: str = "substitution") -> ClickDistribution:
    """Joint click-counting statistics ``c[k_1, ..., k_A]`` of several arms.

    ``method="substitution"`` evaluates the normally ordered binomial pair by
    pair and is stable for large ``N``.  ``"inclusion_exclusion"`` expands
    ``(1 - e^{-x})^k`` into no-click expectations; it is the only route for
    :class:`FockVector` states and loses accuracy like ``2^N`` in ``N``.
    """
    arms = list(arms)
    _check_arms(arms, state.modes)
    if isinstance(state, FockVector) or method == "inclusion_exclusion":
        tensor = _inclusion_exclusion_tensor(state, arms)
    elif method == "substitution":
        tensor = _substitution_tensor(state, arms)
    else:
        raise ValueError(f"unknown method {method!r}")
    return ClickDistribution(tuple(a.N for a in arms), _finalize(np.asarray(tensor, dtype=float)))


def click_statistics(state, arm: ArmDescriptor, method: str = "substitution") -> ClickDistribution:
    """Click-counting statistics ``c_k`` of a single arm."""
    return joint_click_statistics(state, [arm], method=method)


def _poisson_rows(mu: np.ndarray, n_max: int) -> np.ndarray:
    out = np.empty((mu.size, n_max + 1), dtype=complex)
    out[:, 0] = np.exp(-mu)
    for n in range(1, n_max + 1):
        out[:, n] = out[:, n - 1] * mu / n
    return out


def photoelectric_statistics(state, eta: float, nu: float, n_max: int, mode: int = 0) -> np.ndarray:
    """Photoelectric counting statistics ``p_n = <:(eta n + nu)^n e^{-(eta n + nu)}/n!:>``.

    Coherent superpositions are evaluated in closed form; Fock vectors through
    the binomial loss channel convolved with Poissonian dark counts.
    """
    if not 0 <= eta <= 1 or nu < 0:
        raise ValueError("need eta in [0, 1] and nu >= 0")
    if isinstance(state, FockVector):
        photons = state.photon_distribution(mode)
        m = np.arange(photons.size)
        n = np.arange(n_max + 1)
        lost = np.maximum(m[None, :] - n[:, None], 0).astype(float)
        log_b = gammaln(m[None, :] + 1) - gammaln(n[:, None] + 1) - gammaln(lost + 1)
        kept = np.power(float(eta), n[:, None].astype(float)) * np.power(1.0 - eta, lost)
        loss = np.where(n[:, None] <= m[None, :], np.exp(log_b) * kept, 0.0)
        counts = loss @ photons
        dark = _poisson_rows(np.array([nu]), n_max)[0].real
        p = np.convolve(counts, dark)[: n_max + 1]
    else:
        table = pair_table(state)
        mu = eta * table.bra[:, mode] * table.ket[:, mode] + nu
        p = evaluate_pairs(table, _poisson_rows(mu, n_max))
    tail = 1 - p.sum()
    if tail > 1e-10:
        warnings.warn(f"photoelectric tail mass {tail:.2e} beyond n_max = {n_max}", TruncationWarning, stacklevel=2)
    return p


def pi_moment(state, arms: Sequence[ArmDescriptor], powers: Sequence[int], method: str = "substitution") -> float:
    """Joint normally ordered moment ``<: prod_a pi_a^{m_a} :>``.

    ``pi_a = N_a (1 - e^{-nu_a} :e^{-lam_a n(gamma_a)}:)`` is the click-number
    operator of arm ``a``.  ``method="expansion"`` expands the powers
    binomially into no-click expectations (the route used for Fock vectors).
    """
    arms = list(arms)
    powers = [int(m) for m in powers]
    if len(powers) != len(arms):
        raise ValueError("need one power per arm")
    if any(m < 0 for m in powers):
        raise ValueError("moment powers must be nonnegative")
    _check_arms(arms, state.modes)
    if not any(powers):
        return 1.0
    if isinstance(state, FockVector) or method == "expansion":
        return _pi_moment_expansion(state, arms, powers)
    if method != "substitution":
        raise ValueError(f"unknown method {method!r}")
    table = pair_table(state)
    vals = np.ones(table.weights.size, dtype=complex)
    for arm, m in zip(arms, powers):
        if m:
            vals = vals * (arm.N * -np.expm1(-arm_pi_values(arm, table.bra, table.ket))) ** m
    return evaluate_pairs(table, vals)


def _pi_moment_expansion(state, arms, powers) -> float:
    total = 0.0
    for js in itertools.product(*(range(m + 1) for m in powers)):
        coeff = 1.0
        factors = []
        for arm, m, j in zip(arms, powers, js):
            coeff *= math.comb(m, j) * (-1) ** j * math.exp(-j * arm.detector.nu) * arm.N**m
            if j:
                factors.append(arm.no_click_factor(j))
        total += coeff * expectation(state, FactorProduct(tuple(factors)))
    return total


def moments_from_statistics(dist: ClickDistribution, powers: Sequence[int]) -> float:
    """Joint normally ordered click moment recovered from a (measured) click distribution.

    ``prod_i N_i^{m_i} sum_{k_i >= m_i} prod_i [C(k_i, m_i) / C(N_i, m_i)] c[k]``.
    """
    powers = [int(m) for m in powers]
    if len(powers) != dist.ndim:
        raise ValueError("need one power per detector")
    tensor = dist.probabilities
    for axis, (N, m) in enumerate(zip(dist.sizes, powers)):
        if m < 0 or m > N:
            raise ValueError(f"moment order {m} not accessible with N = {N} diodes")
        k = np.arange(N + 1)
        weights = np.array([math.comb(int(kk), m) for kk in k], dtype=float) / math.comb(N, m) * float(N) ** m
        tensor = np.tensordot(weights, tensor, axes=([0], [0]))
    return float(tensor)


class ExactMoments:
    """Joint ``<: prod pi_a^{m_a} :>`` of a state seen through fixed arms, cached per power tuple."""

    def __init__(self, state, arms: Sequence[ArmDescriptor], method: str = "substitution"):
        self.state = state
        self.arms = tuple(arms)
        self.method = method
        self._cache: dict[tuple, float] = {}
        _check_arms(self.arms, state.modes)

    @property
    def sizes(self) -> tuple:
        return tuple(a.N for a in self.arms)

    def __call__(self, powers: Sequence[int]) -> float:
        key = tuple(int(m) for m in powers)
        if key not in self._cache:
            self._cache[key] = pi_moment(self.state, self.arms, key, method=self.method)
        return self._cache[key]


class EmpiricalMoments:
    """Same interface as :class:`ExactMoments`, reading moments off a click distribution."""

    def __init__(self, dist: ClickDistribution):
        self.dist = dist
        self._cache: dict[tuple, float] = {}

    @property
    def sizes(self) -> tuple:
        return self.dist.sizes

    def __call__(self, powers: Sequence[int]) -> float:
        key = tuple(int(m) for m in powers)
        if key not in self._cache:
            self._cache[key] = moments_from_statistics(self.dist, key)
        return self._cache[key]


def _poly_mul(p: dict, q: dict) -> dict:
    out: dict[tuple, float] = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0.0) + c1 * c2
    return out


def _poly_pow(p: dict, n: int, arity: int) -> dict:
    out = {(0,) * arity: 1.0}
    for _ in range(n):
        out = _poly_mul(out, p)
    return out


def form_moment(provider, forms: Sequence[tuple], powers: Sequence[int]) -> float:
    """``<: prod_l (x_l + sum_a w_{l,a} pi_a)^{p_l} :>`` for linear forms ``(x_l, w_l)``.

    Expanded multinomially into joint click moments supplied by ``provider``.
    """
    arity = len(provider.sizes)
    poly = {(0,) * arity: 1.0}
    for (const, weights), p in zip(forms, powers):
        weights = list(weights)
        if len(weights) != arity:
            raise ValueError(f"linear form has {len(weights)} weights for {arity} arms")
        base: dict[tuple, float] = {}
        if const:
            base[(0,) * arity] = float(const)
        for a, w in enumerate(weights):
            if w:
                e = [0] * arity
                e[a] = 1
                base[tuple(e)] = base.get(tuple(e), 0.0) + float(w)
        poly = _poly_mul(poly, _poly_pow(base, int(p), arity))
    return float(sum(c * (provider(e) if any(e) else 1.0) for e, c in poly.items() if c))
