"""Quantum states as finite coherent-state superpositions.

Every quantity evaluated by this package is the expectation value of a normally
ordered function of the mode operators.  On a coherent superposition
``sum_i c_i |alpha_i>`` such an expectation reduces to the substitution rule

    <alpha_i| :F(a^dag, a): |alpha_j> = F(alpha_i^*, alpha_j) <alpha_i|alpha_j>

summed over all term pairs, which is exact.  A truncated Fock representation is
kept alongside as an independent oracle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

__all__ = [
    "DegenerateStateError",
    "EvaluationError",
    "TruncationWarning",
    "CoherentSuperposition",
    "Mixture",
    "ExpFactor",
    "FactorProduct",
    "FockVector",
    "PairTable",
    "overlap",
    "coherent",
    "vacuum",
    "make_cat",
    "make_two_mode_cat",
    "pair_table",
    "evaluate_pairs",
    "expectation",
    "fock_expectation",
    "to_fock",
    "reduced_purity",
]

OVERLAP_FLOOR = 1e-300
IMAG_TOL = 1e-10
NORM_TOL = 1e-12


class DegenerateStateError(ValueError):
    """Raised when a superposition has vanishing norm."""


class EvaluationError(RuntimeError):
    """An expectation value came out inconsistent (complex or negative)."""


class TruncationWarning(UserWarning):
    """Fock truncation too small for the requested accuracy."""


def overlap(a, b):
    """Coherent-state overlap ``<a|b>``; values below 1e-300 are set to zero."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    val = np.exp(-0.5 * np.abs(a) ** 2 - 0.5 * np.abs(b) ** 2 + np.conj(a) * b)
    return np.where(np.abs(val) < OVERLAP_FLOOR, 0.0, val)


@dataclass(frozen=True)
class CoherentSuperposition:
    """Normalized state ``sum_i c_i |alpha_{i,1}, ..., alpha_{i,M}>``.

    ``coeffs`` has shape ``(T,)`` and ``amplitudes`` shape ``(T, M)``.  The
    coefficients are rescaled on construction so that the state has unit norm.
    """

    coeffs: np.ndarray
    amplitudes: np.ndarray
    normalize: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex)).copy()
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.ndim == 1:
            a = a.reshape(-1, 1)
        a = a.copy()
        if c.ndim != 1 or a.ndim != 2 or a.shape[0] != c.shape[0]:
            raise ValueError("coeffs must be (T,) and amplitudes (T, M)")
        if c.size == 0 or a.shape[1] == 0:
            raise ValueError("a superposition needs at least one term and one mode")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(a))):
            raise ValueError("coefficients and amplitudes must be finite")
        if self.normalize:
            norm = _raw_norm(c, a)
            if not norm > 1e-300:
                raise DegenerateStateError("superposition has vanishing norm")
            c = c / math.sqrt(norm)
        c.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "amplitudes", a)

    @property
    def modes(self) -> int:
        return self.amplitudes.shape[1]

    @property
    def terms(self):
        return list(zip(self.coeffs, self.amplitudes))

    def norm(self) -> float:
        return _raw_norm(self.coeffs, self.amplitudes)

    def scaled(self, s: float) -> "CoherentSuperposition":
        """Same coefficients with every amplitude multiplied by ``s``."""
        return CoherentSuperposition(self.coeffs, self.amplitudes * s)


def _raw_norm(c, a) -> float:
    ov = np.prod(overlap(a[:, None, :], a[None, :, :]), axis=-1)
    return float(np.real(np.conj(c) @ ov @ c))


@dataclass(frozen=True)
class Mixture:
    """Classical mixture ``sum_k p_k |psi_k><psi_k|`` of pure superpositions."""

    weights: tuple
    components: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        comps = tuple(self.components)
        if w.ndim != 1 or len(comps) != w.size or w.size == 0:
            raise ValueError("weights and components must be non-empty and of equal length")
        if np.any(w < 0) or not w.sum() > 0:
            raise ValueError("mixture weights must be nonnegative with positive sum")
        modes = {c.modes for c in comps}
        if len(modes) != 1:
            raise ValueError("all mixture components must have the same number of modes")
        object.__setattr__(self, "weights", tuple(float(x) for x in w / w.sum()))
        object.__setattr__(self, "components", comps)

    @property
    def modes(self) -> int:
        return self.components[0].modes


@dataclass(frozen=True)
class ExpFactor:
    """One normally ordered factor ``exp(-lam (a_m - gamma)^dag (a_m - gamma))``."""

    mode: int
    lam: float
    gamma: complex = 0j

    def __post_init__(self):
        if not math.isfinite(self.lam) or self.lam < 0:
            raise ValueError("lam must be finite and nonnegative")
        if self.mode < 0:
            raise ValueError("mode index must be nonnegative")
        object.__setattr__(self, "gamma", complex(self.gamma))


@dataclass(frozen=True)
class FactorProduct:
    """Normally ordered product of ``ExpFactor`` terms times a real prefactor."""

    factors: tuple = ()
    prefactor: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    def aggregates(self) -> dict:
        """Per mode ``(Lambda, v, u, w)``: sums of lam, lam*gamma, lam*conj(gamma), lam*|gamma|^2."""
        out: dict[int, list] = {}
        for f in self.factors:
            agg = out.setdefault(f.mode, [0.0, 0j, 0j, 0.0])
            agg[0] += f.lam
            agg[1] += f.lam * f.gamma
            agg[2] += f.lam * f.gamma.conjugate()
            agg[3] += f.lam * abs(f.gamma) ** 2
        return {m: tuple(v) for m, v in out.items()}


@dataclass(frozen=True)
class FockVector:
    """Pure state on ``M`` modes in a truncated number basis (``n <= cutoff``)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        psi = np.asarray(self.amplitudes, dtype=complex).copy()
        if psi.ndim == 0 or len(set(psi.shape)) != 1:
            raise ValueError("Fock amplitudes must be a hypercube tensor")
        nrm = np.vdot(psi, psi).real
        if abs(nrm - 1) > 1e-10:
            raise ValueError(f"Fock vector not normalized (norm {nrm:.3e})")
        psi.setflags(write=False)
        object.__setattr__(self, "amplitudes", psi)

    @property
    def modes(self) -> int:
        return self.amplitudes.ndim

    @property
    def cutoff(self) -> int:
        return self.amplitudes.shape[0] - 1

    @classmethod
    def number_state(cls, n: Sequence[int] | int, cutoff: int) -> "FockVector":
        n = [n] if isinstance(n, int) else list(n)
        psi = np.zeros((cutoff + 1,) * len(n), dtype=complex)
        psi[tuple(n)] = 1.0
        return cls(psi)

    def boundary_amplitude(self) -> float:
        psi = np.abs(self.amplitudes)
        return max(float(np.take(psi, -1, axis=ax).max()) for ax in range(psi.ndim))

    def photon_distribution(self, mode: int = 0) -> np.ndarray:
        probs = np.abs(self.amplitudes) ** 2
        axes = tuple(ax for ax in range(probs.ndim) if ax != mode)
        return probs.sum(axis=axes) if axes else probs


State = Union[CoherentSuperposition, Mixture]
AnyState = Union[CoherentSuperposition, Mixture, FockVector]


def coherent(*alphas: complex) -> CoherentSuperposition:
    """Product coherent state ``|alpha_1, ..., alpha_M>``."""
    return CoherentSuperposition(np.ones(1), np.asarray([alphas], dtype=complex))


def vacuum(modes: int = 1) -> CoherentSuperposition:
    return coherent(*([0j] * modes))


def _cat(alpha: complex, parity: str, modes: int) -> CoherentSuperposition:
    sign = _parity_sign(parity)
    alpha = complex(alpha)
    if not (math.isfinite(alpha.real) and math.isfinite(alpha.imag)):
        raise ValueError("alpha must be finite")
    x = 2 * modes * abs(alpha) ** 2
    # 1 +- exp(-x); expm1 keeps the odd branch accurate near alpha = 0
    denom = 1.0 + math.exp(-x) if sign > 0 else -math.expm1(-x)
    if denom <= 1e-300:
        raise DegenerateStateError("odd cat state with alpha = 0 has zero norm")
    c = 1.0 / math.sqrt(2.0 * denom)
    amps = np.array([[alpha] * modes, [-alpha] * modes], dtype=complex)
    return CoherentSuperposition(np.array([c, sign * c]), amps, normalize=False)


def _parity_sign(parity) -> int:
    key = str(parity).lower()
    if key in ("even", "+", "plus"):
        return 1
    if key in ("odd", "-", "minus"):
        return -1
    raise ValueError(f"unknown parity {parity!r}; use 'even' or 'odd'")


def make_cat(alpha: complex, parity: str = "even") -> CoherentSuperposition:
    """Even or odd coherent state ``(|alpha> +- |-alpha>) / sqrt(2[1 +- exp(-2|alpha|^2)])``."""
    return _cat(alpha, parity, 1)


def make_two_mode_cat(alpha: complex, parity: str = "even") -> CoherentSuperposition:
    """``(|alpha, alpha> +- |-alpha, -alpha>) / sqrt(2[1 +- exp(-4|alpha|^2)])``."""
    return _cat(alpha, parity, 2)


@dataclass(frozen=True)
class PairTable:
    """Flattened term pairs of a (mixed) superposition.

    ``weights[p] = w_k c_i^* c_j <alpha_i|alpha_j>``, ``bra[p] = conj(alpha_i)``
    and ``ket[p] = alpha_j`` (per mode).  A normally ordered function ``F``
    has expectation ``sum_p weights[p] * F(bra[p], ket[p])``.
    """

    weights: np.ndarray
    bra: np.ndarray
    ket: np.ndarray

    @property
    def modes(self) -> int:
        return self.bra.shape[1]


def _pure_pairs(state: CoherentSuperposition):
    c, a = state.coeffs, state.amplitudes
    ov = np.prod(overlap(a[:, None, :], a[None, :, :]), axis=-1)
    w = np.conj(c)[:, None] * c[None, :] * ov
    t = c.size
    bra = np.broadcast_to(np.conj(a)[:, None, :], (t, t, a.shape[1])).reshape(-1, a.shape[1])
    ket = np.broadcast_to(a[None, :, :], (t, t, a.shape[1])).reshape(-1, a.shape[1])
    w = w.reshape(-1)
    keep = w != 0
    return w[keep], bra[keep], ket[keep]


def pair_table(state: State) -> PairTable:
    if isinstance(state, CoherentSuperposition):
        return PairTable(*_pure_pairs(state))
    if isinstance(state, Mixture):
        parts = [_pure_pairs(c) for c in state.components]
        w = np.concatenate([p * part[0] for p, part in zip(state.weights, parts)])
        bra = np.concatenate([part[1] for part in parts])
        ket = np.concatenate([part[2] for part in parts])
        return PairTable(w, bra, ket)
    raise TypeError(f"expected a coherent superposition or mixture, got {type(state).__name__}")


def evaluate_pairs(table: PairTable, values: np.ndarray, tol: float = IMAG_TOL):
    """Contract pair values against the pair weights and discard the imaginary residue.

    ``values`` has the pair axis first; any trailing axes are kept.  The residue
    is compared against ``tol`` relative to the magnitude of the summands.
    """
    values = np.asarray(values)
    w = table.weights.reshape((-1,) + (1,) * (values.ndim - 1))
    terms = w * values
    total = terms.sum(axis=0)
    scale = np.maximum(1.0, np.abs(terms).sum(axis=0))
    resid = np.abs(np.imag(total))
    if np.any(resid > tol * scale):
        raise EvaluationError(
            f"imaginary residue {float(np.max(resid / scale)):.3e} exceeds tolerance; "
            "the evaluated operator is not Hermitian"
        )
    out = np.real(total)
    return float(out) if out.ndim == 0 else out


def normal_expectation(state: State, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]):
    """``<:F:>`` for ``F`` given as ``fn(bra, ket) -> values`` over the pair axis."""
    table = pair_table(state)
    return evaluate_pairs(table, fn(table.bra, table.ket))


def _product_exponent(product: FactorProduct, bra, ket):
    expo = np.zeros(bra.shape[0], dtype=complex)
    for f in product.factors:
        if f.mode >= bra.shape[1]:
            raise ValueError(f"factor acts on mode {f.mode} of a {bra.shape[1]}-mode state")
        expo -= f.lam * (bra[:, f.mode] - np.conj(f.gamma)) * (ket[:, f.mode] - f.gamma)
    return expo


def expectation(state: State, product: FactorProduct) -> float:
    """Exact ``<: prod_f exp(-lam_f n(gamma_f)) :>`` times the product prefactor."""
    if isinstance(state, FockVector):
        return fock_expectation(state, product)
    table = pair_table(state)
    return product.prefactor * evaluate_pairs(table, np.exp(_product_exponent(product, table.bra, table.ket)))


def _ladder(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), k=1)


def _nilpotent_exp(op: np.ndarray) -> np.ndarray:
    out = np.eye(op.shape[0], dtype=complex)
    term = out.copy()
    for k in range(1, op.shape[0] + 1):
        term = term @ op / k
        if not np.any(term):
            break
        out += term
    return out


def _normal_ordered_operator(lam_sum, v, u, cutoff):
    a = _ladder(cutoff).astype(complex)
    n = np.arange(cutoff + 1)
    diag = np.diag(np.power(complex(1 - lam_sum), n))
    return _nilpotent_exp(v * a.T) @ diag @ _nilpotent_exp(u * a)


def fock_expectation(state: FockVector, product: FactorProduct) -> float:
    """Same quantity as :func:`expectation`, evaluated on a truncated Fock vector.

    Per mode the factors combine to ``exp(-w) exp(v a^dag) (1-Lambda)^n exp(u a)``.
    """
    if state.boundary_amplitude() > 1e-8:
        warnings.warn(
            f"Fock boundary amplitude {state.boundary_amplitude():.2e} > 1e-8; raise the cutoff",
            TruncationWarning,
            stacklevel=2,
        )
    psi = state.amplitudes
    phi = psi
    log_pref = 0.0
    for mode, (lam_sum, v, u, w) in product.aggregates().items():
        if mode >= psi.ndim:
            raise ValueError(f"factor acts on mode {mode} of a {psi.ndim}-mode state")
        if lam_sum > 1 + 1e-12:
            warnings.warn(f"aggregate lambda {lam_sum:.3f} > 1 on mode {mode}", stacklevel=2)
        op = _normal_ordered_operator(lam_sum, v, u, state.cutoff)
        phi = np.moveaxis(np.tensordot(op, phi, axes=([1], [mode])), 0, mode)
        log_pref -= w
    val = np.vdot(psi, phi) * math.exp(log_pref) * product.prefactor
    if abs(val.imag) > IMAG_TOL * max(1.0, abs(val)):
        raise EvaluationError(f"imaginary residue {abs(val.imag):.3e} in Fock expectation")
    return float(val.real)


def _coherent_vector(alpha: complex, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff + 1)
    out = np.empty(cutoff + 1, dtype=complex)
    out[0] = math.exp(-0.5 * abs(alpha) ** 2)
    for k in n[1:]:
        out[k] = out[k - 1] * alpha / math.sqrt(k)
    return out


def to_fock(state: CoherentSuperposition, cutoff: int = 40) -> FockVector:
    """Expand a coherent superposition in the number basis up to ``cutoff``.

    The truncated vector is renormalized; a :class:`TruncationWarning` is
    emitted when the discarded mass exceeds 1e-10.
    """
    psi = np.zeros((cutoff + 1,) * state.modes, dtype=complex)
    for c, amps in state.terms:
        vec = np.asarray(c, dtype=complex)
        for alpha in amps:
            vec = np.multiply.outer(vec, _coherent_vector(alpha, cutoff))
        psi = psi + vec
    nrm = np.vdot(psi, psi).real
    if abs(nrm - 1) > 1e-10:
        warnings.warn(f"truncation at {cutoff} loses {abs(1 - nrm):.2e} of the norm", TruncationWarning, stacklevel=2)
    return FockVector(psi / math.sqrt(nrm))


def reduced_purity(state: FockVector, keep: int = 0) -> float:
    """Purity ``tr(rho_keep^2)`` of the reduced state of one mode."""
    psi = np.moveaxis(state.amplitudes, keep, 0).reshape(state.cutoff + 1, -1)
    rho = psi @ psi.conj().T
    return float(np.real(np.trace(rho @ rho)))
