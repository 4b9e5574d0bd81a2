"""Homodyne port networks mapped onto click-detector arms.

A coherent local oscillator ``|beta>`` entering a passive network turns every
output detector into a detector of a scaled, displaced photon number
``kappa * n(gamma)`` of the signal mode.  Unused input ports carry vacuum,
which contributes nothing inside normal ordering, so they are dropped.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .clicks import ArmDescriptor, DetectorConfig, ExactMoments, form_moment

__all__ = [
    "BeamSplitter",
    "LocalOscillator",
    "SchemeArms",
    "BALANCED",
    "port_network_arms",
    "four_port_arms",
    "balanced_arms",
    "unbalanced_arm",
    "unbalanced_scheme",
    "eight_port_arms",
    "EIGHT_PORT_UNITARY",
    "two_mode_arms",
    "difference_moment",
    "sum_moment",
]


@dataclass(frozen=True)
class BeamSplitter:
    """Lossless beam splitter ``a_1 = t a_SI + r a_LO``, ``a_2 = -r* a_SI + t* a_LO``."""

    t: complex
    r: complex

    def __post_init__(self):
        t, r = complex(self.t), complex(self.r)
        if abs(abs(t) ** 2 + abs(r) ** 2 - 1) > 1e-12:
            raise ValueError(f"|t|^2 + |r|^2 = {abs(t) ** 2 + abs(r) ** 2:.15f} != 1")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "r", r)

    @property
    def unitary(self) -> np.ndarray:
        return np.array([[self.t, self.r], [-self.r.conjugate(), self.t.conjugate()]])


BALANCED = BeamSplitter(1 / math.sqrt(2), 1 / math.sqrt(2))


@dataclass(frozen=True)
class LocalOscillator:
    beta: complex

    def __post_init__(self):
        b = complex(self.beta)
        if not (math.isfinite(b.real) and math.isfinite(b.imag)):
            raise ValueError("LO amplitude must be finite")
        object.__setattr__(self, "beta", b)


@dataclass(frozen=True)
class SchemeArms:
    """Arms of one homodyne scheme with role tags and the current LO phase per signal mode.

    Tags: ``plus``/``minus`` form the click difference ``pi_plus - pi_minus``
    (the nonlinear quadrature); ``p_plus``/``p_minus`` the conjugate one of
    the eight-port scheme.
    """

    arms: tuple
    kind: str
    phases: tuple = (0.0,)

    def __post_init__(self):
        object.__setattr__(self, "arms", tuple(self.arms))
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))

    def __iter__(self):
        return iter(self.arms)

    def __len__(self):
        return len(self.arms)

    def tagged(self, tag: str, mode: int | None = None) -> ArmDescriptor:
        hits = [a for a in self.arms if a.tag == tag and (mode is None or a.mode == mode)]
        if len(hits) != 1:
            raise KeyError(f"scheme {self.kind!r} has {len(hits)} arms tagged {tag!r} on mode {mode}")
        return hits[0]

    def pair(self, which: str = "x", mode: int | None = None) -> tuple:
        """``(plus, minus)`` arms of the ``x`` (or conjugate ``p``) click quadrature."""
        prefix = {"x": "", "p": "p_"}[which]
        return self.tagged(prefix + "plus", mode), self.tagged(prefix + "minus", mode)

    def at_phase(self, phi: float, mode: int | None = None) -> "SchemeArms":
        """Rotate the LO feeding ``mode`` (all modes if None) so its phase becomes ``phi``."""
        phases = list(self.phases)
        arms = []
        for a in self.arms:
            if mode is None or a.mode == mode:
                arms.append(a.with_gamma(a.gamma * cmath.exp(1j * (phi - phases[a.mode]))))
            else:
                arms.append(a)
        for m in range(len(phases)):
            if mode is None or m == mode:
                phases[m] = phi
        return replace(self, arms=tuple(arms), phases=tuple(phases))

    def at_phases(self, *phis: float) -> "SchemeArms":
        out = self
        for m, phi in enumerate(phis):
            out = out.at_phase(phi, mode=m)
        return out

    def with_detector(self, detector: DetectorConfig) -> "SchemeArms":
        return replace(self, arms=tuple(a.with_detector(detector) for a in self.arms))

    def signal_fraction(self, mode: int = 0) -> float:
        return sum(a.scale for a in self.arms if a.mode == mode)


def port_network_arms(
    unitary,
    detectors: Sequence[DetectorConfig],
    lo: Mapping[int, complex],
    signal_port: int = 0,
    signal_mode: int = 0,
    tags: Sequence[str | None] | None = None,
    tol: float = 1e-10,
) -> tuple:
    """Arms of a generic passive network with one signal port and coherent LO ports.

    Output ``k`` is ``U[k,s] a_SI + sum_l U[k,l] beta_l + (vacuum)``, i.e. it
    sees ``|U[k,s]|^2 n(gamma_k)`` with ``gamma_k = -sum_l U[k,l] beta_l / U[k,s]``.
    """
    U = np.asarray(unitary, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError("port network must be a square matrix")
    if np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) > tol:
        raise ValueError("port network is not unitary")
    if len(detectors) != U.shape[0]:
        raise ValueError(f"need {U.shape[0]} detectors, got {len(detectors)}")
    tags = list(tags) if tags is not None else [None] * U.shape[0]
    arms = []
    for k, det in enumerate(detectors):
        u_si = U[k, signal_port]
        drive = sum(U[k, port] * complex(beta) for port, beta in lo.items())
        if abs(u_si) < 1e-15:
            raise ValueError(f"output {k} receives no signal; it is not a homodyne arm")
        arms.append(ArmDescriptor(signal_mode, abs(u_si) ** 2, -drive / u_si, det, tags[k]))
    return tuple(arms)


def four_port_arms(bs: BeamSplitter, lo: LocalOscillator, d1: DetectorConfig, d2: DetectorConfig) -> SchemeArms:
    """Both outputs of the four-port scheme: ``|t|^2 n(-r beta / t)`` and ``|r|^2 n(t* beta / r*)``."""
    if bs.t == 0 or bs.r == 0:
        raise ValueError("two-arm four-port scheme needs t != 0 and r != 0")
    arms = port_network_arms(bs.unitary, [d1, d2], {1: lo.beta}, tags=["plus", "minus"])
    return SchemeArms(arms, "balanced4" if abs(abs(bs.t) - abs(bs.r)) < 1e-12 else "four_port", (cmath.phase(lo.beta),))


def balanced_arms(lo: LocalOscillator, d: DetectorConfig) -> SchemeArms:
    return four_port_arms(BALANCED, lo, d, d)


def unbalanced_arm(bs: BeamSplitter, lo: LocalOscillator, d: DetectorConfig) -> ArmDescriptor:
    """Detector in output 1 only; effective efficiency ``|t|^2 eta`` and ``gamma = -r beta / t``."""
    if bs.t == 0:
        raise ValueError("unbalanced detection needs t != 0")
    return ArmDescriptor(0, abs(bs.t) ** 2, -bs.r * lo.beta / bs.t, d, "plus")


def unbalanced_scheme(bs: BeamSplitter, lo: LocalOscillator, d: DetectorConfig) -> SchemeArms:
    """Unbalanced arm wrapped as a scheme; its phase is ``arg gamma``."""
    arm = unbalanced_arm(bs, lo, d)
    return SchemeArms((arm,), "unbalanced4", (arm.phase,))


EIGHT_PORT_UNITARY = 0.5 * np.array(
    [
        [-1, 1, 1, -1j],
        [1, 1, -1, -1j],
        [1, 1j, 1, -1],
        [1, -1j, 1, 1],
    ]
)


def eight_port_arms(lo: LocalOscillator, d: DetectorConfig) -> SchemeArms:
    """Balanced eight-port scheme: four arms of weight 1/4 with ``gamma`` in ``{beta, -beta, -i beta, i beta}``.

    Outputs 1, 2 give the click quadrature ``X(phi) = pi_2 - pi_1`` and
    outputs 3, 4 the conjugate ``P(phi) = pi_3 - pi_4 = X(phi + pi/2)``.
    """
    arms = port_network_arms(EIGHT_PORT_UNITARY, [d] * 4, {1: lo.beta}, tags=["minus", "plus", "p_plus", "p_minus"])
    return SchemeArms(arms, "eight", (cmath.phase(lo.beta),))


def two_mode_arms(lo1: LocalOscillator, lo2: LocalOscillator, d: DetectorConfig) -> SchemeArms:
    """Independent balanced four-port detectors on signal modes 0 and 1."""
    arms = []
    for mode, lo in enumerate((lo1, lo2)):
        for arm in port_network_arms(BALANCED.unitary, [d, d], {1: lo.beta}, signal_mode=mode, tags=["plus", "minus"]):
            arms.append(arm)
    return SchemeArms(tuple(arms), "two_mode", (cmath.phase(lo1.beta), cmath.phase(lo2.beta)))


def _pair_moment(state, pair, m: int, sign: float) -> float:
    plus, minus = pair
    if m < 0:
        raise ValueError("moment order must be nonnegative")
    return form_moment(ExactMoments(state, [plus, minus]), [(0.0, [1.0, sign])], [m])


def _resolve_pair(arms, which: str):
    if isinstance(arms, SchemeArms):
        return arms.pair(which)
    pair = tuple(arms)
    expected = ["plus", "minus"] if which == "x" else ["p_plus", "p_minus"]
    if len(pair) != 2 or [a.tag for a in pair] != expected:
        raise ValueError(f"difference/sum moments need arms tagged {expected}")
    return pair


def difference_moment(state, arms, m: int, which: str = "x") -> float:
    """``<:(pi_plus - pi_minus)^m:>``, the moments of the nonlinear click quadrature."""
    return _pair_moment(state, _resolve_pair(arms, which), m, -1.0)


def sum_moment(state, arms, m: int, which: str = "x") -> float:
    """``<:(pi_plus + pi_minus)^m:>``."""
    return _pair_moment(state, _resolve_pair(arms, which), m, 1.0)
