"""Synthetic click data and plug-in estimates with bootstrap standard errors."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .clicks import ClickDistribution, EmpiricalMoments, moments_from_statistics

__all__ = [
    "ClickHistogram",
    "sample",
    "histogram_from_distribution",
    "empirical_distribution",
    "estimate_moments",
    "estimate_criterion",
]

DEFAULT_BOOTSTRAP = 200


@dataclass(frozen=True)
class ClickHistogram:
    """Counts of joint click outcomes ``(k_1, ..., k_A)`` over ``shots`` repetitions."""

    sizes: tuple
    counts: np.ndarray
    shots: int

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sizes)
        counts = np.array(self.counts, dtype=np.int64)
        if counts.shape != tuple(n + 1 for n in sizes):
            raise ValueError(f"count tensor shape {counts.shape} does not match sizes {sizes}")
        if np.any(counts < 0):
            raise ValueError("histogram counts must be nonnegative")
        if int(counts.sum()) != int(self.shots):
            raise ValueError(f"counts sum to {int(counts.sum())}, expected shots = {self.shots}")
        if self.shots < 1:
            raise ValueError("histogram needs at least one shot")
        counts.setflags(write=False)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "shots", int(self.shots))

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.shots


def sample(dist: ClickDistribution, shots: int, seed: int) -> ClickHistogram:
    """``shots`` i.i.d. draws from ``dist`` by inverse CDF over the flattened tensor."""
    shots = int(shots)
    if shots < 1:
        raise ValueError("shots must be >= 1")
    p = dist.probabilities.ravel()
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    rng = np.random.default_rng(seed)
    idx = np.searchsorted(cdf, rng.random(shots), side="right")
    np.minimum(idx, p.size - 1, out=idx)
    counts = np.bincount(idx, minlength=p.size).reshape(dist.probabilities.shape)
    return ClickHistogram(dist.sizes, counts, shots)


def histogram_from_distribution(dist: ClickDistribution, shots: int) -> ClickHistogram:
    """Deterministic histogram with counts ``round(shots * c_k)`` (largest-remainder rounding)."""
    raw = dist.probabilities.ravel() * shots
    counts = np.floor(raw).astype(np.int64)
    short = int(shots - counts.sum())
    if short:
        counts[np.argsort(counts - raw)[:short]] += 1
    return ClickHistogram(dist.sizes, counts.reshape(dist.probabilities.shape), shots)


def empirical_distribution(hist: ClickHistogram) -> ClickDistribution:
    return ClickDistribution(hist.sizes, hist.frequencies)


def _resamples(hist: ClickHistogram, n_boot: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    p = hist.frequencies.ravel()
    return rng.multinomial(hist.shots, p, size=n_boot) / hist.shots


def estimate_moments(hist: ClickHistogram, powers: Sequence[int], n_boot: int = DEFAULT_BOOTSTRAP,
                     seed: int = 0) -> tuple:
    """Plug-in ``<: prod pi_a^{m_a} :>`` and its bootstrap standard error."""
    powers = tuple(int(m) for m in powers)
    value = moments_from_statistics(empirical_distribution(hist), powers)
    # the estimator is linear in the frequencies, with a product kernel
    kernel = np.ones(())
    for N, m in zip(hist.sizes, powers):
        w = np.array([math.comb(k, m) for k in range(N + 1)], dtype=float) / math.comb(N, m) * float(N) ** m
        kernel = np.multiply.outer(kernel, w)
    boot = _resamples(hist, n_boot, seed) @ kernel.ravel()
    return value, float(np.std(boot, ddof=1)) if n_boot > 1 else 0.0


def estimate_criterion(hist: ClickHistogram, statistic: Callable, n_boot: int = DEFAULT_BOOTSTRAP,
                       seed: int = 0) -> tuple:
    """Apply ``statistic(provider) -> float`` to the empirical moments; bootstrap its standard error.

    ``statistic`` receives an :class:`EmpiricalMoments` provider, so any
    witness function accepting ``provider=`` can be wrapped in a lambda.
    """
    value = float(statistic(EmpiricalMoments(empirical_distribution(hist))))
    boot = np.array([
        statistic(EmpiricalMoments(ClickDistribution(hist.sizes, f.reshape(hist.counts.shape))))
        for f in _resamples(hist, n_boot, seed)
    ])
    return value, float(np.std(boot, ddof=1)) if n_boot > 1 else 0.0
