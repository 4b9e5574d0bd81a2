import math

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from clickhomodyne.clicks import DetectorConfig
from clickhomodyne.homodyne import BeamSplitter, LocalOscillator, unbalanced_arm, unbalanced_scheme
from clickhomodyne.states import CoherentSuperposition, Mixture, make_cat

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

FIG_DET = DetectorConfig(8, 0.5, 0.0)
FIG_BS = BeamSplitter(0.8, 0.6)
FIG_LO = LocalOscillator(4.0)


@pytest.fixture
def even_cat():
    return make_cat(1.0, "even")


@pytest.fixture
def odd_cat():
    return make_cat(1.0, "odd")


@pytest.fixture
def fig4_arm():
    return unbalanced_arm(FIG_BS, FIG_LO, FIG_DET)


@pytest.fixture
def fig4_scheme():
    return unbalanced_scheme(FIG_BS, FIG_LO, FIG_DET)


amplitudes = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


@st.composite
def superpositions(draw, modes=1, max_terms=3):
    t = draw(st.integers(1, max_terms))
    coeffs = [draw(st.complex_numbers(min_magnitude=0.1, max_magnitude=1.0)) for _ in range(t)]
    amps = [[draw(amplitudes) for _ in range(modes)] for _ in range(t)]
    c = np.array(coeffs)
    a = np.array(amps)
    from clickhomodyne.states import _raw_norm

    if _raw_norm(c, a) < 1e-6:
        c = np.ones(1)
        a = a[:1]
    return CoherentSuperposition(c, a)


@st.composite
def coherent_mixtures(draw, modes=1, max_components=4, max_amp=2.0):
    k = draw(st.integers(1, max_components))
    w = [draw(st.floats(0.05, 1.0)) for _ in range(k)]
    comps = [
        CoherentSuperposition([1.0], [[draw(st.complex_numbers(max_magnitude=max_amp)) for _ in range(modes)]])
        for _ in range(k)
    ]
    return Mixture(w, comps)


def random_superposition(rng, modes=1, terms=None, scale=1.5):
    terms = terms or int(rng.integers(1, 4))
    c = rng.normal(size=terms) + 1j * rng.normal(size=terms)
    a = (rng.normal(size=(terms, modes)) + 1j * rng.normal(size=(terms, modes))) * scale / math.sqrt(2)
    return CoherentSuperposition(c, a)


def random_classical(rng, modes=1, max_components=4, scale=1.5):
    k = int(rng.integers(1, max_components + 1))
    comps = [CoherentSuperposition([1.0], [(rng.normal(size=modes) + 1j * rng.normal(size=modes)) * scale])
             for _ in range(k)]
    return Mixture(rng.uniform(0.1, 1.0, size=k), comps)


ACCEPTANCE_LINES: list = []


def record_acceptance(number: int, title: str, checks: dict):
    """Store one acceptance line; ``checks`` maps a sub-check description to (ok, detail)."""
    ok = all(v[0] for v in checks.values())
    parts = "; ".join(f"{'ok' if v[0] else 'FAILED'} {k} ({v[1]})" for k, v in checks.items())
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {title}: {parts}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return ok, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
