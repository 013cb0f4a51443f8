import math
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from optrace.potential import TrigOperatorPotential  # noqa: E402

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_log():
    def record(name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


# the recurring example potentials
COS2 = TrigOperatorPotential.scalar(cos={2: 1.0})
COS2_02 = TrigOperatorPotential.scalar(cos={2: 0.2})
COS2_03 = TrigOperatorPotential.scalar(cos={2: 0.3})
SIN1 = TrigOperatorPotential.scalar(sin={1: 1.0})
SIN1_04 = TrigOperatorPotential.scalar(sin={1: 0.4})
A1 = [[0.1, 0.05], [0.05, -0.1]]
B2 = [[0.04, -0.08], [-0.08, 0.02]]
# non-commuting two-term d = 2 potential
MIXED2 = TrigOperatorPotential(2, {1: A1}, {2: B2})


def sym(rng, d, scale):
    a = rng.normal(size=(d, d)) * scale
    return (a + a.T) / 2


def random_potential(rng, d, bandwidth=3, target_bound=0.4):
    """Random trig potential with coefficient-norm sum scaled to target_bound (>= sup norm)."""
    cos_terms = {r: sym(rng, d, 1.0) for r in range(bandwidth + 1) if rng.random() < 0.7}
    sin_terms = {s: sym(rng, d, 1.0) for s in range(1, bandwidth + 1) if rng.random() < 0.5}
    if not cos_terms and not sin_terms:
        cos_terms = {1: sym(rng, d, 1.0)}
    Q = TrigOperatorPotential(d, cos_terms, sin_terms)
    mats = list(Q.cos_terms.values()) + list(Q.sin_terms.values())
    total = sum(np.linalg.norm(a, 2) for a in mats)
    return Q.scaled(target_bound * rng.uniform(0.2, 1.0) / total)


@st.composite
def trig_potentials(draw, max_dim=2, max_band=6, max_coeff=1.0):
    d = draw(st.integers(1, max_dim))
    coeff = st.floats(-max_coeff, max_coeff, allow_nan=False, allow_infinity=False)

    def matrix():
        upper = draw(st.lists(coeff, min_size=d * (d + 1) // 2, max_size=d * (d + 1) // 2))
        a = np.zeros((d, d))
        a[np.triu_indices(d)] = upper
        return a + np.triu(a, 1).T

    cos_idx = draw(st.sets(st.integers(0, max_band), max_size=3))
    sin_idx = draw(st.sets(st.integers(1, max_band), max_size=3))
    return TrigOperatorPotential(d, {r: matrix() for r in cos_idx}, {s: matrix() for s in sin_idx})


PI = math.pi
