import math

import numpy as np
import pytest

from weingarten import (
    CubicRoC,
    LinearHopf,
    SemiQuadratic,
    integrate_cm,
)
from weingarten.semiquadratic import invariants


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


# the relation test matrix used across integration / variational suites:
# (relation, r1 at theta0 = pi/2, fixed-point-free r1 bracket, Q anchor)
FAMILY_MATRIX = [
    (LinearHopf(-0.5, 3.0), 1.0, (0.3, 1.8), 0.45),
    (LinearHopf(0.1, 3.0), 1.0, (0.5, 3.0), 0.45),
    (LinearHopf(2.0, 0.0), 1.0, (0.4, 3.0), 1e-3),
    (LinearHopf(3.0, -3.0), 2.0, (1.6, 3.0), 1e-3),
    (SemiQuadratic(0.0, 1.0, 1.0, -4.0), 1.0, (0.55, 2.0), 0.45),
    (CubicRoC(1.0), 0.5, (0.15, 0.9), 1e-3),
]


@pytest.fixture(scope="session")
def family_matrix():
    return FAMILY_MATRIX


@pytest.fixture(scope="session")
def integrated_matrix():
    """One integrated profile per relation family, shared across tests."""
    out = []
    for rel, r1_0, bracket, q_base in FAMILY_MATRIX:
        profile = integrate_cm(rel, math.pi / 2.0, r1_0, (0.2, math.pi - 0.2))
        out.append((rel, profile, bracket, q_base))
    return out


def random_normalized_sq(rng, lam1=None, avoid_parabolic=True):
    """Random semi-quadratic relation with Lambda2 exactly 1."""
    while True:
        if lam1 is None:
            l1 = float(rng.normal()) * 1.5
        else:
            l1 = lam1
        if avoid_parabolic and abs(abs(l1) - 1.0) < 0.05:
            continue
        ga = float(rng.normal())
        be = ga + l1
        al = float(rng.normal())
        if abs(al) < 0.1:
            continue
        de = ((be + ga) ** 2 - 1.0) / (4.0 * al)
        sq = SemiQuadratic(al, be, ga, de)
        assert abs(invariants(sq).lambda2 - 1.0) < 1e-9
        return sq


def random_moebius(rng, min_det=1e-2):
    while True:
        a, b, c, d = rng.normal(size=4)
        if a * d - b * c > min_det:
            from weingarten import MoebiusElement

            return MoebiusElement(float(a), float(b), float(c), float(d))
