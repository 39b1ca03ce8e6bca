"""Classify semi-quadratic relations a*k1*k2 + b*k1 + g*k2 + d = 0.

Two numbers control everything: Lambda1 = b - g and the discriminant
Lambda2 = (b+g)^2 - 4*a*d.  Their ratio is invariant under all
determinant-one curvature transformations, the relation is elliptic at
umbilics iff Lambda2 > Lambda1^2, and the action is transitive on
normalized relations sharing Lambda1^2 -- which reduces everything with
Lambda2 > 0 to the pure curvature-linear form k2 = lambda*k1.

Run:  python3 demos/03_semiquadratic_classification.py
"""

import json
import math

import numpy as np

from weingarten import (
    MoebiusElement,
    SemiQuadratic,
    canal_classify,
    classification_report,
    integrate_cm,
    invariants,
    normalize,
    parse_relation,
    reduce_to_pure_linear,
    transform_relation,
    transitivity_solve,
)
from weingarten.mobius import to_semiquadratic

# -- a CMC relation in text form ---------------------------------------------
cmc = parse_relation("k1 + k2 = 4")
print("CMC report:")
print(json.dumps(classification_report(cmc), indent=2, default=str))

# -- transitivity: drive one normalized relation onto another ----------------
src = normalize(SemiQuadratic(0.3, 1.1, 0.4, -0.6))
inv = invariants(src)
tgt = normalize(SemiQuadratic(-0.2, inv.lambda1 - 0.3, -0.3, 0.8))
# match Lambda1 exactly by construction
tgt = SemiQuadratic(tgt.alpha, tgt.gamma + inv.lambda1, tgt.gamma, tgt.delta)
tgt = normalize(SemiQuadratic(tgt.alpha, tgt.gamma + inv.lambda1, tgt.gamma,
                              ((tgt.beta + tgt.gamma) ** 2 - 1.0) / (4.0 * tgt.alpha)))
M = transitivity_solve(src, tgt)
img = to_semiquadratic(transform_relation(M, src))
err = min(np.max(np.abs(np.array(img.coefficients()) - np.array(tgt.coefficients()))),
          np.max(np.abs(np.array(img.coefficients()) + np.array(tgt.coefficients()))))
print(f"\ntransitivity: matrix {np.round(M.matrix(), 4).tolist()} "
      f"maps source onto target to {err:.1e}")

# -- reduction to k2 = lambda k1 ---------------------------------------------
M_red, lam = reduce_to_pure_linear(cmc)
print(f"CMC reduces to k2 = {lam:g}*k1 (negative: elliptic, as a CMC sphere is)")

hyp = normalize(SemiQuadratic(0.25, 2.3, -0.3, 0.1))  # Lambda1^2 > Lambda2
M2, lam2 = reduce_to_pure_linear(hyp)
print(f"a hyperbolic relation (L1={invariants(hyp).lambda1:.2f}) reduces to "
      f"k2 = {lam2:.4f}*k1 (positive)")

# -- parabolic relations are canal surfaces ----------------------------------
torus_rel = SemiQuadratic(0.0, 0.0, 1.0, -2.0)    # k2 = 2
profile = integrate_cm(parse_relation("r2 = 0*r1 + 0.5"), 1.2, 0.9, (0.7, 2.4))
print("parabolic k2 = 2 profile classifies as:", canal_classify(torus_rel, profile))
