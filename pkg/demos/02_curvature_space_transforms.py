"""The determinant-one fractional-linear action on curvature space.

A matrix [[a,b],[c,d]] with ad - bc = 1 maps radii of curvature by
r -> (ar+b)/(cr+d) and every such map is realized by an actual surface
transformation in space, factoring into parallel translations along the
normal, homotheties, and the reciprocal map.  This script pushes a closed
convex surface through all three and verifies the structural invariants.

Run:  python3 demos/02_curvature_space_transforms.py
"""

import math

import numpy as np

from weingarten import (
    Calibration,
    LinearHopf,
    MoebiusElement,
    apply_roc,
    cm_residual,
    compose_factors,
    decompose,
    induced_surface,
    integrate_cm,
    reciprocal_transform_closed,
    render_relation,
    transform_relation,
    verify_transform_properties,
)

surface = integrate_cm(LinearHopf(3.0, -3.0), math.pi / 2.0, 2.0,
                       (1e-6, math.pi - 1e-6))
print("source:", surface.meta["relation"], "radii in",
      f"[{surface.r1.min():.3f}, {surface.r2.max():.3f}]")

# -- factor decomposition ----------------------------------------------------
M = MoebiusElement(1.1, 0.2, -0.1, (1.0 - 0.02) / 1.1)
factors = decompose(M)
print("decomposition:", [f.to_json()["type"] for f in factors],
      "| product defect:",
      f"{np.max(np.abs(compose_factors(factors).matrix() - M.matrix())):.1e}")

# -- parallel translation: every point moves along its normal ---------------
out = induced_surface(MoebiusElement(1.0, 0.5, 0.0, 1.0), surface, Calibration(1.0))
print("N(0.5): image radii are shifted by 0.5:",
      f"{float(out.profile.r1[len(out.profile.r1)//2] - surface.r1[len(surface.r1)//2]):.6f}")

# -- the transformed relation travels with the surface -----------------------
img_rel = transform_relation(MoebiusElement(1.0, 0.5, 0.0, 1.0), LinearHopf(3.0, -3.0))
print("N(0.5) pushes the relation to:", render_relation(img_rel))

# -- reciprocal transformation of a closed convex surface -------------------
recip = reciprocal_transform_closed(surface)
interior = recip.profile.restricted(0.05, math.pi - 0.05)
print(f"reciprocal image: rho at poles {abs(recip.embedding.rho[0]):.1e}, "
      f"CM residual {np.max(np.abs(cm_residual(interior))):.1e} (still a surface)")

# -- structural invariants: umbilics, ellipticity sign, slope set -----------
report = verify_transform_properties(MoebiusElement(2.0, -3.0, 1.0, -1.0), surface)
print("slope mapping under a matrix hitting the umbilic curvature:",
      f"mu = {report['mu_source']:.3f} -> {report['mu_image']:.3f} "
      f"(in {{mu, 1/mu}}: {report['slope_in_set']})")

# -- the RoC action is plain fractional-linear arithmetic --------------------
pt = apply_roc(MoebiusElement(0.0, -1.0, 1.0, 0.0), (2.0, 2.0))
print("reciprocal map on the RoC point of a radius-2 sphere:",
      (float(pt[0]), float(pt[1])))
