#!/usr/bin/env python3
"""A family of Landsberg metrics that are not Berwald.

Choosing two radial coefficients c1(r), c3(r) and a constant c closes
into a spray family: the remaining coefficients c0(r) and c2(r) are
forced by two first-order closure conditions, solved here on a validation
grid.  The compatible metrics come out of the family as log-derivative
data (phi_s/phi and phi_r/phi) plus one quadrature, so no closed form for
phi is ever needed.

With c1 = c3 = 1/r^2 and c = 1/(2 sqrt 2) the closure lands on
c0 = -3/r^4 and c2 = 1/2 exactly, and the resulting metric has vanishing
Landsberg curvature while its Berwald curvature stays visibly nonzero:
the pair of residual sweeps below is the whole point of the construction.
"""

import math

import numpy as np

from finslerlab.classify import classify_metric
from finslerlab.families import build_landsberg_family
from finslerlab.geometry import spray_pq

C = 1.0 / (2.0 * math.sqrt(2.0))
fam = build_landsberg_family("1/r^2", "1/r^2", C, (0.4, 2.2))

print("family      c1 = c3 = 1/r^2, c = 1/(2 sqrt 2) over r in (0.4, 2.2)")
print()

# -- forced coefficients vs their closed forms --------------------------------

print("r        c0(r)           vs -3/r^4        c2(r)       vs 1/2")
for r in np.linspace(0.5, 2.0, 6):
    c0, c2 = fam.c0(r), fam.c2(r)
    print(f"{r:.2f}  {c0: .12f}  {c0 + 3.0 / r**4: .1e}      "
          f"{c2:.12f}  {c2 - 0.5: .1e}")
print()

# Closure residuals recorded on the validation grid while building.
print(f"closure residual A, max over grid: {np.max(np.abs(fam.a_values)):.3e}")
print(f"closure residual B, max over grid: {np.max(np.abs(fam.b_values)):.3e}")
print()

# -- the compatible metric, classified ----------------------------------------

# tau bounds keep the grid inside the cone where the quadrature for phi
# converges; the anchor fixes the scale phi(1, 0) = 1.
src = fam.source(anchor_r=1.0, tau_lo=-1.0 / math.sqrt(2.0),
                 tau_hi=1.0 / math.sqrt(5.0))
report = classify_metric(src, n=3)

print(f"verdict                 {report.verdict}")
print(f"max riemann residual    {report.riemann.max_value:.3e}")
print(f"max berwald residual    {report.berwald.max_value:.3e}")
print(f"max landsberg residual  {report.landsberg.max_value:.3e}")
print()

# One scalar witness that Berwald fails: P_ss at (r, s) = (1, 0) equals
# 1/2 here, and any Berwald metric in the family would need it to vanish.
witness = spray_pq(src.phi_jet(1.0, 0.0)).P_ss
print(f"berwald witness |P_ss(1, 0)| = {abs(witness):.12f}  (zero iff Berwald)")
