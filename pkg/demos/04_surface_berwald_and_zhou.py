#!/usr/bin/env python3
"""Berwald-flat sprays on surfaces, and a metrizability check by residuals.

Part 1 sweeps the five-coefficient surface family whose Berwald curvature
vanishes identically, then breaks one structure constant on purpose to
show the flatness is a property of the family's shape, not of small
numbers.

Part 2 takes the one-parameter spray class P = -s/r^2 + (c/r^2) w,
Q = c0 + ... and asks which metrics it carries.  Two power-law candidates
phi ~ exp(2s/w)/r^k are fed to the compatibility residuals (C1, C2): the
k = 6 profile satisfies both equations, while the k = 5 profile fails C2
by exactly phi/r^2, so the class carries the first and not the second.
"""

import dataclasses

import numpy as np

from finslerlab.expressions import builtin, eval_jet, parse
from finslerlab.families import (SurfaceBerwaldFamily, compatibility_residuals,
                                 surface_berwald_spray, zhou_class_spray)
from finslerlab.geometry import berwald_curvature, embed_point, spray_pq
from finslerlab.sources import source_for

# -- part 1: the flat surface family ------------------------------------------

fam = SurfaceBerwaldFamily(a="0.4", b0="0.1/r^2", b1="0.3", b2=0.25, b3="0.1*r")

def family_spray(r, s):
    return surface_berwald_spray(fam, r, s)

def broken_spray(r, s):
    # scale the b2 term of Q by 3/2 while leaving P alone; scaling b2 in
    # both (staying inside the family) would keep the curvature at zero
    pq = surface_berwald_spray(fam, r, s)
    extra = parse("0.5*0.25*s^2*(r^2 - 2*s^2)/(r^4*sqrt(r^2 - s^2))")
    d = eval_jet(extra, r, s, 0, 3)
    return dataclasses.replace(
        pq, Q=pq.Q + d.deriv(0, 0), Q_s=pq.Q_s + d.deriv(0, 1),
        Q_ss=pq.Q_ss + d.deriv(0, 2), Q_sss=pq.Q_sss + d.deriv(0, 3))

def max_berwald(spray_at):
    worst = 0.0
    for r in np.linspace(0.6, 1.8, 7):
        for tau in np.linspace(-0.6, 0.6, 9):
            s = tau * r
            frame = embed_point(r, s, 1.0, 2)
            pq = spray_at(r, s)
            worst = max(worst, float(np.max(np.abs(berwald_curvature(pq, frame)))))
    return worst

print(f"family max |B|                {max_berwald(family_spray):.3e}")
print(f"Q-side b2 broken, max |B|     {max_berwald(broken_spray):.3e}")
print("flatness lives in the coupling of P to Q, not in small coefficients")
print()

# -- part 2: which metrics does the spray class carry? ------------------------

r5 = source_for(builtin("zhou2d_r5"))
r6 = source_for(builtin("zhou2d_r6"))

worst = {"r6_C1": 0.0, "r6_C2": 0.0, "r5_C1": 0.0, "r5_gap": 0.0}
for r in np.linspace(0.5, 2.0, 10):
    for tau in np.linspace(-0.9, 0.9, 13):
        s = tau * r
        pq = zhou_class_spray(-1.0, "1/r^2", r, s)
        for name, src in (("r6", r6), ("r5", r5)):
            # normalize to phi = 1 at the point: C1, C2 are linear in the
            # jet, and the raw 1/r^5 scale would swamp the comparison
            jet = src.phi_jet(r, s)
            jet = jet * (1.0 / jet.value)
            C1, C2 = compatibility_residuals(jet, pq)
            if name == "r6":
                worst["r6_C1"] = max(worst["r6_C1"], abs(C1))
                worst["r6_C2"] = max(worst["r6_C2"], abs(C2))
            else:
                worst["r5_C1"] = max(worst["r5_C1"], abs(C1))
                # the failure has an exact shape: C2 = phi/r^2
                worst["r5_gap"] = max(worst["r5_gap"],
                                      abs(C2 * r * r / jet.value - 1.0))

print("spray      P = -s/r^2 - w/r^2,  Q = 1/r^2 - s^2/(2 r^4) - s w/r^4")
print(f"phi ~ exp(2s/w)/r^6:  max |C1| = {worst['r6_C1']:.3e}, "
      f"max |C2| = {worst['r6_C2']:.3e}   (carried)")
print(f"phi ~ exp(2s/w)/r^5:  max |C1| = {worst['r5_C1']:.3e}, "
      f"max |C2 r^2/phi - 1| = {worst['r5_gap']:.3e}   (C2 off by phi/r^2)")
print()

# The r^6 profile's own spray reproduces the class member with c = -1,
# c0 = 1/r^2 to machine precision.
gap = 0.0
for r in np.linspace(0.6, 1.9, 8):
    for tau in (-0.7, -0.2, 0.3, 0.8):
        s = tau * r
        jet = r6.phi_jet(r, s)
        own = spray_pq(jet * (1.0 / jet.value))
        cls = zhou_class_spray(-1.0, "1/r^2", r, s)
        gap = max(gap, abs(own.P - cls.P), abs(own.Q - cls.Q))
print(f"own spray of the r^6 profile vs class member: max gap {gap:.3e}")
