#!/usr/bin/env python3
"""Classifying metrics by curvature residual sweeps.

classify_metric embeds the profile at every node of an (r, tau) grid,
assembles the curvature packet, and keeps three residual maxima: a
Riemannian one (s-dependence of the quadratic form), the Berwald tensor,
and the Landsberg tensor.  The verdict is the first class whose residual
clears the tolerance, checked in order of strength:

    riemannian  >  berwald_nonriemannian  >  landsberg_nonberwald  >  none

Alongside the verdict the report keeps per-point regularity margins, so a
verdict of "riemannian" on a metric that stops being strongly convex
somewhere on the grid is visible rather than silent.
"""

import math

from finslerlab.classify import classify_metric
from finslerlab.expressions import builtin, parse
from finslerlab.sources import as_source, source_for


def show(title, source, n=3):
    rep = classify_metric(source, n=n)
    print(f"{title}")
    print(f"  verdict     {rep.verdict}")
    print(f"  riemann     {rep.riemann.max_value:.3e}  "
          f"at (r, s) = ({rep.riemann.at_r:.3f}, {rep.riemann.at_s:+.3f})")
    print(f"  berwald     {rep.berwald.max_value:.3e}")
    print(f"  landsberg   {rep.landsberg.max_value:.3e}")
    worst = max(p.margin2 for p in rep.points)
    print(f"  regularity  max margin2 = {worst:+.3e}  "
          f"(negative everywhere means strongly convex)")
    print()


# A Riemannian profile: F^2 is quadratic in y.
show("riemann_quadratic  phi = sqrt(1 + r^2 s^2 / 4)",
     source_for(builtin("riemann_quadratic", {"f1": 1, "f2": "r^2/4"})))

# A Randers-type drift: Finslerian, none of the special classes.
show("randers  phi = sqrt(1 + s^2) + 0.3*s/r",
     as_source(parse("sqrt(1 + s^2) + 0.3*s/r")))

# The closed family member: Landsberg but not Berwald.  classify uses the
# source's own tau cone, inset a little, as its default grid.
from finslerlab.families import build_landsberg_family

fam = build_landsberg_family("1/r^2", "1/r^2", 1.0 / (2.0 * math.sqrt(2.0)),
                             (0.4, 2.2))
show("landsberg family member (c1 = c3 = 1/r^2, c = 1/(2 sqrt 2))",
     fam.source(anchor_r=1.0, tau_lo=-1.0 / math.sqrt(2.0),
                tau_hi=1.0 / math.sqrt(5.0)))
