"""K-energy, Psi_S, I, J and Osc along a Bergman ray of the conic.

A short ladder (s down to -6) is enough to see the regimes: nu turns linear
with slope -3/4 for the line-pair degeneration, while Psi_S levels off at -2.
Run with the other weight vector to see Psi_S fall linearly instead.
"""

import sys

from kstab import kenergy_ray, parse_poly

weights = tuple(int(w) for w in (sys.argv[1] if len(sys.argv) > 1 else "2,-1,-1").split(","))
conic = parse_poly("x*z - y^2")
ladder = [-0.5 * k for k in range(13)]

print(f"lambda = {weights}")
print(f"{'s':>6} {'nu':>10} {'Psi_S':>10} {'I':>10} {'J':>10} {'Osc':>8} {'dnu/ds':>9} {'err':>8}")
for r in kenergy_ray(conic, weights, ladder):
    print(f"{r.s:6.1f} {r.nu:10.5f} {r.psi_s:10.5f} {r.i_func:10.5f} {r.j_func:10.5f} "
          f"{r.osc:8.3f} {r.extras.get('dnu', 0.0):9.5f} {r.error_est:8.1e}")
