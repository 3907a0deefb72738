"""Compare the asymptotic slope of 4 nu - 2 Psi_S with the exact F1.

This runs the full default ladder (0 to -14) for one weight vector and takes
two to three minutes per case on a single core.  The report prints both sides,
their ratio and the nearest named normalisation constant.
"""

import json
import sys

from kstab import VerifyConfig, parse_poly, verify_asymptotics

weights = tuple(int(w) for w in (sys.argv[1] if len(sys.argv) > 1 else "2,-1,-1").split(","))
rep = verify_asymptotics(parse_poly("x*z - y^2"), weights, VerifyConfig(window=(-14, -9)))

print(f"lambda = {weights}, limit {rep.futaki.limit.to_strings(['x', 'y', 'z'])} ({rep.reduced})")
print(f"exact F1                      {rep.futaki.F1}")
print(f"slope of 4 nu - 2 Psi_S       {rep.F1_numerical:.6f}")
print(f"slope of nu                   {rep.fit_nu.slope:.6f}")
print(f"slope of Psi_S (psi)          {rep.fit_psi.slope:.6f}")
print(f"Osc growth per unit |s|       {-rep.fit_osc.slope:.6f}")
print(f"verdict                       {rep.verdict}")
print("checks", json.dumps(rep.checks, sort_keys=True))
print("convention factor", json.dumps(rep.diagnostics["convention_factor"], sort_keys=True))
