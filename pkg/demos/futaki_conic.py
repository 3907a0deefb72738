"""Exact Futaki data for the two monomial degenerations of the conic xz = y^2.

One subgroup splits the conic into the line pair xz = 0, the other squeezes it
onto the double line y^2 = 0.  Both invariants come out negative, the second
twice the first.
"""

from kstab import Ideal, OneParamSubgroup, donaldson_futaki, parse_poly

conic = Ideal([parse_poly("x*z - y^2")])

for weights in [(2, -1, -1), (-2, 1, 1), (0, 0, 0)]:
    rep = donaldson_futaki(conic, OneParamSubgroup(weights))
    limit = ", ".join(rep.limit.to_strings(["x", "y", "z"])) or "0"
    print(f"lambda = {weights}")
    print(f"  limit ideal       ({limit})   [{rep.reduced}]")
    print(f"  Hilbert poly      P(m) = {rep.hilbert.hilbert_poly.to_string()}")
    print(f"  weight poly       w(m) = {rep.weight.poly.to_string()}")
    print(f"  F0 = {rep.F0},  F1 = {rep.F1}")
