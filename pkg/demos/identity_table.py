"""The alternating binomial sums sum_j (-1)^j C(n+1, j) (n+1-2j)^i.

They vanish for i <= n and for i = n+2, and equal (n+1)! 2^(n+1) at i = n+1.
"""

from kstab import binom_identity

for n in range(6):
    row = [binom_identity(n, i) for i in range(n + 3)]
    print(f"n = {n}: " + "  ".join(str(v) for v in row))
