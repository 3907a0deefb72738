"""Independent brute-force references used by the tests.

Nothing here calls into the Groebner or Hilbert machinery of the package:
weights and Hilbert functions come from exact row reduction of the
degree-m multiplication map, with columns ordered by lambda-weight.
"""

from fractions import Fraction
from itertools import product


def monomials(nvars, m):
    return sorted((a for a in product(range(m + 1), repeat=nvars) if sum(a) == m),
                  reverse=True)


def _rows(gens, nvars, m):
    rows = []
    for g in gens:
        terms = dict(g.items())
        dg = sum(next(iter(terms)))
        if dg > m:
            continue
        for beta in monomials(nvars, m - dg):
            rows.append({tuple(x + y for x, y in zip(a, beta)): Fraction(c)
                         for a, c in terms.items()})
    return rows


def _pivot_columns(rows, key):
    """Leading columns (largest ``key``) of the row-reduced span of ``rows``."""
    basis = {}
    for row in rows:
        r = dict(row)
        while r:
            col = max(r, key=key)
            if col not in basis:
                c = r[col]
                basis[col] = {k: v / c for k, v in r.items()}
                break
            c = r[col]
            for k, v in basis[col].items():
                nv = r.get(k, 0) - c * v
                if nv:
                    r[k] = nv
                else:
                    r.pop(k, None)
    return set(basis)


def quotient_basis(gens, lam, m):
    """Monomials of degree m outside the lambda-initial space of I_m."""
    nvars = len(lam)
    key = lambda a: (sum(w * e for w, e in zip(lam, a)), a)
    piv = _pivot_columns(_rows(gens, nvars, m), key)
    return [a for a in monomials(nvars, m) if a not in piv]


def hilbert_value(gens, nvars, m):
    return len(quotient_basis(gens, (0,) * nvars, m))


def weight_value(gens, lam, m):
    """Section-dual weight: minus the summed lambda-pairings over a quotient basis."""
    return -sum(sum(w * e for w, e in zip(lam, a)) for a in quotient_basis(gens, lam, m))


def lagrange_coeffs(points):
    """Exact interpolating polynomial coefficients (low to high) through ``points``."""
    n = len(points)
    coeffs = [Fraction(0)] * n
    for i, (xi, yi) in enumerate(points):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j, (xj, _) in enumerate(points):
            if j == i:
                continue
            basis = [Fraction(0)] + basis
            for k in range(len(basis) - 1):
                basis[k] -= xj * basis[k + 1]
            denom *= xi - xj
        for k in range(n):
            coeffs[k] += Fraction(yi) * basis[k] / denom
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def futaki_pair(w, p):
    """``(F0, F1)`` from the closed formulas in the leading coefficients."""
    n = len(p) - 1
    a1 = w[n + 1] if len(w) > n + 1 else Fraction(0)
    a0 = w[n] if len(w) > n else Fraction(0)
    b0 = p[n]
    b1 = p[n - 1] if n >= 1 else Fraction(0)
    return a1 / b0, (a0 * b0 - a1 * b1) / b0 ** 2


# -- rational-parametrisation oracle for the conic xz - y^2 -------------------
#
# X = {[1 : t : t^2]}.  For diagonal sigma = diag(a_j), a_j = exp(s m_j / 2),
# every quantity on Y_s = sigma X depends on r = |t| only, so integrals against
# the FS form reduce to one-dimensional integrals in u = log r.

def conic_ray(m, s, L=90.0):
    import numpy as np
    from scipy.integrate import quad

    a0, a1, a2 = np.exp(0.5 * s * np.asarray(m, float))

    def parts(u):
        r = np.exp(u)
        r2, r4 = r * r, r ** 4
        W = a0 ** 2 + a1 ** 2 * r2 + a2 ** 2 * r4                # |w|^2
        X = 1 + r2 + r4                                          # |x|^2
        K = a0 ** 2 * a1 ** 2 + 4 * a0 ** 2 * a2 ** 2 * r2 + a1 ** 2 * a2 ** 2 * r4
        dens = (K / W) / W / np.pi                               # FS area per dA
        scal = 2 - 4 * (W / K) ** 3 * (a0 * a1 * a2) ** 2
        H = (m[0] * a0 ** 2 + m[1] * a1 ** 2 * r2 + m[2] * a2 ** 2 * r4) / W
        grad2 = r4 / a0 ** 2 + 4 * r2 / a1 ** 2 + 1 / a2 ** 2
        norm2 = 1 / (a0 * a2) ** 2 + 1 / a1 ** 4
        psi = np.log(grad2 / (norm2 * W))
        phi_y = np.log(W / X)
        # on X (s = 0 form) with phi_s pulled back
        dens_x = ((1 + 4 * r2 + r4) / X) / X / np.pi
        # radial derivative of phi in r, |d phi / dt|^2 = phi_r^2 / 4
        phi_r = (2 * a1 ** 2 * r + 4 * a2 ** 2 * r ** 3) / W - (2 * r + 4 * r ** 3) / X
        jd = phi_r ** 2 / 4 / np.pi
        return dict(vol=dens, scal=scal * dens, hdot=H * dens, hdot_scal=H * scal * dens,
                    psi=psi * dens, phi_y=phi_y * dens, phi_x=phi_y * dens_x, jd=jd)

    keys = list(parts(0.0))
    # breakpoints at the scales where the dominant coordinate changes
    pts = sorted({float(np.log(a0 / a1)), float(0.5 * np.log(a0 / a2)),
                  float(np.log(a1 / a2)), 0.0})
    pts = [p for p in pts if -L < p < L]
    out = {}
    for k in keys:
        f = lambda u, k=k: parts(u)[k] * 2 * np.pi * np.exp(2 * u)
        edges = [-L] + pts + [L]
        out[k] = sum(quad(f, lo, hi, limit=400, epsabs=1e-13, epsrel=1e-12)[0]
                     for lo, hi in zip(edges, edges[1:]))
    V = 2.0
    mu = out["scal"] / out["vol"]
    res = {
        "vol": out["vol"], "scal": out["scal"], "mu": mu,
        "dnu": -(out["hdot_scal"] - mu * out["hdot"]) / out["vol"],
        "psi_s": out["psi"],
        "I": (out["phi_x"] - out["phi_y"]) / V,
        "J": 0.5 * out["jd"] / V,
    }
    r = np.exp(np.linspace(-L, L, 20001))
    phi = np.log((a0 ** 2 + a1 ** 2 * r ** 2 + a2 ** 2 * r ** 4) / (1 + r ** 2 + r ** 4))
    ends = [s * m[0], s * m[2]]
    res["osc"] = max(phi.max(), *ends) - min(phi.min(), *ends)
    return res
