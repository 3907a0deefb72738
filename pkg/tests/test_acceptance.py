"""Acceptance criteria, one test and one printed pass/fail line each."""

import io
import random
import time
from math import factorial

import numpy as np
import pytest

from kstab.cli import main
from kstab.futaki import donaldson_futaki, weight_polynomial
from kstab.geometry import curve_sample, mu_average
from kstab.ideal import Ideal, OneParamSubgroup, hilbert_function, initial_ideal
from kstab.poly import UniPolyQ, binom_identity
from kstab.raylab import VerifyConfig, slope_fit, verify_asymptotics

import oracles
from conftest import poly, record

CONIC = poly({(1, 0, 1): 1, (0, 2, 0): -1})
FERMAT = poly({(3, 0, 0): 1, (0, 3, 0): 1, (0, 0, 3): 1})
LINE = poly({(1, 0, 0): 1})
A = OneParamSubgroup((2, -1, -1))
B = OneParamSubgroup((-2, 1, 1))
WINDOW = (-14.0, -9.0)


@pytest.fixture(scope="module")
def reports():
    out = {}
    for name, lam in (("A", A), ("B", B)):
        t0 = time.perf_counter()
        rep = verify_asymptotics(CONIC, lam, VerifyConfig(window=WINDOW))
        out[name] = (rep, time.perf_counter() - t0)
    return out


def test_criterion_1_identity():
    t0 = time.perf_counter()
    ok = all(binom_identity(n, i) == (factorial(n + 1) * 2 ** (n + 1) if i == n + 1 else 0)
             for n in range(9) for i in range(n + 3))
    dt = time.perf_counter() - t0
    ok = record(1, ok and dt < 1.0, f"binom_identity exact for n <= 8, 0 <= i <= n+2 ({dt:.3f} s)")
    assert ok


def test_criterion_2_exact_futaki():
    t0 = time.perf_counter()
    I = Ideal([CONIC])
    rb = donaldson_futaki(I, B)
    ra = donaldson_futaki(I, A)
    checks = [
        rb.limit.same_ideal(Ideal([poly({(0, 2, 0): 1})])),
        rb.hilbert.hilbert_poly == UniPolyQ([1, 2]),
        rb.weight.poly == UniPolyQ([0, -1, 1]),
        (rb.F0, rb.F1) == (0.5, -0.75),
        ra.limit.same_ideal(Ideal([poly({(1, 0, 1): 1})])),
        ra.weight.poly == UniPolyQ([0, "-1/2", "1/2"]),
        ra.F1 == -0.375,
        donaldson_futaki(I, OneParamSubgroup((0, 0, 0))).F1 == 0,
    ]
    # enumeration oracle, m <= 10, on both degenerations
    for lam in (A, B):
        wp = weight_polynomial(I, lam)
        checks.append(all(wp(m) == oracles.weight_value([CONIC], lam.weights, m)
                          for m in range(1, 11)))
    rng = random.Random(20240611)
    for N in range(1, 5):
        for _ in range(2):
            w = [rng.randint(-4, 4) for _ in range(N)]
            lam = OneParamSubgroup(tuple(w) + (-sum(w),))
            checks.append(donaldson_futaki(Ideal([], N + 1), lam).F1 == 0)
    dt = time.perf_counter() - t0
    ok = record(2, all(checks) and dt < 10,
                f"conic F1 = {rb.F1} (double line), {ra.F1} (two lines); "
                f"{sum(checks)}/{len(checks)} checks ({dt:.2f} s)")
    assert ok


def test_criterion_3_flatness():
    rng = random.Random(7)
    cases = [(Ideal([CONIC]), A), (Ideal([CONIC]), B)]
    pencil = Ideal([poly({(2, 0, 0): 1, (0, 1, 1): -1}), poly({(1, 1, 0): 1})])
    for _ in range(3):
        w = [rng.randint(-5, 5) for _ in range(2)]
        cases.append((pencil, OneParamSubgroup(tuple(w) + (-sum(w),))))
    ok = True
    for I, lam in cases:
        lim = initial_ideal(I, lam)
        ok &= all(hilbert_function(lim, m) == hilbert_function(I, m) for m in range(9))
    lams = [c[1].weights for c in cases[2:]]
    ok = record(3, ok, f"Hilbert functions of limits equal originals for m <= 8; pencil weights {lams}")
    assert ok


def test_criterion_4_geometry_at_zero():
    parts, ok = [], True
    for f, d in ((LINE, 1), (CONIC, 2), (FERMAT, 3)):
        t0 = time.perf_counter()
        v = curve_sample(f).volume
        dt = time.perf_counter() - t0
        ok &= abs(v / d - 1) <= 5e-3 and dt < 60
        parts.append(f"V(d={d}) = {v:.6f}")
    t0 = time.perf_counter()
    mu_c, _ = mu_average(CONIC)
    mu_f, _ = mu_average(FERMAT)
    dt = time.perf_counter() - t0
    gb_c, gb_f = 2 * mu_c, 3 * mu_f
    ok &= abs(gb_c - 2) <= 0.04 and abs(gb_f) <= 0.02 and abs(mu_c - 1) <= 0.02 and dt < 120
    parts.append(f"int Scal = {gb_c:.6f} (conic), {gb_f:.2e} (cubic); mu(conic) = {mu_c:.6f}")
    ok = record(4, ok, "; ".join(parts))
    assert ok


def test_criterion_5_j_equals_half_i(reports):
    worst, ok = 0.0, True
    for name in ("A", "B"):
        rep, _ = reports[name]
        for r in rep.samples:
            if r.s in (0.0, -2.0, -6.0, -10.0):
                err = abs(r.j_func - r.i_func / 2)
                bound = 1e-3 * abs(r.i_func / 2) + r.extras.get("i_err", 0) + r.extras.get("j_err", 0)
                ok &= err <= bound
                if r.i_func:
                    worst = max(worst, err / abs(r.i_func / 2))
    ok = record(5, ok, f"J = I/2 at s in {{0,-2,-6,-10}} for both lambdas; worst rel. dev. {worst:.1e}")
    assert ok


def test_criterion_6_asymptotic_identity(reports):
    ra, ta = reports["A"]
    rb, tb = reports["B"]
    ok_a = (abs(ra.F1_numerical / float(ra.futaki.F1) - 1) <= 0.10
            and abs(ra.fit_psi.slope) <= 0.02 and ta < 600)
    ok_b = (abs(rb.F1_numerical / float(rb.futaki.F1) - 1) <= 0.10
            and rb.fit_psi.slope > 0.05 and tb < 600)
    detail = (f"(2,-1,-1): 4nu-2Psi slope {ra.F1_numerical:.4f} vs F1 {ra.futaki.F1} "
              f"(ratio {ra.F1_ratio:.4f}), psi {ra.fit_psi.slope:.2e}, {ta:.0f} s; "
              f"(-2,1,1): {rb.F1_numerical:.4f} vs {rb.futaki.F1} "
              f"(ratio {rb.F1_ratio:.4f}), psi {rb.fit_psi.slope:.4f}, {tb:.0f} s")
    ok = record(6, ok_a and ok_b, detail)
    assert ok


def test_criterion_7_oscillation(reports):
    ok, parts = True, []
    for name, lam in (("A", A), ("B", B)):
        rep, _ = reports[name]
        o = [r.osc for r in rep.samples]          # samples ordered by increasing |s|
        ok &= min(o) >= 0 and all(b >= a - 1e-9 for a, b in zip(o, o[1:]))
        fit = slope_fit([(-r.s, r.osc) for r in rep.samples], window=(9.0, 14.0))
        need = 0.5 * lam.spread() * 0.9
        ok &= fit.slope >= need
        parts.append(f"{lam.weights}: growth {fit.slope:.4f} per unit |s| (need >= {need:.2f})")
    ok = record(7, ok, "; ".join(parts))
    assert ok


def test_criterion_8_determinism(tmp_path):
    argv = ["verify", "--poly", "x*z - y^2", "--lambda", "-2,1,1", "--ladder-depth", "4",
            "--ladder-step", "0.5", "--window", "-4,-2", "--seed", "11"]
    outs = []
    for k in range(2):
        buf = io.StringIO()
        csv_path = tmp_path / f"ladder{k}.csv"
        main(argv + ["--csv", str(csv_path)], stdout=buf)
        outs.append((buf.getvalue().encode(), csv_path.read_bytes()))
    # the reports name their own csv path; compare with it normalised
    a = outs[0][0].replace(b"ladder0.csv", b"ladder.csv")
    b = outs[1][0].replace(b"ladder1.csv", b"ladder.csv")
    ok = record(8, a == b and outs[0][1] == outs[1][1] and len(a) > 1000,
                f"two seeded verify runs: JSON {len(a)} bytes and CSV identical")
    assert ok
