from fractions import Fraction
from itertools import product
from math import factorial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kstab.poly import (FitError, MultiPoly, UniPolyQ, binom_identity, expand_ratio,
                        poly_arith, vandermonde_fit)

from conftest import poly

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=30)


@st.composite
def homogeneous_polys(draw, nvars=3, max_deg=3):
    deg = draw(st.integers(0, max_deg))
    mons = [a for a in product(range(deg + 1), repeat=nvars) if sum(a) == deg]
    chosen = draw(st.lists(st.sampled_from(mons), min_size=1, max_size=4, unique=True))
    coefs = draw(st.lists(fractions.filter(bool), min_size=len(chosen), max_size=len(chosen)))
    return MultiPoly(dict(zip(chosen, coefs)), nvars)


def test_arith_examples():
    xz = poly({(1, 0, 1): 1})
    assert poly_arith(xz, xz, "mul") == poly({(2, 0, 2): 1})
    f = poly({(1, 0, 1): 1, (0, 2, 0): -1})
    assert poly_arith(f, -f, "add").is_zero()
    a = poly({(1, 0, 0): 1, (0, 1, 0): -1})
    b = poly({(1, 0, 0): 1, (0, 1, 0): 1})
    assert poly_arith(a, b, "mul") == poly({(2, 0, 0): 1, (0, 2, 0): -1})


def test_arith_rejects_mismatched_rings():
    with pytest.raises(ValueError):
        poly_arith(poly({(1, 0, 0): 1}), MultiPoly({(1, 0): 1}, 2), "add")


@given(homogeneous_polys(), homogeneous_polys())
@settings(max_examples=60, deadline=None)
def test_add_sub_roundtrip(a, b):
    assert (a + b) - b == a


@given(homogeneous_polys(), homogeneous_polys(), homogeneous_polys())
@settings(max_examples=40, deadline=None)
def test_ring_axioms(a, b, c):
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert (a * b).degree() == a.degree() + b.degree()
    assert (a * b).is_homogeneous()


@given(fractions, fractions)
def test_rational_exactness(a, b):
    assert (a + b) - b == a
    assert isinstance(a + b, Fraction)


def test_string_form_is_stable():
    f = poly({(1, 0, 1): Fraction(3, 4), (0, 2, 0): -1})
    assert f.to_string(["x", "y", "z"]) == "3/4*x*z - y^2"


def test_vandermonde_examples():
    assert vandermonde_fit([(1, 3), (2, 5), (3, 7)], 1) == UniPolyQ([1, 2])
    assert vandermonde_fit([(0, 0), (1, 0), (2, 0)], 2).is_zero()
    # Hilbert samples of (x^2) in P^2: exponent of x at most 1
    samples = [(m, (m + 1) + m) for m in range(1, 5)]
    assert vandermonde_fit(samples, 1) == UniPolyQ([1, 2])


def test_vandermonde_surplus_rejection():
    with pytest.raises(FitError, match="larger m"):
        vandermonde_fit([(1, 1), (2, 2), (3, 4)], 1)


@given(st.lists(fractions, min_size=1, max_size=5), st.integers(0, 3))
@settings(max_examples=60, deadline=None)
def test_vandermonde_reproduces_samples(coeffs, extra):
    p = UniPolyQ(coeffs)
    deg = max(p.degree(), 0)
    samples = [(m, p(Fraction(m))) for m in range(deg + 1 + extra)]
    fit = vandermonde_fit(samples, deg)
    assert all(fit(Fraction(m)) == v for m, v in samples)


def test_expand_ratio_examples():
    assert expand_ratio(UniPolyQ([0, 1, -1]), UniPolyQ([1, 2]), 1) == [Fraction(-1, 2), Fraction(3, 4)]
    assert expand_ratio(UniPolyQ([]), UniPolyQ([1, 2]), 2) == [0, 0, 0]
    assert expand_ratio(UniPolyQ([0, 0, 1]), UniPolyQ([0, 1]), 1) == [1, 0]
    with pytest.raises(ZeroDivisionError):
        expand_ratio(UniPolyQ([1]), UniPolyQ([]), 1)


@given(st.lists(fractions, min_size=3, max_size=3),
       st.lists(fractions, min_size=2, max_size=2).filter(lambda c: c[-1] != 0))
@settings(max_examples=60, deadline=None)
def test_expand_ratio_series_identity(wc, pc):
    """(sum_k F_k m^-k) * m p(m) reproduces w up to the truncation order."""
    w, p = UniPolyQ(wc), UniPolyQ(pc)
    order = 3
    F = expand_ratio(w, p, order)
    n = p.degree()
    # coefficient of m^(n+1-j) in m p(m) * sum F_k m^-k, for j <= order
    for j in range(order + 1):
        got = sum(F[k] * p.coeff(n - (j - k)) for k in range(j + 1))
        assert got == w.coeff(n + 1 - j)


def test_binom_identity_examples():
    assert binom_identity(1, 2) == 8
    assert binom_identity(1, 1) == 0
    assert binom_identity(1, 3) == 0
    with pytest.raises(ValueError):
        binom_identity(-1, 0)


def test_binom_identity_table():
    for n in range(9):
        for i in range(n + 3):
            expected = factorial(n + 1) * 2 ** (n + 1) if i == n + 1 else 0
            assert binom_identity(n, i) == expected
