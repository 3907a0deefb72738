from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kstab.futaki import donaldson_futaki, weight_polynomial
from kstab.ideal import Ideal, OneParamSubgroup, hilbert_data, initial_ideal
from kstab.poly import UniPolyQ

import oracles
from conftest import poly

A = OneParamSubgroup((2, -1, -1))
B = OneParamSubgroup((-2, 1, 1))


def enumerated(gens, lam, ms=range(1, 11)):
    return [(m, oracles.weight_value(gens, lam.weights, m)) for m in ms]


@pytest.mark.parametrize("lam, w", [(B, [0, -1, 1]), (A, [0, Fraction(-1, 2), Fraction(1, 2)])])
def test_conic_weight_polynomials(conic, lam, w):
    wp = weight_polynomial(Ideal([conic]), lam)
    assert wp.poly == UniPolyQ(w)
    for m, v in enumerated([conic], lam):
        assert wp(m) == v


def test_oracle_fits_match_closed_forms(conic):
    for lam, (F0, F1) in ((B, (Fraction(1, 2), Fraction(-3, 4))),
                          (A, (Fraction(1, 4), Fraction(-3, 8)))):
        w = oracles.lagrange_coeffs(enumerated([conic], lam, range(1, 4)))
        assert oracles.futaki_pair(w, [1, 2]) == (F0, F1)
        rep = donaldson_futaki(Ideal([conic]), lam)
        assert (rep.F0, rep.F1) == (F0, F1)


def test_report_contents(conic):
    rep = donaldson_futaki(Ideal([conic]), B)
    d = rep.as_dict()
    assert d["F1"] == "-3/4" and d["F0"] == "1/2"
    assert d["limit_reduced"] == "non-reduced"
    assert d["hilbert_poly"] == ["1/1", "2/1"]
    assert donaldson_futaki(Ideal([conic]), A).reduced == "reduced"


def test_trivial_lambda(conic, fermat):
    for f in (conic, fermat):
        rep = donaldson_futaki(Ideal([f]), OneParamSubgroup((0, 0, 0)))
        assert rep.F0 == 0 and rep.F1 == 0 and rep.weight.poly.is_zero()


@given(st.integers(2, 5).flatmap(
    lambda n: st.lists(st.integers(-3, 3), min_size=n - 1, max_size=n - 1)))
@settings(max_examples=15, deadline=None)
def test_zero_ideal_has_zero_futaki(w):
    lam = OneParamSubgroup(tuple(w) + (-sum(w),))
    rep = donaldson_futaki(Ideal([], len(lam)), lam)
    assert rep.F1 == 0 and rep.weight.poly.is_zero()


@pytest.mark.parametrize("k", [2, 3])
def test_scaling(conic, k):
    for lam in (A, B):
        base = donaldson_futaki(Ideal([conic]), lam)
        scaled = donaldson_futaki(Ideal([conic]), lam.scaled(k))
        assert (scaled.F0, scaled.F1) == (k * base.F0, k * base.F1)


def test_m0_shift_invariance(conic):
    I = Ideal([conic])
    for lam in (A, B):
        ref = weight_polynomial(I, lam)
        assert weight_polynomial(I, lam, m0=7).poly == ref.poly
        assert weight_polynomial(I, lam, m0=20).poly == ref.poly


def test_lambda_fixed_antisymmetry():
    """For an ideal fixed by both lambda and -lambda the weights are opposite."""
    I = Ideal([poly({(1, 0, 1): 1, (0, 2, 0): -3})])
    lam = OneParamSubgroup((1, 0, -1))
    assert initial_ideal(I, lam).same_ideal(I)
    assert initial_ideal(I, -lam).same_ideal(I)
    assert weight_polynomial(I, lam).poly == -weight_polynomial(I, -lam).poly


def test_sign_convention_flip(conic):
    dual = weight_polynomial(Ideal([conic]), A)
    func = weight_polynomial(Ideal([conic]), A, convention="function")
    assert func.poly == -dual.poly
    with pytest.raises(ValueError):
        weight_polynomial(Ideal([conic]), A, convention="other")


def test_pencil_against_oracle():
    I = Ideal([poly({(2, 0, 0): 1, (0, 1, 1): -1}), poly({(1, 1, 0): 1})])
    lam = OneParamSubgroup((1, 2, -3))
    wp = weight_polynomial(I, lam)
    hd = hilbert_data(initial_ideal(I, lam))
    for m, v in enumerated(I.generators, lam, range(hd.regularity_start + 1, 9)):
        assert wp(m) == v


def test_sampled_values_are_raw_sums(fermat):
    wp = weight_polynomial(Ideal([fermat]), OneParamSubgroup((1, 1, -2)))
    for m, v in wp.samples:
        assert v == oracles.weight_value([fermat], (1, 1, -2), m)
