"""Hilbert-point weights and the generalized Futaki invariant of a flat limit."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction

from .ideal import (
    MAX_DEGREE,
    HilbertData,
    Ideal,
    OneParamSubgroup,
    buchberger_weighted,
    hilbert_data,
    initial_ideal,
    is_radical_monomial,
    leading_monomials,
    standard_monomials,
)
from .poly import FitError, UniPolyQ, expand_ratio, vandermonde_fit

__all__ = [
    "FutakiReport",
    "WeightPolynomial",
    "donaldson_futaki",
    "ideal_hash",
    "weight_polynomial",
    "weight_sum",
]

SIGN_CONVENTIONS = ("section-dual", "function")


def _sign(convention: str) -> int:
    if convention in ("section-dual", "dual"):
        return -1
    if convention == "function":
        return 1
    raise ValueError(f"unknown weight sign convention {convention!r}")


@dataclass(frozen=True)
class WeightPolynomial:
    poly: UniPolyQ
    sign_convention: str = "section-dual"
    samples: tuple[tuple[int, Fraction], ...] = ()

    def __call__(self, m):
        return self.poly(m)

    @property
    def leading_pair(self) -> tuple[Fraction, Fraction]:
        """``(a_{n+1}, a_n)`` for ``n = deg - 1``."""
        k = max(self.poly.degree(), 1)
        return self.poly.coeff(k), self.poly.coeff(k - 1)


def weight_sum(leads, lam: OneParamSubgroup, m: int, sign: int = -1) -> int:
    """Signed lambda-weight of the standard monomials of degree ``m``."""
    return sign * sum(lam.pairing(a)
                      for a in standard_monomials(leads, len(lam), m))


def _weight_setup(ideal: Ideal, lam: OneParamSubgroup):
    if len(lam) != ideal.nvars:
        raise ValueError("weight vector length does not match ring")
    if ideal.is_zero():
        return Ideal([], ideal.nvars), []
    basis = buchberger_weighted(ideal, lam)
    return basis, leading_monomials(basis, lam)


def weight_polynomial(ideal: Ideal, lam: OneParamSubgroup, *,
                      convention: str = "section-dual",
                      m0: int | None = None,
                      hdata: HilbertData | None = None) -> WeightPolynomial:
    """Weight of the m-th Hilbert point of the flat limit, as a polynomial in m."""
    sign = _sign(convention)
    _, leads = _weight_setup(ideal, lam)
    if hdata is None:
        hdata = hilbert_data(initial_ideal(ideal, lam))
    degree = hdata.dimension + 1
    start = max(1, hdata.regularity_start) if m0 is None else max(1, int(m0))
    while True:
        if start + degree + 1 > MAX_DEGREE:
            raise FitError(f"weight polynomial unstable up to m = {MAX_DEGREE}")
        samples = [(m, Fraction(weight_sum(leads, lam, m, sign)))
                   for m in range(start, start + degree + 2)]
        try:
            poly = vandermonde_fit(samples, degree)
            break
        except FitError:
            start *= 2
    if convention == "dual":
        convention = "section-dual"
    return WeightPolynomial(poly, convention, tuple(samples))


def ideal_hash(ideal: Ideal) -> str:
    text = ";".join(sorted(g.to_string() for g in ideal.generators))
    return hashlib.sha256(f"{ideal.nvars}|{text}".encode()).hexdigest()[:16]


@dataclass(frozen=True)
class FutakiReport:
    input_hash: str
    lam: OneParamSubgroup
    limit: Ideal
    hilbert: HilbertData
    weight: WeightPolynomial
    F0: Fraction
    F1: Fraction
    reduced: str
    conventions: dict

    def as_dict(self) -> dict:
        def q(x):
            x = Fraction(x)
            return f"{x.numerator}/{x.denominator}"
        return {
            "input_hash": self.input_hash,
            "lambda": list(self.lam.weights),
            "limit_ideal": self.limit.to_strings(),
            "hilbert_poly": [q(c) for c in self.hilbert.hilbert_poly.coeffs],
            "hilbert_poly_text": self.hilbert.hilbert_poly.to_string(),
            "dimension": self.hilbert.dimension,
            "degree": self.hilbert.degree,
            "mu": q(self.hilbert.mu),
            "regularity_start": self.hilbert.regularity_start,
            "weight_poly": [q(c) for c in self.weight.poly.coeffs],
            "weight_poly_text": self.weight.poly.to_string(),
            "F0": q(self.F0),
            "F1": q(self.F1),
            "limit_reduced": self.reduced,
            "conventions": dict(self.conventions),
        }


def donaldson_futaki(ideal: Ideal, lam: OneParamSubgroup, *,
                     convention: str = "section-dual",
                     m0: int | None = None) -> FutakiReport:
    """F0 and F1 from ``w(m) / (m P(m))`` for the flat limit of ``ideal`` under ``lam``."""
    limit = initial_ideal(ideal, lam)
    hd = hilbert_data(limit)
    w = weight_polynomial(ideal, lam, convention=convention, m0=m0, hdata=hd)
    F = expand_ratio(w.poly, hd.hilbert_poly, 1)
    if limit.is_zero():
        reduced = "reduced"
    elif limit.is_monomial():
        reduced = "reduced" if is_radical_monomial(limit) else "non-reduced"
    else:
        reduced = "unknown"
    return FutakiReport(
        input_hash=ideal_hash(ideal),
        lam=lam,
        limit=limit,
        hilbert=hd,
        weight=w,
        F0=F[0],
        F1=F[1],
        reduced=reduced,
        conventions={"weight_sign": w.sign_convention,
                     "limit": "max-weight terms"},
    )
