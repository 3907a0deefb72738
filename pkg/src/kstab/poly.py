"""Exact polynomial arithmetic over the rationals.

Coefficients are ``fractions.Fraction`` throughout; nothing in this module
ever rounds.  Multivariate polynomials are stored as a mapping from exponent
tuples to nonzero coefficients and are canonically ordered graded-lex.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "FitError",
    "MultiPoly",
    "UniPolyQ",
    "binom_identity",
    "expand_ratio",
    "grlex_key",
    "monomials_of_degree",
    "poly_arith",
    "vandermonde_fit",
]


class FitError(ValueError):
    """A surplus sample disagrees with the interpolating polynomial."""


def grlex_key(alpha: Sequence[int]) -> tuple:
    return (sum(alpha), tuple(alpha))


def monomials_of_degree(nvars: int, m: int) -> list[tuple[int, ...]]:
    """All exponent vectors of total degree ``m``, in decreasing lex order."""
    if nvars == 1:
        return [(m,)]
    out = []
    for a in range(m, -1, -1):
        for rest in monomials_of_degree(nvars - 1, m - a):
            out.append((a,) + rest)
    return out


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"inexact coefficient {c!r}; use int, str or Fraction")


class MultiPoly:
    """Polynomial in ``nvars`` variables with rational coefficients."""

    __slots__ = ("_terms", "nvars", "_hash")

    def __init__(self, terms: Mapping[Sequence[int], object] | None, nvars: int):
        clean: dict[tuple[int, ...], Fraction] = {}
        for alpha, c in (terms or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != nvars:
                raise ValueError(f"exponent {alpha} does not have {nvars} entries")
            if any(a < 0 for a in alpha):
                raise ValueError(f"negative exponent in {alpha}")
            c = _frac(c)
            if c:
                clean[alpha] = clean.get(alpha, Fraction(0)) + c
                if not clean[alpha]:
                    del clean[alpha]
        order = sorted(clean, key=grlex_key, reverse=True)
        self._terms = {a: clean[a] for a in order}
        self.nvars = nvars
        self._hash = None

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, nvars: int) -> "MultiPoly":
        return cls({}, nvars)

    @classmethod
    def constant(cls, c, nvars: int) -> "MultiPoly":
        return cls({(0,) * nvars: c}, nvars)

    @classmethod
    def variable(cls, i: int, nvars: int) -> "MultiPoly":
        alpha = [0] * nvars
        alpha[i] = 1
        return cls({tuple(alpha): 1}, nvars)

    @classmethod
    def monomial(cls, alpha: Sequence[int], c=1) -> "MultiPoly":
        return cls({tuple(alpha): c}, len(alpha))

    # -- inspection ----------------------------------------------------
    @property
    def terms(self) -> dict[tuple[int, ...], Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(a) for a in self._terms)

    def is_homogeneous(self) -> bool:
        return len({sum(a) for a in self._terms}) <= 1

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def leading(self, key=grlex_key) -> tuple[tuple[int, ...], Fraction]:
        if not self._terms:
            raise ValueError("zero polynomial has no leading term")
        alpha = max(self._terms, key=key)
        return alpha, self._terms[alpha]

    def monic(self, key=grlex_key) -> "MultiPoly":
        _, c = self.leading(key)
        return self.scale(1 / c)

    # -- arithmetic ----------------------------------------------------
    def _check(self, other: "MultiPoly") -> None:
        if not isinstance(other, MultiPoly):
            raise TypeError(f"expected MultiPoly, got {type(other).__name__}")
        if other.nvars != self.nvars:
            raise ValueError(
                f"variable count mismatch: {self.nvars} vs {other.nvars}")

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        self._check(other)
        out = dict(self._terms)
        for a, c in other._terms.items():
            out[a] = out.get(a, 0) + c
        return MultiPoly(out, self.nvars)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly({a: -c for a, c in self._terms.items()}, self.nvars)

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        self._check(other)
        return self + (-other)

    def __mul__(self, other) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            return self.scale(other)
        self._check(other)
        out: dict[tuple[int, ...], Fraction] = {}
        for a, ca in self._terms.items():
            for b, cb in other._terms.items():
                ab = tuple(x + y for x, y in zip(a, b))
                out[ab] = out.get(ab, 0) + ca * cb
        return MultiPoly(out, self.nvars)

    def __rmul__(self, other) -> "MultiPoly":
        return self.scale(other)

    def __pow__(self, k: int) -> "MultiPoly":
        out = MultiPoly.constant(1, self.nvars)
        for _ in range(k):
            out = out * self
        return out

    def scale(self, c) -> "MultiPoly":
        c = _frac(c)
        return MultiPoly({a: c * v for a, v in self._terms.items()}, self.nvars)

    def mul_monomial(self, beta: Sequence[int], c=1) -> "MultiPoly":
        c = _frac(c)
        return MultiPoly(
            {tuple(x + y for x, y in zip(a, beta)): c * v
             for a, v in self._terms.items()}, self.nvars)

    def diff(self, i: int) -> "MultiPoly":
        out = {}
        for a, c in self._terms.items():
            if a[i]:
                b = list(a)
                b[i] -= 1
                out[tuple(b)] = c * a[i]
        return MultiPoly(out, self.nvars)

    def substitute_scaled(self, scales: Sequence) -> "MultiPoly":
        """Return ``f(c_0 x_0, ..., c_N x_N)`` for rational ``c_i``."""
        scales = [_frac(c) for c in scales]
        out = {}
        for a, c in self._terms.items():
            v = c
            for e, s in zip(a, scales):
                v *= s ** e
            out[a] = v
        return MultiPoly(out, self.nvars)

    # -- numerics ------------------------------------------------------
    def coefficient_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Exponent matrix (terms x vars) and float coefficient vector."""
        if not self._terms:
            return np.zeros((0, self.nvars), dtype=int), np.zeros(0)
        exps = np.array(list(self._terms), dtype=int)
        coefs = np.array([float(c) for c in self._terms.values()])
        return exps, coefs

    def __call__(self, *point):
        if len(point) == 1 and len(point[0]) == self.nvars:
            point = tuple(point[0])
        if len(point) != self.nvars:
            raise ValueError(f"need {self.nvars} coordinates")
        if all(isinstance(p, (int, Fraction)) for p in point):
            total = Fraction(0)
            for a, c in self._terms.items():
                v = c
                for x, e in zip(point, a):
                    v *= Fraction(x) ** e
                total += v
            return total
        total = 0
        for a, c in self._terms.items():
            v = float(c)
            for x, e in zip(point, a):
                v = v * x ** e
            total = total + v
        return total

    # -- protocol --------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, tuple(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"MultiPoly({self.to_string()!r}, nvars={self.nvars})"

    def to_string(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = [f"x{i}" for i in range(self.nvars)]
        if not self._terms:
            return "0"
        parts = []
        for a, c in self._terms.items():
            mono = "*".join(
                n if e == 1 else f"{n}^{e}" for n, e in zip(names, a) if e)
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            parts.append((sign, body))
        first_sign, first = parts[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text


def poly_arith(a: MultiPoly, b: MultiPoly, op: str) -> MultiPoly:
    """Apply ``op`` in {"add", "sub", "mul"} to two polynomials."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


class UniPolyQ:
    """Univariate polynomial in ``m``; ``coeffs[k]`` multiplies ``m**k``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [_frac(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, k: int) -> Fraction:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return Fraction(0)

    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __call__(self, m):
        total = Fraction(0) if isinstance(m, (int, Fraction)) else 0.0
        for c in reversed(self.coeffs):
            total = total * m + c
        return total

    def __add__(self, other: "UniPolyQ") -> "UniPolyQ":
        n = max(len(self.coeffs), len(other.coeffs))
        return UniPolyQ(self.coeff(k) + other.coeff(k) for k in range(n))

    def __neg__(self) -> "UniPolyQ":
        return UniPolyQ(-c for c in self.coeffs)

    def __sub__(self, other: "UniPolyQ") -> "UniPolyQ":
        return self + (-other)

    def __mul__(self, other) -> "UniPolyQ":
        if not isinstance(other, UniPolyQ):
            c = _frac(other)
            return UniPolyQ(c * x for x in self.coeffs)
        if self.is_zero() or other.is_zero():
            return UniPolyQ()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return UniPolyQ(out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, UniPolyQ):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"UniPolyQ({[str(c) for c in self.coeffs]})"

    def to_string(self, var: str = "m") -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
            mag = abs(c)
            body = mono if (mono and mag == 1) else (
                f"{mag}*{mono}" if mono else str(mag))
            parts.append(("-" if c < 0 else "+", body))
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for s, b in parts[1:]:
            text += f" {s} {b}"
        return text


def _solve_exact(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Gaussian elimination over the rationals for a square nonsingular system."""
    n = len(A)
    M = [list(row) + [rhs] for row, rhs in zip(A, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular system")
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [v / p for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def vandermonde_fit(samples: Sequence[tuple[int, object]], degree: int) -> UniPolyQ:
    """Interpolate the first ``degree + 1`` samples exactly, validate the rest.

    Raises ``FitError`` if a surplus sample is off the fitted polynomial,
    which for Hilbert-type data means the samples start below the
    regularity index and larger ``m`` should be used.
    """
    if degree < 0:
        raise ValueError("degree must be non-negative")
    pts = [(int(m), _frac(v)) for m, v in samples]
    if len(pts) < degree + 1:
        raise ValueError(f"need at least {degree + 1} samples, got {len(pts)}")
    ms = [m for m, _ in pts]
    if len(set(ms)) != len(ms):
        raise ValueError("sample abscissae must be distinct")
    head = pts[: degree + 1]
    A = [[Fraction(m) ** k for k in range(degree + 1)] for m, _ in head]
    coeffs = _solve_exact(A, [v for _, v in head])
    p = UniPolyQ(coeffs)
    for m, v in pts[degree + 1:]:
        if p(Fraction(m)) != v:
            raise FitError(
                f"insufficient regularity: sample at m={m} is {v} but the fit "
                f"gives {p(Fraction(m))}; sample at larger m")
    return p


def expand_ratio(w: UniPolyQ, p: UniPolyQ, order: int) -> list[Fraction]:
    """Coefficients ``F_0..F_order`` of ``w(m) / (m p(m))`` in powers of ``1/m``."""
    if p.is_zero():
        raise ZeroDivisionError("denominator polynomial is zero")
    n = p.degree()
    if w.degree() > n + 1:
        raise ValueError(f"deg w = {w.degree()} exceeds deg p + 1 = {n + 1}")
    # with x = 1/m both sides are m^(n+1) times a power series in x
    A = [w.coeff(n + 1 - j) for j in range(order + 1)]
    B = [p.coeff(n - j) for j in range(order + 1)]
    out: list[Fraction] = []
    for k in range(order + 1):
        acc = A[k] - sum((B[j] * out[k - j] for j in range(1, k + 1)), Fraction(0))
        out.append(acc / B[0])
    return out


def binom_identity(n: int, i: int) -> int:
    """``sum_j (-1)^j C(n+1, j) (n+1-2j)^i`` as an exact integer."""
    if n < 0 or i < 0:
        raise ValueError("n and i must be non-negative")
    return sum((-1) ** j * comb(n + 1, j) * (n + 1 - 2 * j) ** i
               for j in range(n + 2))
