"""Homogeneous ideals, weighted Groebner bases, flat limits and Hilbert data."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Iterable, Sequence

from .poly import FitError, MultiPoly, UniPolyQ, monomials_of_degree, vandermonde_fit

__all__ = [
    "HilbertData",
    "Ideal",
    "OneParamSubgroup",
    "buchberger_weighted",
    "hilbert_data",
    "hilbert_function",
    "initial_form",
    "initial_ideal",
    "is_radical_monomial",
    "leading_monomials",
    "standard_monomials",
]

MAX_DEGREE = 64


@dataclass(frozen=True)
class OneParamSubgroup:
    """Diagonal 1-PS ``t -> diag(t^m_0, ..., t^m_N)`` with zero weight sum."""

    weights: tuple[int, ...]

    def __post_init__(self):
        w = tuple(int(m) for m in self.weights)
        object.__setattr__(self, "weights", w)
        if sum(w) != 0:
            raise ValueError(f"weights {w} do not sum to zero")

    @classmethod
    def trivial(cls, nvars: int) -> "OneParamSubgroup":
        return cls((0,) * nvars)

    def __len__(self) -> int:
        return len(self.weights)

    def __neg__(self) -> "OneParamSubgroup":
        return OneParamSubgroup(tuple(-m for m in self.weights))

    def scaled(self, k: int) -> "OneParamSubgroup":
        return OneParamSubgroup(tuple(k * m for m in self.weights))

    def pairing(self, alpha: Sequence[int]) -> int:
        return sum(m * a for m, a in zip(self.weights, alpha))

    def is_trivial(self) -> bool:
        return not any(self.weights)

    def spread(self) -> int:
        return max(self.weights) - min(self.weights)


def _order_key(lam: OneParamSubgroup):
    """Monomial order: lambda-weight first, graded-lex tiebreak."""
    def key(alpha):
        return (lam.pairing(alpha), sum(alpha), tuple(alpha))
    return key


# -- dict-level helpers used by Buchberger ------------------------------
def _lead(p: dict, key):
    a = max(p, key=key)
    return a, p[a]


def _divides(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _sub_scaled_shift(p: dict, q: dict, c: Fraction, shift) -> None:
    """In place ``p -= c * x^shift * q``."""
    for a, v in q.items():
        b = tuple(x + y for x, y in zip(a, shift))
        nv = p.get(b, 0) - c * v
        if nv:
            p[b] = nv
        else:
            p.pop(b, None)


def _reduce(p: dict, basis: list[dict], leads: list, key) -> dict:
    """Full normal form of ``p`` modulo ``basis``."""
    p = dict(p)
    rem: dict = {}
    while p:
        a, c = _lead(p, key)
        for g, (la, lc) in zip(basis, leads):
            if _divides(la, a):
                shift = tuple(x - y for x, y in zip(a, la))
                _sub_scaled_shift(p, g, c / lc, shift)
                break
        else:
            rem[a] = c
            del p[a]
    return rem


def _spoly(f: dict, g: dict, lf, lg, key) -> dict:
    (a, ca), (b, cb) = lf, lg
    lcm = tuple(max(x, y) for x, y in zip(a, b))
    out: dict = {}
    _sub_scaled_shift(out, f, -1 / ca, tuple(x - y for x, y in zip(lcm, a)))
    _sub_scaled_shift(out, g, 1 / cb, tuple(x - y for x, y in zip(lcm, b)))
    return out


def _reduced_basis(polys: list[dict], key) -> list[dict]:
    """Buchberger with the coprime criterion, then interreduction."""
    G: list[dict] = []
    L: list = []
    for p in polys:
        if p:
            G.append(dict(p))
            L.append(_lead(p, key))
    pairs = [(i, j) for j in range(len(G)) for i in range(j)]
    while pairs:
        # lowest-degree lcm first keeps intermediate swell down
        pairs.sort(key=lambda ij: sum(max(x, y) for x, y in zip(L[ij[0]][0], L[ij[1]][0])))
        i, j = pairs.pop(0)
        a, b = L[i][0], L[j][0]
        if all(x == 0 or y == 0 for x, y in zip(a, b)):
            continue
        h = _reduce(_spoly(G[i], G[j], L[i], L[j], key), G, L, key)
        if h:
            G.append(h)
            L.append(_lead(h, key))
            k = len(G) - 1
            pairs.extend((m, k) for m in range(k))
    # minimalize
    keep = []
    for i, (a, _) in enumerate(L):
        if any(j != i and _divides(L[j][0], a) and (L[j][0] != a or j < i)
               for j in range(len(G))):
            continue
        keep.append(i)
    G = [G[i] for i in keep]
    L = [L[i] for i in keep]
    # interreduce and normalize
    out = []
    for i in range(len(G)):
        others = [G[j] for j in range(len(G)) if j != i]
        oleads = [L[j] for j in range(len(G)) if j != i]
        a, c = L[i]
        tail = {b: v for b, v in G[i].items() if b != a}
        r = _reduce(tail, others, oleads, key)
        r[a] = c
        lc = r[a]
        out.append({b: v / lc for b, v in r.items()})
    out.sort(key=lambda p: key(_lead(p, key)[0]))
    return out


@dataclass(frozen=True)
class Ideal:
    """Homogeneous ideal given by nonzero homogeneous generators."""

    generators: tuple[MultiPoly, ...]
    nvars: int
    _canon: list = field(default_factory=list, compare=False, repr=False)

    def __init__(self, generators: Iterable[MultiPoly], nvars: int | None = None):
        gens = tuple(generators)
        if nvars is None:
            if not gens:
                raise ValueError("nvars required for the zero ideal")
            nvars = gens[0].nvars
        for g in gens:
            if g.nvars != nvars:
                raise ValueError("generators live in different rings")
            if g.is_zero():
                raise ValueError("zero generator")
            if not g.is_homogeneous():
                raise ValueError(f"generator {g.to_string()} is not homogeneous")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "_canon", [])

    def is_zero(self) -> bool:
        return not self.generators

    def is_principal(self) -> bool:
        return len(self.generators) == 1

    def is_monomial(self) -> bool:
        return all(g.is_monomial() for g in self.generators)

    def canonical_basis(self) -> tuple[MultiPoly, ...]:
        """Reduced grlex Groebner basis; identifies the ideal."""
        if not self._canon:
            basis = buchberger_weighted(self, OneParamSubgroup.trivial(self.nvars))
            self._canon.append(basis.generators)
        return self._canon[0]

    def same_ideal(self, other: "Ideal") -> bool:
        return self.nvars == other.nvars and self.canonical_basis() == other.canonical_basis()

    def to_strings(self, names=None) -> list[str]:
        return [g.to_string(names) for g in self.generators]


def initial_form(f: MultiPoly, lam: OneParamSubgroup) -> MultiPoly:
    """Terms of ``f`` of maximal lambda-weight (the flat-limit equation)."""
    if f.is_zero():
        raise ValueError("initial form of the zero polynomial")
    if len(lam) != f.nvars:
        raise ValueError("weight vector length does not match polynomial")
    top = max(lam.pairing(a) for a, _ in f.items())
    return MultiPoly({a: c for a, c in f.items() if lam.pairing(a) == top}, f.nvars)


def buchberger_weighted(ideal: Ideal, lam: OneParamSubgroup) -> Ideal:
    """Reduced Groebner basis for the lambda-weighted, grlex-refined order."""
    if len(lam) != ideal.nvars:
        raise ValueError("weight vector length does not match ring")
    key = _order_key(lam)
    basis = _reduced_basis([dict(g.items()) for g in ideal.generators], key)
    return Ideal([MultiPoly(p, ideal.nvars) for p in basis], ideal.nvars)


def leading_monomials(basis: Ideal, lam: OneParamSubgroup) -> list[tuple[int, ...]]:
    key = _order_key(lam)
    return [g.leading(key)[0] for g in basis.generators]


def initial_ideal(ideal: Ideal, lam: OneParamSubgroup) -> Ideal:
    """Flat limit ``in_lambda(I)`` as the ideal of initial forms of a weighted basis."""
    if ideal.is_zero():
        return ideal
    if ideal.is_principal():
        g = initial_form(ideal.generators[0], lam)
        return Ideal([g.monic()], ideal.nvars)
    basis = buchberger_weighted(ideal, lam)
    return Ideal([initial_form(g, lam).monic() for g in basis.generators], ideal.nvars)


def is_radical_monomial(ideal: Ideal) -> bool:
    """For a monomial ideal: are all minimal generators square-free?"""
    if not ideal.is_monomial():
        raise ValueError("radical check implemented for monomial ideals only")
    mons = [g.leading()[0] for g in ideal.generators]
    minimal = [a for a in mons
               if not any(b != a and _divides(b, a) for b in mons)]
    return all(max(a) <= 1 for a in minimal)


def standard_monomials(leads: Sequence[Sequence[int]], nvars: int, m: int) -> list[tuple[int, ...]]:
    """Degree-``m`` monomials divisible by none of ``leads``."""
    return [a for a in monomials_of_degree(nvars, m)
            if not any(_divides(b, a) for b in leads)]


def _rank_exact(rows: list[dict]) -> int:
    """Rank of sparse rational row vectors by incremental elimination."""
    pivots: dict = {}
    rank = 0
    for row in rows:
        r = dict(row)
        while r:
            col = max(r)
            if col in pivots:
                prow = pivots[col]
                c = r[col]
                for k, v in prow.items():
                    nv = r.get(k, 0) - c * v
                    if nv:
                        r[k] = nv
                    else:
                        r.pop(k, None)
            else:
                c = r[col]
                pivots[col] = {k: v / c for k, v in r.items()}
                rank += 1
                break
    return rank


def hilbert_function(ideal: Ideal, m: int) -> int:
    """Dimension of the degree-``m`` part of the homogeneous coordinate ring."""
    if m < 0:
        raise ValueError("degree must be non-negative")
    N1 = ideal.nvars
    total = comb(m + N1 - 1, N1 - 1)
    if ideal.is_zero():
        return total
    if ideal.is_monomial():
        leads = [g.leading()[0] for g in ideal.generators]
        return len(standard_monomials(leads, N1, m))
    index = {a: i for i, a in enumerate(monomials_of_degree(N1, m))}
    rows = []
    for g in ideal.generators:
        dg = g.degree()
        if dg > m:
            continue
        for beta in monomials_of_degree(N1, m - dg):
            rows.append({index[tuple(x + y for x, y in zip(a, beta))]: c
                         for a, c in g.items()})
    return total - _rank_exact(rows)


@dataclass(frozen=True)
class HilbertData:
    hilbert_poly: UniPolyQ
    dimension: int
    degree: int
    regularity_start: int
    sampled: tuple[tuple[int, int], ...] = ()
    low_degree_mismatch: tuple[int, ...] = ()

    @property
    def mu(self) -> Fraction:
        """Coefficient of ``k^(n-1)`` in the Hilbert polynomial."""
        return self.hilbert_poly.coeff(self.dimension - 1) if self.dimension >= 1 else Fraction(0)


def _fit_window(values, m0: int, degree: int, surplus: int) -> UniPolyQ:
    ms = range(m0, m0 + degree + 1 + surplus)
    return vandermonde_fit([(m, values(m)) for m in ms], degree)


def hilbert_data(ideal: Ideal, m0: int = 1) -> HilbertData:
    """Fit the Hilbert polynomial with surplus validation and doubling ``m0``."""
    cache: dict[int, int] = {}

    def hf(m):
        if m not in cache:
            cache[m] = hilbert_function(ideal, m)
        return cache[m]

    bound = ideal.nvars - 1
    prev = None
    m0 = max(1, int(m0))
    while True:
        if m0 + bound + 2 > MAX_DEGREE:
            raise FitError(f"Hilbert polynomial unstable up to m = {MAX_DEGREE}")
        try:
            fit = _fit_window(hf, m0, bound, 1)
        except FitError:
            fit = None
        if fit is not None and prev is not None and fit == prev[1]:
            P, start = prev[1], prev[0]
            break
        prev = (m0, fit) if fit is not None else None
        m0 = m0 * 2
    if P.is_zero():
        raise ValueError("ideal is irrelevant: Hilbert polynomial vanishes")
    n = P.degree()
    d = P.leading() * factorial(n)
    if d.denominator != 1:
        raise ValueError(f"non-integral degree {d}")
    # walk downward to find where the function starts agreeing with P
    reg = start
    while reg > 0 and hf(reg - 1) == P(reg - 1):
        reg -= 1
    mismatch = tuple(m for m in range(0, reg) if hf(m) != P(m))
    sampled = tuple(sorted(cache.items()))
    return HilbertData(P, n, int(d), reg, sampled, mismatch)
