"""Quadrature on smooth plane curves with the Fubini-Study area form.

A curve ``V(f)`` in P^2 is viewed as a ``d``-sheeted branched cover of a base
P^1 by projecting from a point ``p`` off the curve.  After a real orthogonal
change of frame ``U`` with ``U e_1 = p`` the curve points are ``w = U v`` with
``v = (t, y, 1)`` (chart 0) or ``v = (1, y, t)`` (chart 1), ``|t| <= 1``, and
``y`` one of the ``d`` roots of ``f(U v) = 0``.

Integrals are split with a smooth partition of unity: small disks around the
branch points are integrated in the uniformizing variable
``t = t_b + zeta^2`` (where the sheet sum is smooth), the rest in polar
coordinates on each chart.  Cells are refined by comparing a cell's
Gauss-Legendre value with the sum over its four children.

The FS form is normalized so that a line has area 1; in a base coordinate
``t`` it reads ``(g / pi) dA`` with
``g = (|w|^2 |w'|^2 - |<w', w>|^2) / |w|^4``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .poly import MultiPoly

__all__ = [
    "CurveSampleSet",
    "NodeBatch",
    "PlaneCurve",
    "QuadResult",
    "SingularCurveError",
    "curve_sample",
    "integrate_curve",
    "plucker_scal",
]

FD_KAPPA = 0.05
GL_ORDER = 5
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W

_CENTERS = np.array([
    [0, 1, 0], [1, 0, 0], [0, 0, 1],
    [1, 1, 1], [1, -1, 1], [1, 1, -1], [-1, 1, 1],
    [1, 2, 3], [3, -1, 2], [2, 3, -1], [-1, 3, 2],
], dtype=float)


class SingularCurveError(ValueError):
    pass


def _herm(a, b):
    """``sum_j a_j conj(b_j)`` over the last axis."""
    return np.einsum("...j,...j->...", a, np.conj(b))


def _norm2(a):
    return np.einsum("...j,...j->...", a.real, a.real) + np.einsum("...j,...j->...", a.imag, a.imag)


def _minors2(w, dw):
    """``|w_i w'_j - w_j w'_i|^2`` for the pairs (0,1), (0,2), (1,2)."""
    return np.stack([np.abs(w[..., i] * dw[..., j] - w[..., j] * dw[..., i]) ** 2
                     for i, j in ((0, 1), (0, 2), (1, 2))], axis=-1)


def fs_density(w, dw):
    """FS density ``g`` (see module docstring) for a curve germ ``w(t)``.

    The numerator ``|w|^2 |w'|^2 - |<w', w>|^2`` is evaluated as a sum of
    squared 2x2 minors, which has no cancellation.
    """
    return _minors2(w, dw).sum(axis=-1) / _norm2(w) ** 2


def form_density(q, w, dw):
    """Density of ``(i/2pi) ddbar log sum_j q_j |w_j|^2`` in the same coordinate."""
    Q = np.einsum("j,...j->...", q, np.abs(w) ** 2)
    pq = np.array([q[0] * q[1], q[0] * q[2], q[1] * q[2]])
    return np.einsum("k,...k->...", pq, _minors2(w, dw)) / Q ** 2


def plucker_scal(w, dw, ddw):
    """Scalar curvature of the FS metric on a curve germ, from 2-jets.

    ``Scal = 2 - |w|^6 |det(w, w', w'')|^2 / |w ^ w'|^6`` with the
    normalization where a line has ``Scal = 2``.
    """
    n2 = _norm2(w)
    wedge = _norm2(dw) * n2 - np.abs(_herm(dw, w)) ** 2
    det = np.linalg.det(np.stack([w, dw, ddw], axis=-1))
    return 2.0 - n2 ** 3 * np.abs(det) ** 2 / wedge ** 3


class _Poly:
    """Float/complex evaluation of a polynomial in three variables."""

    def __init__(self, exps: np.ndarray, coefs: np.ndarray):
        self.exps = np.asarray(exps, dtype=int).reshape(-1, 3)
        self.coefs = np.asarray(coefs, dtype=complex)

    def __call__(self, P):
        out = 0
        for e, c in zip(self.exps, self.coefs):
            out = out + c * P[0][e[0]] * P[1][e[1]] * P[2][e[2]]
        if isinstance(out, int):
            return np.zeros(P[0][0].shape, dtype=complex)
        return out

    def diff(self, j: int) -> "_Poly":
        mask = self.exps[:, j] > 0
        e = self.exps[mask].copy()
        c = self.coefs[mask] * e[:, j]
        e[:, j] -= 1
        return _Poly(e, c)


def _powers(W, d):
    P = []
    for j in range(3):
        col = [np.ones(W.shape[:-1], dtype=complex)]
        for _ in range(d):
            col.append(col[-1] * W[..., j])
        P.append(col)
    return P


def _smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


def _bump(rho, radius):
    """1 on ``rho <= radius/2``, 0 on ``rho >= radius``, smooth between."""
    return _smoothstep((1.0 - rho / radius) / 0.5)


class PlaneCurve:
    """Numerical model of ``V(f)`` in P^2 (``f`` homogeneous, degree ``d``)."""

    def __init__(self, exps, coefs, center=None):
        exps = np.asarray(exps, dtype=int).reshape(-1, 3)
        coefs = np.asarray(coefs, dtype=complex)
        keep = coefs != 0
        exps, coefs = exps[keep], coefs[keep]
        if len(coefs) == 0:
            raise ValueError("zero polynomial")
        degs = exps.sum(axis=1)
        if np.any(degs != degs[0]):
            raise ValueError("polynomial is not homogeneous")
        self.d = int(degs[0])
        if self.d < 1:
            raise ValueError("constant polynomial")
        self.norm = float(np.linalg.norm(coefs))
        self.exps = exps
        self.coefs = coefs / self.norm
        self.f = _Poly(self.exps, self.coefs)
        self.df = [self.f.diff(j) for j in range(3)]
        self.ddf = [[self.df[i].diff(j) for j in range(3)] for i in range(3)]
        self._branch = None
        self._choose_frame(center)

    @classmethod
    def from_poly(cls, f: MultiPoly, center=None) -> "PlaneCurve":
        if f.nvars != 3:
            raise ValueError("plane curves need exactly three variables")
        exps, coefs = f.coefficient_arrays()
        return cls(exps, coefs, center)

    # -- evaluation ------------------------------------------------------
    def value(self, W):
        return self.f(_powers(W, self.d))

    def grad(self, W):
        P = _powers(W, self.d)
        return np.stack([g(P) for g in self.df], axis=-1)

    def value_grad(self, W):
        P = _powers(W, self.d)
        return self.f(P), np.stack([g(P) for g in self.df], axis=-1)

    def hess(self, W):
        P = _powers(W, self.d)
        return np.stack([np.stack([h(P) for h in row], axis=-1) for row in self.ddf], axis=-2)

    def scale_at(self, W):
        """``|||f||| |w|^d``; the natural size of ``f`` at ``w``."""
        return np.sqrt(_norm2(W)) ** self.d

    # -- frame -----------------------------------------------------------
    def _choose_frame(self, center):
        if center is not None:
            self._set_frame(center)
            return
        scored = []
        for c in _CENTERS:
            p = c / np.linalg.norm(c)
            scored.append((abs(complex(self.value(p.astype(complex)))), len(scored), p))
        scored.sort(key=lambda x: (-x[0], x[1]))
        top = scored[0][0]
        for sc, _, p in scored:
            if sc < 1e-3 * top:
                break
            self._set_frame(p)
            if self.d < 2 or self._branching_is_simple():
                return
        self._set_frame(scored[0][2])

    def _set_frame(self, center):
        p = np.asarray(center, dtype=float)
        p = p / np.linalg.norm(p)
        if abs(complex(self.value(p.astype(complex)))) < 1e-8:
            raise ValueError("projection center lies on the curve")
        # Householder reflection swapping e_1 and p
        e1 = np.array([0.0, 1.0, 0.0])
        v = e1 - p
        if np.linalg.norm(v) < 1e-14:
            U = np.eye(3)
        else:
            v = v / np.linalg.norm(v)
            U = np.eye(3) - 2 * np.outer(v, v)
        self.U = U
        self.center = p
        self._tcols = np.array([U[:, 0], U[:, 2]], dtype=complex)
        self._ccols = np.array([U[:, 2], U[:, 0]], dtype=complex)
        self._branch = None

    def _branching_is_simple(self):
        """True if every branch point of the projection has ramification 2."""
        bps = self.branch_points()
        if len(bps) != self.d * (self.d - 1):
            return False
        u = self.U[:, 1]
        for c, t, y in bps:
            W, _ = self.embed(c, t, y)
            H = self.hess(W)
            if abs(u @ H @ u) < 1e-6 * np.linalg.norm(W) ** (self.d - 2):
                return False
        return True

    def embed(self, chart, t, y):
        """Homogeneous points ``U v`` and the base tangent direction ``U dv/dt``."""
        t = np.asarray(t, dtype=complex)
        y = np.asarray(y, dtype=complex)
        chart = np.asarray(chart, dtype=int)
        shape = np.broadcast_shapes(t.shape, y.shape, chart.shape)
        chart = np.broadcast_to(chart, shape)
        A = self._tcols[chart]
        W = (np.broadcast_to(t, shape)[..., None] * A
             + np.broadcast_to(y, shape)[..., None] * self.U[:, 1]
             + self._ccols[chart])
        return W, A

    def _F(self, chart, t, y):
        W, bdir = self.embed(chart, t, y)
        val, gr = self.value_grad(W)
        Fy = gr @ self.U[:, 1]
        Ft = np.einsum("...j,...j->...", gr, bdir)
        return W, val, Fy, Ft

    def newton(self, chart, t, y, iters=4, max_iters=40):
        """Newton in ``y``: at least ``iters`` steps, then until the step stalls."""
        y = np.array(y, dtype=complex)
        shape = np.broadcast_shapes(np.shape(chart), np.shape(t), y.shape)
        chart = np.broadcast_to(chart, shape).ravel()
        t = np.broadcast_to(np.asarray(t, dtype=complex), shape).ravel()
        y = np.broadcast_to(y, shape).ravel().copy()
        idx = np.arange(len(y))
        for k in range(max_iters):
            _, val, Fy, _ = self._F(chart[idx], t[idx], y[idx])
            ok = Fy != 0
            step = np.where(ok, val / np.where(ok, Fy, 1), 0)
            y[idx] -= step
            if k + 1 >= iters:
                moving = np.abs(step) > 1e-14 * np.abs(y[idx])
                idx = idx[moving]
                if len(idx) == 0:
                    break
        return y.reshape(shape)

    def fiber_coeffs(self, chart, t):
        """Coefficients (ascending) of ``y -> f(U v(t, y))``; shape ``(M, d+1)``."""
        t = np.asarray(t, dtype=complex)
        d = self.d
        roots = np.exp(2j * np.pi * np.arange(d + 1) / (d + 1))
        W, _ = self.embed(np.asarray(chart)[..., None], t[..., None], roots)
        vals = self.value(W)
        return np.fft.fft(vals, axis=-1) / (d + 1)

    def solve(self, chart, t):
        """All ``d`` roots ``y`` over base points ``t``; shape ``(M, d)``."""
        t = np.atleast_1d(np.asarray(t, dtype=complex))
        chart = np.broadcast_to(np.asarray(chart), t.shape)
        c = self.fiber_coeffs(chart, t)
        d = self.d
        if d == 1:
            y = (-c[:, 0] / c[:, 1])[:, None]
        elif d == 2:
            a, b, cc = c[:, 2], c[:, 1], c[:, 0]
            sq = np.sqrt(b * b - 4 * a * cc)
            flip = np.abs(b + sq) < np.abs(b - sq)
            sq = np.where(flip, -sq, sq)
            q = -(b + sq) / 2
            safe = q != 0
            y1 = q / a
            y2 = np.where(safe, cc / np.where(safe, q, 1), 0)
            y = np.stack([y1, y2], axis=-1)
        else:
            comp = np.zeros((len(t), d, d), dtype=complex)
            comp[:, 1:, :-1] = np.eye(d - 1)
            comp[:, :, -1] = -c[:, :d] / c[:, d:d + 1]
            y = np.linalg.eigvals(comp)
        y = self.newton(chart[:, None], t[:, None], y, iters=2)
        order = np.lexsort((np.round(y.imag, 12), np.round(y.real, 12)), axis=-1)
        return np.take_along_axis(y, order, axis=-1)

    def lift(self, chart, t, y):
        """Points, base-derivative of the points, FS density ``g`` and ``dy/dt``."""
        W, val, Fy, Ft = self._F(chart, t, y)
        with np.errstate(divide="ignore", invalid="ignore"):
            yp = -Ft / Fy
        W, bdir = self.embed(chart, t, y)
        dW = bdir + yp[..., None] * self.U[:, 1]
        return W, dW, fs_density(W, dW), yp

    def second_derivative(self, chart, t, y, yp):
        """``d^2 y / dt^2`` by implicit differentiation."""
        W, bdir = self.embed(chart, t, y)
        P = _powers(W, self.d)
        grad = np.stack([g(P) for g in self.df], axis=-1)
        H = np.stack([np.stack([h(P) for h in row], axis=-1) for row in self.ddf], axis=-2)
        u = self.U[:, 1]
        Fy = grad @ u
        Htt = np.einsum("...i,...ij,...j->...", bdir, H, bdir)
        Hty = np.einsum("...i,...ij,j->...", bdir, H, u)
        Hyy = np.einsum("i,...ij,j->...", u, H, u)
        return -(Htt + 2 * Hty * yp + Hyy * yp * yp) / Fy

    # -- branch points -----------------------------------------------------
    def _discriminant_roots(self, chart):
        d = self.d
        D = d * (d - 1)
        K = D + 1
        ts = np.exp(2j * np.pi * np.arange(K) / K)
        c = self.fiber_coeffs(np.full(K, chart), ts)       # (K, d+1)
        dc = c[:, 1:] * np.arange(1, d + 1)                 # derivative coefficients
        n = 2 * d - 1
        S = np.zeros((K, n, n), dtype=complex)
        for i in range(d - 1):
            S[:, i, i:i + d + 1] = c[:, ::-1]
        for i in range(d):
            S[:, d - 1 + i, i:i + d] = dc[:, ::-1]
        vals = np.linalg.det(S)
        coef = np.fft.fft(vals) / K                          # ascending in t
        scale = np.max(np.abs(coef))
        if scale == 0:
            return np.zeros(0, dtype=complex)
        coef = np.where(np.abs(coef) < 1e-14 * scale, 0, coef)
        nz = np.nonzero(coef)[0]
        top = nz[-1]
        if top == 0:
            return np.zeros(0, dtype=complex)
        return np.roots(coef[: top + 1][::-1])

    def _polish_branch(self, chart, t, y, iters=30):
        u = self.U[:, 1]
        for _ in range(iters):
            W, bdir = self.embed(chart, t, y)
            P = _powers(W, self.d)
            val = self.f(P)
            grad = np.stack([g(P) for g in self.df], axis=-1)
            H = np.stack([np.stack([h(P) for h in row], axis=-1) for row in self.ddf], axis=-2)
            Fy = grad @ u
            Ft = grad @ bdir
            Fyy = u @ H @ u
            Fty = bdir @ H @ u
            J = np.array([[Ft, Fy], [Fty, Fyy]])
            try:
                dt, dy = np.linalg.solve(J, -np.array([val, Fy]))
            except np.linalg.LinAlgError:
                break
            t, y = t + dt, y + dy
            if abs(dt) + abs(dy) < 1e-15 * (1 + abs(t) + abs(y)):
                break
        return t, y

    def branch_points(self):
        """Simple branch points as ``(home chart, t, y)`` with ``|t| <= 1``.

        Raises ``SingularCurveError`` if ``f`` and its gradient vanish together.
        """
        if self._branch is not None:
            return self._branch
        out = []
        if self.d >= 2:
            for chart in (0, 1):
                for t in self._discriminant_roots(chart):
                    if abs(t) > 1.0 + 1e-6 or (chart == 1 and abs(t) > 1.0 - 1e-9):
                        continue
                    ys = self.solve(chart, np.array([t]))[0]
                    # the pair of closest roots meets at the branch point
                    diff = np.abs(ys[:, None] - ys[None, :]) + np.eye(len(ys)) * 1e300
                    i, j = np.unravel_index(np.argmin(diff), diff.shape)
                    y = 0.5 * (ys[i] + ys[j])
                    t, y = self._polish_branch(chart, complex(t), complex(y))
                    W, _ = self.embed(chart, t, y)
                    g = self.grad(W)
                    if np.linalg.norm(g) < 1e-13 * self.scale_at(W) / np.linalg.norm(W):
                        raise SingularCurveError(
                            f"singular curve: gradient vanishes at {np.round(W, 8)}")
                    out.append((chart, complex(t), complex(y)))
        out = _dedupe_branch(out)
        self._branch = out
        return out

    def neck_scale(self, chart, t, y):
        """Size in the uniformizing variable of the neck at a simple branch point.

        With ``t = t_b + zeta^2`` the fiber coordinate moves at speed
        ``|dy/dzeta| = sqrt(2 |F_t / F_yy|)`` while the base moves at ``2 |zeta|``;
        the two balance at half that speed.
        """
        W, bdir = self.embed(chart, t, y)
        u = self.U[:, 1]
        Ft = self.grad(W) @ bdir
        Fyy = u @ self.hess(W) @ u
        if Fyy == 0:
            return np.inf
        return 0.5 * float(np.sqrt(2 * abs(Ft / Fyy)))

    def locate(self, W):
        """Chart, base coordinate and fiber coordinate of points on the curve."""
        W = np.atleast_2d(np.asarray(W, dtype=complex))
        V = W @ self.U          # U orthogonal: v = U^T w
        use0 = np.abs(V[:, 2]) >= np.abs(V[:, 0])
        chart = np.where(use0, 0, 1)
        den = np.where(use0, V[:, 2], V[:, 0])
        t = np.where(use0, V[:, 0], V[:, 2]) / den
        y = V[:, 1] / den
        return chart, t, y


def _dedupe_branch(items, tol=1e-9):
    out = []
    for c, t, y in items:
        p = (t, 1.0) if c == 0 else (1.0, t)
        dup = False
        for c2, t2, _ in out:
            q = (t2, 1.0) if c2 == 0 else (1.0, t2)
            # compare as points of P^1
            if abs(p[0] * q[1] - p[1] * q[0]) < tol * (1 + abs(t) + abs(t2)):
                dup = True
                break
        if not dup:
            out.append((c, t, y))
    return out


class BranchChart:
    """Local expansion ``G(tau, eta) = f(W_b + tau A + eta u)`` at a branch point.

    ``A`` is the base direction of the home chart and ``u = U e_1`` the fiber
    direction.  Working with the small offsets ``(tau, eta)`` keeps full
    relative precision on the two sheets that meet at the branch point, which
    is lost when they are evaluated in absolute coordinates.
    """

    def __init__(self, curve: PlaneCurve, chart: int, t: complex, y: complex):
        self.curve, self.chart, self.t, self.y = curve, chart, t, y
        W, A = curve.embed(chart, t, y)
        self.Wb, self.A, self.u = W, A, curve.U[:, 1].astype(complex)
        d = curve.d
        n = d + 1
        roots = np.exp(2j * np.pi * np.arange(n) / n)
        P = (W + roots[:, None, None] * A + roots[None, :, None] * self.u)
        vals = curve.value(P)
        G = np.fft.fft2(vals) / n ** 2
        G[0, 0] = 0.0            # the branch point is on the curve ...
        G[0, 1] = 0.0            # ... and the fiber direction is tangent there
        G[np.abs(G) < 1e-15 * np.max(np.abs(G))] = 0.0
        self.G = G
        self.Gt = G[1:, :] * np.arange(1, n)[:, None]
        self.Ge = G[:, 1:] * np.arange(1, n)[None, :]
        self.neck = curve.neck_scale(chart, t, y)

    @staticmethod
    def _eval(C, tau, eta):
        out = np.zeros(np.broadcast(tau, eta).shape, dtype=complex)
        for j in range(C.shape[0] - 1, -1, -1):
            row = np.zeros_like(out)
            for k in range(C.shape[1] - 1, -1, -1):
                row = row * eta + C[j, k]
            out = out * tau + row
        return out

    def newton(self, tau, eta, max_iters=40):
        eta = np.array(eta, dtype=complex)
        for _ in range(max_iters):
            Ge = self._eval(self.Ge, tau, eta)
            ok = Ge != 0
            step = np.where(ok, self._eval(self.G, tau, eta) / np.where(ok, Ge, 1), 0)
            eta = eta - step
            if np.all(np.abs(step) <= 1e-15 * np.abs(eta)):
                break
        return eta

    def frame(self, zeta, eta):
        """Point and ``d/dzeta`` of the point, for ``tau = zeta^2``."""
        tau = zeta * zeta
        Gt = self._eval(self.Gt, tau, eta)
        Ge = self._eval(self.Ge, tau, eta)
        with np.errstate(divide="ignore", invalid="ignore"):
            eta_z = -2 * zeta * Gt / Ge
        W = self.Wb + tau[..., None] * self.A + eta[..., None] * self.u
        dW = 2 * zeta[..., None] * self.A + eta_z[..., None] * self.u
        return W, dW, eta_z


# -- quadrature ---------------------------------------------------------------
@dataclass
class NodeBatch:
    """Curve points at a batch of quadrature nodes, flattened over sheets."""

    curve: PlaneCurve
    chart: np.ndarray
    t: np.ndarray
    y: np.ndarray
    w: np.ndarray
    dw: np.ndarray
    g: np.ndarray
    yp: np.ndarray
    scale: np.ndarray
    branch: np.ndarray | None = None
    zeta: np.ndarray | None = None
    charts: list = field(default_factory=list)
    _scal: tuple | None = field(default=None, repr=False)

    def scal(self):
        """Scalar curvature and its Richardson error estimate at every node.

        Sheets meeting at a branch point (``branch >= 0``) are differenced in
        the uniformizing variable ``zeta`` of their local chart, all others in
        the base coordinate.
        """
        if self._scal is None:
            S = np.empty(len(self.g))
            E = np.empty(len(self.g))
            br = self.branch if self.branch is not None else np.full(len(self.g), -1)
            reg = br < 0
            if np.any(reg):
                S[reg], E[reg] = scal_fd(self.curve, self.chart[reg], self.t[reg], self.y[reg],
                                         self.yp[reg], self.g[reg], FD_KAPPA * self.scale[reg])
            for k in np.unique(br[~reg]):
                sel = br == k
                S[sel], E[sel] = scal_fd_local(self.charts[k], self.zeta[sel],
                                               self.y[sel] - self.charts[k].y,
                                               self.scale[sel])
            self._scal = (S, E)
        return self._scal


def scal_fd(curve, chart, t, y, yp, g0, h):
    """Scalar curvature ``-Lap(log g) / (4 g)`` by 5-point stencils and Richardson."""
    logg0 = np.log(g0)

    def lap(step):
        acc = -4.0 * logg0
        for e in (1, -1, 1j, -1j):
            dt = step * e
            t1 = t + dt
            y1 = curve.newton(chart, t1, y + yp * dt, iters=3)
            _, _, g1, _ = curve.lift(chart, t1, y1)
            acc = acc + np.log(g1)
        return acc / step ** 2

    L1 = lap(h)
    L2 = lap(h / 2)
    L = (4 * L2 - L1) / 3
    err = np.abs(L2 - L1) / 3
    return -L / (4 * g0), err / (4 * g0)


def scal_fd_local(bc: BranchChart, zeta, eta, zsize):
    """As :func:`scal_fd`, for the two sheets meeting at a branch point.

    Inside the neck (``|zeta| < neck``) the stencil lives in ``zeta``, where the
    metric is smooth; outside it lives in ``tau = zeta^2``, where the harmonic
    ``log |zeta|^2`` part of the density would otherwise dominate the
    truncation error.  Both use the precise local expansion.
    """
    S = np.empty(len(zeta))
    E = np.empty(len(zeta))
    inner = np.abs(zeta) < bc.neck
    if np.any(inner):
        z, e = zeta[inner], eta[inner]
        h = np.full(len(z), FD_KAPPA * bc.neck)
        S[inner], E[inner] = _local_stencil(bc, z, e, h, in_zeta=True)
    if np.any(~inner):
        z, e = zeta[~inner], eta[~inner]
        tau = z * z
        h = FD_KAPPA * np.minimum(np.abs(tau), 2 * np.abs(z) * zsize[~inner])
        S[~inner], E[~inner] = _local_stencil(bc, z, e, h, in_zeta=False)
    return S, E


def _local_stencil(bc, zeta, eta, h, in_zeta):
    tau = zeta * zeta

    def density(z, tau, eta):
        W = bc.Wb + tau[..., None] * bc.A + eta[..., None] * bc.u
        Gt = bc._eval(bc.Gt, tau, eta)
        Ge = bc._eval(bc.Ge, tau, eta)
        if in_zeta:
            slope = -2 * z * Gt / Ge
            dW = 2 * z[..., None] * bc.A + slope[..., None] * bc.u
        else:
            slope = -Gt / Ge
            dW = bc.A + slope[..., None] * bc.u
        return fs_density(W, dW), slope

    g0, slope0 = density(zeta, tau, eta)
    logg0 = np.log(g0)

    def lap(step):
        acc = -4.0 * logg0
        for e in (1, -1, 1j, -1j):
            dx = step * e
            if in_zeta:
                z1 = zeta + dx
                t1 = z1 * z1
            else:
                t1 = tau + dx
                z1 = np.sqrt(t1)
            e1 = bc.newton(t1, eta + slope0 * dx)
            g1, _ = density(z1, t1, e1)
            acc = acc + np.log(g1)
        return acc / step ** 2

    L1 = lap(h)
    L2 = lap(h / 2)
    L = (4 * L2 - L1) / 3
    err = np.abs(L2 - L1) / 3
    return -L / (4 * g0), err / (4 * g0)


@dataclass
class CurveSampleSet:
    """Quadrature nodes on a curve with FS area weights."""

    chart: np.ndarray
    base: np.ndarray
    points: np.ndarray
    density: np.ndarray
    weight: np.ndarray
    sheet: np.ndarray
    resolution: int
    excluded_area: float
    exclusion_radius: float
    branch_points: list
    batch: NodeBatch | None = field(default=None, repr=False)
    volume_error: float = 0.0

    @property
    def area_weights(self):
        """FS area carried by each node (``density * weight``)."""
        return self.density * self.weight

    def integrate(self, values):
        return float(np.sum(self.area_weights * values))

    @property
    def volume(self):
        return float(np.sum(self.area_weights))

    def __len__(self):
        return len(self.weight)


@dataclass
class QuadResult:
    values: np.ndarray
    errors: np.ndarray
    abs_values: np.ndarray
    samples: CurveSampleSet
    n_cells: int
    rounds: int
    flagged: bool
    extras: dict = field(default_factory=dict)


class _Domains:
    """Chart polar domains (0, 1) and one uniformizing disk per branch point."""

    def __init__(self, curve: PlaneCurve):
        self.curve = curve
        bps = curve.branch_points()
        self.bp = bps
        radii = []
        for i, (c, t, _) in enumerate(bps):
            r = 0.25
            for j, (c2, t2, _) in enumerate(bps):
                if j == i:
                    continue
                t2h = t2 if c2 == c else (1 / t2 if t2 != 0 else np.inf)
                r = min(r, 0.5 * abs(t2h - t))
            radii.append(r)
        self.radii = radii
        self.charts = [BranchChart(curve, c, t, y) for c, t, y in bps]
        self.necks = [bc.neck for bc in self.charts]

    def bump_sum(self, chart, t, exclude=None):
        total = np.zeros(t.shape)
        for k, ((c, tb, _), R) in enumerate(zip(self.bp, self.radii)):
            if k == exclude:
                continue
            with np.errstate(divide="ignore", invalid="ignore"):
                tt = np.where(chart == c, t, 1 / np.where(t == 0, 1e-300, t))
            total = total + _bump(np.abs(tt - tb), R)
        return total

    def branch_distance(self, chart, t):
        dist = np.full(t.shape, np.inf)
        for c, tb, _ in self.bp:
            with np.errstate(divide="ignore", invalid="ignore"):
                tt = np.where(chart == c, t, 1 / np.where(t == 0, 1e-300, t))
            dist = np.minimum(dist, np.abs(tt - tb))
        return dist

    def nodes(self, dom, a0, a1, b0, b1):
        """Base nodes and weights (including Jacobian and partition) of cells."""
        q = GL_ORDER
        A = a0[:, None] + (a1 - a0)[:, None] * _GL_X[None, :]
        B = b0[:, None] + (b1 - b0)[:, None] * _GL_X[None, :]
        WA = (a1 - a0)[:, None] * _GL_W[None, :]
        WB = (b1 - b0)[:, None] * _GL_W[None, :]
        A = np.repeat(A, q, axis=1)
        WA = np.repeat(WA, q, axis=1)
        B = np.tile(B, (1, q))
        WB = np.tile(WB, (1, q))
        C = np.repeat(dom[:, None], q * q, axis=1)
        zeta = np.full(C.shape, np.nan, dtype=complex)
        zsize = np.repeat(np.maximum(a1 - a0, a1 * (b1 - b0))[:, None], q * q, axis=1)
        chart = np.zeros(C.shape, dtype=int)
        t = np.zeros(C.shape, dtype=complex)
        wt = np.zeros(C.shape)
        size = np.zeros(C.shape)
        polar = C < 2
        chart[polar] = C[polar]
        t[polar] = A[polar] * np.exp(1j * B[polar])
        wt[polar] = WA[polar] * WB[polar] * A[polar]
        cell_size = np.maximum(a1 - a0, a1 * (b1 - b0))
        size[:] = cell_size[:, None]
        if np.any(polar):
            part = 1.0 - self.bump_sum(chart[polar], t[polar])
            wt[polar] *= np.clip(part, 0.0, 1.0)
        for k, (c, tb, _) in enumerate(self.bp):
            m = C == 2 + k
            if not np.any(m):
                continue
            u, psi = A[m], B[m]
            chart[m] = c
            zeta[m] = u * np.exp(1j * psi)
            t[m] = tb + zeta[m] ** 2
            wt[m] = WA[m] * WB[m] * 4 * u ** 3 * _bump(u * u, self.radii[k])
            # step scale in t for nodes in a disk: the cell's extent in t
            size[m] = np.repeat((2 * a1 * (a1 - a0) + a1 * a1 * (b1 - b0))[:, None], q * q, axis=1)[m]
        return chart, t, wt, size, C, zeta, zsize

    def initial(self, resolution: int, phase: float = 0.0):
        cells = []
        nr, nt = resolution, 4 * resolution
        for dom in (0, 1):
            r = np.linspace(0, 1, nr + 1)
            th = np.linspace(0, 2 * np.pi, nt + 1) + phase
            for i in range(nr):
                for j in range(nt):
                    cells.append((dom, r[i], r[i + 1], th[j], th[j + 1]))
        nu, npsi = max(2, resolution // 2), max(4, resolution)
        for k, R in enumerate(self.radii):
            u = np.linspace(0, np.sqrt(R), nu + 1)
            # geometric shells down to the neck scale, so that a thin neck is sampled
            z = min(self.necks[k], u[1]) / 4
            shells = []
            while z < u[1]:
                shells.append(z)
                z *= 2
            u = np.concatenate([[0.0], shells, u[1:]])
            ps = np.linspace(0, np.pi, npsi + 1)
            for i in range(len(u) - 1):
                for j in range(npsi):
                    cells.append((2 + k, u[i], u[i + 1], ps[j], ps[j + 1]))
        arr = np.array(cells, dtype=float)
        return _pre_refine(self, arr)

    def seed_coords(self, dom, seeds):
        """Seed points (chart, t) expressed in the coordinates of polar domain ``dom``."""
        out = []
        for c, t in seeds:
            tt = t if c == dom else (1 / t if t != 0 else None)
            if tt is not None and abs(tt) <= 1.0 + 1e-9:
                out.append(tt)
        return out


def _split(cells):
    """Four children per cell, cut so that children are roughly square.

    The physical radial size is ``a1 - a0`` and the angular one ``a1 (b1 - b0)``;
    cells much longer in one direction are cut into four slices across it.
    """
    dom, a0, a1, b0, b1 = cells.T
    radial = a1 - a0
    angular = a1 * (b1 - b0)
    mode = np.where(angular < 0.5 * radial, 0, np.where(radial < 0.5 * angular, 1, 2))
    q = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    kids = np.empty((len(cells), 4, 5))
    kids[:, :, 0] = dom[:, None]
    # mode 0: four radial slices
    A = a0[:, None] + radial[:, None] * q
    B = b0[:, None] + (b1 - b0)[:, None] * q
    am, bm = A[:, 2], B[:, 2]
    for k in range(4):
        r0 = np.where(mode == 0, A[:, k], np.where(mode == 1, a0, np.where(k % 2, am, a0)))
        r1 = np.where(mode == 0, A[:, k + 1], np.where(mode == 1, a1, np.where(k % 2, a1, am)))
        t0 = np.where(mode == 1, B[:, k], np.where(mode == 0, b0, np.where(k // 2, bm, b0)))
        t1 = np.where(mode == 1, B[:, k + 1], np.where(mode == 0, b1, np.where(k // 2, b1, bm)))
        kids[:, k, 1], kids[:, k, 2], kids[:, k, 3], kids[:, k, 4] = r0, r1, t0, t1
    return kids.reshape(-1, 5)


def _cell_distance(cells, pt):
    """Rough distance in the t-plane from polar cells to the point ``pt``."""
    a0, a1, b0, b1 = cells[:, 1], cells[:, 2], cells[:, 3], cells[:, 4]
    # closest point in (r, theta) box to pt
    r = np.clip(abs(pt), a0, a1)
    ang = np.angle(pt)
    bc = 0.5 * (b0 + b1)
    dang = (ang - bc + np.pi) % (2 * np.pi) - np.pi
    half = 0.5 * (b1 - b0)
    th = bc + np.clip(dang, -half, half)
    return np.abs(r * np.exp(1j * th) - pt)


def _pre_refine(domains: _Domains, cells, seeds=()):
    """Split polar cells around branch points and seeds down to the local scale."""
    targets = [(c, t, R) for (c, t, _), R in zip(domains.bp, domains.radii)]
    targets += [(c, t, 1e-3) for c, t in seeds]
    for _ in range(60):
        polar = cells[:, 0] < 2
        size = np.maximum(cells[:, 2] - cells[:, 1], cells[:, 2] * (cells[:, 4] - cells[:, 3]))
        mark = np.zeros(len(cells), dtype=bool)
        for c, t, R in targets:
            for dom in (0, 1):
                tt = t if c == dom else (1 / t if t != 0 else None)
                if tt is None or abs(tt) > 1.25:
                    continue
                sel = polar & (cells[:, 0] == dom)
                dist = _cell_distance(cells, tt)
                mark |= sel & (dist < 2 * size) & (size > 0.25 * R)
        if not mark.any():
            break
        cells = np.concatenate([cells[~mark], _split(cells[mark])])
    return cells


def integrate_curve(curve: PlaneCurve,
                    integrand: Callable[[NodeBatch], np.ndarray],
                    ncomp: int,
                    resolution: int = 8,
                    rtol: float = 1e-6,
                    atol: float = 1e-10,
                    floor: float = 1e-11,
                    max_cells: int = 60000,
                    max_rounds: int = 60,
                    seeds=(),
                    phase: float = 0.0,
                    keep_samples: bool = True,
                    reducers: dict | None = None) -> QuadResult:
    """Adaptive integral of ``integrand * omega_FS`` over the curve.

    ``integrand(batch)`` returns an array of shape ``(ncomp, n)`` for the
    ``n`` node-sheets in ``batch``.  ``reducers`` maps a name to a callable
    ``(batch, values) -> float`` combined with ``max``/``min`` across leaf
    cells (used for sup/inf diagnostics); names starting with ``min`` are
    minimized.
    """
    dom = _Domains(curve)
    cells = dom.initial(resolution, phase)
    if seeds:
        cells = _pre_refine(dom, cells, seeds)
    d = curve.d
    q2 = GL_ORDER * GL_ORDER
    reducers = reducers or {}

    def evaluate(cells, with_values=True):
        chart, t, wt, size, C, zeta, zsize = dom.nodes(
            cells[:, 0].astype(int), cells[:, 1], cells[:, 2], cells[:, 3], cells[:, 4])
        chart, t, wt, size = chart.ravel(), t.ravel(), wt.ravel(), size.ravel()
        C, zeta, zsize = C.ravel(), zeta.ravel(), zsize.ravel()
        live = wt > 0
        vals = np.zeros((ncomp, len(t)))
        avals = np.zeros((ncomp, len(t)))
        red = {k: (np.full(len(t), -np.inf) if not k.startswith("min") else np.full(len(t), np.inf))
               for k in reducers}
        info = None
        if np.any(live):
            ch, tt = chart[live], t[live]
            ys = curve.solve(ch, tt)                      # (n, d)
            chs = np.repeat(ch, d)
            ts = np.repeat(tt, d)
            ysf = ys.ravel()
            W, dW, g, yp = curve.lift(chs, ts, ysf)
            dist = dom.branch_distance(chs, ts)
            scale = np.minimum(np.minimum(np.repeat(size[live], d), dist), 0.5)
            scale = np.maximum(scale, 1e-13 * (1 + np.abs(ts)))
            branch = np.full(len(ts), -1)
            zs = np.full(len(ts), np.nan, dtype=complex)
            Cl, zl, zsl = C[live], zeta[live], zsize[live]
            for k, bc in enumerate(dom.charts):
                nodes_k = np.nonzero(Cl == 2 + k)[0]
                if len(nodes_k) == 0:
                    continue
                # the two sheets nearest the branch value are the meeting pair
                gap = np.abs(ys[nodes_k] - bc.y)
                pair = np.argsort(gap, axis=1)[:, :2]
                z = zl[nodes_k]
                for col, sign in ((0, 1), (1, -1)):
                    ent = nodes_k * d + pair[:, col]
                    eta = bc.newton(z * z, ysf[ent] - bc.y)
                    zz = sign * z
                    Wl, dWl, eta_z = bc.frame(zz, eta)
                    with np.errstate(divide="ignore", invalid="ignore"):
                        W[ent] = Wl
                        dW[ent] = dWl / (2 * zz)[:, None]
                        g[ent] = fs_density(Wl, dWl) / (4 * np.abs(zz) ** 2)
                        yp[ent] = eta_z / (2 * zz)
                    ysf[ent] = bc.y + eta
                    branch[ent] = k
                    zs[ent] = zz
                    scale[ent] = zsl[nodes_k]
            batch = NodeBatch(curve, chs, ts, ysf, W, dW, g, yp, scale, branch, zs, dom.charts)
            info = (batch, np.repeat(wt[live], d))
            if not with_values:
                return None, None, None, info
            F = np.asarray(integrand(batch), dtype=float).reshape(ncomp, -1)
            dens = g / np.pi
            contrib = (F * dens).reshape(ncomp, -1, d).sum(axis=-1)
            acontrib = (np.abs(F) * dens).reshape(ncomp, -1, d).sum(axis=-1)
            vals[:, live] = contrib
            avals[:, live] = acontrib
            for k, fn in reducers.items():
                r = np.asarray(fn(batch, F)).reshape(-1, d)
                red[k][live] = r.min(axis=-1) if k.startswith("min") else r.max(axis=-1)
        per_cell = (vals * wt).reshape(ncomp, -1, q2).sum(axis=-1).T      # (C, K)
        per_abs = (avals * wt).reshape(ncomp, -1, q2).sum(axis=-1).T
        per_red = {k: (v.reshape(-1, q2).min(axis=-1) if k.startswith("min")
                       else v.reshape(-1, q2).max(axis=-1)) for k, v in red.items()}
        return per_cell, per_abs, per_red, info

    vals, avals, reds, _ = evaluate(cells)
    scale_k = avals.sum(axis=0)
    atol = np.maximum(rtol * scale_k, atol)

    acc_val = np.zeros(ncomp)
    acc_err = np.zeros(ncomp)
    acc_abs = np.zeros(ncomp)
    acc_red = {k: (-np.inf if not k.startswith("min") else np.inf) for k in reducers}
    accepted_cells = []
    excluded_area = 0.0
    excluded_err = np.zeros(ncomp)
    active, active_vals = cells, vals
    rounds = 0
    flagged = False
    total_cells = len(cells)
    while len(active):
        rounds += 1
        kids = _split(active)
        kv, ka, kr, _ = evaluate(kids)
        ksum = kv.reshape(-1, 4, ncomp).sum(axis=1)
        err = np.abs(ksum - active_vals)
        size = np.maximum(active[:, 2] - active[:, 1], active[:, 2] * (active[:, 4] - active[:, 3]))
        bad = np.any(err > atol, axis=1)
        tiny = size < floor
        disk = active[:, 0] >= 2
        if np.any(disk):
            # below this the offset zeta^2 from the branch point is not representable
            tb = np.abs(np.array([dom.bp[int(k) - 2][1] for k in active[disk, 0]]))
            tiny[disk] |= active[disk, 2] ** 2 < 1e-12 * (1 + tb)
        stop = rounds >= max_rounds or total_cells + 4 * int(bad.sum()) > max_cells
        good = ~bad | tiny | stop
        if stop and np.any(bad & ~tiny):
            flagged = True
        # cells that hit the floor are dropped; their size is the excluded bound
        drop = bad & tiny
        if np.any(drop):
            excluded_area += float(ksum[drop, 0].sum()) if ncomp else 0.0
            excluded_err += np.abs(ksum[drop]).sum(axis=0)
        keep = good & ~drop
        acc_val += ksum[keep].sum(axis=0)
        acc_err += err[keep].sum(axis=0)
        acc_abs += ka.reshape(-1, 4, ncomp).sum(axis=1)[keep].sum(axis=0)
        for k in reducers:
            r = kr[k].reshape(-1, 4)[keep]
            if r.size:
                acc_red[k] = min(acc_red[k], r.min()) if k.startswith("min") else max(acc_red[k], r.max())
        kids4 = kids.reshape(-1, 4, 5)
        if keep_samples and np.any(keep):
            accepted_cells.append(kids4[keep].reshape(-1, 5))
        nxt = bad & ~good
        active = kids4[nxt].reshape(-1, 5)
        active_vals = kv.reshape(-1, 4, ncomp)[nxt].reshape(-1, ncomp)
        total_cells += len(kids)

    samples = None
    if keep_samples and accepted_cells:
        leaf = np.concatenate(accepted_cells)
        _, _, _, (leaf_batch, wts) = evaluate(leaf, with_values=False)
        b = leaf_batch
        sheet = np.tile(np.arange(d), len(b.t) // d)
        samples = CurveSampleSet(b.chart, b.t, b.w, b.g / np.pi, wts, sheet, resolution,
                                 excluded_area, floor, list(dom.bp))
        samples.batch = leaf_batch
    return QuadResult(acc_val, acc_err + excluded_err, acc_abs, samples,
                      total_cells, rounds, flagged,
                      extras={"sup": acc_red, "excluded_area": excluded_area})


def curve_sample(f, resolution: int = 8, rtol: float = 1e-7, center=None) -> CurveSampleSet:
    """Adaptive FS-area sample set of a smooth plane curve ``V(f)``."""
    curve = f if isinstance(f, PlaneCurve) else PlaneCurve.from_poly(f, center)
    res = integrate_curve(curve, lambda b: np.ones((1, len(b.g))), 1,
                          resolution=resolution, rtol=rtol)
    res.samples.volume_error = float(res.errors[0])
    return res.samples
