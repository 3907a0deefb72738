"""Bergman rays on plane curves: potentials, curvature, K-energy, I/J, Psi_S, Osc.

For ``sigma = lambda(t)`` with ``|t|^2 = e^s`` the potential on ``X = V(f)`` is
``phi_s(z) = log(sum_j e^{s m_j} |z_j|^2 / |z|^2)`` and ``omega_s = sigma^* omega_FS``.
Everything that involves ``omega_s`` is integrated on the moved curve
``Y_s = sigma(X) = V(f o sigma^{-1})`` against the plain FS form, where the
moving metric becomes stationary and only the curve degenerates.  In the
coordinate ``w = sigma z``:

* ``phi_s o sigma^{-1}(w) = log |w|^2 - log sum_j e^{-s m_j} |w_j|^2``
* ``d phi_s / ds o sigma^{-1}(w) = sum_j m_j |w_j|^2 / |w|^2``
* ``omega`` (the s = 0 metric) pushed to ``Y_s`` is the curvature form of
  ``log sum_j e^{-s m_j} |w_j|^2``.

The volume is ``V = d`` (a line has area 1) and ``n = 1`` throughout.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .curves import (
    CurveSampleSet,
    PlaneCurve,
    curve_sample,
    form_density,
    integrate_curve,
)
from .ideal import OneParamSubgroup
from .poly import MultiPoly

__all__ = [
    "RaySample",
    "RayConfig",
    "bergman_potential",
    "bergman_potential_dot",
    "curve_scal",
    "euler_characteristic",
    "i_j_functionals",
    "kenergy_ray",
    "moved_curve",
    "mu_average",
    "osc",
    "psi_pointwise",
    "psi_s",
    "ray_point",
    "curve_sample",
]


def _weights(lam) -> np.ndarray:
    if isinstance(lam, OneParamSubgroup):
        return np.array(lam.weights, dtype=float)
    return np.asarray(lam, dtype=float)


def bergman_potential(lam, s: float, z) -> np.ndarray:
    """``log(sum_j e^{s m_j} |z_j|^2 / |z|^2)`` for points ``z`` (last axis)."""
    m = _weights(lam)
    z = np.asarray(z, dtype=complex)
    a2 = np.abs(z) ** 2
    with np.errstate(divide="ignore"):
        la = np.log(a2)
    return logsumexp(la + s * m, axis=-1) - logsumexp(la, axis=-1)


def bergman_potential_dot(lam, s: float, z) -> np.ndarray:
    """``d/ds`` of :func:`bergman_potential`; a convex combination of the weights."""
    m = _weights(lam)
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore"):
        la = np.log(np.abs(z) ** 2) + s * m
    p = np.exp(la - logsumexp(la, axis=-1, keepdims=True))
    return np.einsum("...j,j->...", p, m)


def euler_characteristic(d: int) -> int:
    """Topological Euler characteristic of a smooth plane curve of degree ``d``."""
    return 3 * d - d * d


def moved_curve(f, lam, s: float, center=None) -> PlaneCurve:
    """``Y_s = V(f o sigma^{-1})`` for ``sigma = diag(e^{s m_j / 2})``."""
    if isinstance(f, PlaneCurve):
        exps, coefs = f.exps, f.coefs
    else:
        exps, coefs = f.coefficient_arrays()
    m = _weights(lam)
    logscale = -0.5 * s * (exps @ m)
    logscale -= logscale.max()
    return PlaneCurve(exps, np.asarray(coefs, dtype=complex) * np.exp(logscale), center)


def _as_curve(f) -> PlaneCurve:
    return f if isinstance(f, PlaneCurve) else PlaneCurve.from_poly(f)


def curve_scal(f, z, lam=None, s: float = 0.0):
    """Scalar curvature of ``omega_s`` at points ``z`` of ``X`` (with error estimate).

    Returns ``(scal, err)`` arrays.  Uses the same finite-difference scheme
    as the quadrature, at the image ``sigma z`` on the moved curve.
    """
    from .curves import FD_KAPPA, scal_fd
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    if lam is None or s == 0:
        Y, w = _as_curve(f), z
    else:
        m = _weights(lam)
        Y, w = moved_curve(f, lam, s), z * np.exp(0.5 * s * m)
    chart, t, y = Y.locate(w)
    y = Y.newton(chart, t, y, iters=3)
    _, _, g, yp = Y.lift(chart, t, y)
    dist = np.full(t.shape, 0.5)
    for c, tb, _ in Y.branch_points():
        tt = np.where(chart == c, t, 1 / np.where(t == 0, 1e-300, t))
        dist = np.minimum(dist, np.abs(tt - tb))
    # the metric varies on the length scale where it carries unit area
    h = FD_KAPPA * np.minimum(dist, 0.3 / np.sqrt(g))
    S, err = scal_fd(Y, chart, t, y, yp, g, h)
    for _ in range(4):
        bad = err > 1e-6 * np.maximum(1.0, np.abs(S))
        if not np.any(bad):
            break
        h = np.where(bad, h / 3, h)
        S2, e2 = scal_fd(Y, chart[bad], t[bad], y[bad], yp[bad], g[bad], h[bad])
        S[bad], err[bad] = S2, e2
    return S, err


def psi_pointwise(f, z) -> np.ndarray:
    """``log(|grad f|^2 / (|||f|||^2 |z|^{2(d-1)}))`` with the coefficient l2 norm."""
    curve = _as_curve(f)
    z = np.asarray(z, dtype=complex)
    gr = curve.grad(z)          # coefficients already have unit l2 norm
    n2 = np.sum(np.abs(z) ** 2, axis=-1)
    return np.log(np.sum(np.abs(gr) ** 2, axis=-1)) - (curve.d - 1) * np.log(n2)


# -- per-s quantities ----------------------------------------------------------
_COMPONENTS = ("vol", "scal", "hdot", "hdot_scal", "psi", "phi", "entropy", "jdens")


def _y_integrand(m, s):
    q_log = -s * m
    q = np.exp(q_log - q_log.max())

    def integrand(b):
        w, dw, g = b.w, b.dw, b.g
        a2 = np.abs(w) ** 2
        n2 = a2.sum(axis=-1)
        H = a2 @ m / n2
        S, _ = b.scal()
        gr = b.curve.grad(w)
        psi = np.log(np.sum(np.abs(gr) ** 2, axis=-1)) - (b.curve.d - 1) * np.log(n2)
        with np.errstate(divide="ignore"):
            phi = np.log(n2) - logsumexp(np.log(a2) + q_log, axis=-1)
        gq = form_density(q, w, dw)
        with np.errstate(divide="ignore"):
            ent = np.log(g) - np.log(gq)
        Q = a2 @ q
        dphi = np.einsum("...j,...j->...", dw, np.conj(w)) / n2 \
            - np.einsum("j,...j,...j->...", q, dw, np.conj(w)) / Q
        jd = np.abs(dphi) ** 2 / g
        return np.stack([np.ones_like(H), S, H, H * S, psi, phi, ent, jd])
    return integrand


@dataclass
class RayConfig:
    """Numerical knobs for the Bergman-ray computations."""

    resolution: int = 6
    rtol: float = 1e-5
    max_cells: int = 60000
    phase: float = 0.0
    s_tol: float = 2e-3
    max_bisect: int = 3
    threads: int | None = None


@dataclass
class YData:
    """Integrals over the moved curve ``Y_s`` (FS form) and their errors."""

    s: float
    values: dict
    errors: dict
    osc: float
    flagged: bool
    n_cells: int

    @property
    def mu(self) -> float:
        return self.values["scal"] / self.values["vol"]

    @property
    def dnu(self) -> float:
        """``-(1/V) int hdot (Scal - mu) omega_s`` (``V`` = computed volume)."""
        v = self.values
        return -(v["hdot_scal"] - self.mu * v["hdot"]) / v["vol"]

    @property
    def dnu_err(self) -> float:
        e, v = self.errors, self.values
        return (e["hdot_scal"] + abs(self.mu) * e["hdot"]
                + abs(v["hdot"]) * e["scal"] / v["vol"]) / v["vol"]


def coordinate_points(f) -> np.ndarray:
    """Points of ``V(f)`` on the coordinate lines ``z_j = 0`` (anchors for sup/inf)."""
    curve = _as_curve(f)
    pts = []
    for j in range(3):
        a, b = [k for k in range(3) if k != j]
        # binary form in (z_a, z_b) on the line z_j = 0
        sel = curve.exps[:, j] == 0
        if not np.any(sel):
            continue
        e, c = curve.exps[sel], curve.coefs[sel]
        coef = np.zeros(curve.d + 1, dtype=complex)
        for ee, cc in zip(e, c):
            coef[ee[b]] += cc           # coefficient of z_a^{d-k} z_b^k at k = e_b
        if np.max(np.abs(coef)) < 1e-12:
            continue
        nz = np.nonzero(np.abs(coef) > 1e-14)[0]
        lo, hi = nz[0], nz[-1]
        # z_b = 0 is a root of multiplicity lo
        if lo > 0:
            p = np.zeros(3, dtype=complex)
            p[a] = 1
            pts.append(p)
        if hi > lo:
            # roots of sum_k coef[k] u^k with u = z_b / z_a
            for u in np.roots(coef[lo:hi + 1][::-1]):
                p = np.zeros(3, dtype=complex)
                p[a], p[b] = 1, u
                pts.append(p)
        if hi < curve.d:
            p = np.zeros(3, dtype=complex)
            p[b] = 1
            pts.append(p)
    if not pts:
        return np.zeros((0, 3), dtype=complex)
    P = np.array(pts)
    return P / np.linalg.norm(P, axis=1, keepdims=True)


def ray_point(f, lam, s: float, config: RayConfig | None = None) -> YData:
    """All ``Y_s`` integrals needed at one point of the ray."""
    config = config or RayConfig()
    m = _weights(lam)
    Y = moved_curve(f, lam, s)
    res = integrate_curve(Y, _y_integrand(m, s), len(_COMPONENTS),
                          resolution=config.resolution, rtol=config.rtol,
                          max_cells=config.max_cells, phase=config.phase,
                          reducers={"sup_phi": _phi_reducer(m, s),
                                    "min_phi": _phi_reducer(m, s)},
                          keep_samples=False)
    values = dict(zip(_COMPONENTS, map(float, res.values)))
    errors = dict(zip(_COMPONENTS, map(float, res.errors)))
    sup, inf = res.extras["sup"]["sup_phi"], res.extras["sup"]["min_phi"]
    anchors = coordinate_points(f)
    if len(anchors):
        vals = bergman_potential(m, s, anchors)
        sup, inf = max(sup, vals.max()), min(inf, vals.min())
    return YData(s, values, errors, float(sup - inf), bool(res.flagged), res.n_cells)


def _phi_reducer(m, s):
    q_log = -s * m

    def red(b, F):
        a2 = np.abs(b.w) ** 2
        with np.errstate(divide="ignore"):
            return np.log(a2.sum(axis=-1)) - logsumexp(np.log(a2) + q_log, axis=-1)
    return red


@dataclass
class XRule:
    """A fixed quadrature rule on ``X`` with the s = 0 curvature at its nodes."""

    points: np.ndarray
    area: np.ndarray
    scal0: np.ndarray
    mu0: float
    volume: float
    error: float


def x_rule(f, config: RayConfig | None = None, lam=None) -> XRule:
    """Quadrature on the unmoved curve refined for potentials along ``lam``."""
    config = config or RayConfig()
    curve = _as_curve(f)
    m = _weights(lam) if lam is not None else np.zeros(3)
    guides = (-1.0, -4.0)
    seeds = []
    for p in coordinate_points(curve):
        c, t, _ = curve.locate(p)
        seeds.append((int(c[0]), complex(t[0])))

    def integrand(b):
        S, _ = b.scal()
        rows = [np.ones_like(b.g), S]
        for s in guides:
            rows.append(bergman_potential(m, s, b.w))
            rows.append(bergman_potential_dot(m, s, b.w) * S)
        return np.stack(rows)
    res = integrate_curve(curve, integrand, 2 + 2 * len(guides),
                          resolution=config.resolution, rtol=config.rtol * 0.1,
                          max_cells=config.max_cells, phase=config.phase, seeds=seeds)
    b = res.samples.batch
    area = res.samples.area_weights
    S, _ = b.scal()
    vol = float(area.sum())
    return XRule(b.w, area, S, float(area @ S) / vol, vol, float(res.errors[0]))


def _threads(config: RayConfig) -> int:
    if config.threads is not None:
        return max(1, int(config.threads))
    env = os.environ.get("KSTAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _ray_point_job(args):
    f_exps, f_coefs, m, s, config = args
    return ray_point(PlaneCurve(f_exps, f_coefs), m, s, config)


def _ray_points(f, lam, svals, config):
    curve = _as_curve(f)
    m = _weights(lam)
    jobs = [(curve.exps, curve.coefs, m, float(s), config) for s in svals]
    n = _threads(config)
    if n <= 1 or len(jobs) <= 1:
        return [_ray_point_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(_ray_point_job, jobs))


@dataclass
class RaySample:
    """One point of a Bergman ray, ``s = log|t|^2``."""

    s: float
    nu: float
    psi_s: float
    i_func: float
    j_func: float
    osc: float
    error_est: float
    mu: float = 0.0
    entropy: float = 0.0
    twist: float = 0.0
    flagged: bool = False
    extras: dict = field(default_factory=dict)

    @property
    def entropy_residual(self) -> float:
        """``nu - [E - mu (I - J) + T]``; zero up to quadrature error."""
        return self.nu - (self.entropy - self.mu * (self.i_func - self.j_func) + self.twist)


def mu_average(f, lam=None, s: float = 0.0, config: RayConfig | None = None):
    """``(int Scal omega_s / int omega_s, chi / d)``."""
    lam = np.zeros(3) if lam is None else lam
    yd = ray_point(f, lam, s, config)
    d = _as_curve(f).d
    return yd.mu, euler_characteristic(d) / d


def i_j_functionals(f, lam, s: float, config: RayConfig | None = None, xr: XRule | None = None):
    """``(I, J)`` for ``phi_s``; also returns their error estimates as a second pair."""
    config = config or RayConfig()
    xr = xr or x_rule(f, config, lam)
    yd = ray_point(f, lam, s, config)
    return _ij(f, lam, s, yd, xr)


def _ij(f, lam, s, yd, xr):
    V = _as_curve(f).d
    m = _weights(lam)
    phi_x = float(xr.area @ bergman_potential(m, s, xr.points))
    I = (phi_x - yd.values["phi"]) / V
    J = 0.5 * yd.values["jdens"] / V
    errs = ((yd.errors["phi"] + xr.error * abs(phi_x)) / V, 0.5 * yd.errors["jdens"] / V)
    return (I, J), errs


def psi_s(f, lam, s: float, config: RayConfig | None = None):
    """Fiber integral of Psi over ``Y_s`` and its error estimate."""
    yd = ray_point(f, lam, s, config)
    return yd.values["psi"], yd.errors["psi"]


def osc(f, lam, s: float, config: RayConfig | None = None) -> float:
    """Sup minus inf of ``phi_s`` over the sample nodes and coordinate anchors."""
    return ray_point(f, lam, s, config).osc


def _twist_rate(xr: XRule, m, s):
    """``-(1/V) int_X phidot_s (Scal_0 - mu) omega``."""
    return -float(xr.area @ (bergman_potential_dot(m, s, xr.points) * (xr.scal0 - xr.mu0))) / xr.volume


def kenergy_ray(f, lam, s_ladder, config: RayConfig | None = None) -> list[RaySample]:
    """K-energy, Psi_S, I, J and Osc along ``s_ladder`` (starting at 0, decreasing)."""
    config = config or RayConfig()
    s_ladder = [float(s) for s in s_ladder]
    if not s_ladder or s_ladder[0] != 0.0:
        raise ValueError("s ladder must start at 0")
    if any(b >= a for a, b in zip(s_ladder, s_ladder[1:])):
        raise ValueError("s ladder must be strictly decreasing")
    m = _weights(lam)
    curve = _as_curve(f)
    V = curve.d
    if not np.any(m):
        psi0 = ray_point(curve, m, 0.0, config).values["psi"]
        return [RaySample(s=s, nu=0.0, psi_s=psi0, i_func=0.0, j_func=0.0, osc=0.0,
                          error_est=0.0) for s in s_ladder]
    xr = x_rule(curve, config, m)

    cache: dict[float, YData] = {}

    def need(svals):
        todo = [s for s in dict.fromkeys(svals) if s not in cache]
        for s, yd in zip(todo, _ray_points(curve, m, todo, config)):
            cache[s] = yd

    mids = [0.5 * (a + b) for a, b in zip(s_ladder, s_ladder[1:])]
    need(s_ladder + mids)

    def simpson(a, b, depth):
        c = 0.5 * (a + b)
        need([a, b, c])
        fa, fb, fc = cache[a].dnu, cache[b].dnu, cache[c].dnu
        ta, tb, tc = (_twist_rate(xr, m, x) for x in (a, b, c))
        h = b - a
        simp = h / 6 * (fa + 4 * fc + fb)
        trap = h / 2 * (fa + fb)
        tw = h / 6 * (ta + 4 * tc + tb)
        qerr = abs(h) / 6 * (cache[a].dnu_err + 4 * cache[c].dnu_err + cache[b].dnu_err)
        serr = abs(simp - trap) / 15
        if serr > config.s_tol * abs(h) and depth < config.max_bisect:
            v1, e1, t1 = simpson(a, c, depth + 1)
            v2, e2, t2 = simpson(c, b, depth + 1)
            return v1 + v2, e1 + e2, t1 + t2
        return simp, qerr + serr, tw

    out = []
    nu, nu_err, twist = 0.0, 0.0, 0.0
    for k, s in enumerate(s_ladder):
        if k > 0:
            dv, de, dt = simpson(s_ladder[k - 1], s, 0)
            nu, nu_err, twist = nu + dv, nu_err + de, twist + dt
        yd = cache[s]
        if s == 0.0:
            I = J = 0.0
            ierr = (0.0, 0.0)
            ent = 0.0
        else:
            (I, J), ierr = _ij(curve, m, s, yd, xr)
            ent = yd.values["entropy"] / V
        out.append(RaySample(
            s=s, nu=nu, psi_s=yd.values["psi"], i_func=I, j_func=J, osc=0.0 if s == 0 else yd.osc,
            error_est=nu_err + yd.errors["psi"] + sum(ierr),
            mu=xr.mu0, entropy=ent, twist=twist, flagged=yd.flagged,
            extras={"dnu": yd.dnu, "mu_s": yd.mu, "volume": yd.values["vol"],
                    "nu_err": nu_err, "psi_err": yd.errors["psi"],
                    "i_err": ierr[0], "j_err": ierr[1], "cells": yd.n_cells}))
    return out

