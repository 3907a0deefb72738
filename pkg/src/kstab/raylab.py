"""Asymptotic slopes along Bergman rays and the exact-versus-numerical check.

Along ``s = log|t|^2`` the K-energy and the fiber integral of Psi grow linearly,
and ``d (n+1) nu - (n+1) Psi_S`` has the generalized Futaki invariant as its
slope.  :func:`verify_asymptotics` computes both sides and compares them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .futaki import FutakiReport, donaldson_futaki
from .geometry import RayConfig, RaySample, _as_curve, kenergy_ray
from .ideal import Ideal, OneParamSubgroup
from .poly import MultiPoly, binom_identity

__all__ = [
    "SlopeFit",
    "VerifyConfig",
    "VerifyReport",
    "ladder",
    "slope_fit",
    "verify_asymptotics",
]

N_DIM = 1  # plane curves


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    residual_rms: float
    window: tuple[float, float]
    sample_count: int

    def as_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept,
                "residual_rms": self.residual_rms, "window": list(self.window),
                "sample_count": self.sample_count}


def slope_fit(samples, window=None) -> SlopeFit:
    """Least-squares line through ``(s, value)`` pairs with ``s`` in ``window``."""
    pts = [(float(s), float(v)) for s, v in samples]
    if window is not None:
        lo, hi = sorted(float(w) for w in window)
        pts = [(s, v) for s, v in pts if lo - 1e-12 <= s <= hi + 1e-12]
    if len(pts) < 4:
        raise ValueError(f"slope fit needs at least 4 samples, got {len(pts)}")
    s = np.array([p[0] for p in pts])
    v = np.array([p[1] for p in pts])
    A = np.column_stack([s, np.ones_like(s)])
    (slope, intercept), *_ = np.linalg.lstsq(A, v, rcond=None)
    resid = v - (slope * s + intercept)
    return SlopeFit(float(slope), float(intercept), float(np.sqrt(np.mean(resid ** 2))),
                    (float(s.min()), float(s.max())), len(pts))


def ladder(depth: float = 14.0, step: float = 0.5) -> list[float]:
    """``0, -step, ..., -depth``."""
    if depth <= 0 or step <= 0:
        raise ValueError("ladder depth and step must be positive")
    k = int(round(depth / step))
    return [-step * j for j in range(k + 1)]


@dataclass(frozen=True)
class VerifyConfig:
    ladder_depth: float = 14.0
    ladder_step: float = 0.5
    window: tuple[float, float] | None = None
    ratio_tol: float = 0.10
    psi_zero_tol: float = 0.02
    psi_positive: float = 0.05
    residual_bound: float = 0.05
    convention: str = "section-dual"
    ray: RayConfig = field(default_factory=RayConfig)

    def default_window(self) -> tuple[float, float]:
        if self.window is not None:
            return tuple(sorted(self.window))
        lad = ladder(self.ladder_depth, self.ladder_step)
        return (lad[-1], lad[-1] * 2.0 / 3.0)


@dataclass
class VerifyReport:
    futaki: FutakiReport
    samples: list[RaySample]
    fit_nu: SlopeFit
    fit_psi: SlopeFit
    fit_combination: SlopeFit
    fit_osc: SlopeFit
    F1_numerical: float
    F1_ratio: float | None
    psi: float
    reduced: str
    verdict: str
    checks: dict
    diagnostics: dict
    config: dict

    def ladder_rows(self) -> list[tuple]:
        return [(r.s, r.nu, r.psi_s, r.i_func, r.j_func, r.osc, r.error_est) for r in self.samples]

    def as_dict(self) -> dict:
        return {
            "futaki": self.futaki.as_dict(),
            "fits": {"nu": self.fit_nu.as_dict(), "psi_s": self.fit_psi.as_dict(),
                     "combination": self.fit_combination.as_dict(),
                     "osc": self.fit_osc.as_dict()},
            "F1_exact": float(self.futaki.F1),
            "F1_numerical": self.F1_numerical,
            "F1_ratio": self.F1_ratio,
            "psi": self.psi,
            "limit_reduced": self.reduced,
            "verdict": self.verdict,
            "checks": dict(self.checks),
            "diagnostics": dict(self.diagnostics),
            "config": dict(self.config),
            "ladder": [{"s": r.s, "nu": r.nu, "psi_s": r.psi_s, "I": r.i_func, "J": r.j_func,
                        "osc": r.osc, "err": r.error_est, "flagged": r.flagged,
                        "entropy_residual": r.entropy_residual}
                       for r in self.samples],
        }


def _convention_factor(ratio: float | None, d: int) -> dict:
    """Names a clean multiplicative offset between the numerical and exact slopes."""
    if ratio is None or not np.isfinite(ratio) or ratio == 0:
        return {"factor": None, "nearest": None, "candidates": {}}
    n = N_DIM
    candidates = {"1": 1, "d": d, "2d": 2 * d, "2d^2": 2 * d * d,
                  "(n+1)!2^(n+1)": binom_identity(n, n + 1)}
    nearest = min(candidates, key=lambda k: abs(np.log(abs(ratio) / candidates[k])))
    return {"factor": ratio, "nearest": nearest,
            "nearest_value": candidates[nearest],
            "relative_offset": abs(ratio) / candidates[nearest] - 1.0,
            "candidates": candidates}


def verify_asymptotics(f: MultiPoly, lam, config: VerifyConfig | None = None) -> VerifyReport:
    """Exact F1 of the flat limit of ``V(f)`` against the slopes of nu and Psi_S."""
    config = config or VerifyConfig()
    if not isinstance(lam, OneParamSubgroup):
        lam = OneParamSubgroup(tuple(int(m) for m in lam))
    curve = _as_curve(f)
    d = curve.d
    rep = donaldson_futaki(Ideal([f]), lam, convention=config.convention)
    samples = kenergy_ray(curve, np.array(lam.weights, float),
                          ladder(config.ladder_depth, config.ladder_step), config.ray)
    window = config.default_window()
    pick = lambda attr: [(r.s, getattr(r, attr)) for r in samples]
    fit_nu = slope_fit(pick("nu"), window)
    fit_psi = slope_fit(pick("psi_s"), window)
    c_nu, c_psi = d * (N_DIM + 1), N_DIM + 1
    fit_comb = slope_fit([(r.s, c_nu * r.nu - c_psi * r.psi_s) for r in samples], window)
    fit_osc = slope_fit(pick("osc"), window)

    F1 = float(rep.F1)
    num = fit_comb.slope
    ratio = num / F1 if F1 != 0 else None
    psi = fit_psi.slope
    reduced = rep.reduced
    trivial = lam.is_trivial()

    if ratio is None:
        f1_ok = abs(num) <= config.psi_zero_tol
    else:
        f1_ok = abs(ratio - 1.0) <= config.ratio_tol
    psi_nonneg = psi >= -config.psi_zero_tol
    if reduced == "non-reduced":
        psi_ok = psi > config.psi_positive
    elif reduced == "reduced":
        psi_ok = abs(psi) <= config.psi_zero_tol
    else:
        psi_ok = psi_nonneg
    osc_growth = -fit_osc.slope
    osc_ok = trivial or osc_growth > 0
    in_window = [r for r in samples if window[0] - 1e-12 <= r.s <= window[1] + 1e-12]
    flagged = any(r.flagged for r in in_window)
    rough = max(fit_comb.residual_rms, fit_psi.residual_rms) > config.residual_bound

    checks = {"F1_match": bool(f1_ok), "psi_nonnegative": bool(psi_nonneg),
              "psi_dichotomy": bool(psi_ok), "osc_growth": bool(osc_ok),
              "window_flagged": bool(flagged), "fit_rough": bool(rough)}
    if flagged or rough:
        verdict = "inconclusive"
    elif f1_ok and psi_nonneg and psi_ok and osc_ok:
        verdict = "pass"
    else:
        verdict = "fail"

    diagnostics = {
        "slope_nu": fit_nu.slope,
        "slope_psi_s": psi,
        "osc_growth_rate": osc_growth,
        "weight_spread": lam.spread(),
        "convention_factor": _convention_factor(ratio, d),
        "max_entropy_residual_drift": float(
            max(r.entropy_residual for r in samples) - min(r.entropy_residual for r in samples)),
        "max_j_over_i_deviation": float(max(
            (abs(2 * r.j_func / r.i_func - 1) for r in samples if r.i_func != 0), default=0.0)),
    }
    cfg = {"ladder_depth": config.ladder_depth, "ladder_step": config.ladder_step,
           "window": list(window), "ratio_tol": config.ratio_tol,
           "psi_zero_tol": config.psi_zero_tol, "psi_positive": config.psi_positive,
           "residual_bound": config.residual_bound, "weight_sign": config.convention,
           "combination": f"{c_nu}*nu - {c_psi}*psi_s",
           "grid": config.ray.resolution, "rtol": config.ray.rtol,
           "phase": config.ray.phase}
    return VerifyReport(rep, samples, fit_nu, fit_psi, fit_comb, fit_osc, num, ratio, psi,
                        reduced, verdict, checks, diagnostics, cfg)


def exact_fraction(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"
