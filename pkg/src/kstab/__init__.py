"""K-stability laboratory: exact Futaki invariants and K-energy along Bergman rays."""

from .poly import (FitError, MultiPoly, UniPolyQ, binom_identity, expand_ratio,
                   poly_arith, vandermonde_fit)
from .ideal import (HilbertData, Ideal, OneParamSubgroup, buchberger_weighted,
                    hilbert_data, hilbert_function, initial_ideal)
from .futaki import FutakiReport, donaldson_futaki, weight_polynomial
from .curves import PlaneCurve, SingularCurveError, curve_sample, integrate_curve
from .geometry import (RayConfig, RaySample, bergman_potential, bergman_potential_dot,
                       curve_scal, i_j_functionals, kenergy_ray, mu_average, osc,
                       psi_pointwise, psi_s)
from .raylab import SlopeFit, VerifyConfig, VerifyReport, slope_fit, verify_asymptotics
from .cli import JobConfig, parse_poly

__all__ = [
    "FitError", "MultiPoly", "UniPolyQ", "binom_identity", "expand_ratio", "poly_arith",
    "vandermonde_fit", "HilbertData", "Ideal", "OneParamSubgroup", "buchberger_weighted",
    "hilbert_data", "hilbert_function", "initial_ideal", "FutakiReport",
    "donaldson_futaki", "weight_polynomial", "PlaneCurve", "SingularCurveError",
    "curve_sample", "integrate_curve", "RayConfig", "RaySample", "bergman_potential",
    "bergman_potential_dot", "curve_scal", "i_j_functionals", "kenergy_ray",
    "mu_average", "osc", "psi_pointwise", "psi_s", "SlopeFit", "VerifyConfig",
    "VerifyReport", "slope_fit", "verify_asymptotics", "JobConfig", "parse_poly",
]

__version__ = "0.1.0"
