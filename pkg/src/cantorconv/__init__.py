"""Certified numerics for convolutions of central Cantor measures.

The package computes, with certified two-sided bounds:

* grid correlation sums tau_n(s) of the projected measure
  eta_s = law(X + e^s Y) for independent Cantor-distributed X, Y, and the
  correlation-dimension slopes they determine (:mod:`cantorconv.dimension`,
  :mod:`cantorconv.lattice`);
* pair-correlation integrals, exactly and by Monte-Carlo;
* the submultiplicativity (cocycle) audit driven by the circle rotation
  by log(b/a) mod l*log(1/b);
* Fourier transforms of Cantor measures as certified cosine products,
  Pisot certification of algebraic integers, and the construction of
  exceptional scaling parameters along which the Fourier transform of the
  convolution does not decay (:mod:`cantorconv.spectral`,
  :mod:`cantorconv.algebraic`, :mod:`cantorconv.diophantine`).
"""

from .bounds import BoundedValue, MassBound, PrecisionExceeded, ToleranceNotMet
from .measures import (CantorParam, cylinder_interval, mu_mass, sample_many,
                       similarity_dimension)
from .lattice import (PairParam, RotationScheme, build_rotation, eta_strip_mass,
                      good_cover, tau, tau_estimate, tau_exact, tau_profile)
from .dimension import (CocycleAuditReport, SlopeEstimate, cocycle_audit,
                        correlation_integral, dim_slope, furman_average,
                        montecarlo_correlation)
from .algebraic import (IntPolynomial, NotPisot, PisotCertificate,
                        certify_pisot, epsilon_constant, power_distance)
from .diophantine import (ContinuedFraction, Witness, WitnessList, find_lambda,
                          log_ratio_cf, ratio_class, verify_witness)
from .spectral import (PiMultiple, RecentredMeasure, c1_constant, conv_hat,
                       lambda_recentred, lambda_unit_interval, mu_hat,
                       phi_at, pisot_scan)

__version__ = "0.1.0"

__all__ = [
    "BoundedValue", "MassBound", "PrecisionExceeded", "ToleranceNotMet",
    "CantorParam", "cylinder_interval", "mu_mass", "sample_many",
    "similarity_dimension",
    "PairParam", "RotationScheme", "build_rotation", "eta_strip_mass",
    "good_cover", "tau", "tau_estimate", "tau_exact", "tau_profile",
    "CocycleAuditReport", "SlopeEstimate", "cocycle_audit",
    "correlation_integral", "dim_slope", "furman_average",
    "montecarlo_correlation",
    "IntPolynomial", "NotPisot", "PisotCertificate", "certify_pisot",
    "epsilon_constant", "power_distance",
    "ContinuedFraction", "Witness", "WitnessList", "find_lambda",
    "log_ratio_cf", "ratio_class", "verify_witness",
    "PiMultiple", "RecentredMeasure", "c1_constant", "conv_hat",
    "lambda_recentred", "lambda_unit_interval", "mu_hat", "phi_at",
    "pisot_scan",
    "__version__",
]
