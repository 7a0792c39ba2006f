"""Supremum laws of Lévy processes through excursion theory.

The law of ``Xbar_t = sup_{s <= t} X_s`` is assembled from the ladder
functions (``kappa``, ``h``, excursion tails ``n``), the entrance laws of the
excursion measures and an adaptive time quadrature, and every asymptotic
statement about it can be checked numerically with :mod:`levysup.verify`.
"""
from .bridge import (bridge_argmax_density, bridge_argmax_sample, bridge_report,
                     convolution_identity_check, convolution_integral)
from .entrance import (BiasBudgetExceeded, DensityEstimate, EntranceConfig, clear_cache,
                       conditioned_entrance, dual_entrance_law, entrance_density_qstar,
                       entrance_law, killed_density, meander_density, simulate_killed,
                       subordinator_entrance, survival_ratio_check)
from .ladder import LadderFunctions, UnavailableError, excursion_tail, kappa_time, ladder_functions
from .processes import (Brownian, Cauchy, ProcessSpec, Stable, SubordinatorMinusDrift,
                        UnsupportedClassification, classify_regularity, spec_from_dict,
                        spitzer_rho)
from .report import Row, VerificationReport
from .supremum import (ErrorBudgetExceeded, SupLawResult, atom_mass, brownian_sup_density,
                       kmr_bound, mc_sup_oracle, sup_cdf, sup_density)
from .transition import (DensityCurve, abs_cf_integral, pdf, pdf_at_zero_curve, pdf_with_error,
                         sym_pdf_at_zero)
from .verify import (bound_suite, chapman_kolmogorov_check, continuity_probe, duality_check,
                     verify_bounds, verify_corollary, verify_integrability, verify_large_t,
                     verify_small_x)

__version__ = "0.1.0"
