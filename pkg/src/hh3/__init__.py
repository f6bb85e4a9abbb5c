"""Certified corrected-midpoint quadrature.

For integrands whose third derivative has log-convex absolute value, the
corrected midpoint rule

    sum over subintervals of  h f(m) + (h^3 / 24) f''(m)

admits a-priori error bounds built only from |f'''| at the division points.
This package parses an expression for f, evaluates derivatives exactly with
jet arithmetic, computes three competing bounds (and their best combination),
and checks its own hypotheses and identities against a high-accuracy
reference integrator.  The ``hh3`` command line tool exposes all of it.
"""

from .analysis import (CatalogEntry, ConvexityReport, GridSamples,
                       HermiteHadamardReport, catalog, check_hermite_hadamard,
                       check_log_convexity, check_log_convexity_pow,
                       grid_samples)
from .bounds import (BoundReport, DerivEndpoints, HolderExponents, RatioPair,
                     best_bound, default_q_grid, direct_bound, holder_bound,
                     holder_exponents, holder_factor, mu, mu_q,
                     power_mean_bound, ratio_pair)
from .errors import (BadInterval, DomainError, ExprSyntaxError, Hh3Error,
                     NonConvergence, NonPositiveThirdDerivative, NotConvex,
                     ToleranceUnreachable, UnknownIdentifier)
from .expr import Jet3, Node, eval_jet3, evaluate, parse, to_text
from .quadrature import (CertifyOutcome, Division, IntervalBound, QuadResult,
                         certify, composite_bound, corrected_midpoint_sum,
                         division_from_points, identity_residual,
                         integrate_adaptive, midpoint_sum, reference_integral,
                         uniform_division)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # expr
    "parse", "to_text", "evaluate", "eval_jet3", "Jet3", "Node",
    # bounds
    "mu", "mu_q", "holder_factor", "direct_bound", "holder_bound",
    "power_mean_bound", "best_bound", "default_q_grid", "ratio_pair",
    "holder_exponents", "DerivEndpoints", "RatioPair", "HolderExponents",
    "BoundReport",
    # quadrature
    "Division", "IntervalBound", "QuadResult", "CertifyOutcome",
    "uniform_division", "division_from_points", "midpoint_sum",
    "corrected_midpoint_sum", "composite_bound", "reference_integral",
    "integrate_adaptive", "identity_residual", "certify",
    # analysis
    "GridSamples", "ConvexityReport", "HermiteHadamardReport", "CatalogEntry",
    "grid_samples", "check_log_convexity", "check_log_convexity_pow",
    "check_hermite_hadamard", "catalog",
    # errors
    "Hh3Error", "ExprSyntaxError", "UnknownIdentifier", "DomainError",
    "NonPositiveThirdDerivative", "BadInterval", "NonConvergence",
    "ToleranceUnreachable", "NotConvex",
]
