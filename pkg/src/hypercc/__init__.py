"""Central configurations of the curved N-body problem on the hyperbolic plane H^2."""

from .errors import HyperCCError
from .geometry import Configuration, geodesic_distance, minkowski_dot, so2_rotate
from .potential import (
    cc_residual,
    force_function,
    grad_I,
    grad_U,
    gradient_field_X,
    lambda_value,
    moment_of_inertia,
)
from .hessian import constrained_hessian, hessian_chart, jacobi_eigh, spectrum
from .geodesic import GeodesicCC, enumerate_orderings, solve_all_geodesic, solve_geodesic
from .search import CCRecord, SearchParams, census, collision_repulsion_witness
from .morse import (
    IntPolynomial,
    census_report,
    lower_bounds,
    morse_inequality_audit,
    morse_polynomial,
    poincare_polynomial,
)

__version__ = "0.1.0"

__all__ = [
    "HyperCCError",
    "Configuration",
    "geodesic_distance",
    "minkowski_dot",
    "so2_rotate",
    "cc_residual",
    "force_function",
    "grad_I",
    "grad_U",
    "gradient_field_X",
    "lambda_value",
    "moment_of_inertia",
    "constrained_hessian",
    "hessian_chart",
    "jacobi_eigh",
    "spectrum",
    "GeodesicCC",
    "enumerate_orderings",
    "solve_all_geodesic",
    "solve_geodesic",
    "CCRecord",
    "SearchParams",
    "census",
    "collision_repulsion_witness",
    "IntPolynomial",
    "census_report",
    "lower_bounds",
    "morse_inequality_audit",
    "morse_polynomial",
    "poincare_polynomial",
]
