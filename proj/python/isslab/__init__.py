"""Numerical laboratory for stability estimation of truncated mode systems.

The compiled core exposes the system catalog, numerical flows, empirical
stability checks, quadratic-certificate helpers, the deduction engine over
the implication rule base, and comparison-function utilities.
"""

from ._core import (
    System,
    __version__,
    atom_ids,
    attainment_time,
    catalog,
    catalog_ids,
    check_brs,
    check_limit,
    check_stability,
    dini_norm_sq,
    fit_iss_bound,
    flow,
    lattice_closure,
    lattice_consistency,
    lattice_query,
    norm,
    power_eval,
    power_inverse,
    reach_time_bound,
)

__all__ = [
    "System",
    "__version__",
    "atom_ids",
    "attainment_time",
    "catalog",
    "catalog_ids",
    "check_brs",
    "check_limit",
    "check_stability",
    "dini_norm_sq",
    "fit_iss_bound",
    "flow",
    "lattice_closure",
    "lattice_consistency",
    "lattice_query",
    "norm",
    "power_eval",
    "power_inverse",
    "reach_time_bound",
]
