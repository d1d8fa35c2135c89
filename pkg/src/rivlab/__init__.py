"""Restricted-isometry random variables: distributions, critical functions, phase boundaries."""

__version__ = "0.1.0"

from .critical import PhasePoint, level_curve, u_crit, v_crit  # noqa: E402
from .mc import MCConfig, MCReport, validate  # noqa: E402
from .phase import measurement_bound, mu_fl, mu_gfa, mu_riv, pt_boundary  # noqa: E402
from .rivdist import (  # noqa: E402
    Triplet,
    left_riv_cdf,
    left_riv_pdf,
    left_support,
    right_riv_cdf,
    right_riv_pdf,
)
from .specfun import ConvergenceError, DomainError  # noqa: E402

__all__ = [
    "ConvergenceError",
    "DomainError",
    "MCConfig",
    "MCReport",
    "PhasePoint",
    "Triplet",
    "left_riv_cdf",
    "left_riv_pdf",
    "left_support",
    "level_curve",
    "measurement_bound",
    "mu_fl",
    "mu_gfa",
    "mu_riv",
    "pt_boundary",
    "right_riv_cdf",
    "right_riv_pdf",
    "u_crit",
    "v_crit",
    "validate",
]
