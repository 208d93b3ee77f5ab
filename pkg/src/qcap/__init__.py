"""Sobolev capacities of dyadic shells, the weighted capacity series at a
boundary point, Bochner–Martinelli quadrature and cutoff constructions."""

from .capacity import (SOLVER_VERSION, CapacityEstimate, SolverSettings, SupportTooSmallError,
                       estimate_capacity, minimize_q_energy, q_energy, radial_capacity_oracle)
from .criterion import (CriterionConfig, CriterionReport, evaluate_criterion,
                        evaluation_norm_probe, holder_conjugate, weighted_term)
from .cutoff import build_phi, gns_ratio, psi, psi_field, sup_combine
from .geometry import (Ball, Box, Complement, Difference, EmptySet, HalfSpace, ImplicitSet,
                       Intersection, NodeMask, PointCd, Scale, Shell, Translate, Union,
                       annulus_shell, contains, from_dict, locate, make_swiss_cheese,
                       point_mask, rasterize, shell_minus_domain, triple_shell)
from .grid import Grid, ScalarField
from .martinelli import (SurfacePatch, TestFunction, bm_flux_components, box_patches,
                         calibrate_orientation, cauchy_integral, circle_patch,
                         divergence_residual, integrate_bm, sphere_patch)

__version__ = "0.1.0"

__all__ = [
    "annulus_shell", "Ball", "bm_flux_components", "Box", "box_patches", "build_phi",
    "calibrate_orientation", "CapacityEstimate", "cauchy_integral", "circle_patch",
    "Complement", "contains", "CriterionConfig", "CriterionReport", "Difference",
    "divergence_residual", "EmptySet", "estimate_capacity", "evaluate_criterion",
    "evaluation_norm_probe", "from_dict", "gns_ratio", "Grid", "HalfSpace", "holder_conjugate",
    "ImplicitSet", "integrate_bm", "Intersection", "locate", "make_swiss_cheese",
    "minimize_q_energy", "NodeMask", "point_mask", "PointCd", "psi", "psi_field", "q_energy",
    "radial_capacity_oracle", "rasterize", "ScalarField", "Scale", "Shell",
    "shell_minus_domain", "SOLVER_VERSION", "SolverSettings", "sphere_patch", "sup_combine",
    "SupportTooSmallError", "SurfacePatch", "TestFunction", "Translate", "triple_shell",
    "Union", "weighted_term", "__version__",
]
