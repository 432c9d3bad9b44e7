"""Numerical verification suite for gradient blow-up in narrow gaps.

Solves elliptic systems (including plane-strain elasticity) in the thin
region between two nearly touching boundaries and measures how the solution
gradient scales as the gap closes: blow-up rate at the neck, envelope
constants across the strip, and the energy of the remainder after removing
the explicit singular part.
"""

from .geometry import BoundaryProfile, GapGeometry, GeometryError, LocalRegion, \
    flat_profile, power_profile
from .coefficients import (CoefficientSet, EllipticityError, LameParameters,
                           check_ellipticity, check_holder, holder_demo_coefficients,
                           identity_coefficients, lame_as_general, lame_tensor)
from .auxiliary import (AuxiliaryField, BoundaryData, ConfigurationError,
                        check_seminorm_growth, field_gradients, field_values,
                        gap_fraction, gap_fraction_gradient, holder_seminorm,
                        interpolant_gradients, interpolant_values, seminorm_growth_rhs)
from .mesh import Mesh, MeshError, generate, refine, strip_area
from .solver import (AssembledSystem, BoundaryAssignment, DiscreteSolution,
                     RightHandSide, SolverError, assemble, difference_w,
                     dirichlet_values, energy_on, gradient_at, l2_norm, mean_flux,
                     solve_component, solve_dirichlet)
from .oracle import (AffineCase, OracleError, brute_force_seminorm, exact_affine_case,
                     finite_difference_reference)
from .verify import (BlowupReport, EnergyScalingResult, PlanError, SweepPlan,
                     check_energy_scaling, check_lateral_sensitivity, check_lower_bound,
                     check_profile, fit_rate, profile_constant, remainder_energy,
                     run_sweep)

__version__ = "0.1.0"
