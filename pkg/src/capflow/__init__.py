"""Numerical laboratory for contact-angle Gauss curvature flows of strictly
convex bodies in a half-space, driven through their support functions."""

from .body import (BodyMetrics, CapillaryBody, cap_body, cap_support,
                   capillary_support, embed, from_support, gauss_curvature,
                   load_snapshot, metrics, random_body, snapshot_dict, volume,
                   wetting_extent, write_snapshot)
from .convex import (ToolkitReport, alpha_entropy, blaschke_santalo_check,
                     build_toolkit_report, cahn_hoffman,
                     cahn_hoffman_jacobian, dual_gauge, entropy,
                     entropy_point, gauge, polar_volume, santalo_point)
from .errors import (AngleOutOfRange, BadNodeCount, CapflowError,
                     ConvexityLost, CurvatureBlowup, GeneratorFailed,
                     MaxIterations, NewtonStalled, NoInteriorMinimum,
                     NonpositiveSupport, NotConvex, RobinViolation)
from .flow import (FlowConfig, FlowState, Outcome, RunResult, TraceRecord,
                   adaptive_dt, rescale_map, rhs, run, step, trace_header,
                   write_trace_csv)
from .grid import (CapGrid, GridMode, RobinResidual, ScalarField, ball_volume,
                   build_grid, differentiate, ell_field, enforce_boundary,
                   principal_radii, reference_cap_volume, robin_residual,
                   sphere_area)
from .soliton import SolitonReport, SolitonResidual, newton_solve, residual

__version__ = "0.1.0"
