"""Totally geodesic unit vector fields on warped-product surfaces."""
from .alpha_profile import (AlphaProfile, FieldParams, alpha_rhs, cos_alpha_from_K,
                            solve_alpha, verify_proposition)
from .errors import (BranchError, DegenerateFieldError, DerivativeUnavailableError,
                     DomainError, MarginError, NonExistenceError, ParameterizationError,
                     PoleError, SingularParallelError, StationaryPointError, TGFieldError,
                     ValidationError)
from .frame_field import (SFF, FrameInvariants, TGResidual, UnitField, frame_invariants,
                          second_fundamental_form, tg_field, tg_residual)
from .immersion import (RevolutionProfile, admissible_range, immersion_profile,
                        revolve_and_check)
from .sasaki_bundle import (BundlePath, SasakiMetric, SasakiPoint, geodesic_shoot,
                            imbed, induced_curvature, induced_metric, numeric_sff,
                            sasaki_components, surface_deviation)
from .trajectories import (Trajectory, first_integral, integrate_trajectory,
                           intrinsic_relation_residual, sphere_circle, stereographic,
                           xi_k)
from .warped_metric import (Point2, Tangent2, WarpedMetric, christoffel,
                            covariant_derivative, gauss_curvature, geodesic_integrate_2d)

__version__ = "0.1.0"


__all__ = [
    "AlphaProfile",
    "FieldParams",
    "alpha_rhs",
    "cos_alpha_from_K",
    "solve_alpha",
    "verify_proposition",
    "BranchError",
    "DegenerateFieldError",
    "DerivativeUnavailableError",
    "DomainError",
    "MarginError",
    "NonExistenceError",
    "ParameterizationError",
    "PoleError",
    "SingularParallelError",
    "StationaryPointError",
    "TGFieldError",
    "ValidationError",
    "SFF",
    "FrameInvariants",
    "TGResidual",
    "UnitField",
    "frame_invariants",
    "second_fundamental_form",
    "tg_field",
    "tg_residual",
    "RevolutionProfile",
    "admissible_range",
    "immersion_profile",
    "revolve_and_check",
    "BundlePath",
    "SasakiMetric",
    "SasakiPoint",
    "geodesic_shoot",
    "imbed",
    "induced_curvature",
    "induced_metric",
    "numeric_sff",
    "sasaki_components",
    "surface_deviation",
    "Trajectory",
    "first_integral",
    "integrate_trajectory",
    "intrinsic_relation_residual",
    "sphere_circle",
    "stereographic",
    "xi_k",
    "Point2",
    "Tangent2",
    "WarpedMetric",
    "christoffel",
    "covariant_derivative",
    "gauss_curvature",
    "geodesic_integrate_2d",
]
