"""Numerical toolkit for the space of light rays of a Lorentzian space-time."""

from .catalog import get_entry, make_einstein_static, make_minkowski, make_perturbed_minkowski
from .errors import (ChartError, ConfigError, ContinuationLostError, DimensionError, DomainError,
                     FrameError, IntegrationError, LightRayError, NonRegularCurveError,
                     NumericalError, RayError, RegularityError, SingularMetricError)
from .geometry import (CausalCharacter, CurveSample, MetricSpec, TangentVector, causal_character,
                       christoffel, cotton_tensor, geodesic_flow, parallel_transport, riemann)
from .jacobi import (JacobiField, JacobiState, TangentRayVector, Variation, change_matrix,
                     conjugate_scan, coordinate_change, propagate_jacobi, reduce_mod_gamma,
                     sky_jacobi, tn_chart, tn_chart_inverse)
from .contact import (ContactValue, SkyTangentBasis, contact_form, is_celestial,
                      sky_tangent_basis)
from .isotopy import (CausalClass, IsotopySign, Verdict, celestial_recover,
                      classify_celestial_curve, classify_profile, isotopy_from_curve,
                      reparam_invariance_check, sign_profile, vector_dual_causality)
from .rays import (LightRay, NullDirection, RayChart, ray_coords, ray_from_coords,
                   ray_from_event_direction, sky_sample)

__version__ = "0.1.0"
