"""Lengths of curves in metric spaces.

Partition-sum length estimates, arc-length reparametrization, polyline
shortening toward minimal curves, and sampled checks of metric and norm
axioms.
"""

from ._backend import BACKEND
from .axioms import (AxiomReport, DistanceMatrix, check_boundedness, check_comparison_bounds,
                     check_metric_axioms, check_norm_axioms, check_norm_sandwich)
from .curves import (Curve, Interval, LengthEstimate, MonotoneMap, Parametric, Partition,
                     Polyline, arclength_function, circle, compose_with_map, estimate_length,
                     graph_tcos, helix, integral_length, partition_sum, refine,
                     reparametrize_by_arclength, reparametrize_domain, segment)
from .geodesics import (GeodesicProblem, ShorteningConfig, certify_minimal, line_segment,
                        shorten_polyline, spherical_chordal_length_agreement)
from .lipschitz import (LipschitzMap, compose, diameter, estimate_lipschitz_constant,
                        image_diameter_bound_check, verify_lipschitz)
from .metric import (INF, Metric, Plane, chordal_from_geodesic, circle_point, distance,
                     great_circle_arc, norm_eval, parse_metric, project_to_plane,
                     spherical_distance)

__version__ = "0.1.0"
