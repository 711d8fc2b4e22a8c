"""Geodesic flows, entropies and critical exponents on periodic metric graphs."""
from .entropy import (bowen_cover_estimate, covering_entropy_estimate, critical_exponent_estimate,
                      f_entropy_estimate, geodesic_covering_entropy_estimate, window_margin)
from .estimators import GrowthRateEstimator, SlopeRegressor
from .examples import ExampleSpec, build_example, list_examples
from .exceptions import (BudgetExceeded, ConfigError, GeoflowError, GraphValidationError,
                         UncertifiedError)
from .flow import (WeightFunction, bowen_distance, d_f, d_f_dyn, k_tau_check, limit_schedule,
                   quotient_d_f, separated_set_check, weight_tail_bound)
from .hyperbolic import (BoundaryPoint, CylinderSet, boundary_gromov_product, check_line_convexity,
                         estimate_delta, gromov_product, minkowski_dimension_estimate,
                         qc_hull_contains, ray_point, shadow_contains, visual_ball_contains)
from .paths import GeodesicPath, flow_shift
from .report import EntropyReport, emit
from .runner import ExperimentConfig, run_experiment, verify_table
from .space import (CoverPatch, GraphPoint, GroupSpec, MetricGraph, SpaceDescription, VoltageAssignment,
                    covering_number, distance, expand_cover, multiply, orbit_count, packing_number,
                    sphere_and_ball_counts, systole, validate_graph)
from .symbolic import (ShiftSpace, SymbolPartition, enumerate_words, geodesic_shift,
                       local_geodesic_shift, quotient_coding, sft_entropy, word_count)

__version__ = "0.1.0"
