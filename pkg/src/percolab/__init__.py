"""Poisson Boolean percolation on metric-measure spaces, with quasi-isometry
transport of subcritical and supercritical phases."""

__version__ = "0.1.0"

from .boolean import (BooleanModel, ClusterReport, clusters, crossing_proxy,
                      intersection_graph)
from .errors import (DegenerateCellError, ForeignPointError, PercolabError,
                     PreconditionError, SchemaError)
from .groups import (CayleyGraph, GroupSpec, GrowthEstimate, NetGraph,
                     NetSpec, cayley_ball, epsilon_net, free_group,
                     growth_degree, heisenberg, net_graph, word_distance,
                     z2_king, z2_standard, zd_standard)
from .phase import (CurveRow, LambdaCResult, PhaseCurve, PhaseVerdict,
                    classify_phase, estimate_lambda_c, invariance_experiment,
                    percolation_probability, sweep)
from .process import (IntensitySpec, PointConfiguration, bernoulli_retention,
                      bounded, couple_monotone, homogeneous, sample_bernoulli,
                      sample_poisson, sandwich_bounded, thin)
from .qi import (BallRegion, InducedMeasureTable, MMConstants,
                 QuasiIsometryMap, identity_map, induce_measure_table,
                 induce_partition, induced_measure, induced_measure_additive,
                 mm_check, net_discretization_map, qi_check, quasi_inverse,
                 radius_backward, radius_forward, region_measure_prime,
                 rounding_map, transport_configuration, transport_model,
                 z2_generator_change)
from .spaces import (Cell, CellPartition, EuclideanPlane, HyperbolicDisk,
                     Point, WindowSpec, build_window_partition, distance,
                     measure_ball, sample_uniform_in_cell)
