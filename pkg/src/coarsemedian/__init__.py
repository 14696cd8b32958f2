"""Coarse median geometry toolkit for finite ternary algebras."""

__version__ = "0.1.0"

from .core import (FiniteTernarySpace, Interval, IntervalTable,
                   absorption_defect, interval, interval_card_matrix,
                   iterated_median, permutation_defect)
from .errors import (BudgetError, InputError, InsufficientRangeError,
                     StructureError, UnsupportedError)
from .generators import (GraphSpec, PerturbationSpec, gen_graph_median,
                         gen_grid, gen_hypercube, gen_product,
                         gen_spiked_line, gen_tree_random, graph_spec,
                         perturb, reference_metric)
from .metrics import (MetricMatrix, QIFit, gromov_delta, hausdorff,
                      induced_metric, neighborhood, quasi_isometry_fit)
from .axioms import (CheckResult, ParamReport, bounded_valency_profile,
                     check_4pt, check_m1_m2, check_median_5pt, coarse_params,
                     m3prime_constant, quasi_geodesic_check,
                     quasi_morphism_defect, rips_complex_graph)
from .intervals import (IntervalStructure, StructureParams, fatten,
                        intervals_from_median, median_from_intervals,
                        roundtrip_interval_defect, roundtrip_median_defect,
                        structure_params)
from .rank import (CoarseCube, CubeSearchResult, GrowthProfile, RankReport,
                   cube_decomposition, cube_defect, cube_search,
                   exact_cube_rank, growth_profile, multi_median_envelope,
                   rank_report, slim_interval_delta, thin_cubes_envelope)
