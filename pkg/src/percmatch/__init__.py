"""Seeded percolation graph matching on scale-free random graphs."""
from .analysis import (NoTransitionError, RunMetrics, TheoryParams, boundary_edges,
                       critical_seed_count, detect_transition, in_percolation_regime,
                       matchable_count, p1_seed_exponent)
from .ddm import (DDMResult, SliceAssignment, SlicePlan, StagePlan, assign_slices,
                  build_slice_plan, build_stage_plan, group_uniform_seeds, run_ddm)
from .graph import (Graph, ObservedPair, ParameterError, WeightedGraphSpec, generate_chung_lu,
                    generate_gnp, sample_observed_pair)
from .io import DataError, load_cache, load_edge_list, save_cache, save_edge_list
from .pgm import (MatchState, SeedError, SeedPolicy, VertexPair, classify_matches, run_pgm,
                  select_seeds)
from .powerlaw import EstimationError, estimate_power_law_exponent

__version__ = "0.1.0"
