"""Ollivier-Ricci curvature, Ricci flow and curvature-guided graph pooling."""

from .curvature import EdgeCurvatures, orc_all, orc_bounds, orc_edge
from .errors import NumericError, OrcPoolError, ParameterError, StateError, ValidationError
from .flow import CurvatureAdjustedAdjacency, ricci_flow, ricci_flow_step
from .graph import (Graph, build_graph, generate_dumbbell, generate_gab, generate_sbm,
                    shortest_path_distances)
from .metrics import modularity, nmi
from .pooling import (Assignment, CoarsenedGraph, PoolConfig, harden, hierarchical_pool,
                      mincut_loss, orthogonality_penalty, pool, reduce_and_connect,
                      spectral_select)
from .soft import train_soft_assignment

__version__ = "0.1.0"
