"""Exact signed optimal transport on toroidal pixel grids under zero-sum noise."""

from .measures import (
    DiscreteMeasure,
    SignedGridMeasure,
    SplitPair,
    jordan_decompose,
    l2_distance,
    mainini_split,
    normalize_pair,
    to_support,
)
from .metric import TORUS_DIAMETER, CostMatrix, cost_matrix, toroidal_distance
from .solver import (
    SignedDistanceResult,
    TransportPlan,
    check_lp_duality,
    check_w1_duality,
    signed_wasserstein,
    solve_transport,
)
from .oracle import lp_oracle

__version__ = "0.1.0"
