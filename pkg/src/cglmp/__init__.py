"""Bipartite CGLMP Bell tests on qudits assembled from entangled qubit pairs."""

from .engine import (
    BellReport,
    ProbabilityTable,
    bell_expression,
    bell_operator_trace,
    joint_table_dense,
    joint_table_factorized,
    lrt_max,
    scan_dimensions,
)
from .qstate import (
    DensityOperator,
    NoiseModel,
    PairState,
    StateVector,
    bell_pair,
    max_entangled,
    werner_from_fidelity,
)
from .witness import schmidt_lower_bound, witness_sweep

__version__ = "0.1.0"
