"""Determinant (volume) maximization: greedy, local search, composable coresets."""

from . import _backend
from .coreset import (
    CompositionReport,
    CoresetFamily,
    Mapper,
    compose,
    map_part,
    partition_dataset,
    verify_composition,
)
from .diagnostics import (
    OptimalityReport,
    composition_bound,
    greedy_offline_bound,
    measure_local_optimality,
    tightness_instance,
    verify_offline_approximation,
)
from .geometry import (
    RANK_TOL,
    DimensionMismatchError,
    LogVolume,
    OrthoBasis,
    PointSet,
    RankDeficientError,
    extend_basis,
    gram_matrix,
    log_volume,
    residual,
)
from .solvers import (
    EnumerationBudgetError,
    Solution,
    SwapGain,
    brute_force_maxvol,
    greedy,
    local_search,
    swap_volume,
)

__version__ = "0.1.0"
KERNELS = _backend.NAME
