"""Topological distances and inference for weighted brain networks."""

from .distances import (
    DistanceValue,
    Feature,
    Method,
    bottleneck_distance,
    compute_distance,
    gh_distance,
    ks_distance,
    merged_grid,
    network_bottleneck,
    single_linkage_matrix,
)
from .errors import NumericalError, TopoDistError
from .filtration import (
    BettiCurve,
    Filtration,
    PersistenceDiagram,
    UnionFind,
    betti_curve,
    binary_network,
    maximal_filtration,
    persistence_diagram,
)
from .inference import (
    PermutationScheme,
    TestResult,
    asymptotic_ks_pvalue,
    correlation_builder,
    exact_ks_pvalue,
    ks_pvalue,
    ks_tail_probability,
    ks_test,
    permutation_test,
    permutation_test_many,
)
from .network import (
    DataMatrix,
    WeightTransform,
    WeightedNetwork,
    check_metric,
    correlation_matrix,
    correlation_network,
    log_euclidean_distance,
    metric_preserving,
    norm_distance,
    standardize,
)
from .simulate import ModularConfig, generate_modular, run_comparison
from .twins import (
    TwinPair,
    cosine_series_eval,
    cosine_series_fit,
    falconer_hi,
    heritability_ks,
    twin_group_correlation,
)

__version__ = "0.1.0"
