"""Clique-topology toolkit: Betti curves of symmetric matrices, filter
entropy over training snapshots, and category-distance matrices."""

from .categories import (
    CategoryImageSet,
    CdMatrix,
    category_distance,
    cd_matrix,
    distinguishable_degree,
    image_max_betti,
    mbc_distribution,
)
from .errors import (
    ContractError,
    DataError,
    DimensionError,
    FormatError,
    ResourceError,
    ToolkitError,
)
from .filters import (
    CategoryFeatureSet,
    EntropySeries,
    FilterAssessment,
    Histogram,
    convolve,
    effective_set,
    ensemble_performance,
    entropy,
    entropy_variation,
    map_starting_density,
    prune_order,
    prune_rank,
    sed_distribution,
)
from .geometry import PointCloud, geometric_matrix, random_symmetric, sample_point_cloud
from .harness import Dataset, RunConfig, run_assess, run_cdmatrix
from .matrix import (
    ASCENDING,
    DEFAULT_GUARD,
    DESCENDING,
    EdgeFiltration,
    SymmetricMatrix,
    edge_order,
    symmetrize_add,
    symmetrize_max,
)
from .topology import (
    DEFAULT_BUDGET,
    BettiCurves,
    FeatureTopology,
    SimplexFiltration,
    betti_curves,
    betti_curves_of,
    feature_topology,
    flag_filtration,
    max_betti,
    starting_edge_density,
)

__version__ = "0.1.0"
