"""Multiple-manifold clustering via curvature-aware tangent space analysis.

The pipeline estimates a weighted tangent frame at every point, scores each
neighbor graph edge by the principal angles between frames, combines distance
and curvature kernels into a sparse similarity matrix, optionally drops
low-stationary-probability outliers, and cuts the graph with a spectral
relaxation solved by k-means on generalized eigenvectors.
"""

from .affinity import (
    SimilarityMatrix,
    as_csr,
    curvature_kernel,
    curved_level,
    curved_measure_between,
    distance_kernel,
    objective_score,
    similarity_matrix,
)
from .errors import (
    ConfigError,
    ConvergenceFailure,
    DegenerateNeighborhood,
    DuplicatePoints,
    EmptyClusterDenominator,
    InsufficientInliers,
    InvalidGeometry,
    InvalidK,
    IsolatedVertex,
    LengthMismatch,
    NotOrthonormal,
    TangentcutError,
)
from .evaluation import MetricReport, outlier_f_measure, rand_index
from .geometry import NeighborhoodGraph, PointCloud, build_knn_graph, principal_angles
from .outlier import OutlierReport, detect_outliers, filter_outliers, stationary_scores
from .pipeline import (
    RunConfig,
    export_plot_data,
    load_cloud_csv,
    run_cluster,
    run_sweep,
    save_cloud_csv,
)
from .spectral import (
    ClusterConfig,
    ClusterResult,
    SpectralEmbedding,
    cluster,
    generalized_eigvecs,
    kmeans_rows,
    laplacian,
)
from .synthetic import (
    GENERATORS,
    OUTLIER_LABEL,
    LabeledCloud,
    gen_intersecting_planes,
    gen_intersecting_spheres,
    gen_nested_spheres,
    gen_swissroll_plane_outliers,
    make_dataset,
)
from .tangent import (
    TangentFrame,
    WeightConfig,
    eigengap_dimension,
    estimate_tangent,
    local_structure_matrix,
    stack_frames,
    taylor_weights,
)

__version__ = "0.1.0"

__all__ = [
    "ClusterConfig",
    "ClusterResult",
    "ConfigError",
    "ConvergenceFailure",
    "DegenerateNeighborhood",
    "DuplicatePoints",
    "EmptyClusterDenominator",
    "GENERATORS",
    "InsufficientInliers",
    "InvalidGeometry",
    "InvalidK",
    "IsolatedVertex",
    "LabeledCloud",
    "LengthMismatch",
    "MetricReport",
    "NeighborhoodGraph",
    "NotOrthonormal",
    "OUTLIER_LABEL",
    "OutlierReport",
    "PointCloud",
    "RunConfig",
    "SimilarityMatrix",
    "SpectralEmbedding",
    "TangentFrame",
    "TangentcutError",
    "WeightConfig",
    "as_csr",
    "build_knn_graph",
    "cluster",
    "curvature_kernel",
    "curved_level",
    "curved_measure_between",
    "detect_outliers",
    "distance_kernel",
    "eigengap_dimension",
    "estimate_tangent",
    "export_plot_data",
    "filter_outliers",
    "gen_intersecting_planes",
    "gen_intersecting_spheres",
    "gen_nested_spheres",
    "gen_swissroll_plane_outliers",
    "generalized_eigvecs",
    "kmeans_rows",
    "laplacian",
    "load_cloud_csv",
    "local_structure_matrix",
    "make_dataset",
    "objective_score",
    "outlier_f_measure",
    "principal_angles",
    "rand_index",
    "run_cluster",
    "run_sweep",
    "save_cloud_csv",
    "similarity_matrix",
    "stack_frames",
    "stationary_scores",
    "taylor_weights",
]
