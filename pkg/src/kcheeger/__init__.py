"""Average-case k-fold Cheeger constants: spectral bounds, randomised rounding and an exhaustive oracle."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CapacityError,
    DomainError,
    KCheegerError,
    NumericalError,
    ParameterError,
    ParseError,
    SearchFailure,
    ValidationError,
)
from .graph import Graph, Partition, VertexSet, generate, read_edge_list, write_edge_list  # noqa: E402
from .metrics import bounds_report, h_k_partition  # noqa: E402
from .oracle import exact_classical_cheeger, exact_h_k, exact_h_k_worst  # noqa: E402
from .rounding import RoundingConfig, best_partition_search, probability_table  # noqa: E402
from .spectral import build_laplacian, eigendecompose  # noqa: E402

__all__ = [
    "__version__",
    "CapacityError", "DomainError", "KCheegerError", "NumericalError", "ParameterError",
    "ParseError", "SearchFailure", "ValidationError",
    "Graph", "Partition", "VertexSet", "generate", "read_edge_list", "write_edge_list",
    "bounds_report", "h_k_partition",
    "exact_classical_cheeger", "exact_h_k", "exact_h_k_worst",
    "RoundingConfig", "best_partition_search", "probability_table",
    "build_laplacian", "eigendecompose",
]
