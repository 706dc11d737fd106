"""Explainable clustering by axis-aligned decision trees.

Trees are fitted to minimize the total graph conductance of their leaves
against a reference-derived or k-nearest-neighbor graph; CART and the
centroid-based mistake minimizers are provided as baselines under the same
cut-scoring interface.
"""

from .data import (
    CostReport,
    DataError,
    Dataset,
    ReferenceClustering,
    costs,
    ingest,
    kmeans_fit,
    kmedians_cost,
    read_labels,
    relabel_contiguous,
    synth,
)
from .graph import (
    CliqueClusterGraph,
    CutMeasures,
    GraphError,
    SparseGraph,
    build_knn_graph,
    cut_measures,
    sweep,
)
from .cuts import CoordinateCut, ScoredCut, best_cut, thresholds
from .tree import (
    BuildInfo,
    ExplainTree,
    InternalNode,
    LeafNode,
    TreeError,
    assign,
    build_tree,
    from_json,
    to_json,
)
from .algorithms import (
    cart_fit,
    emn_fit,
    imm_fit,
    imm_fit_with_info,
    spex_fit,
)
from .metrics import AgreementReport, MetricError, agreement, ami, ari, tree_objective
from .theory import (
    BoundReport,
    NonUniformInstance,
    PriceReport,
    clique_bound_report,
    equivalence_suite,
    nonuniform_sparsity,
    price_check,
    run_suites,
    conductance_bound_report,
)

__version__ = "0.1.0"

__all__ = [
    "AgreementReport", "BoundReport", "BuildInfo", "CliqueClusterGraph",
    "CoordinateCut", "CostReport", "CutMeasures", "DataError", "Dataset",
    "ExplainTree", "GraphError", "InternalNode", "LeafNode", "MetricError",
    "NonUniformInstance", "PriceReport", "ReferenceClustering", "ScoredCut",
    "SparseGraph", "TreeError", "agreement", "ami", "ari", "assign",
    "best_cut", "build_knn_graph", "build_tree", "cart_fit",
    "clique_bound_report", "costs", "cut_measures", "emn_fit",
    "equivalence_suite", "from_json", "imm_fit", "imm_fit_with_info",
    "ingest", "kmeans_fit", "kmedians_cost", "nonuniform_sparsity",
    "price_check", "read_labels", "relabel_contiguous", "run_suites",
    "spex_fit", "sweep", "synth", "conductance_bound_report", "thresholds",
    "to_json", "tree_objective",
]
