"""Contrast-based variational segmentation from point annotations.

From a feature map and sparse in-target / out-of-target point
annotations, the package builds cosine-similarity correlation maps,
contrast maps, and contrast mean maps, segments them with an edge-aware
convex Chan-Vese solver driven by additive operator splitting, and
aggregates the per-point results into one supervision field.  It also
provides classical distance-constrained selective-segmentation
baselines, the partial cross-entropy / weighted-KL supervision losses,
evaluation metrics, a deterministic synthetic-instance generator, and a
command-line front end.
"""

from .correlation import (ContrastSet, build_contrast_set, contrast_map,
                          cosine_similarity_map, extract_feature)
from .errors import (FormatError, GenerationError, InternalError,
                     ValidationError)
from .estimators import CVMSegmenter, SelectiveSegmenter
from .fields import (as_binary_mask, as_feature_map, as_scalar_field,
                     field_stats, normalize_minmax, threshold)
from .io import (Annotations, read_annotations, read_array, read_mask_png,
                 write_annotations, write_array, write_heatmap_png,
                 write_mask_png, write_metrics_report)
from .metrics import (ConfusionCounts, accuracy, auc, confusion, dice,
                      evaluate, kappa)
from .selective import (DistanceConstraint, euclidean_distance_map,
                        geodesic_distance_map, solve_selective)
from .supervision import (SparseLabels, entropy_weights,
                          labels_from_annotations, partial_cross_entropy,
                          total_loss, weighted_kl)
from .synth import SynthInstance, SynthSpec, generate, oracle_best_mask
from .variational import (SolveReport, SolverConfig, binarize_supervision,
                          cvm_energy, edge_map, region_means, run_cvm,
                          solve_cvm)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Annotations", "ContrastSet", "ConfusionCounts", "CVMSegmenter",
    "DistanceConstraint", "FormatError", "GenerationError", "InternalError",
    "SelectiveSegmenter", "SolveReport", "SolverConfig", "SparseLabels",
    "SynthInstance", "SynthSpec", "ValidationError",
    "accuracy", "as_binary_mask", "as_feature_map", "as_scalar_field", "auc",
    "binarize_supervision", "build_contrast_set", "confusion", "contrast_map",
    "cosine_similarity_map", "cvm_energy", "dice", "edge_map",
    "entropy_weights", "euclidean_distance_map", "evaluate", "extract_feature",
    "field_stats", "generate", "geodesic_distance_map", "kappa",
    "labels_from_annotations", "normalize_minmax", "oracle_best_mask",
    "partial_cross_entropy", "read_annotations", "read_array", "read_mask_png",
    "region_means", "run_cvm", "solve_cvm", "solve_selective", "threshold",
    "total_loss", "weighted_kl", "write_annotations", "write_array",
    "write_heatmap_png", "write_mask_png", "write_metrics_report",
]
