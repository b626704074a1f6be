"""NeuRN preprocessing and layer-sequence similarity for neural architectures."""

__version__ = "0.1.0"
# bumped whenever the bundled alphabet, spec files or accuracy table change
FIXTURE_VERSION = "2024.1"

from .align import ScoreParams, nw_matrix, nw_score, pairwise_matrix, similarity_index, traceback
from .archspec import ArchSpec, LayerAlphabet, default_alphabet, fixture_specs, parse_alphabet, parse_spec
from .neurn import NeurnConfig, patch_stats, transform, transform_batch
from .patterns import PatternConfig, pattern_matrix, pattern_similarity, top_common_patterns
from .simmat import SimilarityMatrix, cosine, functional_similarity, mean_offdiagonal

__all__ = [
    "ArchSpec", "LayerAlphabet", "NeurnConfig", "PatternConfig", "ScoreParams", "SimilarityMatrix",
    "cosine", "default_alphabet", "fixture_specs", "functional_similarity", "mean_offdiagonal",
    "nw_matrix", "nw_score", "pairwise_matrix", "parse_alphabet", "parse_spec", "patch_stats",
    "pattern_matrix", "pattern_similarity", "similarity_index", "top_common_patterns", "traceback",
    "transform", "transform_batch",
]
