"""Image classification through a learned bank of visual-concept
classifiers, plus the keyword-attribution and concept-selection analyses
built on top of it."""

__version__ = "0.1.0"

from .analysis import (
    RelatednessRanking,
    effective_weights,
    frequency_histogram,
    mean_abs_weights,
    order_by_frequency,
    order_by_relatedness,
    relatedness_rank,
    selection_curve,
    top_keywords,
    weight_vs_frequency,
)
from .bank import ConceptBank, ConceptBankTrainer, build_training_sets
from .embeddings import EmbeddingStore, load_embeddings
from .features import FeatureTable, load_features, load_labels, save_labels
from .kmeans import KMeans
from .metrics import EvaluationReport, average_precision, evaluate
from .pca import PCA
from .svm import LinearSVM, l2_normalize, l2_normalize_rows
from .synth import SynthDataset, SynthSpec, generate, write_dataset
from .target import (
    TargetClassifier,
    fit_target,
    fuse_scores,
    load_target_model,
    save_target_model,
    score_table,
    standardize_scores,
)
from .text import StopwordPolicy, normalize_name, singularize, tokenize_class_name
from .vocabulary import (
    ConceptEntry,
    ConceptVocabulary,
    RegionAnnotation,
    cluster_concepts,
    extract_concepts,
    filter_min_count,
    load_vocabulary,
    read_annotations,
    save_vocabulary,
    write_annotations,
)

__all__ = [name for name in dir() if not name.startswith("_")]
