"""Multi-label PPI prediction pipeline: graph-aware train/test partitions,
Erdos-Renyi analysis, protein featurization, and a GIN-based classifier.

The heavy lifting lives in the compiled extension; this package re-exports
its public surface.
"""

from ._core import (
    LABEL_NAMES,
    Dataset,
    aa_class,
    ac_features,
    analyze_er,
    connectivity_threshold,
    ctd_features,
    dataset_from_edges,
    encode_protein,
    evaluate_model,
    gnm_is_connected,
    load_dataset,
    make_partition,
    micro_f1,
    parse_interactions,
    parse_sequences,
    per_type_f1,
    save_dataset,
    train_model,
    train_skipgram,
)

__all__ = [
    "LABEL_NAMES",
    "Dataset",
    "aa_class",
    "ac_features",
    "analyze_er",
    "connectivity_threshold",
    "ctd_features",
    "dataset_from_edges",
    "encode_protein",
    "evaluate_model",
    "gnm_is_connected",
    "load_dataset",
    "make_partition",
    "micro_f1",
    "parse_interactions",
    "parse_sequences",
    "per_type_f1",
    "save_dataset",
    "train_model",
    "train_skipgram",
]

__version__ = "0.1.0"
