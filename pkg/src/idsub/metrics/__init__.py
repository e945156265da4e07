from .ngram import NgramModel, perplexity, subtoken_stream, train_ngram
from .quality import (
    MetricsReport,
    acs,
    aed,
    ast_match,
    codebleu_components,
    codebleu_simplified,
    icr,
    levenshtein,
    mean_report,
    pair_metrics,
    subtree_shapes,
    tcr,
)

__all__ = [
    "MetricsReport",
    "NgramModel",
    "acs",
    "aed",
    "ast_match",
    "codebleu_components",
    "codebleu_simplified",
    "icr",
    "levenshtein",
    "mean_report",
    "pair_metrics",
    "perplexity",
    "subtoken_stream",
    "subtree_shapes",
    "tcr",
    "train_ngram",
]
