"""depmetrics: dependency-treebank distance metrics and corpus analyses."""

__version__ = "0.1.0"

from .metrics import MetricRecord, dd, hd, mdd, metric_record, mhd
from .stats import (
    CorrelationResult,
    Distribution,
    RegressionResult,
    entropy,
    ols_fit,
    spearman,
)
from .treebank import (
    Node,
    Sentence,
    ValencyLexicon,
    parse,
    parse_cabocha,
    parse_canonical,
    parse_conllu,
    serialize_canonical,
    validate_tree,
)

__all__ = [
    "__version__",
    "CorrelationResult",
    "Distribution",
    "MetricRecord",
    "Node",
    "RegressionResult",
    "Sentence",
    "ValencyLexicon",
    "dd",
    "entropy",
    "hd",
    "mdd",
    "metric_record",
    "mhd",
    "ols_fit",
    "parse",
    "parse_cabocha",
    "parse_canonical",
    "parse_conllu",
    "serialize_canonical",
    "spearman",
    "validate_tree",
]
